#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "edgeless/attributes.hpp"
#include "edgeless/graph.hpp"
#include "edgeless/matrix.hpp"
#include "edgeless/rng.hpp"

namespace edgeless {

/// Candidate edges with sigmoid link scores and binary ground truth.
struct ScoredPairs {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::vector<double> scores;
  std::vector<int> labels;
};

/// sigmoid(z_u . z_v) per requested pair; never materializes Z Z^T.
inline std::vector<double> score_links(const Matrix& z,
                                       const std::vector<std::pair<NodeId, NodeId>>& pairs) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (auto [u, v] : pairs) {
    if (u >= z.rows() || v >= z.rows()) throw std::invalid_argument("score_links: id out of range");
    double dot = 0.0;
    const double* zu = z.row(u);
    const double* zv = z.row(v);
    for (std::size_t t = 0; t < z.cols(); ++t) dot += zu[t] * zv[t];
    scores.push_back(dot >= 0.0 ? 1.0 / (1.0 + std::exp(-dot))
                                : std::exp(dot) / (1.0 + std::exp(dot)));
  }
  return scores;
}

/// Mean precision at each positive's rank, scores descending, ties kept in
/// input order.
inline double average_precision(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("average_precision: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t positives_seen = 0;
  double sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 1) {
      ++positives_seen;
      sum += static_cast<double>(positives_seen) / static_cast<double>(rank + 1);
    }
  }
  if (positives_seen == 0) throw std::invalid_argument("average_precision: no positive labels");
  return sum / static_cast<double>(positives_seen);
}

/// Mann-Whitney AUC: probability a random positive outranks a random
/// negative, ties counted one half.
inline double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // rank-sum with midranks for ties
  std::vector<double> rank(scores.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }
  double pos_rank_sum = 0.0;
  std::size_t np = 0;
  for (std::size_t t = 0; t < labels.size(); ++t)
    if (labels[t] == 1) {
      pos_rank_sum += rank[t];
      ++np;
    }
  const std::size_t nn = labels.size() - np;
  if (np == 0 || nn == 0) throw std::invalid_argument("auc: need both classes");
  const double u = pos_rank_sum - static_cast<double>(np) * (np + 1) / 2.0;
  return u / (static_cast<double>(np) * static_cast<double>(nn));
}

/// Positives are the hidden edges; negatives an equal count of seeded
/// non-edges with at least one edgeless endpoint, no duplicates. When
/// `partner_pool` is given, the other negative endpoint is drawn from it
/// instead of from all nodes.
inline ScoredPairs build_lp_eval_set(const std::vector<std::pair<NodeId, NodeId>>& hidden_edges,
                                     const Graph& g_full, const std::vector<NodeId>& edgeless_ids,
                                     std::uint64_t seed,
                                     const std::vector<NodeId>* partner_pool = nullptr) {
  if (hidden_edges.empty()) throw std::invalid_argument("build_lp_eval_set: no hidden edges");
  if (edgeless_ids.empty()) throw std::invalid_argument("build_lp_eval_set: no edgeless nodes");
  ScoredPairs out;
  for (auto [u, v] : hidden_edges) {
    out.pairs.emplace_back(u, v);
    out.labels.push_back(1);
  }
  Rng rng(seed);
  std::set<std::pair<NodeId, NodeId>> used;
  const std::size_t n = g_full.num_nodes();
  const std::size_t max_tries = 1000 * hidden_edges.size() + 100000;
  std::size_t tries = 0;
  while (used.size() < hidden_edges.size()) {
    if (++tries > max_tries) throw std::runtime_error("build_lp_eval_set: insufficient non-edges");
    NodeId u = edgeless_ids[rng.index(edgeless_ids.size())];
    NodeId v = partner_pool ? (*partner_pool)[rng.index(partner_pool->size())]
                            : static_cast<NodeId>(rng.index(n));
    if (u == v || g_full.has_edge(u, v)) continue;
    auto key = std::minmax(u, v);
    if (!used.insert({key.first, key.second}).second) continue;
    out.pairs.emplace_back(u, v);
    out.labels.push_back(0);
  }
  return out;
}

/// (macro_f1, micro_f1) with labels in 0..C-1. Macro averages per-class F1
/// over classes present in the truth; micro equals accuracy here.
inline std::pair<double, double> f1_scores(const std::vector<int>& truth,
                                           const std::vector<int>& pred, int num_classes) {
  if (truth.size() != pred.size()) throw std::invalid_argument("f1_scores: length mismatch");
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == pred[i]) {
      ++correct;
      ++tp[truth[i]];
    } else {
      ++fp[pred[i]];
      ++fn[truth[i]];
    }
  }
  double macro = 0.0;
  std::size_t classes_in_truth = 0;
  for (int c = 0; c < num_classes; ++c) {
    if (tp[c] + fn[c] == 0) continue;  // class absent from truth
    ++classes_in_truth;
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    macro += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp[c]) / denom;
  }
  macro /= static_cast<double>(classes_in_truth);
  const double micro = static_cast<double>(correct) / static_cast<double>(truth.size());
  return {macro, micro};
}

/// Multinomial logistic regression: softmax with intercept, L2 penalty on
/// the weights, full-batch gradient descent with adaptive step until the
/// gradient norm drops below 1e-6 or the iteration cap.
class LogisticClassifier {
public:
  LogisticClassifier(int num_classes, double reg = 1e-4, std::size_t max_iters = 2000)
      : num_classes_(num_classes), reg_(reg), max_iters_(max_iters) {
    if (num_classes < 2) throw std::invalid_argument("LogisticClassifier: need >= 2 classes");
  }

  void fit(const Matrix& x, const std::vector<int>& y) {
    const std::size_t n = x.rows(), d = x.cols();
    if (y.size() != n) throw std::invalid_argument("fit: label count mismatch");
    w_ = Matrix(d + 1, num_classes_);  // last row is the intercept
    double lr = 1.0;
    double prev_loss = loss_and_grad(x, y, nullptr);
    Matrix grad(d + 1, num_classes_);
    for (std::size_t it = 0; it < max_iters_; ++it) {
      grad.fill(0.0);
      loss_and_grad(x, y, &grad);
      double gnorm = 0.0;
      for (double g : grad.data()) gnorm += g * g;
      if (std::sqrt(gnorm) < 1e-6) break;
      // backtracking on the full-batch loss
      Matrix saved = w_;
      while (true) {
        for (std::size_t t = 0; t < w_.size(); ++t)
          w_.data()[t] = saved.data()[t] - lr * grad.data()[t];
        const double cur = loss_and_grad(x, y, nullptr);
        if (cur <= prev_loss || lr < 1e-12) {
          prev_loss = cur;
          lr *= 1.1;
          break;
        }
        lr *= 0.5;
      }
    }
  }

  std::vector<int> predict(const Matrix& x) const {
    std::vector<int> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      int best = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < num_classes_; ++c) {
        double v = w_(x.cols(), c);
        for (std::size_t t = 0; t < x.cols(); ++t) v += x(i, t) * w_(t, c);
        if (v > best_v) {
          best_v = v;
          best = c;
        }
      }
      out[i] = best;
    }
    return out;
  }

private:
  double loss_and_grad(const Matrix& x, const std::vector<int>& y, Matrix* grad) const {
    const std::size_t n = x.rows(), d = x.cols();
    double loss = 0.0;
    std::vector<double> logits(num_classes_);
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < num_classes_; ++c) {
        double v = w_(d, c);
        for (std::size_t t = 0; t < d; ++t) v += x(i, t) * w_(t, c);
        logits[c] = v;
        mx = std::max(mx, v);
      }
      double z = 0.0;
      for (int c = 0; c < num_classes_; ++c) z += std::exp(logits[c] - mx);
      loss += -(logits[y[i]] - mx - std::log(z)) / static_cast<double>(n);
      if (grad) {
        for (int c = 0; c < num_classes_; ++c) {
          const double p = std::exp(logits[c] - mx) / z;
          const double e = (p - (y[i] == c ? 1.0 : 0.0)) / static_cast<double>(n);
          for (std::size_t t = 0; t < d; ++t) (*grad)(t, c) += e * x(i, t);
          (*grad)(d, c) += e;
        }
      }
    }
    for (std::size_t t = 0; t < d; ++t)
      for (int c = 0; c < num_classes_; ++c) {
        loss += 0.5 * reg_ * w_(t, c) * w_(t, c);
        if (grad) (*grad)(t, c) += reg_ * w_(t, c);
      }
    return loss;
  }

  int num_classes_;
  double reg_;
  std::size_t max_iters_;
  Matrix w_;
};

inline std::pair<double, double> logistic_classify(const Matrix& train_z,
                                                   const std::vector<int>& train_labels,
                                                   const Matrix& test_z,
                                                   const std::vector<int>& test_labels,
                                                   int num_classes, double reg = 1e-4) {
  LogisticClassifier clf(num_classes, reg);
  clf.fit(train_z, train_labels);
  return f1_scores(test_labels, clf.predict(test_z), num_classes);
}

/// Normalized mutual information, arithmetic-mean normalization; 0 when
/// either partition is constant.
inline double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("nmi: length mismatch");
  const int ca = *std::max_element(a.begin(), a.end()) + 1;
  const int cb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<std::vector<std::size_t>> cont(ca, std::vector<std::size_t>(cb, 0));
  std::vector<std::size_t> ma(ca, 0), mb(cb, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++cont[a[i]][b[i]];
    ++ma[a[i]];
    ++mb[b[i]];
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (int i = 0; i < ca; ++i)
    for (int j = 0; j < cb; ++j)
      if (cont[i][j] > 0) {
        const double pij = cont[i][j] / n;
        mi += pij * std::log(pij * n * n / (static_cast<double>(ma[i]) * static_cast<double>(mb[j])));
      }
  for (int i = 0; i < ca; ++i)
    if (ma[i] > 0) ha -= (ma[i] / n) * std::log(ma[i] / n);
  for (int j = 0; j < cb; ++j)
    if (mb[j] > 0) hb -= (mb[j] / n) * std::log(mb[j] / n);
  const double denom = 0.5 * (ha + hb);
  return denom <= 0.0 ? 0.0 : mi / denom;
}

/// Lloyd's k-means with k-means++ seeding; best inertia over `restarts`
/// seeded runs, ties to the lowest restart index.
class KMeans {
public:
  KMeans(std::size_t k, std::size_t max_iters = 100) : k_(k), max_iters_(max_iters) {
    if (k < 2) throw std::invalid_argument("KMeans: need k >= 2");
  }

  std::vector<int> cluster(const Matrix& points, std::uint64_t seed, std::size_t restarts = 5,
                           double* inertia_out = nullptr) const {
    check_distinct(points);
    std::vector<int> best_assign;
    double best_inertia = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
      Rng rng(seed + r);
      auto [assign, inertia] = run_once(points, rng);
      if (inertia < best_inertia) {
        best_inertia = inertia;
        best_assign = std::move(assign);
      }
    }
    if (inertia_out) *inertia_out = best_inertia;
    return best_assign;
  }

private:
  void check_distinct(const Matrix& points) const {
    std::set<std::vector<double>> distinct;
    for (std::size_t i = 0; i < points.rows(); ++i) {
      distinct.insert(std::vector<double>(points.row(i), points.row(i) + points.cols()));
      if (distinct.size() >= k_) return;
    }
    throw std::invalid_argument("KMeans: fewer distinct points than clusters");
  }

  static double sqdist(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double diff = a[t] - b[t];
      s += diff * diff;
    }
    return s;
  }

  std::pair<std::vector<int>, double> run_once(const Matrix& points, Rng& rng) const {
    const std::size_t n = points.rows(), d = points.cols();
    // k-means++ seeding
    Matrix centers(k_, d);
    std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
    std::size_t first = rng.index(n);
    for (std::size_t t = 0; t < d; ++t) centers(0, t) = points(first, t);
    for (std::size_t c = 1; c < k_; ++c) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dist2[i] = std::min(dist2[i], sqdist(points.row(i), centers.row(c - 1), d));
        total += dist2[i];
      }
      std::size_t pick = 0;
      if (total > 0.0) {
        double target = rng.uniform() * total, acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          acc += dist2[i];
          if (acc >= target) {
            pick = i;
            break;
          }
        }
      } else {
        pick = rng.index(n);
      }
      for (std::size_t t = 0; t < d; ++t) centers(c, t) = points(pick, t);
    }

    std::vector<int> assign(n, -1);
    double inertia = 0.0;
    for (std::size_t it = 0; it < max_iters_; ++it) {
      bool changed = false;
      inertia = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        int best = 0;
        double best_d = sqdist(points.row(i), centers.row(0), d);
        for (std::size_t c = 1; c < k_; ++c) {
          const double dd = sqdist(points.row(i), centers.row(c), d);
          if (dd < best_d) {
            best_d = dd;
            best = static_cast<int>(c);
          }
        }
        if (assign[i] != best) {
          assign[i] = best;
          changed = true;
        }
        inertia += best_d;
      }
      if (!changed) break;
      centers.fill(0.0);
      std::vector<std::size_t> counts(k_, 0);
      for (std::size_t i = 0; i < n; ++i) {
        ++counts[assign[i]];
        for (std::size_t t = 0; t < d; ++t) centers(assign[i], t) += points(i, t);
      }
      for (std::size_t c = 0; c < k_; ++c)
        if (counts[c] > 0)
          for (std::size_t t = 0; t < d; ++t) centers(c, t) /= static_cast<double>(counts[c]);
      for (std::size_t c = 0; c < k_; ++c) {
        if (counts[c] > 0) continue;
        // empty cluster: seize the point farthest from its current center
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dd = sqdist(points.row(i), centers.row(assign[i]), d);
          if (dd > far_d) {
            far_d = dd;
            far = i;
          }
        }
        for (std::size_t t = 0; t < d; ++t) centers(c, t) = points(far, t);
      }
    }
    return {std::move(assign), inertia};
  }

  std::size_t k_;
  std::size_t max_iters_;
};

/// Cluster all rows of Z, then score NMI against true labels on the edgeless
/// subset only.
inline double kmeans_nmi(const Matrix& z_all, std::size_t num_clusters,
                         const std::vector<NodeId>& edgeless_ids,
                         const std::vector<int>& true_labels, std::uint64_t seed,
                         std::size_t restarts = 5) {
  KMeans km(num_clusters);
  auto assign = km.cluster(z_all, seed, restarts);
  std::vector<int> pred, truth;
  for (std::size_t i = 0; i < edgeless_ids.size(); ++i) {
    pred.push_back(assign[edgeless_ids[i]]);
    truth.push_back(true_labels[i]);
  }
  return nmi(pred, truth);
}

/// Att-Only baseline: raw attribute rows stand in for embeddings.
inline Matrix att_only_embeddings(const AttributeMatrix& x) { return x.to_dense(); }

}  // namespace edgeless
