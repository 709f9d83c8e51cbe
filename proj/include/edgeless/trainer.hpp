#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgeless/graph.hpp"
#include "edgeless/loss.hpp"
#include "edgeless/model.hpp"
#include "edgeless/sampling.hpp"

namespace edgeless {

struct TrainConfig {
  double learning_rate = 5e-4;
  double weight_decay = 5e-4;
  std::size_t max_epochs = 500;
  std::size_t minibatch_size = 512;
  std::size_t patience = 30;
  LossParams loss_params;
  std::uint64_t seed = 0;

  void validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
    loss_params.validate();
  }
};

/// Adam moments, one pair of matrices per parameter matrix.
struct AdamState {
  std::vector<std::vector<Matrix>> first_moment;
  std::vector<std::vector<Matrix>> second_moment;
  std::size_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState like(const ModelParams& p) {
    AdamState s;
    s.first_moment = zero_grads_like(p);
    s.second_moment = zero_grads_like(p);
    return s;
  }
};

/// One bias-corrected Adam update. Weight decay is folded into the gradient
/// before the moment updates.
inline void adam_step(ModelParams& params, const ParamGrads& grads, AdamState& state, double lr,
                      double weight_decay) {
  ++state.step_count;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (std::size_t w = 0; w < params.layers[l].size(); ++w) {
      auto& wd = params.layers[l][w].data();
      const auto& gd = grads[l][w].data();
      auto& md = state.first_moment[l][w].data();
      auto& vd = state.second_moment[l][w].data();
      for (std::size_t t = 0; t < wd.size(); ++t) {
        if (!std::isfinite(gd[t])) throw std::runtime_error("adam_step: non-finite gradient");
        const double g = gd[t] + weight_decay * wd[t];
        md[t] = state.beta1 * md[t] + (1.0 - state.beta1) * g;
        vd[t] = state.beta2 * vd[t] + (1.0 - state.beta2) * g * g;
        wd[t] -= lr * (md[t] / c1) / (std::sqrt(vd[t] / c2) + state.epsilon);
      }
    }
  }
}

struct EpochRecord {
  double train_loss = 0.0;
  double val_ap = std::nan("");
};

using ValProbe = std::function<double(const ModelParams&)>;

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Training loop: per epoch, one quadruplet batch sampled from g_train and
/// consumed in contiguous mini-batches; each step runs a full-graph forward
/// over g_knn. With a validation probe, returns the best-AP epoch's
/// parameters and stops after `patience` epochs without improvement.
inline TrainResult train(const TrainConfig& config, ModelParams params, const Graph& g_train,
                         const Graph& g_knn, const AttributeMatrix& x,
                         const ValProbe& val_probe = nullptr,
                         std::ostream* progress = nullptr) {
  config.validate();
  if (g_knn.num_nodes() != x.num_nodes() || g_train.num_nodes() != x.num_nodes())
    throw std::invalid_argument("train: graph/attribute size mismatch");

  TrainResult result;
  result.params = params;
  ModelParams best = params;
  double best_ap = -1.0;
  std::size_t stale = 0;

  AdamState adam = AdamState::like(params);
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    auto batch = sample_epoch_batch(g_train, detail::mix_seed(config.seed, epoch));
    double epoch_loss = 0.0;
    for (const auto& mb : chunk_batch(batch, config.minibatch_size)) {
      Matrix z = forward(params, g_knn, x);
      auto [loss, grad_z] = loss_and_embedding_grad(z, mb, config.loss_params);
      if (!std::isfinite(loss))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
      ParamGrads grads = backward(params, g_knn, x, grad_z);
      adam_step(params, grads, adam, config.learning_rate, config.weight_decay);
      epoch_loss += loss * static_cast<double>(mb.size());
    }
    EpochRecord rec;
    rec.train_loss = epoch_loss / static_cast<double>(batch.size());

    if (val_probe) {
      rec.val_ap = val_probe(params);
      if (rec.val_ap > best_ap) {
        best_ap = rec.val_ap;
        best = params;
        stale = 0;
      } else if (++stale >= config.patience) {
        result.history.push_back(rec);
        break;
      }
    }
    result.history.push_back(rec);
    if (progress)
      *progress << "epoch " << epoch << " loss " << rec.train_loss << " val_ap " << rec.val_ap
                << "\n";
  }
  result.params = val_probe && best_ap >= 0.0 ? best : params;
  return result;
}

/// End-to-end gradient check: compares backward() composed with the loss
/// gradient against central finite differences over every weight entry on a
/// random small instance. Returns the worst relative error.
inline double check_gradients(GnnVariant variant, std::size_t n, std::size_t f, std::size_t d,
                              std::size_t num_layers, const LossParams& lp, std::uint64_t seed) {
  Rng rng(seed);
  // random connected-ish graph: a ring plus a few chords
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  for (std::size_t c = 0; c < n / 2; ++c)
    edges.emplace_back(static_cast<NodeId>(rng.index(n)), static_cast<NodeId>(rng.index(n)));
  Graph g = Graph::from_edges(edges, n);

  AttributeMatrix x(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    SparseRow row;
    for (std::uint32_t t = 0; t < f; ++t) row.emplace_back(t, rng.uniform(-1.0, 1.0));
    x.set_row(i, std::move(row));
  }

  ModelParams params = init_params(variant, f, d, rng.next_u64(), num_layers);
  // biases start at zero, which can park an embedding exactly at the origin
  // where the cosine is not differentiable; check at a generic point instead
  params.for_each([&](Matrix& m) {
    if (m.rows() == 1)
      for (double& v : m.data()) v = rng.uniform(-0.1, 0.1);
  });
  QuadrupletBatch batch = sample_epoch_batch(g, rng.next_u64());

  auto eval_loss = [&](const ModelParams& p) {
    Matrix z = forward(p, g, x);
    return loss_and_embedding_grad(z, batch, lp).first;
  };

  Matrix z = forward(params, g, x);
  auto [loss, grad_z] = loss_and_embedding_grad(z, batch, lp);
  ParamGrads analytic = backward(params, g, x, grad_z);

  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    for (std::size_t w = 0; w < params.layers[l].size(); ++w) {
      for (std::size_t t = 0; t < params.layers[l][w].size(); ++t) {
        ModelParams pp = params;
        pp.layers[l][w].data()[t] += h;
        const double up = eval_loss(pp);
        pp.layers[l][w].data()[t] -= 2 * h;
        const double dn = eval_loss(pp);
        const double fd = (up - dn) / (2 * h);
        const double a = analytic[l][w].data()[t];
        const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-6});
        worst = std::max(worst, rel);
      }
    }
  }
  return worst;
}

}  // namespace edgeless
