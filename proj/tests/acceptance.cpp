// Acceptance gate: eight criteria, one pass/fail line each. Tolerances and
// runtime budgets are pinned as constants next to each criterion.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <malloc.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "edgeless/bench.hpp"
#include "edgeless/edgeless.hpp"

using namespace edgeless;
namespace fs = std::filesystem;

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::ostringstream line;
  line << "[criterion " << id << "] " << name << ": " << (ok ? "PASS" : "FAIL");
  if (!detail.empty()) line << " (" << detail << ")";
  std::cout << line.str() << std::endl;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

// ---- independent definitional oracles for criterion 2 ----

double ap_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (labels[order[r]] != 1) continue;
    ++pos;
    std::size_t hits = 0;
    for (std::size_t q = 0; q <= r; ++q)
      if (labels[order[q]] == 1) ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  return sum / static_cast<double>(pos);
}

double auc_oracle(const std::vector<double>& scores, const std::vector<int>& labels) {
  double wins = 0.0;
  std::size_t np = 0, nn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) ++np;
    else ++nn;
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] == 1) continue;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / (static_cast<double>(np) * static_cast<double>(nn));
}

double nmi_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pj;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1.0 / n;
    pb[b[i]] += 1.0 / n;
    pj[{a[i], b[i]}] += 1.0 / n;
  }
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (auto& [k, p] : pj) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  for (auto& [k, p] : pa) ha -= p * std::log(p);
  for (auto& [k, p] : pb) hb -= p * std::log(p);
  const double denom = 0.5 * (ha + hb);
  return denom <= 0.0 ? 0.0 : mi / denom;
}

std::pair<double, double> f1_oracle(const std::vector<int>& truth, const std::vector<int>& pred,
                                    int classes) {
  double macro = 0.0;
  int present = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (truth[i] == pred[i]) ++correct;
  for (int c = 0; c < classes; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == c && pred[i] == c) ++tp;
      if (truth[i] != c && pred[i] == c) ++fp;
      if (truth[i] == c && pred[i] != c) ++fn;
    }
    if (tp + fn == 0) continue;
    ++present;
    macro += tp == 0 && fp + fn == 0 ? 0.0
                                     : 2.0 * static_cast<double>(tp) /
                                           static_cast<double>(2 * tp + fp + fn);
  }
  return {macro / present, static_cast<double>(correct) / static_cast<double>(truth.size())};
}

double jaccard_oracle(const Graph& g, NodeId u, NodeId v) {
  std::set<NodeId> nu(g.neighbors(u).begin(), g.neighbors(u).end());
  std::set<NodeId> nv(g.neighbors(v).begin(), g.neighbors(v).end());
  std::set<NodeId> un = nu, in;
  un.insert(nv.begin(), nv.end());
  for (NodeId x : nu)
    if (nv.count(x)) in.insert(x);
  return un.empty() ? 0.0 : static_cast<double>(in.size()) / static_cast<double>(un.size());
}

std::vector<std::vector<double>> floyd_warshall(const Graph& g) {
  const std::size_t n = g.num_nodes();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (auto [u, v] : g.edges()) d[u][v] = d[v][u] = 1.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

Graph random_graph(std::size_t n, double p, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.emplace_back(u, v);
  return Graph::from_edges(edges, n);
}

// ---- synthetic benchmark shared by criteria 4, 7, 8 ----

DatasetBundle make_bundle(const SyntheticDataset& ds, int num_classes) {
  DatasetBundle b;
  b.graph = ds.graph;
  b.attributes = ds.attributes;
  b.labels = ds.labels;
  b.num_classes = num_classes;
  b.names.resize(ds.graph.num_nodes());
  for (std::size_t i = 0; i < b.names.size(); ++i) b.names[i] = std::to_string(i);
  return b;
}

RunConfig benchmark_config(double alpha, double beta, std::uint64_t seed) {
  RunConfig cfg;
  cfg.k = 3;
  cfg.variant = "sage";
  cfg.dim = 32;
  cfg.seed = seed;
  cfg.eval_seed = seed;
  cfg.train.seed = seed;
  cfg.train.learning_rate = 5e-2;
  cfg.train.max_epochs = 300;
  cfg.train.patience = 25;
  cfg.train.minibatch_size = 512;
  cfg.train.loss_params.alpha = alpha;
  cfg.train.loss_params.beta = beta;
  return cfg;
}

struct BenchmarkRun {
  std::vector<MetricEntry> model_metrics;
  std::vector<MetricEntry> att_only_metrics;
  std::vector<EpochRecord> history;
};

BenchmarkRun run_benchmark(const DatasetBundle& bundle, const RunConfig& cfg,
                           const std::vector<std::string>& tasks) {
  BenchmarkRun out;
  TrainedPipeline tp = run_training(cfg, bundle);
  InferenceOutput inf = run_inference(cfg, tp.result.params, bundle, tp.split);
  out.model_metrics = run_evaluation(cfg, inf.z_all, bundle, tp.split, tasks);
  out.att_only_metrics =
      run_evaluation(cfg, att_only_zall(cfg, bundle, tp.split), bundle, tp.split, tasks, "att_only/");
  out.history = tp.result.history;
  return out;
}

double metric_of(const std::vector<MetricEntry>& entries, const std::string& task,
                 const std::string& metric) {
  for (const auto& e : entries)
    if (e.task == task && e.metric == metric) return e.value;
  throw std::runtime_error("metric not found: " + task + "/" + metric);
}

std::string read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("criterion 1: gradients match finite differences", "[acceptance]") {
  constexpr double kTol = 1e-4;       // max relative error
  constexpr double kBudgetSec = 10.0; // whole criterion
  Stopwatch sw;
  double worst = 0.0;
  LossParams lp;  // alpha=3, beta=1: both loss terms live
  for (GnnVariant v : {GnnVariant::GCN, GnnVariant::SAGE_MEAN, GnnVariant::GIN})
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
      worst = std::max(worst, check_gradients(v, 10, 5, 3, 1, lp, seed));
  const double elapsed = sw.seconds();
  const bool ok = worst < kTol && elapsed < kBudgetSec;
  report(1, "gradient-vs-finite-difference", ok,
         "max rel err " + fmt(worst) + ", " + fmt(elapsed) + "s");
  CHECK(worst < kTol);
  CHECK(elapsed < kBudgetSec);
}

TEST_CASE("criterion 2: metrics match definitional oracles", "[acceptance]") {
  constexpr double kTol = 1e-12;
  constexpr double kBudgetSec = 30.0;
  Stopwatch sw;
  Rng rng(2026);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    // ranking metrics
    const std::size_t m = 3 + rng.index(30);
    std::vector<double> scores(m);
    std::vector<int> labels(m);
    for (std::size_t i = 0; i < m; ++i) {
      scores[i] = rng.index(6) / 6.0;  // coarse grid forces ties
      labels[i] = rng.coin() ? 1 : 0;
    }
    labels[0] = 1;
    labels[m - 1] = 0;
    worst = std::max(worst, std::abs(average_precision(scores, labels) - ap_oracle(scores, labels)));
    worst = std::max(worst, std::abs(auc(scores, labels) - auc_oracle(scores, labels)));

    // partition metrics
    std::vector<int> pa(m), pb(m);
    for (std::size_t i = 0; i < m; ++i) {
      pa[i] = static_cast<int>(rng.index(4));
      pb[i] = static_cast<int>(rng.index(3));
    }
    worst = std::max(worst, std::abs(nmi(pa, pb) - nmi_oracle(pa, pb)));
    auto [ma, mi] = f1_scores(pa, pb, 4);
    auto [oma, omi] = f1_oracle(pa, pb, 4);
    worst = std::max(worst, std::abs(ma - oma));
    worst = std::max(worst, std::abs(mi - omi));

    // graph quantities
    const std::size_t n = 4 + rng.index(9);
    Graph g = random_graph(n, 0.3, rng);
    auto fw = floyd_warshall(g);
    for (NodeId u = 0; u < n; ++u) {
      auto d = bfs_all_distances(g, u);
      for (NodeId v = 0; v < n; ++v) {
        const double got = d[v] == kUnreachable ? std::numeric_limits<double>::infinity()
                                                : static_cast<double>(d[v]);
        if (got != fw[u][v]) worst = std::max(worst, 1.0);
      }
      for (NodeId v = 0; v < n; ++v)
        if (u != v) worst = std::max(worst, std::abs(jaccard(g, u, v) - jaccard_oracle(g, u, v)));
    }
  }
  const double elapsed = sw.seconds();
  const bool ok = worst <= kTol && elapsed < kBudgetSec;
  report(2, "metric-oracle-equivalence", ok, "max abs diff " + fmt(worst) + ", " + fmt(elapsed) + "s");
  CHECK(worst <= kTol);
  CHECK(elapsed < kBudgetSec);
}

TEST_CASE("criterion 3: kNN computation graph invariants", "[acceptance]") {
  Rng rng(303);
  bool ok = true;
  std::string fail;
  for (int inst = 0; inst < 100 && ok; ++inst) {
    const std::size_t n = 6 + rng.index(40);
    const std::size_t f = 4 + rng.index(12);
    const std::size_t k = 1 + rng.index(std::min<std::size_t>(5, n - 2));
    AttributeMatrix x = random_sparse_attributes(n, f, 3, rng.next_u64());

    auto sel = knng_selections(x, k);
    for (const auto& s : sel)
      if (s.size() != k) {
        ok = false;
        fail = "pre-symmetrization out-degree != k";
      }
    Graph g = build_knng(x, k);
    if (2 * g.num_edges() < k * n || g.num_edges() > k * n) {
      ok = false;
      fail = "edge count outside [kN/2, kN]";
    }

    // inductive extension over a random tail of new nodes
    const std::size_t m = 1 + rng.index(5);
    AttributeMatrix x_new = random_sparse_attributes(m, f, 3, rng.next_u64());
    Graph g_all = extend_knng(g, x, x_new, k);
    for (auto [u, v] : g_all.edges()) {
      const bool u_new = u >= n, v_new = v >= n;
      if (u_new && v_new) {
        ok = false;
        fail = "edge between two new nodes";
      }
      if (!u_new && !v_new && !g.has_edge(u, v)) {
        ok = false;
        fail = "extension altered the original graph";
      }
    }
    for (auto [u, v] : g.edges())
      if (!g_all.has_edge(u, v)) {
        ok = false;
        fail = "extension dropped an original edge";
      }
    for (NodeId nn = 0; nn < m; ++nn)
      if (g_all.degree(static_cast<NodeId>(n + nn)) != k) {
        ok = false;
        fail = "new node degree != k";
      }
  }
  report(3, "knn-graph-invariants", ok, ok ? "100 instances" : fail);
  CHECK(ok);
}

TEST_CASE("criterion 4: synthetic end-to-end beats the attribute baseline", "[acceptance]") {
  constexpr double kAucMargin = 0.03;  // model AUC must exceed Att-Only by this
  constexpr double kNmiFloor = 0.30;
  constexpr double kBudgetSec = 120.0;
  Stopwatch sw;
  SyntheticDataset ds = planted_partition(400, 4, 0.15, 0.005, 3, 77);
  DatasetBundle bundle = make_bundle(ds, 4);
  RunConfig cfg = benchmark_config(3.0, 1.0, 77);
  BenchmarkRun run = run_benchmark(bundle, cfg, {"lp", "cluster"});
  const double model_auc = metric_of(run.model_metrics, "link_prediction", "auc");
  const double att_auc = metric_of(run.att_only_metrics, "att_only/link_prediction", "auc");
  const double model_nmi = metric_of(run.model_metrics, "community", "nmi");
  const double elapsed = sw.seconds();
  const bool ok = model_auc >= att_auc + kAucMargin && model_nmi >= kNmiFloor &&
                  elapsed < kBudgetSec;
  report(4, "synthetic-end-to-end", ok,
         "auc " + fmt(model_auc) + " vs att-only " + fmt(att_auc) + ", nmi " + fmt(model_nmi) +
             ", " + fmt(elapsed) + "s");
  CHECK(model_auc >= att_auc + kAucMargin);
  CHECK(model_nmi >= kNmiFloor);
  CHECK(elapsed < kBudgetSec);
}

TEST_CASE("criterion 5: forward pass scales linearly in |V| and k", "[acceptance]") {
  constexpr double kR2Floor = 0.95;
  constexpr double kBudgetSec = 300.0;
  Stopwatch sw;
  // keep large buffers in the heap across reps: otherwise glibc mmaps and
  // returns them each forward pass and page faults swamp the signal
  mallopt(M_MMAP_MAX, 0);
  mallopt(M_TRIM_THRESHOLD, -1);
  const std::size_t f = 256, d = 4, nnz = 32;
  ModelParams params = init_params(GnnVariant::GCN, f, d, 5);

  // interleave the repetitions across sweep points (min per point over whole
  // sweeps) so that slow drift in machine load hits every point equally
  // instead of biasing whichever points happen to run during a busy stretch
  const auto sweep_best = [&](const std::vector<Graph>& graphs,
                              const std::vector<const AttributeMatrix*>& xs, std::size_t reps) {
    std::vector<double> best(graphs.size(), std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < reps; ++r)
      for (std::size_t i = 0; i < graphs.size(); ++i)
        best[i] = std::min(best[i], time_forward_best(params, graphs[i], *xs[i], 1));
    return best;
  };

  std::vector<double> sizes;
  std::vector<Graph> size_graphs;
  std::vector<AttributeMatrix> size_attrs;
  for (std::size_t n : {1000, 3000, 5000, 7000, 9000, 11000}) {
    size_graphs.push_back(synthetic_knn_like_graph(n, 3, 500 + n));
    size_attrs.push_back(random_sparse_attributes(n, f, nnz, 600 + n));
    sizes.push_back(static_cast<double>(n));
  }
  std::vector<const AttributeMatrix*> size_xs;
  for (const auto& x : size_attrs) size_xs.push_back(&x);
  const double r2_n = linear_fit_r2(sizes, sweep_best(size_graphs, size_xs, 15));

  // the k sweep needs the layer input too big for cache, so that neighbor
  // reads (the k-proportional term) dominate the per-node constants
  std::vector<double> ks;
  std::vector<Graph> k_graphs;
  const std::size_t fixed_n = 20000;
  AttributeMatrix x_fixed = random_sparse_attributes(fixed_n, f, nnz, 999);
  for (std::size_t k = 2; k <= 8; ++k) {
    k_graphs.push_back(synthetic_knn_like_graph(fixed_n, k, 700 + k));
    ks.push_back(static_cast<double>(k));
  }
  const std::vector<const AttributeMatrix*> k_xs(k_graphs.size(), &x_fixed);
  const double r2_k = linear_fit_r2(ks, sweep_best(k_graphs, k_xs, 15));

  const double elapsed = sw.seconds();
  const bool ok = r2_n >= kR2Floor && r2_k >= kR2Floor && elapsed < kBudgetSec;
  report(5, "linear-scaling", ok,
         "R2(|V|) " + fmt(r2_n) + ", R2(k) " + fmt(r2_k) + ", " + fmt(elapsed) + "s");
  CHECK(r2_n >= kR2Floor);
  CHECK(r2_k >= kR2Floor);
  CHECK(elapsed < kBudgetSec);
}

TEST_CASE("criterion 6: real-dataset reproduction (optional, data-dependent)", "[acceptance]") {
  // Runs only when dataset files are present locally; absence is not a
  // failure. Expected with data/cora.{edges,attrs,labels}: mean AP over 5
  // split seeds within 0.8930 +/- 0.04.
  const fs::path edges = "data/cora.edges";
  if (!fs::exists(edges)) {
    report(6, "real-dataset-reproduction", true, "SKIPPED: data/cora.edges not present");
    SUCCEED();
    return;
  }
  DatasetBundle bundle = load_dataset("data/cora.edges", "data/cora.attrs",
                                      std::string("data/cora.labels"));
  double ap_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig cfg = benchmark_config(3.0, 1.0, seed);
    cfg.dim = 64;
    BenchmarkRun run = run_benchmark(bundle, cfg, {"lp"});
    ap_sum += metric_of(run.model_metrics, "link_prediction", "ap");
  }
  const double mean_ap = ap_sum / 5.0;
  const bool ok = std::abs(mean_ap - 0.8930) <= 0.04;
  report(6, "real-dataset-reproduction", ok, "mean ap " + fmt(mean_ap));
  if (!ok) WARN("dataset reproduction outside tolerance (reportable, not build-failing)");
  SUCCEED();
}

TEST_CASE("criterion 7: identical seeds give byte-identical artifacts", "[acceptance]") {
  SyntheticDataset ds = planted_partition(150, 3, 0.12, 0.015, 5, 11);
  DatasetBundle bundle = make_bundle(ds, 3);
  RunConfig cfg = benchmark_config(3.0, 1.0, 11);
  cfg.train.max_epochs = 25;

  auto run_all = [&](const fs::path& dir) {
    fs::create_directories(dir);
    TrainedPipeline tp = run_training(cfg, bundle);
    Checkpoint ck{tp.result.params, cfg.train, tp.result.history};
    save_checkpoint(ck, (dir / "checkpoint.bin").string());
    InferenceOutput inf = run_inference(cfg, tp.result.params, bundle, tp.split);
    save_embeddings_binary(inf.z_all, (dir / "z_all.bin").string());
    save_embeddings_text(inf.z_all, (dir / "z_all.txt").string());
    auto metrics = run_evaluation(cfg, inf.z_all, bundle, tp.split, {"lp", "cls", "cluster"});
    save_metric_report(metrics, cfg.seed, cfg.hash(), (dir / "report.txt").string());
  };

  const fs::path base = fs::temp_directory_path() / "egnn_accept_det";
  fs::remove_all(base);
  run_all(base / "a");
  run_all(base / "b");
  bool ok = true;
  std::string first_diff;
  for (const char* name : {"checkpoint.bin", "z_all.bin", "z_all.txt", "report.txt"}) {
    if (read_bytes(base / "a" / name) != read_bytes(base / "b" / name)) {
      ok = false;
      if (first_diff.empty()) first_diff = name;
    }
  }
  fs::remove_all(base);
  report(7, "determinism", ok, ok ? "4 artifacts byte-identical" : "differs: " + first_diff);
  CHECK(ok);
}

TEST_CASE("criterion 8: loss hyperparameters are live", "[acceptance]") {
  constexpr double kNmiDelta = 0.01;  // |NMI(alpha=0) - NMI(alpha=3)|
  SyntheticDataset ds = planted_partition(400, 4, 0.15, 0.005, 3, 77);
  DatasetBundle bundle = make_bundle(ds, 4);

  auto nmi_for_alpha = [&](double alpha) {
    RunConfig cfg = benchmark_config(alpha, 1.0, 77);
    BenchmarkRun run = run_benchmark(bundle, cfg, {"cluster"});
    return metric_of(run.model_metrics, "community", "nmi");
  };
  const double nmi0 = nmi_for_alpha(0.0);
  const double nmi3 = nmi_for_alpha(3.0);
  const bool alpha_ok = std::abs(nmi0 - nmi3) >= kNmiDelta;

  // beta changes the negative-pair weighting, so the very first epoch losses
  // must already diverge
  std::vector<std::vector<double>> trajectories;
  for (double beta : {0.0, 1.0, 4.0}) {
    RunConfig cfg = benchmark_config(3.0, beta, 77);
    cfg.train.max_epochs = 10;
    TrainedPipeline tp = run_training(cfg, bundle);
    std::vector<double> traj;
    for (const auto& rec : tp.result.history) traj.push_back(rec.train_loss);
    trajectories.push_back(std::move(traj));
  }
  const bool beta_ok = trajectories[0] != trajectories[1] && trajectories[1] != trajectories[2] &&
                       trajectories[0] != trajectories[2];

  const bool ok = alpha_ok && beta_ok;
  report(8, "hyperparameter-sensitivity", ok,
         "nmi(a=0) " + fmt(nmi0) + " vs nmi(a=3) " + fmt(nmi3) + ", beta trajectories " +
             (beta_ok ? "distinct" : "identical"));
  CHECK(alpha_ok);
  CHECK(beta_ok);
}
