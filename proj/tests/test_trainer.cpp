#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "edgeless/knn.hpp"
#include "edgeless/rng.hpp"
#include "edgeless/trainer.hpp"

using namespace edgeless;

namespace {

// independently coded reference Adam (scalar loop, explicit bias correction)
struct RefAdam {
  std::vector<double> m, v;
  std::size_t t = 0;
  void step(std::vector<double>& w, const std::vector<double>& g, double lr, double wd) {
    if (m.empty()) {
      m.assign(w.size(), 0.0);
      v.assign(w.size(), 0.0);
    }
    ++t;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double grad = g[i] + wd * w[i];
      m[i] = 0.9 * m[i] + 0.1 * grad;
      v[i] = 0.999 * v[i] + 0.001 * grad * grad;
      const double mh = m[i] / (1.0 - std::pow(0.9, t));
      const double vh = v[i] / (1.0 - std::pow(0.999, t));
      w[i] -= lr * mh / (std::sqrt(vh) + 1e-8);
    }
  }
};

AttributeMatrix tiny_attrs(std::size_t n, std::size_t f, std::uint64_t seed) {
  Rng rng(seed);
  AttributeMatrix x(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    SparseRow row;
    for (std::uint32_t t = 0; t < f; ++t) row.emplace_back(t, rng.uniform(0.0, 1.0));
    x.set_row(i, std::move(row));
  }
  return x;
}

}  // namespace

TEST_CASE("adam_step: zero gradient leaves params unchanged") {
  ModelParams p = init_params(GnnVariant::GCN, 3, 2, 0);
  ModelParams before = p;
  AdamState s = AdamState::like(p);
  adam_step(p, zero_grads_like(p), s, 0.01, 0.0);
  CHECK(p.layers[0][0] == before.layers[0][0]);
  CHECK(s.step_count == 1);
}

TEST_CASE("adam_step: first step is approximately -lr * sign(g)") {
  ModelParams p = init_params(GnnVariant::GCN, 1, 1, 0);
  const double w0 = p.layers[0][0](0, 0);
  auto g = zero_grads_like(p);
  g[0][0](0, 0) = 0.37;
  AdamState s = AdamState::like(p);
  adam_step(p, g, s, 0.01, 0.0);
  CHECK(p.layers[0][0](0, 0) == Catch::Approx(w0 - 0.01).epsilon(1e-6));
}

TEST_CASE("adam_step matches an independent reference over 100 random steps") {
  ModelParams p = init_params(GnnVariant::SAGE_MEAN, 3, 2, 5);
  std::vector<double> ref_w = p.layers[0][0].data();
  RefAdam ref;
  AdamState s = AdamState::like(p);
  Rng rng(6);
  for (int step = 0; step < 100; ++step) {
    auto g = zero_grads_like(p);
    for (double& v : g[0][0].data()) v = rng.uniform(-1.0, 1.0);
    ref.step(ref_w, g[0][0].data(), 3e-3, 1e-4);
    adam_step(p, g, s, 3e-3, 1e-4);
  }
  for (std::size_t t = 0; t < ref_w.size(); ++t)
    CHECK(p.layers[0][0].data()[t] == Catch::Approx(ref_w[t]).margin(1e-12));
}

TEST_CASE("adam_step rejects non-finite gradients") {
  ModelParams p = init_params(GnnVariant::GCN, 2, 2, 0);
  auto g = zero_grads_like(p);
  g[0][0](0, 0) = std::nan("");
  AdamState s = AdamState::like(p);
  CHECK_THROWS_AS(adam_step(p, g, s, 0.01, 0.0), std::runtime_error);
}

TEST_CASE("check_gradients passes for every variant") {
  LossParams lp;
  CHECK(check_gradients(GnnVariant::GCN, 10, 5, 3, 1, lp, 1) < 1e-6);
  CHECK(check_gradients(GnnVariant::SAGE_MEAN, 10, 5, 3, 2, lp, 2) < 1e-4);
  CHECK(check_gradients(GnnVariant::GIN, 10, 5, 3, 1, lp, 3) < 1e-4);
}

TEST_CASE("train on a tiny instance") {
  // two triangles joined by a bridge
  Graph g = build_graph({{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}}, 6);
  AttributeMatrix x = tiny_attrs(6, 4, 7);
  Graph g_knn = build_knng(x, 2);

  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.minibatch_size = 16;
  cfg.learning_rate = 5e-3;
  cfg.seed = 3;

  SECTION("max_epochs 0 returns initial params") {
    TrainConfig zero = cfg;
    zero.max_epochs = 0;
    ModelParams p0 = init_params(GnnVariant::SAGE_MEAN, 4, 3, 9);
    auto res = train(zero, p0, g, g_knn, x);
    CHECK(res.params.layers[0][0] == p0.layers[0][0]);
    CHECK(res.history.empty());
  }

  SECTION("loss descends over 200 epochs, all values finite") {
    ModelParams p0 = init_params(GnnVariant::SAGE_MEAN, 4, 3, 9);
    auto res = train(cfg, p0, g, g_knn, x);
    REQUIRE(res.history.size() == 200);
    for (const auto& r : res.history) CHECK(std::isfinite(r.train_loss));
    CHECK(res.history.back().train_loss < res.history.front().train_loss);
  }

  SECTION("deterministic under seed") {
    ModelParams p0 = init_params(GnnVariant::GCN, 4, 3, 9);
    auto a = train(cfg, p0, g, g_knn, x);
    auto b = train(cfg, p0, g, g_knn, x);
    CHECK(a.params.layers[0][0] == b.params.layers[0][0]);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t e = 0; e < a.history.size(); ++e)
      CHECK(a.history[e].train_loss == b.history[e].train_loss);
  }

  SECTION("early stopping keeps the best-AP params") {
    int calls = 0;
    // synthetic probe: peaks at epoch 5 then decays
    ValProbe probe = [&calls](const ModelParams&) {
      ++calls;
      return calls <= 5 ? 0.1 * calls : 1.0 / calls;
    };
    TrainConfig ec = cfg;
    ec.max_epochs = 100;
    ec.patience = 10;
    ModelParams p0 = init_params(GnnVariant::GCN, 4, 3, 9);
    auto res = train(ec, p0, g, g_knn, x, probe);
    CHECK(res.history.size() == 15);  // 5 improving + 10 stale
  }
}
