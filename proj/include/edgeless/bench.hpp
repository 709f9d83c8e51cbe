#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <vector>

#include "edgeless/attributes.hpp"
#include "edgeless/graph.hpp"
#include "edgeless/model.hpp"
#include "edgeless/rng.hpp"

namespace edgeless {

/// Random graph with the degree profile of a symmetrized kNN graph: every
/// node selects k distinct random peers, union-symmetrized.
inline Graph synthetic_knn_like_graph(std::size_t n, std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(n * k);
  for (NodeId v = 0; v < n; ++v) {
    std::size_t picked = 0;
    while (picked < k) {
      NodeId u = static_cast<NodeId>(rng.index(n));
      if (u == v) continue;
      edges.emplace_back(v, u);
      ++picked;
    }
  }
  return Graph::from_edges(edges, n);
}

inline AttributeMatrix random_sparse_attributes(std::size_t n, std::size_t f, std::size_t nnz_per_row,
                                                std::uint64_t seed) {
  Rng rng(seed);
  AttributeMatrix x(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    SparseRow row;
    for (std::size_t t = 0; t < nnz_per_row; ++t) {
      const auto idx = static_cast<std::uint32_t>(rng.index(f));
      bool dup = false;
      for (auto [fi, v] : row)
        if (fi == idx) dup = true;
      if (!dup) row.emplace_back(idx, rng.uniform(0.1, 1.0));
    }
    x.set_row(i, std::move(row));
  }
  return x;
}

/// Best-of-`reps` forward-pass wall time in seconds.  Timing noise on a shared
/// machine is one-sided (preemption and page faults only ever add time), so
/// the minimum is the least biased estimate of the true cost.
inline double time_forward_best(const ModelParams& p, const Graph& g, const AttributeMatrix& x,
                                  std::size_t reps = 5) {
  std::vector<double> times;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    volatile double sink = forward(p, g, x)(0, 0);
    (void)sink;
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  return *std::min_element(times.begin(), times.end());
}

/// R^2 of the least-squares line through (x, y).
inline double linear_fit_r2(const std::vector<double>& xs, const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = slope * xs[i] + intercept;
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - mean) * (ys[i] - mean);
  }
  return ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
}

/// Forest-fire subgraph sample of roughly `target` nodes; each burning node
/// ignites each unburned neighbor with probability `p_forward`.
inline std::vector<NodeId> forest_fire_sample(const Graph& g, std::size_t target, double p_forward,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<char> burned(g.num_nodes(), 0);
  std::vector<NodeId> order;
  std::deque<NodeId> frontier;
  while (order.size() < target && order.size() < g.num_nodes()) {
    if (frontier.empty()) {
      NodeId s;
      do {
        s = static_cast<NodeId>(rng.index(g.num_nodes()));
      } while (burned[s]);
      burned[s] = 1;
      order.push_back(s);
      frontier.push_back(s);
    }
    NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId v : g.neighbors(u)) {
      if (order.size() >= target) break;
      if (!burned[v] && rng.uniform() < p_forward) {
        burned[v] = 1;
        order.push_back(v);
        frontier.push_back(v);
      }
    }
  }
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace edgeless
