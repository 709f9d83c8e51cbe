#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "edgeless/attributes.hpp"
#include "edgeless/graph.hpp"

namespace edgeless {

namespace detail {

/// Top-k most-similar candidates for one query row. Ties broken by smaller
/// node index; zero-norm queries tie everywhere at 0 and thus pick the k
/// lowest indices, so no node ends up isolated.
inline std::vector<NodeId> top_k_similar(const AttributeMatrix& x_query, std::size_t q,
                                         const AttributeMatrix& x_cand, NodeId skip,
                                         std::size_t k) {
  std::vector<std::pair<double, NodeId>> scored;
  scored.reserve(x_cand.num_nodes());
  for (NodeId c = 0; c < x_cand.num_nodes(); ++c) {
    if (c == skip) continue;
    double sim = 0.0;
    if (x_query.row_norm(q) != 0.0 && x_cand.row_norm(c) != 0.0)
      sim = sparse_dot(x_query.row(q), x_cand.row(c)) / (x_query.row_norm(q) * x_cand.row_norm(c));
    scored.emplace_back(sim, c);
  }
  auto better = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  if (scored.size() > k) {
    std::nth_element(scored.begin(), scored.begin() + k - 1, scored.end(), better);
    scored.resize(k);
  }
  std::vector<NodeId> out;
  out.reserve(scored.size());
  for (auto& [s, c] : scored) out.push_back(c);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Per-node top-k selections over attribute cosine similarity, before
/// symmetrization. selections[v] excludes v itself.
inline std::vector<std::vector<NodeId>> knng_selections(const AttributeMatrix& x, std::size_t k) {
  if (k < 1) throw std::invalid_argument("build_knng: k must be >= 1");
  if (x.num_nodes() < 2) throw std::invalid_argument("build_knng: need at least 2 nodes");
  if (k >= x.num_nodes()) throw std::invalid_argument("build_knng: k must be < num_nodes");
  std::vector<std::vector<NodeId>> sel(x.num_nodes());
  for (NodeId v = 0; v < x.num_nodes(); ++v)
    sel[v] = detail::top_k_similar(x, v, x, v, k);
  return sel;
}

/// kNN computation graph over the attribute matrix: each node selects its
/// top-k most similar peers, and the selections are symmetrized by union.
inline Graph build_knng(const AttributeMatrix& x, std::size_t k) {
  auto sel = knng_selections(x, k);
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(x.num_nodes() * k);
  for (NodeId v = 0; v < sel.size(); ++v)
    for (NodeId u : sel[v]) edges.emplace_back(v, u);
  return Graph::from_edges(edges, x.num_nodes());
}

/// Inductive extension: each new node in x_new selects its top-k neighbors
/// among the original nodes only. The subgraph on the original nodes is
/// g_knn unchanged; no edges between two new nodes.
inline Graph extend_knng(const Graph& g_knn, const AttributeMatrix& x,
                         const AttributeMatrix& x_new, std::size_t k) {
  if (x.num_features() != x_new.num_features())
    throw std::invalid_argument("extend_knng: feature dimension mismatch");
  if (g_knn.num_nodes() != x.num_nodes())
    throw std::invalid_argument("extend_knng: graph/attribute size mismatch");
  if (k >= x.num_nodes() + 1) throw std::invalid_argument("extend_knng: k too large");
  const std::size_t n = x.num_nodes();
  std::vector<std::pair<NodeId, NodeId>> edges = g_knn.edges();
  for (NodeId m = 0; m < x_new.num_nodes(); ++m) {
    auto sel = detail::top_k_similar(x_new, m, x, kUnreachable, k);
    for (NodeId u : sel) edges.emplace_back(static_cast<NodeId>(n + m), u);
  }
  return Graph::from_edges(edges, n + x_new.num_nodes());
}

}  // namespace edgeless
