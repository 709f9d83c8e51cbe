#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "edgeless/attributes.hpp"
#include "edgeless/graph.hpp"
#include "edgeless/quadruplet.hpp"
#include "edgeless/rng.hpp"

namespace edgeless {

/// Node-level train/validation/test split. Lists are sorted ascending,
/// disjoint, and cover all nodes.
struct SplitSpec {
  std::vector<NodeId> train_ids;
  std::vector<NodeId> val_ids;
  std::vector<NodeId> test_ids;
  std::uint64_t seed = 0;
};

/// Uniform random split under seed; train and val get the floor of their
/// ratio, test the remainder.
inline SplitSpec split_nodes(std::size_t num_nodes, double r_train, double r_val, double r_test,
                             std::uint64_t seed) {
  if (r_train <= 0.0 || r_val <= 0.0 || r_test <= 0.0 ||
      std::abs(r_train + r_val + r_test - 1.0) > 1e-9)
    throw std::invalid_argument("split_nodes: ratios must be positive and sum to 1");
  const auto n_train = static_cast<std::size_t>(std::floor(r_train * num_nodes));
  const auto n_val = static_cast<std::size_t>(std::floor(r_val * num_nodes));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= num_nodes)
    throw std::invalid_argument("split_nodes: a split would be empty");

  std::vector<NodeId> perm(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) perm[i] = static_cast<NodeId>(i);
  Rng rng(seed);
  rng.shuffle(perm);

  SplitSpec s;
  s.seed = seed;
  s.train_ids.assign(perm.begin(), perm.begin() + n_train);
  s.val_ids.assign(perm.begin() + n_train, perm.begin() + n_train + n_val);
  s.test_ids.assign(perm.begin() + n_train + n_val, perm.end());
  std::sort(s.train_ids.begin(), s.train_ids.end());
  std::sort(s.val_ids.begin(), s.val_ids.end());
  std::sort(s.test_ids.begin(), s.test_ids.end());
  return s;
}

/// Induced training graph (train ids densely remapped, order-preserving) plus
/// every edge of g that touches a val/test node, in original ids.
struct EdgelessScenario {
  Graph g_train;
  std::vector<std::pair<NodeId, NodeId>> hidden_edges;
  std::vector<NodeId> old_to_new;  // kUnreachable for non-train nodes
};

inline EdgelessScenario make_edgeless_scenario(const Graph& g, const SplitSpec& split) {
  EdgelessScenario out;
  out.old_to_new.assign(g.num_nodes(), kUnreachable);
  for (std::size_t i = 0; i < split.train_ids.size(); ++i)
    out.old_to_new[split.train_ids[i]] = static_cast<NodeId>(i);

  std::vector<std::pair<NodeId, NodeId>> train_edges;
  for (auto [u, v] : g.edges()) {
    if (out.old_to_new[u] != kUnreachable && out.old_to_new[v] != kUnreachable)
      train_edges.emplace_back(out.old_to_new[u], out.old_to_new[v]);
    else
      out.hidden_edges.emplace_back(u, v);
  }
  out.g_train = Graph::from_edges(train_edges, split.train_ids.size());
  return out;
}

/// One quadruplet per undirected training edge. The anchor starts as the
/// smaller endpoint and a fair coin swaps the roles; the negative is a
/// uniform non-neighbor, the two-hop node uniform over the exact-distance-2
/// set (absent when that set is empty). BFS distances are memoized per
/// anchor across the epoch.
inline QuadrupletBatch sample_epoch_batch(const Graph& g_train, std::uint64_t seed) {
  if (g_train.num_nodes() == 0 || g_train.num_edges() == 0)
    throw std::invalid_argument("sample_epoch_batch: empty training graph");
  const std::size_t n = g_train.num_nodes();
  Rng rng(seed);
  QuadrupletBatch batch;
  batch.reserve(g_train.num_edges());
  std::unordered_map<NodeId, std::vector<std::uint32_t>> bfs_memo;
  std::unordered_map<NodeId, std::vector<NodeId>> twohop_memo;

  for (auto [u, v] : g_train.edges()) {
    NodeId vi = u, vj = v;
    if (rng.coin()) std::swap(vi, vj);
    if (g_train.degree(vi) >= n - 1)
      throw std::runtime_error("sample_epoch_batch: node adjacent to all others, no negative exists");

    NodeId vn = vi;
    const std::size_t max_tries = 64 * (n + 1);
    std::size_t tries = 0;
    do {
      if (++tries > max_tries)
        throw std::runtime_error("sample_epoch_batch: negative resampling failed");
      vn = static_cast<NodeId>(rng.index(n));
    } while (vn == vi || g_train.has_edge(vi, vn));

    auto [it_two, fresh] = twohop_memo.try_emplace(vi);
    if (fresh) it_two->second = two_hop_neighbors(g_train, vi);
    const auto& two = it_two->second;
    NodeId vt = two.empty() ? kUnreachable : two[rng.index(two.size())];

    auto [it_bfs, fresh_bfs] = bfs_memo.try_emplace(vi);
    if (fresh_bfs) it_bfs->second = bfs_all_distances(g_train, vi);

    Quadruplet q;
    q.anchor = vi;
    q.positive = vj;
    q.negative = vn;
    q.two_hop = vt;
    q.dsp_in = it_bfs->second[vn];
    q.j_it = vt == kUnreachable ? 0.0 : jaccard(g_train, vi, vt);
    batch.push_back(q);
  }
  return batch;
}

/// Contiguous mini-batch chunks of at most `size` quadruplets.
inline std::vector<QuadrupletBatch> chunk_batch(const QuadrupletBatch& batch, std::size_t size) {
  if (size == 0) throw std::invalid_argument("chunk_batch: size must be >= 1");
  std::vector<QuadrupletBatch> out;
  for (std::size_t i = 0; i < batch.size(); i += size) {
    out.emplace_back(batch.begin() + i,
                     batch.begin() + std::min(batch.size(), i + size));
  }
  return out;
}

/// Robustness masking: each stored nonzero entry is independently zeroed with
/// the given probability; row norms are recomputed.
inline AttributeMatrix mask_attributes(const AttributeMatrix& x, double fraction,
                                       std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("mask_attributes: fraction must be in [0,1]");
  if (fraction == 0.0) return x;
  Rng rng(seed);
  AttributeMatrix out(x.num_nodes(), x.num_features());
  for (std::size_t i = 0; i < x.num_nodes(); ++i) {
    SparseRow kept;
    for (auto [f, v] : x.row(i))
      if (rng.uniform() >= fraction) kept.emplace_back(f, v);
    out.set_row(i, std::move(kept));
  }
  return out;
}

}  // namespace edgeless
