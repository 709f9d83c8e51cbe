#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace edgeless {

using NodeId = std::uint32_t;

/// Hop-count sentinel for node pairs with no connecting path.
inline constexpr std::uint32_t kUnreachable = std::numeric_limits<std::uint32_t>::max();

/// Immutable undirected unweighted graph in compressed-adjacency form.
/// Neighbor lists are sorted ascending with no duplicates and no self-loops;
/// adjacency is symmetric. Safe for concurrent reads after construction.
class Graph {
public:
  Graph() = default;

  static Graph from_edges(const std::vector<std::pair<NodeId, NodeId>>& edge_pairs,
                          std::size_t num_nodes) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(edge_pairs.size());
    for (auto [u, v] : edge_pairs) {
      if (u >= num_nodes || v >= num_nodes)
        throw std::invalid_argument("from_edges: endpoint out of range");
      if (u == v) continue;  // drop self-loops
      if (u > v) std::swap(u, v);
      edges.emplace_back(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    Graph g;
    g.num_nodes_ = num_nodes;
    g.num_edges_ = edges.size();
    std::vector<std::size_t> deg(num_nodes, 0);
    for (auto [u, v] : edges) {
      ++deg[u];
      ++deg[v];
    }
    g.offsets_.assign(num_nodes + 1, 0);
    for (std::size_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
    g.neighbor_ids_.resize(2 * edges.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : edges) {
      g.neighbor_ids_[cursor[u]++] = v;
      g.neighbor_ids_[cursor[v]++] = u;
    }
    for (std::size_t i = 0; i < num_nodes; ++i)
      std::sort(g.neighbor_ids_.begin() + g.offsets_[i], g.neighbor_ids_.begin() + g.offsets_[i + 1]);
    return g;
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return num_edges_; }

  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbor_ids_.data() + offsets_[v], neighbor_ids_.data() + offsets_[v + 1]};
  }

  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  /// Binary search over the sorted neighbor list.
  bool has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Undirected edges as (u, v) with u < v, sorted.
  std::vector<std::pair<NodeId, NodeId>> edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(num_edges_);
    for (NodeId u = 0; u < num_nodes_; ++u)
      for (NodeId v : neighbors(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

private:
  std::size_t num_nodes_ = 0;
  std::size_t num_edges_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> neighbor_ids_;
};

inline Graph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edge_pairs,
                         std::size_t num_nodes) {
  return Graph::from_edges(edge_pairs, num_nodes);
}

/// Connected components by repeated BFS; returns per-node component id.
inline std::vector<std::uint32_t> connected_components(const Graph& g, std::size_t* count = nullptr) {
  std::vector<std::uint32_t> comp(g.num_nodes(), kUnreachable);
  std::uint32_t next = 0;
  std::vector<NodeId> queue;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] != kUnreachable) continue;
    comp[s] = next;
    queue.assign(1, s);
    while (!queue.empty()) {
      NodeId u = queue.back();
      queue.pop_back();
      for (NodeId v : g.neighbors(u)) {
        if (comp[v] == kUnreachable) {
          comp[v] = next;
          queue.push_back(v);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

/// Largest connected component with a dense remap. Size ties keep the
/// component containing the smallest original node id (that component is
/// discovered first, and the strict > keeps it).
inline std::pair<Graph, std::vector<NodeId>> largest_connected_component(const Graph& g) {
  if (g.num_nodes() == 0) throw std::invalid_argument("largest_connected_component: empty graph");
  std::size_t num_comps = 0;
  auto comp = connected_components(g, &num_comps);
  std::vector<std::size_t> sizes(num_comps, 0);
  for (auto c : comp) ++sizes[c];
  std::uint32_t best = 0;
  for (std::uint32_t c = 1; c < num_comps; ++c)
    if (sizes[c] > sizes[best]) best = c;

  std::vector<NodeId> old_to_new(g.num_nodes(), kUnreachable);
  NodeId next = 0;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (comp[v] == best) old_to_new[v] = next++;

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (auto [u, v] : g.edges())
    if (comp[u] == best && comp[v] == best) edges.emplace_back(old_to_new[u], old_to_new[v]);
  return {Graph::from_edges(edges, sizes[best]), std::move(old_to_new)};
}

/// BFS hop counts from `source` to each node in `targets`; unfound targets map
/// to kUnreachable. Early-exits once every target is resolved.
inline std::unordered_map<NodeId, std::uint32_t> bfs_distances(
    const Graph& g, NodeId source, const std::unordered_set<NodeId>& targets) {
  if (source >= g.num_nodes()) throw std::invalid_argument("bfs_distances: source out of range");
  std::unordered_map<NodeId, std::uint32_t> result;
  std::size_t remaining = targets.size();
  std::vector<std::uint32_t> dist(g.num_nodes(), kUnreachable);
  dist[source] = 0;
  if (targets.count(source)) {
    result[source] = 0;
    --remaining;
  }
  std::deque<NodeId> queue{source};
  while (!queue.empty() && remaining > 0) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] != kUnreachable) continue;
      dist[v] = dist[u] + 1;
      if (targets.count(v)) {
        result[v] = dist[v];
        --remaining;
      }
      queue.push_back(v);
    }
  }
  for (NodeId t : targets)
    if (!result.count(t)) result[t] = kUnreachable;
  return result;
}

/// Full single-source BFS; per-node hop counts with kUnreachable fill.
inline std::vector<std::uint32_t> bfs_all_distances(const Graph& g, NodeId source) {
  std::vector<std::uint32_t> dist(g.num_nodes(), kUnreachable);
  dist[source] = 0;
  std::deque<NodeId> queue{source};
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

/// Nodes at shortest-path distance exactly 2 from v, sorted ascending.
inline std::vector<NodeId> two_hop_neighbors(const Graph& g, NodeId v) {
  if (v >= g.num_nodes()) throw std::invalid_argument("two_hop_neighbors: node out of range");
  std::vector<NodeId> out;
  std::unordered_set<NodeId> seen;
  for (NodeId u : g.neighbors(v)) {
    for (NodeId w : g.neighbors(u)) {
      if (w == v || g.has_edge(v, w)) continue;
      if (seen.insert(w).second) out.push_back(w);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Jaccard similarity of the one-hop neighbor sets of u and v; 0 when both
/// sets are empty.
inline double jaccard(const Graph& g, NodeId u, NodeId v) {
  if (u >= g.num_nodes() || v >= g.num_nodes())
    throw std::invalid_argument("jaccard: node out of range");
  auto a = g.neighbors(u);
  auto b = g.neighbors(v);
  std::size_t inter = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++inter;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace edgeless
