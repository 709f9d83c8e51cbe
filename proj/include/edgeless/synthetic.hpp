#pragma once

#include <cstdint>
#include <vector>

#include "edgeless/attributes.hpp"
#include "edgeless/graph.hpp"
#include "edgeless/rng.hpp"

namespace edgeless {

/// Planted-partition benchmark data: a homophilous block graph with
/// class-correlated sparse attributes, used by the bundled tests and demos.
struct SyntheticDataset {
  Graph graph;
  AttributeMatrix attributes;
  std::vector<int> labels;
};

/// Block model: intra-block edges with probability p_in, inter-block with
/// p_out. Node i belongs to block i % num_blocks.
inline SyntheticDataset planted_partition(std::size_t n, int num_blocks, double p_in, double p_out,
                                          std::size_t features_per_class, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % num_blocks);

  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? p_in : p_out;
      if (rng.uniform() < p) edges.emplace_back(u, v);
    }

  SyntheticDataset ds;
  ds.graph = Graph::from_edges(edges, n);
  ds.labels = std::move(labels);

  const std::size_t f = static_cast<std::size_t>(num_blocks) * features_per_class;
  ds.attributes = AttributeMatrix(n, f);
  for (std::size_t i = 0; i < n; ++i) {
    SparseRow row;
    const std::size_t base = static_cast<std::size_t>(ds.labels[i]) * features_per_class;
    for (std::uint32_t t = 0; t < f; ++t) {
      const bool own = t >= base && t < base + features_per_class;
      const double p = own ? 0.7 : 0.05;
      if (rng.uniform() < p) row.emplace_back(t, 1.0);
    }
    ds.attributes.set_row(i, std::move(row));
  }
  return ds;
}

}  // namespace edgeless
