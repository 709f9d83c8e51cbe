#pragma once

#include <cstdint>
#include <vector>

#include "edgeless/graph.hpp"

namespace edgeless {

/// One training sample: anchor, positive neighbor, sampled non-neighbor and
/// (optionally) a two-hop neighbor. dsp_in and j_it are cached on the
/// underlying training graph at sampling time.
struct Quadruplet {
  NodeId anchor;    // v_i
  NodeId positive;  // v_j, (v_i, v_j) in E
  NodeId negative;  // v_n, (v_i, v_n) not in E
  NodeId two_hop;   // v_t, at distance exactly 2, or kUnreachable when absent
  std::uint32_t dsp_in;  // shortest-path hops between v_i and v_n
  double j_it;           // Jaccard of (v_i, v_t), 0 when two_hop absent

  bool has_two_hop() const { return two_hop != kUnreachable; }
};

using QuadrupletBatch = std::vector<Quadruplet>;

}  // namespace edgeless
