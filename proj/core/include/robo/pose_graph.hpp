// Pose-graph data model: a directed, weakly connected graph of dense pose
// ids [0, n) with relative-measurement edges.

#pragma once

#include "robo/geometry.hpp"

#include <vector>

namespace robo {

/// Global pose estimates, indexed by PoseId.
using Estimates = std::vector<Pose>;

struct PoseGraph {
  int dimension = 2;                       // d in {2,3}
  Estimates poses;                         // current estimate per id
  std::vector<RelativeMeasurement> edges;  // file/build order preserved

  std::size_t num_poses() const { return poses.size(); }
  std::size_t num_edges() const { return edges.size(); }

  /// Validating append; throws std::invalid_argument on bad measurements
  /// or endpoints outside [0, num_poses).
  void add_edge(RelativeMeasurement m);

  /// Undirected adjacency: per node, (neighbor, edge index) pairs in edge
  /// order. Rebuilt on demand; call once and reuse.
  std::vector<std::vector<std::pair<PoseId, std::size_t>>> adjacency() const;

  /// True if the graph is weakly connected (every node reachable ignoring
  /// edge direction). Empty graphs are not connected.
  bool is_connected() const;

  /// Throws std::invalid_argument if the graph is empty or not connected.
  void require_connected() const;
};

/// Sum of per-edge squared distances at the given estimates, without the
/// global 1/2 prefactor. See evaluation::global_cost for the objective.
double total_residual2(const PoseGraph& g, const Estimates& estimates, Metric metric);

}  // namespace robo
