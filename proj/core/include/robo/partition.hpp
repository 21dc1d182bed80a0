// Multi-robot partitioning, hop-distance computation, overlap-block
// construction, and the robot-level communication graph.
//
// Graph distance ignores edge direction; direction only matters when
// residuals are evaluated. Set iteration order is ascending pose id
// throughout, so all outputs are deterministic.

#pragma once

#include "robo/pose_graph.hpp"

#include <iosfwd>
#include <limits>
#include <vector>

namespace robo {

/// Hop count marking nodes that cannot be reached (never occurs on
/// connected graphs).
inline constexpr int kUnreachable = std::numeric_limits<int>::max();

struct BlockAssignment {
  int n_robots = 0;
  std::vector<int> owner;                   // PoseId -> robot index
  std::vector<std::vector<PoseId>> blocks;  // ascending ids per robot

  /// Throws std::invalid_argument unless blocks form a partition of [0, n)
  /// with every block non-empty and owner consistent with blocks.
  void validate(std::size_t n_poses) const;
};

/// Contiguous id ranges of size ceil(n/N) or floor(n/N), larger ranges
/// first. Throws if N < 1 or N > n.
BlockAssignment sequential_partition(const PoseGraph& g, int n_robots);

/// Builds an assignment from explicit per-robot id lists (validated).
BlockAssignment assignment_from_blocks(std::vector<std::vector<PoseId>> blocks,
                                       std::size_t n_poses);

/// Partition override file: one line per robot, whitespace-separated ids.
BlockAssignment parse_partition_file(std::istream& in, std::size_t n_poses);

/// Multi-source BFS hop counts over the undirected graph; 0 for members of
/// the source set. Throws on an empty source set.
std::vector<int> graph_distance(const PoseGraph& g, const std::vector<PoseId>& source_set);

/**
 * Robot alpha's inflated subproblem structure for overlap omega:
 * interior nodes at hop distance <= omega from the robot's block, boundary
 * poses at distance exactly omega+1 holding fixed values, and the three
 * edge sets (interior, outgoing-prior, incoming-prior) as indices into the
 * graph's edge list, each in global edge order.
 */
struct OverlapBlock {
  int robot = 0;
  int omega = 0;
  std::vector<PoseId> interior_nodes;             // ascending
  std::vector<PoseId> boundary_nodes;             // ascending, disjoint from interior
  std::vector<std::size_t> interior_edges;        // both endpoints interior
  std::vector<std::size_t> outgoing_prior_edges;  // from interior, to boundary
  std::vector<std::size_t> incoming_prior_edges;  // from boundary, to interior
  std::vector<Pose> boundary_values;              // fixed poses, parallel to boundary_nodes
};

OverlapBlock build_overlap_block(const PoseGraph& g, const BlockAssignment& a, int robot,
                                 int omega, const Estimates& current_estimates);

/// Robot-level connectivity required for a given overlap: a link exists
/// between alpha and beta iff one's inflated node set (omega+1) reaches a
/// pose owned by the other.
struct CommunicationGraph {
  int n_robots = 0;
  std::vector<std::pair<int, int>> links;  // a < b, sorted

  bool linked(int a, int b) const;
  std::vector<int> neighbors(int robot) const;
};

CommunicationGraph build_communication_graph(const PoseGraph& g, const BlockAssignment& a,
                                             int omega);

}  // namespace robo
