// Initial-estimate construction before the distributed loop: per-block
// odometry dead reckoning, an intra-block-preferring global spanning tree,
// and a centralized two-stage chordal relaxation. All three anchor pose 0
// at identity.

#pragma once

#include "robo/partition.hpp"

namespace robo {

enum class InitScheme { Odometry, SpanningTree, Chordal };

/// How odometry-initialized blocks are placed in a common frame: all block
/// origins at identity, or chained through one inter-robot spanning-tree
/// edge per block.
enum class OdometryAnchor { Identity, Tree };

/**
 * Dead-reckons each block by composing consecutive-id intra-block
 * measurements from the block's first pose. Falls back to shortest
 * intra-block measurement paths when a consecutive-id edge is missing.
 */
Estimates odometry_init(const PoseGraph& g, const BlockAssignment& a,
                        OdometryAnchor anchor = OdometryAnchor::Tree);

/// Global spanning tree preferring intra-block edges (weight 0) over
/// inter-block edges (weight 1), rooted at pose 0; measurements are
/// propagated along tree edges, inverting against-direction edges.
Estimates spanning_tree_init(const PoseGraph& g, const BlockAssignment& a);

/**
 * Two-stage chordal relaxation: (1) linear least squares over
 * unconstrained rotation blocks (anchor R_0 = I) followed by projection to
 * SO(d); (2) linear least squares over translations with rotations fixed
 * (anchor t_0 = 0). Throws std::runtime_error on rank deficiency beyond
 * gauge.
 */
Estimates chordal_init(const PoseGraph& g);

Estimates initialize(const PoseGraph& g, const BlockAssignment& a, InitScheme scheme,
                     OdometryAnchor anchor = OdometryAnchor::Tree);

}  // namespace robo
