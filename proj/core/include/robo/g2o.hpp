// g2o text format ingestion and emission.
//
// Supported records:
//   VERTEX_SE2 id x y theta
//   EDGE_SE2 id1 id2 dx dy dtheta I11 I12 I13 I22 I23 I33
//   VERTEX_SE3:QUAT id x y z qx qy qz qw
//   EDGE_SE3:QUAT id1 id2 dx dy dz qx qy qz qw <21 upper-triangular info>
// Lines beginning with '#' are comments. Unknown record types are skipped
// with a warning.

#pragma once

#include "robo/pose_graph.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace robo {

struct G2oParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * Parses a g2o stream into a PoseGraph. Edge order follows file order;
 * vertices appearing only in edges are initialized to identity; ids are
 * remapped to dense [0, n) preserving numeric order. Throws G2oParseError
 * on malformed lines (with line number), mixed 2D/3D records, non-PD
 * information matrices, an empty stream, or a disconnected graph.
 */
PoseGraph parse_g2o(std::istream& in, std::vector<std::string>* warnings = nullptr);

/// Emits VERTEX records (current estimates) followed by EDGE records, with
/// 17 significant digits so doubles round-trip.
void write_g2o(const PoseGraph& g, std::ostream& out);

/**
 * Isotropic precision extraction from a full g2o information matrix
 * (3x3 for 2D with translation entries first, 6x6 translation-first for
 * 3D): tau is the mean of the translational diagonal, kappa the mean of
 * the rotational diagonal; off-diagonal coupling is discarded. Throws
 * std::invalid_argument if the matrix is not symmetric positive-definite.
 */
std::pair<double, double> extract_precisions(const Eigen::MatrixXd& info);

/// Replaces every edge's precisions with kappa = 1/sigma_rot^2 (radians),
/// tau = 1/sigma_trans^2 (meters).
void override_noise(PoseGraph& g, double rot_noise_deg, double trans_noise_m);

}  // namespace robo
