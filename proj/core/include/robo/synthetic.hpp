// Seeded synthetic pose-graph generation for desk-scale experiments:
// odometry chains over a ground-truth trajectory plus random loop closures,
// with isotropic Gaussian measurement noise.

#pragma once

#include "robo/pose_graph.hpp"

#include <cstdint>
#include <string>

namespace robo {

enum class SyntheticShape { Chain, Ring, Grid };

struct SyntheticSpec {
  SyntheticShape shape = SyntheticShape::Ring;
  int n_poses = 100;
  int dimension = 2;
  double rot_noise_deg = 2.0;
  double trans_noise_m = 0.05;
  double loop_closure_prob = 0.3;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on n_poses < 2, bad dimension, negative
  /// noise, or a probability outside [0, 1].
  void validate() const;
};

struct SyntheticResult {
  PoseGraph graph;         // poses initialized to ground truth
  Estimates ground_truth;  // noise-free trajectory
};

/// Deterministic for a given spec; kappa/tau are set to 1/sigma^2 (capped
/// at 1e12 when a noise magnitude is zero).
SyntheticResult generate_synthetic(const SyntheticSpec& spec);

/// Parses "shape:n" or "shape:n:2d|3d", e.g. "ring:200", "grid:225:3d".
SyntheticSpec parse_synthetic_spec(const std::string& text);

std::string to_string(SyntheticShape shape);

}  // namespace robo
