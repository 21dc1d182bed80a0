// Per-robot subproblem over an overlap block: the interior-edge sum plus
// outgoing/incoming prior terms against fixed boundary poses, solved
// approximately with single damped Gauss-Newton (Levenberg-Marquardt)
// steps over the block's manifold variables.
//
// Tangent parameterization: right perturbation on rotations, R <- R exp(v^),
// and additive global-frame translation perturbation, t <- t + delta. This
// keeps the translation rows of the Jacobian linear for both metrics.

#pragma once

#include "robo/partition.hpp"

#include <span>

namespace robo {

struct SolverConfig {
  double initial_damping = 1e-4;
  double damping_up = 10.0;      // multiplied on rejection
  double damping_down = 3.0;     // divided on acceptance
  int max_inner_iterations = 10;
  double gradient_tolerance = 1e-12;

  void validate() const;
};

/// Per-variable tangent vector: rotation part of length d(d-1)/2 and
/// translation part of length d.
struct TangentUpdate {
  VecD rotation;
  VecD translation;
};

struct Subproblem {
  int dimension = 2;
  Metric metric = Metric::Chordal;
  std::vector<PoseId> variables;   // interior nodes, ascending
  std::vector<PoseId> fixed_ids;   // boundary nodes, ascending
  std::vector<Pose> fixed_values;  // T-bar, parallel to fixed_ids

  /// One residual term per measurement; endpoints resolve to a variable
  /// slot or a fixed slot (the other index is -1).
  struct Term {
    RelativeMeasurement meas;
    int i_var = -1, i_fix = -1;
    int j_var = -1, j_fix = -1;
  };
  std::vector<Term> terms;  // interior edges, then outgoing, then incoming priors

  /// Builds the structure from an overlap block. Fixed values are copied
  /// from the block; refresh_boundary replaces them later.
  static Subproblem from_block(const PoseGraph& g, const OverlapBlock& block, Metric metric);

  /// Whole-graph problem with one pose frozen (gauge anchor), used by the
  /// centralized reference solver.
  static Subproblem anchored_full_graph(const PoseGraph& g, Metric metric, PoseId anchor,
                                        const Pose& anchor_value);

  /// Whole-graph problem with no anchor (gauge handled by damping).
  static Subproblem free_full_graph(const PoseGraph& g, Metric metric);

  void refresh_boundary(std::span<const Pose> values);

  /// Extracts the variable estimates out of a global estimate vector.
  std::vector<Pose> gather(const Estimates& global) const;

  int tangent_dim_per_variable() const {
    return dimension + (dimension == 2 ? 1 : 3);
  }
};

/// Eq-style block cost: (1/2) [ sum interior + sum outgoing-prior +
/// sum incoming-prior ] of squared distances. estimates is parallel to
/// sp.variables. Throws if sizes disagree.
double evaluate_block_cost(const Subproblem& sp, std::span<const Pose> estimates);

/// Gradient of evaluate_block_cost in the tangent parameterization; fixed
/// poses receive no gradient.
std::vector<TangentUpdate> riemannian_gradient(const Subproblem& sp,
                                               std::span<const Pose> estimates);

struct LmStepResult {
  bool accepted = false;
  double cost_before = 0.0;
  double cost_after = 0.0;
  double gradient_norm = 0.0;
  int attempts = 0;
};

/**
 * One Levenberg-Marquardt step: builds the Gauss-Newton normal equations,
 * adds lambda * diag(H) damping, solves the sparse symmetric system, and
 * retracts. Accepts only on strict cost decrease; otherwise raises the
 * damping and retries up to cfg.max_inner_iterations. On rejection the
 * estimates are left untouched. damping is carried across calls.
 */
LmStepResult lm_step(const Subproblem& sp, std::vector<Pose>& estimates,
                     const SolverConfig& cfg, double& damping);

/// Exactly one lm_step per outer iteration (the single-step local solve).
LmStepResult solve_subproblem(const Subproblem& sp, std::vector<Pose>& estimates,
                              const SolverConfig& cfg, double& damping);

}  // namespace robo
