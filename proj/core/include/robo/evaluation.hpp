// Ownership-based aggregation, global metrics (relative suboptimality and
// RMSE absolute position error), communication-cost accounting, and the
// centralized reference oracle.

#pragma once

#include "robo/runtime.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace robo {

/// Global estimate assembled by taking each pose from its owner's cache.
/// Throws if an owned pose is missing from its owner's domain.
Estimates aggregate_solution(const std::vector<AgentState>& agents, std::size_t n_poses);

/// The pose-graph objective: (1/2) sum of squared edge distances.
double global_cost(const PoseGraph& g, const Estimates& estimates, Metric metric);

/// (F_k - F*) / F*. Throws std::invalid_argument when F* <= 0 (degenerate
/// zero-noise case; report absolute cost instead).
double relative_suboptimality(double f_k, double f_star);

/**
 * RMSE of position residuals after rigid (rotation + translation, no
 * scale) least-squares alignment of the estimated positions onto the
 * reference positions. Throws when the sets differ in size or have fewer
 * than d+1 poses (alignment under-determined).
 */
double rmse_ape(const Estimates& estimates, const Estimates& reference);

/// Seven 32-bit floats per pose.
inline long comm_bytes(long poses) { return poses * 7 * 4; }
/// Kb means kilobits: bits / 1000.
inline double comm_kilobits(long poses) { return static_cast<double>(poses) * 224.0 / 1000.0; }

struct ReferenceSolution {
  Estimates estimates;
  double optimal_cost = 0.0;  // F*
  Metric metric = Metric::Chordal;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/**
 * Chordal initialization followed by full-graph Levenberg-Marquardt with
 * pose 0 anchored at identity, iterated until the gradient norm is <= 1e-9
 * or the relative cost change is <= 1e-12 (default cap 500 iterations).
 * Non-convergence within the cap is flagged, not thrown.
 */
ReferenceSolution centralized_reference(const PoseGraph& g, Metric metric,
                                        int max_iterations = 500);

/// One CSV row of global metrics per iteration or event.
struct IterationRecord {
  long k = 0;
  double time_s = 0.0;
  double cost = 0.0;
  double delta_rel = 0.0;  // absolute cost when f_star <= 0 (flagged in metadata)
  double rmse = 0.0;
  long total_bytes = 0;     // all links, this iteration
  long max_link_bytes = 0;  // largest single link, this iteration
};

/**
 * Callback adapter: computes global metrics per iteration, optionally
 * streams CSV rows, and requests an early stop once delta_rel falls to
 * target_subopt (disabled when <= 0). Usable directly as an
 * IterationCallback.
 */
class RunEvaluator {
 public:
  RunEvaluator(const PoseGraph& g, Metric metric, const ReferenceSolution& reference,
               std::ostream* csv = nullptr, double target_subopt = 0.0);

  bool operator()(const IterationEvent& event);

  const std::vector<IterationRecord>& records() const { return records_; }
  bool target_reached() const { return target_reached_; }

  /// First k with delta_rel <= threshold, if any.
  std::optional<long> first_below(double threshold) const;

  /// Metadata lines ("# key: value") followed by the fixed column header.
  static void write_csv_preamble(std::ostream& out, const std::string& command_line,
                                 double f_star, Metric metric);

 private:
  const PoseGraph& graph_;
  Metric metric_;
  const ReferenceSolution& reference_;
  std::ostream* csv_;
  double target_subopt_;
  bool target_reached_ = false;
  std::vector<IterationRecord> records_;
};

std::string to_string(Metric metric);

}  // namespace robo
