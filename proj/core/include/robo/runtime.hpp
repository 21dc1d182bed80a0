// Distributed iteration loop under synchronous, edgewise, and asynchronous
// communication, executed as a deterministic discrete-event simulation with
// per-robot state caches and fixed message delays.
//
// The reference execution is a single-threaded deterministic event loop.
// An optional parallel executor may run same-event-time solves concurrently;
// results are identical because each robot's cache is touched only by its
// own solve and message application happens between rounds.

#pragma once

#include "robo/subproblem.hpp"

#include <functional>
#include <vector>

namespace robo {

/// Per-robot local view: own poses plus cached neighbor poses over the
/// inflated block, with last-update timestamps and persistent LM damping.
struct AgentState {
  int robot = -1;
  std::vector<PoseId> owned;   // V_alpha, ascending
  std::vector<PoseId> domain;  // interior plus boundary, ascending
  std::vector<Pose> cache;     // parallel to domain
  std::vector<double> stamps;  // send_time of the newest applied update
  std::vector<int> slot_of;    // global id -> domain slot, -1 if absent
  double damping = 1e-4;

  int slot(PoseId id) const {
    return id < slot_of.size() ? slot_of[id] : -1;
  }
  bool owns(PoseId id) const;
};

AgentState make_agent_state(const PoseGraph& g, const BlockAssignment& a,
                            const OverlapBlock& block, const Estimates& init,
                            double initial_damping);

struct PoseUpdateMessage {
  int sender = -1;
  int receiver = -1;
  double send_time = 0.0;
  double deliver_time = 0.0;
  std::vector<std::pair<PoseId, Pose>> payload;  // sender-owned poses only
};

/// One message per communication-graph neighbor, carrying exactly the
/// sender-owned poses inside that neighbor's inflated block (interior plus
/// boundary, minus the neighbor's own poses).
std::vector<PoseUpdateMessage> project_and_share(const AgentState& state,
                                                 const CommunicationGraph& comm,
                                                 const std::vector<OverlapBlock>& blocks,
                                                 double send_time = 0.0, double delay = 0.0);

struct ApplyStats {
  int applied = 0;
  int stale_skipped = 0;
  int dropped_owned = 0;    // payload tried to overwrite an owned pose
  int dropped_unknown = 0;  // payload id outside the agent's domain
};

/// Overwrites cached non-owned poses with the newest payload per pose (by
/// send_time); owned poses are never overwritten. Idempotent for
/// duplicated messages.
ApplyStats apply_updates(AgentState& state, std::span<const PoseUpdateMessage> inbox);

enum class Mode { Synchronous, Edgewise, Asynchronous };
enum class AsyncClock { Poisson, RoundRobin /* test-only, unit gaps */ };

struct ScheduleSpec {
  Mode mode = Mode::Synchronous;
  int max_iterations = 100;         // sync/edgewise
  double wall_limit_seconds = 0.0;  // async
  double lambda_hz = 0.0;           // async Poisson rate, shared by all agents
  double delay_seconds = 0.0;       // async fixed message delay
  std::uint64_t rng_seed = 0;
  AsyncClock clock = AsyncClock::Poisson;

  void validate() const;
};

struct LinkTraffic {
  int from = -1;
  int to = -1;
  long poses = 0;
};

struct IterationEvent {
  long index = 0;    // 1-based iteration (sync/edgewise) or optimization event (async)
  double time_s = 0.0;
  int robot = -1;    // optimizing robot for async events; -1 otherwise
  const std::vector<LinkTraffic>& traffic;  // poses transmitted at this event
  const Estimates& estimates;               // ownership-aggregated global view
};

/// Return false to stop the run early.
using IterationCallback = std::function<bool(const IterationEvent&)>;

struct RuntimeOptions {
  SolverConfig solver;
  bool parallel_solves = false;
};

struct RunResult {
  Estimates final_estimates;
  long iterations = 0;
  double final_time_s = 0.0;
  bool stopped_early = false;  // callback requested stop
};

RunResult run_synchronous(const PoseGraph& g, const BlockAssignment& a, int omega,
                          const Estimates& init, const RuntimeOptions& opt, int max_iterations,
                          Metric metric, const IterationCallback& callback = {});

/// One uniformly sampled communication link per iteration; only its two
/// robots solve and exchange. Throws if the communication graph has no links.
RunResult run_edgewise(const PoseGraph& g, const BlockAssignment& a, int omega,
                       const Estimates& init, const RuntimeOptions& opt, int max_iterations,
                       std::uint64_t seed, Metric metric, const IterationCallback& callback = {});

/// Discrete-event simulation: per-robot optimization triggers (Poisson
/// clock with shared rate) and message deliveries (send_time + delay).
/// Events are ordered by (time, robot, sequence) for determinism.
RunResult run_asynchronous(const PoseGraph& g, const BlockAssignment& a, int omega,
                           const Estimates& init, const RuntimeOptions& opt,
                           const ScheduleSpec& schedule, Metric metric,
                           const IterationCallback& callback = {});

}  // namespace robo
