#include "robo/runtime.hpp"

#include "robo/random.hpp"

#include <algorithm>
#include <queue>
#include <thread>

namespace robo {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

}  // namespace

bool AgentState::owns(PoseId id) const {
  return std::binary_search(owned.begin(), owned.end(), id);
}

void ScheduleSpec::validate() const {
  if (mode == Mode::Asynchronous) {
    if (lambda_hz <= 0.0) throw std::invalid_argument("schedule: async requires lambda > 0");
    if (delay_seconds < 0.0) throw std::invalid_argument("schedule: delay must be >= 0");
    if (wall_limit_seconds <= 0.0)
      throw std::invalid_argument("schedule: async requires a positive wall limit");
  } else {
    if (max_iterations < 1) throw std::invalid_argument("schedule: max_iterations must be >= 1");
  }
}

AgentState make_agent_state(const PoseGraph& g, const BlockAssignment& a,
                            const OverlapBlock& block, const Estimates& init,
                            double initial_damping) {
  AgentState s;
  s.robot = block.robot;
  s.owned = a.blocks[block.robot];
  s.domain.reserve(block.interior_nodes.size() + block.boundary_nodes.size());
  std::merge(block.interior_nodes.begin(), block.interior_nodes.end(),
             block.boundary_nodes.begin(), block.boundary_nodes.end(),
             std::back_inserter(s.domain));
  s.slot_of.assign(g.num_poses(), -1);
  s.cache.reserve(s.domain.size());
  for (std::size_t k = 0; k < s.domain.size(); ++k) {
    s.slot_of[s.domain[k]] = static_cast<int>(k);
    s.cache.push_back(init[s.domain[k]]);
  }
  s.stamps.assign(s.domain.size(), -std::numeric_limits<double>::infinity());
  s.damping = initial_damping;
  return s;
}

std::vector<PoseUpdateMessage> project_and_share(const AgentState& state,
                                                 const CommunicationGraph& comm,
                                                 const std::vector<OverlapBlock>& blocks,
                                                 double send_time, double delay) {
  std::vector<PoseUpdateMessage> out;
  for (int beta : comm.neighbors(state.robot)) {
    const OverlapBlock& target = blocks[beta];
    PoseUpdateMessage msg;
    msg.sender = state.robot;
    msg.receiver = beta;
    msg.send_time = send_time;
    msg.deliver_time = send_time + delay;
    // Owned poses inside the neighbor's inflated block. Blocks are
    // disjoint, so subtracting the neighbor's own poses is implicit.
    for (PoseId id : state.owned) {
      const bool in_target =
          std::binary_search(target.interior_nodes.begin(), target.interior_nodes.end(), id) ||
          std::binary_search(target.boundary_nodes.begin(), target.boundary_nodes.end(), id);
      if (in_target) msg.payload.emplace_back(id, state.cache[state.slot(id)]);
    }
    if (!msg.payload.empty()) out.push_back(std::move(msg));
  }
  return out;
}

ApplyStats apply_updates(AgentState& state, std::span<const PoseUpdateMessage> inbox) {
  ApplyStats stats;
  for (const auto& msg : inbox) {
    for (const auto& [id, pose] : msg.payload) {
      if (state.owns(id)) {
        ++stats.dropped_owned;
        continue;
      }
      const int slot = state.slot(id);
      if (slot < 0) {
        ++stats.dropped_unknown;
        continue;
      }
      if (msg.send_time >= state.stamps[slot]) {
        state.cache[slot] = pose;
        state.stamps[slot] = msg.send_time;
        ++stats.applied;
      } else {
        ++stats.stale_skipped;
      }
    }
  }
  return stats;
}

namespace {

/// Shared machinery across the three regimes.
class Team {
 public:
  Team(const PoseGraph& g, const BlockAssignment& a, int omega, const Estimates& init,
       const RuntimeOptions& opt, Metric metric)
      : graph_(g), assignment_(a), options_(opt) {
    g.require_connected();
    a.validate(g.num_poses());
    opt.solver.validate();
    if (init.size() != g.num_poses())
      throw std::invalid_argument("run: init estimate size mismatch");
    comm_ = build_communication_graph(g, a, omega);
    blocks_.reserve(a.n_robots);
    for (int r = 0; r < a.n_robots; ++r)
      blocks_.push_back(build_overlap_block(g, a, r, omega, init));
    for (int r = 0; r < a.n_robots; ++r) {
      agents_.push_back(make_agent_state(g, a, blocks_[r], init, opt.solver.initial_damping));
      subproblems_.push_back(Subproblem::from_block(g, blocks_[r], metric));
    }
    inboxes_.resize(a.n_robots);
  }

  int n_robots() const { return assignment_.n_robots; }
  const CommunicationGraph& comm() const { return comm_; }
  const std::vector<OverlapBlock>& blocks() const { return blocks_; }
  AgentState& agent(int r) { return agents_[r]; }
  std::vector<PoseUpdateMessage>& inbox(int r) { return inboxes_[r]; }

  void solve_robot(int r) {
    AgentState& agent = agents_[r];
    Subproblem& sp = subproblems_[r];
    std::vector<Pose> boundary;
    boundary.reserve(sp.fixed_ids.size());
    for (PoseId id : sp.fixed_ids) boundary.push_back(agent.cache[agent.slot(id)]);
    sp.refresh_boundary(boundary);
    std::vector<Pose> local;
    local.reserve(sp.variables.size());
    for (PoseId id : sp.variables) local.push_back(agent.cache[agent.slot(id)]);
    solve_subproblem(sp, local, options_.solver, agent.damping);
    for (std::size_t k = 0; k < sp.variables.size(); ++k)
      agent.cache[agent.slot(sp.variables[k])] = local[k];
  }

  /// Runs the given robots' solves; cache writes are disjoint, so the
  /// parallel path produces the same state as the serial one.
  void solve_all(const std::vector<int>& robots) {
    if (!options_.parallel_solves || robots.size() < 2) {
      for (int r : robots) solve_robot(r);
      return;
    }
    const unsigned n_threads = std::max(
        1u, std::min<unsigned>(std::thread::hardware_concurrency(), robots.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t]() {
        for (std::size_t k = t; k < robots.size(); k += n_threads) solve_robot(robots[k]);
      });
    for (auto& th : pool) th.join();
  }

  Estimates aggregate() const {
    Estimates out(graph_.num_poses());
    for (const auto& agent : agents_)
      for (PoseId id : agent.owned) out[id] = agent.cache[agent.slot_of[id]];
    return out;
  }

 private:
  const PoseGraph& graph_;
  const BlockAssignment& assignment_;
  RuntimeOptions options_;
  CommunicationGraph comm_;
  std::vector<OverlapBlock> blocks_;
  std::vector<AgentState> agents_;
  std::vector<Subproblem> subproblems_;
  std::vector<std::vector<PoseUpdateMessage>> inboxes_;
};

std::vector<LinkTraffic> traffic_of(const std::vector<PoseUpdateMessage>& messages) {
  std::vector<LinkTraffic> t;
  t.reserve(messages.size());
  for (const auto& m : messages)
    t.push_back({m.sender, m.receiver, static_cast<long>(m.payload.size())});
  return t;
}

RunResult run_rounds(Team& team, int max_iterations, const IterationCallback& callback,
                     const std::function<std::vector<int>(long)>& select_conn) {
  RunResult result;
  for (long k = 1; k <= max_iterations; ++k) {
    const std::vector<int> conn = select_conn(k);
    team.solve_all(conn);

    // Exchange: messages go only between connected robots of this round.
    std::vector<PoseUpdateMessage> all_messages;
    for (int r : conn) {
      auto msgs = project_and_share(team.agent(r), team.comm(), team.blocks(),
                                    static_cast<double>(k), 0.0);
      for (auto& m : msgs) {
        if (std::find(conn.begin(), conn.end(), m.receiver) != conn.end())
          all_messages.push_back(std::move(m));
      }
    }
    for (const auto& m : all_messages)
      apply_updates(team.agent(m.receiver), std::span(&m, 1));

    result.iterations = k;
    result.final_time_s = static_cast<double>(k);
    if (callback) {
      const std::vector<LinkTraffic> traffic = traffic_of(all_messages);
      const Estimates estimates = team.aggregate();
      if (!callback({k, static_cast<double>(k), -1, traffic, estimates})) {
        result.stopped_early = true;
        break;
      }
    }
  }
  result.final_estimates = team.aggregate();
  return result;
}

}  // namespace

RunResult run_synchronous(const PoseGraph& g, const BlockAssignment& a, int omega,
                          const Estimates& init, const RuntimeOptions& opt, int max_iterations,
                          Metric metric, const IterationCallback& callback) {
  if (max_iterations < 1) throw std::invalid_argument("run_synchronous: max_iterations >= 1");
  Team team(g, a, omega, init, opt, metric);
  std::vector<int> all(a.n_robots);
  for (int r = 0; r < a.n_robots; ++r) all[r] = r;
  return run_rounds(team, max_iterations, callback, [&](long) { return all; });
}

RunResult run_edgewise(const PoseGraph& g, const BlockAssignment& a, int omega,
                       const Estimates& init, const RuntimeOptions& opt, int max_iterations,
                       std::uint64_t seed, Metric metric, const IterationCallback& callback) {
  if (max_iterations < 1) throw std::invalid_argument("run_edgewise: max_iterations >= 1");
  Team team(g, a, omega, init, opt, metric);
  if (team.comm().links.empty())
    throw std::invalid_argument("run_edgewise: communication graph has no links");
  DeterministicRng rng(mix_seed(seed, 0xED6E));
  return run_rounds(team, max_iterations, callback, [&](long) {
    const auto& link = team.comm().links[rng.uniform_index(team.comm().links.size())];
    return std::vector<int>{link.first, link.second};
  });
}

RunResult run_asynchronous(const PoseGraph& g, const BlockAssignment& a, int omega,
                           const Estimates& init, const RuntimeOptions& opt,
                           const ScheduleSpec& schedule, Metric metric,
                           const IterationCallback& callback) {
  ScheduleSpec sched = schedule;
  sched.mode = Mode::Asynchronous;
  sched.validate();
  Team team(g, a, omega, init, opt, metric);

  struct Event {
    double time;
    int robot;  // optimizing robot, or receiver for deliveries
    std::uint64_t seq;
    bool is_delivery;
    PoseUpdateMessage message;  // only for deliveries
  };
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      if (x.time != y.time) return x.time > y.time;
      if (x.robot != y.robot) return x.robot > y.robot;
      return x.seq > y.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> queue;
  std::uint64_t seq = 0;

  std::vector<DeterministicRng> clocks;
  clocks.reserve(a.n_robots);
  for (int r = 0; r < a.n_robots; ++r) clocks.emplace_back(mix_seed(sched.rng_seed, r));
  auto next_gap = [&](int r) {
    return sched.clock == AsyncClock::Poisson ? clocks[r].exponential(sched.lambda_hz) : 1.0;
  };
  for (int r = 0; r < a.n_robots; ++r) {
    const double t = next_gap(r);
    if (t <= sched.wall_limit_seconds) queue.push({t, r, seq++, false, {}});
  }

  RunResult result;
  long events = 0;
  while (!queue.empty()) {
    Event ev = queue.top();
    queue.pop();
    if (ev.time > sched.wall_limit_seconds) break;
    if (ev.is_delivery) {
      team.inbox(ev.robot).push_back(std::move(ev.message));
      continue;
    }

    const int r = ev.robot;
    apply_updates(team.agent(r), team.inbox(r));
    team.inbox(r).clear();
    team.solve_robot(r);
    auto messages = project_and_share(team.agent(r), team.comm(), team.blocks(), ev.time,
                                      sched.delay_seconds);
    const std::vector<LinkTraffic> traffic = traffic_of(messages);
    for (auto& m : messages) queue.push({m.deliver_time, m.receiver, seq++, true, std::move(m)});

    result.iterations = ++events;
    result.final_time_s = ev.time;
    if (callback) {
      const Estimates estimates = team.aggregate();
      if (!callback({events, ev.time, r, traffic, estimates})) {
        result.stopped_early = true;
        break;
      }
    }
    const double next = ev.time + next_gap(r);
    if (next <= sched.wall_limit_seconds) queue.push({next, r, seq++, false, {}});
  }
  result.final_estimates = team.aggregate();
  return result;
}

}  // namespace robo
