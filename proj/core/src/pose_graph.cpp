#include "robo/pose_graph.hpp"

#include <deque>

namespace robo {

void PoseGraph::add_edge(RelativeMeasurement m) {
  m.validate();
  if (m.from >= poses.size() || m.to >= poses.size())
    throw std::invalid_argument("PoseGraph::add_edge: endpoint out of range");
  if (m.transform.dim() != dimension)
    throw std::invalid_argument("PoseGraph::add_edge: measurement dimension mismatch");
  edges.push_back(std::move(m));
}

std::vector<std::vector<std::pair<PoseId, std::size_t>>> PoseGraph::adjacency() const {
  std::vector<std::vector<std::pair<PoseId, std::size_t>>> adj(poses.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    adj[edges[e].from].emplace_back(edges[e].to, e);
    adj[edges[e].to].emplace_back(edges[e].from, e);
  }
  return adj;
}

bool PoseGraph::is_connected() const {
  if (poses.empty()) return false;
  const auto adj = adjacency();
  std::vector<char> seen(poses.size(), 0);
  std::deque<PoseId> queue{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!queue.empty()) {
    const PoseId u = queue.front();
    queue.pop_front();
    for (const auto& [v, e] : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        queue.push_back(v);
      }
    }
  }
  return count == poses.size();
}

void PoseGraph::require_connected() const {
  if (poses.empty()) throw std::invalid_argument("pose graph has no vertices");
  if (!is_connected()) throw std::invalid_argument("pose graph is not connected");
}

double total_residual2(const PoseGraph& g, const Estimates& estimates, Metric metric) {
  double sum = 0.0;
  for (const auto& m : g.edges) sum += dist2(metric, estimates[m.from], estimates[m.to], m);
  return sum;
}

}  // namespace robo
