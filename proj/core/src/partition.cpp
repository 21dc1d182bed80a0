#include "robo/partition.hpp"

#include <algorithm>
#include <deque>
#include <istream>
#include <sstream>

namespace robo {

void BlockAssignment::validate(std::size_t n_poses) const {
  if (n_robots < 1 || blocks.size() != static_cast<std::size_t>(n_robots))
    throw std::invalid_argument("BlockAssignment: robot count mismatch");
  if (owner.size() != n_poses)
    throw std::invalid_argument("BlockAssignment: owner map size mismatch");
  std::vector<char> seen(n_poses, 0);
  for (int r = 0; r < n_robots; ++r) {
    if (blocks[r].empty()) throw std::invalid_argument("BlockAssignment: empty block");
    for (PoseId id : blocks[r]) {
      if (id >= n_poses || seen[id])
        throw std::invalid_argument("BlockAssignment: blocks do not partition the pose set");
      seen[id] = 1;
      if (owner[id] != r)
        throw std::invalid_argument("BlockAssignment: owner inconsistent with blocks");
    }
  }
  for (char s : seen)
    if (!s) throw std::invalid_argument("BlockAssignment: blocks do not cover the pose set");
}

BlockAssignment sequential_partition(const PoseGraph& g, int n_robots) {
  const std::size_t n = g.num_poses();
  if (n_robots < 1) throw std::invalid_argument("sequential_partition: need at least one robot");
  if (static_cast<std::size_t>(n_robots) > n)
    throw std::invalid_argument("sequential_partition: more robots than poses");

  BlockAssignment a;
  a.n_robots = n_robots;
  a.owner.assign(n, 0);
  a.blocks.resize(n_robots);
  const std::size_t base = n / n_robots;
  const std::size_t remainder = n % n_robots;
  PoseId next = 0;
  for (int r = 0; r < n_robots; ++r) {
    const std::size_t size = base + (static_cast<std::size_t>(r) < remainder ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k, ++next) {
      a.owner[next] = r;
      a.blocks[r].push_back(next);
    }
  }
  return a;
}

BlockAssignment assignment_from_blocks(std::vector<std::vector<PoseId>> blocks,
                                       std::size_t n_poses) {
  BlockAssignment a;
  a.n_robots = static_cast<int>(blocks.size());
  a.blocks = std::move(blocks);
  a.owner.assign(n_poses, -1);
  for (int r = 0; r < a.n_robots; ++r) {
    auto& b = a.blocks[r];
    std::sort(b.begin(), b.end());
    for (PoseId id : b) {
      if (id >= n_poses) throw std::invalid_argument("assignment: pose id out of range");
      a.owner[id] = r;
    }
  }
  a.validate(n_poses);
  return a;
}

BlockAssignment parse_partition_file(std::istream& in, std::size_t n_poses) {
  std::vector<std::vector<PoseId>> blocks;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::vector<PoseId> ids;
    PoseId id;
    while (ss >> id) ids.push_back(id);
    if (!ss.eof()) throw std::invalid_argument("partition file: malformed id list");
    if (!ids.empty()) blocks.push_back(std::move(ids));
  }
  if (blocks.empty()) throw std::invalid_argument("partition file: no robots");
  return assignment_from_blocks(std::move(blocks), n_poses);
}

std::vector<int> graph_distance(const PoseGraph& g, const std::vector<PoseId>& source_set) {
  if (source_set.empty()) throw std::invalid_argument("graph_distance: empty source set");
  const auto adj = g.adjacency();
  std::vector<int> dist(g.num_poses(), kUnreachable);
  std::deque<PoseId> queue;
  for (PoseId s : source_set) {
    if (s >= g.num_poses()) throw std::invalid_argument("graph_distance: source out of range");
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const PoseId u = queue.front();
    queue.pop_front();
    for (const auto& [v, e] : adj[u]) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

OverlapBlock build_overlap_block(const PoseGraph& g, const BlockAssignment& a, int robot,
                                 int omega, const Estimates& current_estimates) {
  if (robot < 0 || robot >= a.n_robots)
    throw std::invalid_argument("build_overlap_block: robot index out of range");
  if (omega < 0) throw std::invalid_argument("build_overlap_block: omega must be >= 0");
  if (current_estimates.size() != g.num_poses())
    throw std::invalid_argument("build_overlap_block: estimate size mismatch");

  const std::vector<int> dist = graph_distance(g, a.blocks[robot]);

  OverlapBlock block;
  block.robot = robot;
  block.omega = omega;
  for (PoseId i = 0; i < g.num_poses(); ++i)
    if (dist[i] <= omega) block.interior_nodes.push_back(i);

  // Every node at distance omega+1 has an edge into the interior (the first
  // hop of its shortest path), so the boundary is exactly that shell.
  std::vector<PoseId> boundary;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const int di = dist[g.edges[e].from];
    const int dj = dist[g.edges[e].to];
    if (di <= omega && dj <= omega) {
      block.interior_edges.push_back(e);
    } else if (di <= omega && dj == omega + 1) {
      block.outgoing_prior_edges.push_back(e);
      boundary.push_back(g.edges[e].to);
    } else if (dj <= omega && di == omega + 1) {
      block.incoming_prior_edges.push_back(e);
      boundary.push_back(g.edges[e].from);
    }
  }
  std::sort(boundary.begin(), boundary.end());
  boundary.erase(std::unique(boundary.begin(), boundary.end()), boundary.end());
  block.boundary_nodes = std::move(boundary);
  block.boundary_values.reserve(block.boundary_nodes.size());
  for (PoseId b : block.boundary_nodes) block.boundary_values.push_back(current_estimates[b]);
  return block;
}

bool CommunicationGraph::linked(int a, int b) const {
  if (a > b) std::swap(a, b);
  return std::binary_search(links.begin(), links.end(), std::make_pair(a, b));
}

std::vector<int> CommunicationGraph::neighbors(int robot) const {
  std::vector<int> out;
  for (const auto& [a, b] : links) {
    if (a == robot) out.push_back(b);
    if (b == robot) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CommunicationGraph build_communication_graph(const PoseGraph& g, const BlockAssignment& a,
                                             int omega) {
  a.validate(g.num_poses());
  CommunicationGraph comm;
  comm.n_robots = a.n_robots;
  std::vector<std::vector<char>> reaches(a.n_robots, std::vector<char>(a.n_robots, 0));
  for (int r = 0; r < a.n_robots; ++r) {
    const std::vector<int> dist = graph_distance(g, a.blocks[r]);
    for (PoseId i = 0; i < g.num_poses(); ++i)
      if (dist[i] != kUnreachable && dist[i] <= omega + 1) reaches[r][a.owner[i]] = 1;
  }
  for (int x = 0; x < a.n_robots; ++x)
    for (int y = x + 1; y < a.n_robots; ++y)
      if (reaches[x][y] || reaches[y][x]) comm.links.push_back({x, y});
  return comm;
}

}  // namespace robo
