#include "robo/initialization.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <deque>
#include <optional>

namespace robo {

namespace {

/// Left-multiplies every estimate by inverse(est[0]) so pose 0 is identity.
void gauge_to_pose0(Estimates& est) {
  const Pose offset = inverse(est[0]);
  for (auto& p : est) p = compose(offset, p);
}

/// Relative transform of edge e oriented from u to its neighbor v.
Pose oriented_transform(const RelativeMeasurement& m, PoseId u) {
  return m.from == u ? m.transform : inverse(m.transform);
}

// Per-block dead reckoning in the block's own frame (first pose at
// identity). Consecutive-id edges first; BFS over intra-block edges if the
// chain has gaps.
void dead_reckon_block(const PoseGraph& g, const std::vector<PoseId>& block,
                       const std::vector<std::vector<std::pair<PoseId, std::size_t>>>& adj,
                       const std::vector<int>& owner, Estimates& est) {
  const int robot = owner[block.front()];
  est[block.front()] = Pose::Identity(g.dimension);

  bool chain_ok = true;
  for (std::size_t k = 1; k < block.size() && chain_ok; ++k) {
    const PoseId prev = block[k - 1], cur = block[k];
    std::optional<std::size_t> found;
    for (const auto& [v, e] : adj[prev]) {
      if (v == cur) {
        found = e;
        break;
      }
    }
    if (!found) {
      chain_ok = false;
      break;
    }
    est[cur] = compose(est[prev], oriented_transform(g.edges[*found], prev));
  }
  if (chain_ok) return;

  // Shortest intra-block measurement paths from the block's first pose.
  std::deque<PoseId> queue{block.front()};
  std::vector<char> settled(g.num_poses(), 0);
  settled[block.front()] = 1;
  for (PoseId id : block) est[id] = Pose::Identity(g.dimension);
  while (!queue.empty()) {
    const PoseId u = queue.front();
    queue.pop_front();
    for (const auto& [v, e] : adj[u]) {
      if (owner[v] != robot || settled[v]) continue;
      settled[v] = 1;
      est[v] = compose(est[u], oriented_transform(g.edges[e], u));
      queue.push_back(v);
    }
  }
}

}  // namespace

Estimates odometry_init(const PoseGraph& g, const BlockAssignment& a, OdometryAnchor anchor) {
  g.require_connected();
  a.validate(g.num_poses());
  const auto adj = g.adjacency();

  Estimates est(g.num_poses(), Pose::Identity(g.dimension));
  for (const auto& block : a.blocks) dead_reckon_block(g, block, adj, a.owner, est);

  if (anchor == OdometryAnchor::Tree && a.n_robots > 1) {
    // Robot-level BFS tree from robot 0; each tree edge pins the child
    // block's frame so that one inter-robot measurement is satisfied.
    std::vector<char> placed(a.n_robots, 0);
    placed[0] = 1;
    std::deque<int> queue{0};
    while (!queue.empty()) {
      const int alpha = queue.front();
      queue.pop_front();
      for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto& m = g.edges[e];
        const int ro_from = a.owner[m.from], ro_to = a.owner[m.to];
        int beta = -1;
        if (ro_from == alpha && !placed[ro_to])
          beta = ro_to;
        else if (ro_to == alpha && !placed[ro_from])
          beta = ro_from;
        if (beta < 0) continue;
        const PoseId u = (ro_from == alpha) ? m.from : m.to;
        const PoseId v = (ro_from == alpha) ? m.to : m.from;
        const Pose target_v = compose(est[u], oriented_transform(m, u));
        const Pose offset = compose(target_v, inverse(est[v]));
        for (PoseId id : a.blocks[beta]) est[id] = compose(offset, est[id]);
        placed[beta] = 1;
        queue.push_back(beta);
      }
    }
  }
  gauge_to_pose0(est);
  return est;
}

Estimates spanning_tree_init(const PoseGraph& g, const BlockAssignment& a) {
  g.require_connected();
  a.validate(g.num_poses());
  const auto adj = g.adjacency();
  const std::size_t n = g.num_poses();

  // 0-1 BFS: path cost counts inter-block edges crossed.
  constexpr int kInf = std::numeric_limits<int>::max();
  std::vector<int> dist(n, kInf);
  std::vector<std::size_t> parent_edge(n, SIZE_MAX);
  std::vector<PoseId> parent(n, 0);
  std::deque<PoseId> dq{0};
  dist[0] = 0;
  while (!dq.empty()) {
    const PoseId u = dq.front();
    dq.pop_front();
    for (const auto& [v, e] : adj[u]) {
      const int w = (a.owner[u] == a.owner[v]) ? 0 : 1;
      if (dist[u] != kInf && dist[u] + w < dist[v]) {
        dist[v] = dist[u] + w;
        parent[v] = u;
        parent_edge[v] = e;
        if (w == 0)
          dq.push_front(v);
        else
          dq.push_back(v);
      }
    }
  }

  // Compose along the settled tree, parents before children.
  std::vector<std::vector<PoseId>> children(n);
  for (PoseId v = 1; v < n; ++v) children[parent[v]].push_back(v);
  Estimates est(n, Pose::Identity(g.dimension));
  std::deque<PoseId> order{0};
  while (!order.empty()) {
    const PoseId u = order.front();
    order.pop_front();
    for (PoseId v : children[u]) {
      est[v] = compose(est[u], oriented_transform(g.edges[parent_edge[v]], u));
      order.push_back(v);
    }
  }
  return est;  // pose 0 is identity by construction
}

namespace {

// Scatters a (scale * I_bs) block or a general dense block into triplets.
void add_block(std::vector<Eigen::Triplet<double>>& trips, long r0, long c0,
               const Eigen::MatrixXd& block) {
  for (int r = 0; r < block.rows(); ++r)
    for (int c = 0; c < block.cols(); ++c)
      if (block(r, c) != 0.0) trips.emplace_back(r0 + r, c0 + c, block(r, c));
}

Eigen::VectorXd solve_spd(const std::vector<Eigen::Triplet<double>>& trips, long dim,
                          const Eigen::VectorXd& rhs, const char* what) {
  Eigen::SparseMatrix<double> h(dim, dim);
  h.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": factorization failed (rank deficiency)");
  Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite())
    throw std::runtime_error(std::string(what) + ": solve failed (rank deficiency)");
  return x;
}

}  // namespace

Estimates chordal_init(const PoseGraph& g) {
  g.require_connected();
  const int d = g.dimension;
  const int bs = d * d;  // rotation block size
  const std::size_t n = g.num_poses();

  // Stage 1: unconstrained rotation blocks, R_0 = I moved to the RHS.
  // Columns of the unknown R_i stay decoupled except through the
  // (R~ (x) I) mixing, handled blockwise.
  const auto col_of = [&](PoseId i) -> long { return (static_cast<long>(i) - 1) * bs; };
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<long>(n - 1) * bs);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(bs, bs);

  auto kron_with_identity = [&](const MatD& m) {
    // (m (x) I_d): entry ((a d + r), (b d + r)) = m(a, b).
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(bs, bs);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int r = 0; r < d; ++r) out(a * d + r, b * d + r) = m(a, b);
    return out;
  };
  auto vec_of = [&](const MatD& m) {
    Eigen::VectorXd v(bs);
    for (int c = 0; c < d; ++c) v.segment(c * d, d) = m.col(c);
    return v;
  };

  for (const auto& m : g.edges) {
    const MatD& rm = m.transform.rotation.matrix();
    const double k = m.kappa;
    const bool i_free = m.from != 0, j_free = m.to != 0;
    if (i_free && j_free) {
      add_block(trips, col_of(m.from), col_of(m.from), k * eye);
      add_block(trips, col_of(m.to), col_of(m.to), k * eye);
      const Eigen::MatrixXd coupling = -k * kron_with_identity(rm);
      add_block(trips, col_of(m.from), col_of(m.to), coupling);
      add_block(trips, col_of(m.to), col_of(m.from), coupling.transpose());
    } else if (j_free) {  // edge (0, j): residual vec(R_j) - vec(R~)
      add_block(trips, col_of(m.to), col_of(m.to), k * eye);
      rhs.segment(col_of(m.to), bs) += k * vec_of(rm);
    } else {  // edge (i, 0): residual vec(I) - (R~^T (x) I) vec(R_i)
      add_block(trips, col_of(m.from), col_of(m.from), k * eye);
      rhs.segment(col_of(m.from), bs) += k * vec_of(MatD(rm.transpose()));
    }
  }

  Estimates est(n, Pose::Identity(d));
  if (n > 1) {
    const Eigen::VectorXd x =
        solve_spd(trips, static_cast<long>(n - 1) * bs, rhs, "chordal_init rotation stage");
    for (PoseId i = 1; i < n; ++i) {
      MatD block(d, d);
      for (int c = 0; c < d; ++c) block.col(c) = x.segment(col_of(i) + c * d, d);
      est[i] = Pose(project_to_rotation(block), VecD::Zero(d));
    }
  }

  // Stage 2: translations with rotations fixed, t_0 = 0.
  const auto tcol = [&](PoseId i) -> long { return (static_cast<long>(i) - 1) * d; };
  std::vector<Eigen::Triplet<double>> t_trips;
  Eigen::VectorXd t_rhs = Eigen::VectorXd::Zero(static_cast<long>(n - 1) * d);
  const Eigen::MatrixXd eye_d = Eigen::MatrixXd::Identity(d, d);
  for (const auto& m : g.edges) {
    const VecD c = est[m.from].rotation.matrix() * m.transform.translation;
    const bool i_free = m.from != 0, j_free = m.to != 0;
    if (i_free) {
      add_block(t_trips, tcol(m.from), tcol(m.from), m.tau * eye_d);
      t_rhs.segment(tcol(m.from), d) -= m.tau * c;
    }
    if (j_free) {
      add_block(t_trips, tcol(m.to), tcol(m.to), m.tau * eye_d);
      t_rhs.segment(tcol(m.to), d) += m.tau * c;
    }
    if (i_free && j_free) {
      add_block(t_trips, tcol(m.from), tcol(m.to), -m.tau * eye_d);
      add_block(t_trips, tcol(m.to), tcol(m.from), -m.tau * eye_d);
    }
  }
  if (n > 1) {
    const Eigen::VectorXd t =
        solve_spd(t_trips, static_cast<long>(n - 1) * d, t_rhs, "chordal_init translation stage");
    for (PoseId i = 1; i < n; ++i) {
      VecD ti(d);
      for (int k = 0; k < d; ++k) ti[k] = t[tcol(i) + k];
      est[i] = Pose(est[i].rotation, std::move(ti));
    }
  }
  return est;
}

Estimates initialize(const PoseGraph& g, const BlockAssignment& a, InitScheme scheme,
                     OdometryAnchor anchor) {
  switch (scheme) {
    case InitScheme::Odometry: return odometry_init(g, a, anchor);
    case InitScheme::SpanningTree: return spanning_tree_init(g, a);
    case InitScheme::Chordal: return chordal_init(g);
  }
  throw std::invalid_argument("initialize: unknown scheme");
}

}  // namespace robo
