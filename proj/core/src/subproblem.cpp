#include "robo/subproblem.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace robo {

void SolverConfig::validate() const {
  if (initial_damping <= 0.0 || damping_up <= 1.0 || damping_down <= 1.0 ||
      max_inner_iterations < 1 || gradient_tolerance <= 0.0)
    throw std::invalid_argument("SolverConfig: all parameters must be positive "
                                "(factors > 1, iterations >= 1)");
}

namespace {

struct EndpointRef {
  int var = -1;
  int fix = -1;
};

Subproblem::Term make_term(const RelativeMeasurement& m,
                           const std::unordered_map<PoseId, int>& var_index,
                           const std::unordered_map<PoseId, int>& fix_index) {
  Subproblem::Term t;
  t.meas = m;
  if (auto it = var_index.find(m.from); it != var_index.end())
    t.i_var = it->second;
  else
    t.i_fix = fix_index.at(m.from);
  if (auto it = var_index.find(m.to); it != var_index.end())
    t.j_var = it->second;
  else
    t.j_fix = fix_index.at(m.to);
  return t;
}

std::unordered_map<PoseId, int> index_of(const std::vector<PoseId>& ids) {
  std::unordered_map<PoseId, int> map;
  map.reserve(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) map.emplace(ids[k], static_cast<int>(k));
  return map;
}

}  // namespace

Subproblem Subproblem::from_block(const PoseGraph& g, const OverlapBlock& block, Metric metric) {
  Subproblem sp;
  sp.dimension = g.dimension;
  sp.metric = metric;
  sp.variables = block.interior_nodes;
  sp.fixed_ids = block.boundary_nodes;
  sp.fixed_values = block.boundary_values;
  const auto vmap = index_of(sp.variables);
  const auto fmap = index_of(sp.fixed_ids);
  sp.terms.reserve(block.interior_edges.size() + block.outgoing_prior_edges.size() +
                   block.incoming_prior_edges.size());
  for (std::size_t e : block.interior_edges) sp.terms.push_back(make_term(g.edges[e], vmap, fmap));
  for (std::size_t e : block.outgoing_prior_edges)
    sp.terms.push_back(make_term(g.edges[e], vmap, fmap));
  for (std::size_t e : block.incoming_prior_edges)
    sp.terms.push_back(make_term(g.edges[e], vmap, fmap));
  return sp;
}

Subproblem Subproblem::anchored_full_graph(const PoseGraph& g, Metric metric, PoseId anchor,
                                           const Pose& anchor_value) {
  if (anchor >= g.num_poses())
    throw std::invalid_argument("anchored_full_graph: anchor out of range");
  Subproblem sp;
  sp.dimension = g.dimension;
  sp.metric = metric;
  for (PoseId i = 0; i < g.num_poses(); ++i)
    if (i != anchor) sp.variables.push_back(i);
  sp.fixed_ids = {anchor};
  sp.fixed_values = {anchor_value};
  const auto vmap = index_of(sp.variables);
  const auto fmap = index_of(sp.fixed_ids);
  for (const auto& m : g.edges) sp.terms.push_back(make_term(m, vmap, fmap));
  return sp;
}

Subproblem Subproblem::free_full_graph(const PoseGraph& g, Metric metric) {
  Subproblem sp;
  sp.dimension = g.dimension;
  sp.metric = metric;
  for (PoseId i = 0; i < g.num_poses(); ++i) sp.variables.push_back(i);
  const auto vmap = index_of(sp.variables);
  const auto fmap = index_of(sp.fixed_ids);
  for (const auto& m : g.edges) sp.terms.push_back(make_term(m, vmap, fmap));
  return sp;
}

void Subproblem::refresh_boundary(std::span<const Pose> values) {
  if (values.size() != fixed_values.size())
    throw std::invalid_argument("refresh_boundary: size mismatch");
  fixed_values.assign(values.begin(), values.end());
}

std::vector<Pose> Subproblem::gather(const Estimates& global) const {
  std::vector<Pose> out;
  out.reserve(variables.size());
  for (PoseId id : variables) out.push_back(global.at(id));
  return out;
}

namespace {

const Pose& endpoint(const Subproblem& sp, std::span<const Pose> estimates, int var, int fix) {
  return var >= 0 ? estimates[var] : sp.fixed_values[fix];
}

double term_dist2(const Subproblem& sp, const Subproblem::Term& t,
                  std::span<const Pose> estimates) {
  const Pose& ti = endpoint(sp, estimates, t.i_var, t.i_fix);
  const Pose& tj = endpoint(sp, estimates, t.j_var, t.j_fix);
  return dist2(sp.metric, ti, tj, t.meas);
}

// d/dv of exp(v^) t at v = 0, as a d x p matrix.
MatD rotation_action_jacobian(const VecD& t) {
  if (t.size() == 2) {
    MatD j(2, 1);
    j << -t[1], t[0];
    return j;
  }
  return MatD(-skew(Eigen::Vector3d(t[0], t[1], t[2])));
}

// Dense per-term Jacobian blocks (rows x vdim each) and residual.
struct TermLinearization {
  Eigen::MatrixXd j_i, j_j;  // empty when the endpoint is fixed
  Eigen::VectorXd r;
};

TermLinearization linearize_term(const Subproblem& sp, const Subproblem::Term& t,
                                 std::span<const Pose> estimates) {
  const int d = sp.dimension;
  const int p = (d == 2) ? 1 : 3;
  const int vdim = p + d;
  const Pose& ti = endpoint(sp, estimates, t.i_var, t.i_fix);
  const Pose& tj = endpoint(sp, estimates, t.j_var, t.j_fix);
  const MatD& ri = ti.rotation.matrix();
  const MatD& rj = tj.rotation.matrix();
  const MatD& rm = t.meas.transform.rotation.matrix();
  const double sqrt_kappa = std::sqrt(t.meas.kappa);
  const double sqrt_tau = std::sqrt(t.meas.tau);

  const int rot_rows = (sp.metric == Metric::Chordal) ? d * d : p;
  const int rows = rot_rows + d;

  TermLinearization out;
  out.r.setZero(rows);
  if (t.i_var >= 0) out.j_i.setZero(rows, vdim);
  if (t.j_var >= 0) out.j_j.setZero(rows, vdim);

  // Rotation residual block.
  if (sp.metric == Metric::Chordal) {
    const MatD rot_res = rj - ri * rm;
    for (int c = 0; c < d; ++c)
      out.r.segment(c * d, d) = sqrt_kappa * rot_res.col(c);
    for (int k = 0; k < p; ++k) {
      const MatD gen = so_generator(d, k);
      if (t.i_var >= 0) {
        const MatD di = -sqrt_kappa * (ri * gen * rm);
        for (int c = 0; c < d; ++c) out.j_i.block(c * d, k, d, 1) = di.col(c);
      }
      if (t.j_var >= 0) {
        const MatD dj = sqrt_kappa * (rj * gen);
        for (int c = 0; c < d; ++c) out.j_j.block(c * d, k, d, 1) = dj.col(c);
      }
    }
  } else {
    const MatD err = rm.transpose() * ri.transpose() * rj;
    const VecD phi = rotation_log(Rotation::unchecked(err));
    out.r.head(rot_rows) = sqrt_kappa * phi;
    if (d == 2) {
      if (t.i_var >= 0) out.j_i(0, 0) = -sqrt_kappa;
      if (t.j_var >= 0) out.j_j(0, 0) = sqrt_kappa;
    } else {
      const Eigen::Matrix3d jr_inv =
          so3_right_jacobian_inverse(Eigen::Vector3d(phi[0], phi[1], phi[2]));
      if (t.j_var >= 0) out.j_j.block(0, 0, 3, 3) = sqrt_kappa * jr_inv;
      if (t.i_var >= 0)
        out.j_i.block(0, 0, 3, 3) = -sqrt_kappa * jr_inv.transpose() * rm.transpose();
    }
  }

  // Translation residual block (identical for both metrics).
  const VecD trans_res = tj.translation - ti.translation - ri * t.meas.transform.translation;
  out.r.tail(d) = sqrt_tau * trans_res;
  if (t.i_var >= 0) {
    out.j_i.block(rot_rows, 0, d, p) =
        -sqrt_tau * (ri * rotation_action_jacobian(t.meas.transform.translation));
    out.j_i.block(rot_rows, p, d, d) = -sqrt_tau * Eigen::MatrixXd::Identity(d, d);
  }
  if (t.j_var >= 0)
    out.j_j.block(rot_rows, p, d, d) = sqrt_tau * Eigen::MatrixXd::Identity(d, d);
  return out;
}

struct NormalEquations {
  Eigen::SparseMatrix<double> h;
  Eigen::VectorXd g;
};

NormalEquations assemble(const Subproblem& sp, std::span<const Pose> estimates) {
  const int vdim = sp.tangent_dim_per_variable();
  const long dim = static_cast<long>(sp.variables.size()) * vdim;
  NormalEquations ne;
  ne.g.setZero(dim);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(sp.terms.size() * 4 * vdim * vdim);

  auto scatter = [&](int row_var, int col_var, const Eigen::MatrixXd& block) {
    const long r0 = static_cast<long>(row_var) * vdim;
    const long c0 = static_cast<long>(col_var) * vdim;
    for (int r = 0; r < vdim; ++r)
      for (int c = 0; c < vdim; ++c) triplets.emplace_back(r0 + r, c0 + c, block(r, c));
  };

  for (const auto& t : sp.terms) {
    const TermLinearization lin = linearize_term(sp, t, estimates);
    if (t.i_var >= 0) {
      scatter(t.i_var, t.i_var, lin.j_i.transpose() * lin.j_i);
      ne.g.segment(static_cast<long>(t.i_var) * vdim, vdim) += lin.j_i.transpose() * lin.r;
    }
    if (t.j_var >= 0) {
      scatter(t.j_var, t.j_var, lin.j_j.transpose() * lin.j_j);
      ne.g.segment(static_cast<long>(t.j_var) * vdim, vdim) += lin.j_j.transpose() * lin.r;
    }
    if (t.i_var >= 0 && t.j_var >= 0) {
      const Eigen::MatrixXd off = lin.j_i.transpose() * lin.j_j;
      scatter(t.i_var, t.j_var, off);
      scatter(t.j_var, t.i_var, off.transpose());
    }
  }
  ne.h.resize(dim, dim);
  ne.h.setFromTriplets(triplets.begin(), triplets.end());
  return ne;
}

std::vector<Pose> retract(const Subproblem& sp, std::span<const Pose> estimates,
                          const Eigen::VectorXd& step) {
  const int d = sp.dimension;
  const int p = (d == 2) ? 1 : 3;
  const int vdim = p + d;
  std::vector<Pose> out(estimates.begin(), estimates.end());
  for (std::size_t v = 0; v < out.size(); ++v) {
    const long base = static_cast<long>(v) * vdim;
    VecD rot_tangent(p);
    for (int k = 0; k < p; ++k) rot_tangent[k] = step[base + k];
    const Rotation new_rot =
        Rotation::unchecked(out[v].rotation.matrix() * rotation_exp(rot_tangent).matrix());
    VecD new_trans = out[v].translation;
    for (int k = 0; k < d; ++k) new_trans[k] += step[base + p + k];
    out[v] = Pose(new_rot, std::move(new_trans));
  }
  return out;
}

}  // namespace

double evaluate_block_cost(const Subproblem& sp, std::span<const Pose> estimates) {
  if (estimates.size() != sp.variables.size())
    throw std::invalid_argument("evaluate_block_cost: estimate count mismatch");
  double sum = 0.0;
  for (const auto& t : sp.terms) sum += term_dist2(sp, t, estimates);
  return 0.5 * sum;
}

std::vector<TangentUpdate> riemannian_gradient(const Subproblem& sp,
                                               std::span<const Pose> estimates) {
  if (estimates.size() != sp.variables.size())
    throw std::invalid_argument("riemannian_gradient: estimate count mismatch");
  const int d = sp.dimension;
  const int p = (d == 2) ? 1 : 3;
  const int vdim = p + d;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<long>(sp.variables.size()) * vdim);
  for (const auto& t : sp.terms) {
    const TermLinearization lin = linearize_term(sp, t, estimates);
    if (t.i_var >= 0)
      grad.segment(static_cast<long>(t.i_var) * vdim, vdim) += lin.j_i.transpose() * lin.r;
    if (t.j_var >= 0)
      grad.segment(static_cast<long>(t.j_var) * vdim, vdim) += lin.j_j.transpose() * lin.r;
  }
  std::vector<TangentUpdate> out(sp.variables.size());
  for (std::size_t v = 0; v < out.size(); ++v) {
    const long base = static_cast<long>(v) * vdim;
    out[v].rotation = VecD(p);
    out[v].translation = VecD(d);
    for (int k = 0; k < p; ++k) out[v].rotation[k] = grad[base + k];
    for (int k = 0; k < d; ++k) out[v].translation[k] = grad[base + p + k];
  }
  return out;
}

LmStepResult lm_step(const Subproblem& sp, std::vector<Pose>& estimates, const SolverConfig& cfg,
                     double& damping) {
  cfg.validate();
  if (estimates.size() != sp.variables.size())
    throw std::invalid_argument("lm_step: estimate count mismatch");

  LmStepResult result;
  result.cost_before = evaluate_block_cost(sp, estimates);
  result.cost_after = result.cost_before;
  if (!std::isfinite(result.cost_before))
    throw std::runtime_error("lm_step: non-finite cost at current estimates");

  const NormalEquations ne = assemble(sp, estimates);
  result.gradient_norm = ne.g.norm();
  if (result.gradient_norm <= cfg.gradient_tolerance) return result;

  const Eigen::VectorXd h_diag = ne.h.diagonal();
  Eigen::SparseMatrix<double> damped = ne.h;
  for (int attempt = 0; attempt < cfg.max_inner_iterations; ++attempt) {
    result.attempts = attempt + 1;
    for (long i = 0; i < h_diag.size(); ++i)
      damped.coeffRef(i, i) = h_diag[i] + damping * h_diag[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(damped);
    if (solver.info() == Eigen::Success) {
      const Eigen::VectorXd step = solver.solve(-ne.g);
      if (solver.info() == Eigen::Success && step.allFinite()) {
        const std::vector<Pose> candidate = retract(sp, estimates, step);
        const double cost = evaluate_block_cost(sp, candidate);
        if (std::isfinite(cost) && cost < result.cost_before) {
          estimates = candidate;
          result.accepted = true;
          result.cost_after = cost;
          damping = std::max(damping / cfg.damping_down, 1e-12);
          return result;
        }
      }
    }
    damping *= cfg.damping_up;  // factorization failed or no strict decrease
  }
  return result;
}

LmStepResult solve_subproblem(const Subproblem& sp, std::vector<Pose>& estimates,
                              const SolverConfig& cfg, double& damping) {
  return lm_step(sp, estimates, cfg, damping);
}

}  // namespace robo
