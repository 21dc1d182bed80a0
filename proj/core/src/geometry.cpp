#include "robo/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace robo {

bool is_special_orthogonal(const MatD& m, double tol) {
  const auto d = m.rows();
  if (m.cols() != d || (d != 2 && d != 3)) return false;
  const double ortho = (m.transpose() * m - MatD::Identity(d, d)).norm();
  return ortho <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

Rotation::Rotation(const MatD& m) : m_(m) {
  if (!is_special_orthogonal(m))
    throw std::invalid_argument("Rotation: matrix is not in SO(d)");
}

void RelativeMeasurement::validate() const {
  if (kappa <= 0.0 || tau <= 0.0)
    throw std::invalid_argument("RelativeMeasurement: precisions must be positive");
  if (from == to)
    throw std::invalid_argument("RelativeMeasurement: self-loop");
}

Pose compose(const Pose& a, const Pose& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("compose: dimension mismatch");
  return Pose(Rotation::unchecked(a.rotation.matrix() * b.rotation.matrix()),
              a.rotation.matrix() * b.translation + a.translation);
}

Pose inverse(const Pose& p) {
  MatD rt = p.rotation.matrix().transpose();
  return Pose(Rotation::unchecked(rt), VecD(-(rt * p.translation)));
}

namespace {

Eigen::Vector3d vee(const Eigen::Matrix3d& m) {
  return {m(2, 1), m(0, 2), m(1, 0)};
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  // w = sin(theta) * axis; c = cos(theta). atan2 is well conditioned at
  // both ends of [0, pi].
  const Eigen::Vector3d w = 0.5 * vee(r - r.transpose());
  const double s = w.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  const double theta = std::atan2(s, c);

  if (theta < 1e-9) return w;  // theta/sin(theta) -> 1
  if (c > -0.999) return (theta / s) * w;

  // Near pi: sin(theta)*axis_hat cancels in the symmetric part, leaving
  // 2c I + 2(1-c) a a^T, from which the axis is recovered accurately.
  const Eigen::Matrix3d sym = r + r.transpose();
  int k = 0;
  sym.diagonal().maxCoeff(&k);
  const double denom = 2.0 * (1.0 - c);
  Eigen::Vector3d axis;
  axis[k] = std::sqrt(std::max(0.0, (sym(k, k) - 2.0 * c) / denom));
  for (int i = 0; i < 3; ++i)
    if (i != k) axis[i] = sym(i, k) / (denom * axis[k]);
  axis.normalize();
  // sin(theta) > 0 on (0, pi), so w fixes the sign while it is measurable;
  // at exactly pi keep the canonical choice axis[k] > 0.
  if (w.dot(axis) < 0.0) axis = -axis;
  return theta * axis;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& v) {
  const double theta2 = v.squaredNorm();
  const double theta = std::sqrt(theta2);
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (theta < 1e-6) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  const Eigen::Matrix3d v_hat = skew(v);
  return Eigen::Matrix3d::Identity() + a * v_hat + b * v_hat * v_hat;
}

}  // namespace

VecD rotation_log(const Rotation& r) {
  if (r.dim() == 2) {
    VecD v(1);
    v[0] = std::atan2(r.matrix()(1, 0), r.matrix()(0, 0));
    return v;
  }
  Eigen::Vector3d w = so3_log(r.matrix());
  VecD v(3);
  v << w[0], w[1], w[2];
  return v;
}

Rotation rotation_exp(const VecD& v) {
  if (!v.allFinite())
    throw std::invalid_argument("rotation_exp: non-finite tangent vector");
  if (v.size() == 1) {
    const double c = std::cos(v[0]), s = std::sin(v[0]);
    MatD m(2, 2);
    m << c, -s, s, c;
    return Rotation::unchecked(std::move(m));
  }
  if (v.size() != 3)
    throw std::invalid_argument("rotation_exp: tangent vector must have length 1 or 3");
  return Rotation::unchecked(MatD(so3_exp(Eigen::Vector3d(v[0], v[1], v[2]))));
}

Rotation project_to_rotation(const MatD& m) {
  const auto d = m.rows();
  if (m.cols() != d || (d != 2 && d != 3))
    throw std::invalid_argument("project_to_rotation: expected square 2x2 or 3x3 input");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(d - 1) <= 1e-12 * std::max(1.0, sv(0)))
    throw std::invalid_argument("project_to_rotation: singular input");
  MatD r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    MatD flip = MatD::Identity(d, d);
    flip(d - 1, d - 1) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return Rotation::unchecked(std::move(r));
}

static void check_edge_dims(const Pose& ti, const Pose& tj, const RelativeMeasurement& m) {
  if (ti.dim() != tj.dim() || ti.dim() != m.transform.dim())
    throw std::invalid_argument("dist2: dimension mismatch between poses and measurement");
}

double chordal_dist2(const Pose& ti, const Pose& tj, const RelativeMeasurement& m) {
  check_edge_dims(ti, tj, m);
  const MatD rot_res = tj.rotation.matrix() - ti.rotation.matrix() * m.transform.rotation.matrix();
  const VecD trans_res =
      tj.translation - ti.translation - ti.rotation.matrix() * m.transform.translation;
  return m.kappa * rot_res.squaredNorm() + m.tau * trans_res.squaredNorm();
}

double geodesic_dist2(const Pose& ti, const Pose& tj, const RelativeMeasurement& m) {
  check_edge_dims(ti, tj, m);
  const MatD err = m.transform.rotation.matrix().transpose() *
                   ti.rotation.matrix().transpose() * tj.rotation.matrix();
  const VecD angle = rotation_log(Rotation::unchecked(err));
  const VecD trans_res =
      tj.translation - ti.translation - ti.rotation.matrix() * m.transform.translation;
  return m.kappa * angle.squaredNorm() + m.tau * trans_res.squaredNorm();
}

double dist2(Metric metric, const Pose& ti, const Pose& tj, const RelativeMeasurement& m) {
  return metric == Metric::Chordal ? chordal_dist2(ti, tj, m) : geodesic_dist2(ti, tj, m);
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

MatD so_generator(int d, int k) {
  if (d == 2) {
    if (k != 0) throw std::invalid_argument("so_generator: 2D has a single generator");
    MatD g(2, 2);
    g << 0, -1, 1, 0;
    return g;
  }
  if (d != 3 || k < 0 || k > 2) throw std::invalid_argument("so_generator: bad arguments");
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e[k] = 1.0;
  return MatD(skew(e));
}

Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& phi) {
  const double theta2 = phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  double c;  // coefficient of skew(phi)^2
  if (theta < 1e-4) {
    c = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    c = 1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  const Eigen::Matrix3d phi_hat = skew(phi);
  return Eigen::Matrix3d::Identity() + 0.5 * phi_hat + c * phi_hat * phi_hat;
}

}  // namespace robo
