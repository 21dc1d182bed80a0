// Rigid-body types on SO(d)/SE(d), d in {2,3}, and the squared measurement
// distances used by the pose-graph objective. All values are immutable after
// construction and safe to share across threads.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>

namespace robo {

using PoseId = std::uint32_t;

// Fixed-capacity (stack-allocated) dynamic types covering d = 2 and d = 3.
using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::AutoAlign, 3, 3>;
using VecD = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::AutoAlign, 3, 1>;

/// Tolerance used when validating rotation matrices.
inline constexpr double kRotationTol = 1e-9;

/// True if m is orthonormal with determinant +1 within tol.
bool is_special_orthogonal(const MatD& m, double tol = kRotationTol);

/**
 * A d x d rotation matrix, d in {2,3}. 2D rotations are stored as 2x2
 * matrices rather than angles so the cost formulas are dimension-uniform.
 */
class Rotation {
 public:
  /// 3D identity. Containers need a default constructor; prefer Identity(d).
  Rotation() : m_(MatD::Identity(3, 3)) {}

  /// Validating constructor; throws std::invalid_argument if m is not in SO(d).
  explicit Rotation(const MatD& m);

  /// Bypasses validation. For internal use where the result is on-manifold
  /// by construction (exponential map, products of rotations).
  static Rotation unchecked(MatD m) {
    Rotation r;
    r.m_ = std::move(m);
    return r;
  }

  static Rotation Identity(int d) { return unchecked(MatD::Identity(d, d)); }

  const MatD& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  /// Tangent dimension d(d-1)/2: 1 in 2D, 3 in 3D.
  int tangent_dim() const { return dim() == 2 ? 1 : 3; }

 private:
  MatD m_;
};

/// Rigid transform T = (R, t).
struct Pose {
  Rotation rotation;
  VecD translation;

  Pose() : rotation(), translation(VecD::Zero(3)) {}
  Pose(Rotation r, VecD t) : rotation(std::move(r)), translation(std::move(t)) {
    if (rotation.dim() != translation.size())
      throw std::invalid_argument("Pose: rotation/translation dimension mismatch");
  }

  static Pose Identity(int d) { return Pose(Rotation::Identity(d), VecD::Zero(d)); }
  int dim() const { return rotation.dim(); }
};

/// Directed relative pose measurement with isotropic precisions.
struct RelativeMeasurement {
  PoseId from = 0;
  PoseId to = 0;
  Pose transform;      // (R~_ij, t~_ij)
  double kappa = 1.0;  // rotation precision, > 0
  double tau = 1.0;    // translation precision, > 0

  /// Throws std::invalid_argument on kappa/tau <= 0 or a self-loop.
  void validate() const;
};

/// Group operation: (R_a R_b, R_a t_b + t_a). Throws on dimension mismatch.
Pose compose(const Pose& a, const Pose& b);

/// Group inverse: (R^T, -R^T t).
Pose inverse(const Pose& p);

/**
 * Logarithm map. Returns the axis-angle vector (length 3) in 3D with norm
 * equal to the geodesic angle in [0, pi]; in 2D returns the signed angle in
 * (-pi, pi] wrapped as a length-1 vector.
 *
 * At angle pi the axis sign is ambiguous; the axis is recovered from the
 * column of the symmetric part with the largest diagonal entry and the
 * component at that index is made positive.
 */
VecD rotation_log(const Rotation& r);

/// Exponential map: length-1 vector -> 2D rotation, length-3 -> Rodrigues.
Rotation rotation_exp(const VecD& v);

/// Nearest special-orthogonal matrix in Frobenius norm (SVD with determinant
/// correction). Throws std::invalid_argument on singular input.
Rotation project_to_rotation(const MatD& m);

/**
 * Chordal squared distance of the edge residual:
 *   kappa ||R_j - R_i R~_ij||_F^2 + tau ||t_j - t_i - R_i t~_ij||_2^2.
 * The global 1/2 prefactor of the objective is applied at cost aggregation,
 * never here.
 */
double chordal_dist2(const Pose& ti, const Pose& tj, const RelativeMeasurement& m);

/**
 * Geodesic squared distance of the edge residual:
 *   kappa ||Log(R~_ij^T R_i^T R_j)||_2^2 + tau ||t_j - t_i - R_i t~_ij||_2^2.
 */
double geodesic_dist2(const Pose& ti, const Pose& tj, const RelativeMeasurement& m);

enum class Metric { Chordal, Geodesic };

double dist2(Metric metric, const Pose& ti, const Pose& tj, const RelativeMeasurement& m);

// --- Tangent-space helpers used by the local solver ---------------------

/// Skew matrix: skew(v) * u = v x u.
Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// k-th generator of so(d): d/dt exp(t G_k) at t = 0. k < d(d-1)/2.
MatD so_generator(int d, int k);

/// Inverse of the right Jacobian of SO(3) at phi:
/// Log(exp(phi^) exp(v^)) ~ phi + Jr_inv(phi) v for small v.
Eigen::Matrix3d so3_right_jacobian_inverse(const Eigen::Vector3d& phi);

}  // namespace robo
