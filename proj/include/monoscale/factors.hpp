#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Core>

#include "monoscale/errors.hpp"
#include "monoscale/geometry.hpp"

namespace monoscale {

/// Default information-matrix diagonal of the kinematics factor.
inline constexpr double kDefaultFkInformation = 1e-4;
/// Default information-matrix diagonal of the monocular factor.
inline constexpr double kDefaultMcInformation = 1e-3;
inline constexpr double kDefaultPosePriorInformation = 1e6;
inline constexpr double kDefaultScalePriorInformation = 1e-14;

/// Global map scale, stored as log(s) so that s > 0 always holds.
class ScaleVar {
 public:
  ScaleVar() = default;

  static ScaleVar from_value(double s) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error("scale must be positive and finite");
    return from_log(std::log(s));
  }
  static ScaleVar from_log(double log_s) {
    ScaleVar v;
    v.log_value_ = log_s;
    return v;
  }

  double value() const { return std::exp(log_value_); }
  double log_value() const { return log_value_; }

 private:
  double log_value_ = 0.0;
};

/// How the monocular translation enters the translational residual.
enum class TransResidualForm {
  /// (t_i - t_{i-1}) - s R_{i-1} dt: the body-frame observation is rotated into the world.
  kWorldAligned,
  /// (t_i - t_{i-1}) - s dt, observation used as if it were a world-frame difference.
  kLiteral,
};

inline Vector6d uniform_information(double value) { return Vector6d::Constant(value); }

/// Relative-motion constraint from forward kinematics between poses index-1 and index.
struct FkFactor {
  std::size_t index = 1;
  Pose delta;
  Vector6d information = uniform_information(kDefaultFkInformation);

  Matrix6d information_matrix() const { return information.asDiagonal(); }
};

/// Relative-motion constraint from monocular odometry. `delta_trans` is in
/// unscaled map units.
struct McFactor {
  std::size_t index = 1;
  Rotation delta_rot;
  Vector3d delta_trans = Vector3d::Zero();
  Vector6d information = uniform_information(kDefaultMcInformation);
  TransResidualForm form = TransResidualForm::kWorldAligned;

  Matrix6d information_matrix() const { return information.asDiagonal(); }
};

/// Unary factor on pose 0 and on the scale. Fixes the world frame.
struct PriorFactor {
  Pose pose_prior;
  Vector6d pose_information = uniform_information(kDefaultPosePriorInformation);
  double scale_prior = 1.0;
  double scale_information = kDefaultScalePriorInformation;

  Eigen::Matrix<double, 7, 7> information_matrix() const {
    Vector7d d;
    d << pose_information, scale_information;
    return d.asDiagonal();
  }
};

template <typename Diag>
void check_information(const Diag& d, const std::string& what) {
  if (!((d.array() > 0.0).all() && d.allFinite())) {
    throw Error(what + " information must be positive definite");
  }
}

/// Mahalanobis cost r^T info r (no 1/2 factor).
inline double factor_cost(const Eigen::VectorXd& residual, const Eigen::MatrixXd& info) {
  if (info.rows() != residual.size() || info.cols() != residual.size()) {
    throw DimensionMismatch("residual has " + std::to_string(residual.size()) +
                            " entries but information is " + std::to_string(info.rows()) + "x" +
                            std::to_string(info.cols()));
  }
  return residual.dot(info * residual);
}

/// Same as factor_cost for a diagonal information matrix.
template <int N>
double diagonal_cost(const Eigen::Matrix<double, N, 1>& residual,
                     const Eigen::Matrix<double, N, 1>& info_diag) {
  return residual.dot(info_diag.cwiseProduct(residual));
}

// --- residuals ---------------------------------------------------------------

inline Twist fk_residual(const Pose& t_prev, const Pose& t_curr, const FkFactor& f) {
  return se3_log(inverse(t_prev) * t_curr * inverse(f.delta));
}

/// Stacked [r_trans; r_rot].
inline Vector6d mc_residual(const Pose& t_prev, const Pose& t_curr, const ScaleVar& s,
                            const McFactor& f) {
  const Vector3d observed = f.form == TransResidualForm::kWorldAligned
                                ? Vector3d(t_prev.rotation * f.delta_trans)
                                : f.delta_trans;
  Vector6d r;
  r.head<3>() = (t_curr.translation - t_prev.translation) - s.value() * observed;
  r.tail<3>() = so3_log(t_prev.rotation.inverse() * t_curr.rotation * f.delta_rot.inverse());
  return r;
}

/// [log(prior^-1 t0); log s - log s_prior].
inline Vector7d prior_residual(const Pose& t0, const ScaleVar& s, const PriorFactor& p) {
  Vector7d r;
  r.head<6>() = se3_log(inverse(p.pose_prior) * t0).vector();
  r[6] = s.log_value() - std::log(p.scale_prior);
  return r;
}

// --- jacobians ---------------------------------------------------------------
// Pose variables are perturbed on the right, T <- T exp(d); the scale is
// perturbed additively in log space.

struct FkLinearization {
  Vector6d residual;
  Matrix6d d_prev;
  Matrix6d d_curr;
};

struct McLinearization {
  Vector6d residual;
  Matrix6d d_prev;
  Matrix6d d_curr;
  Vector6d d_log_scale;
};

struct PriorLinearization {
  Vector7d residual;
  Eigen::Matrix<double, 7, 6> d_pose;
  Vector7d d_log_scale;
};

inline FkLinearization linearize(const Pose& t_prev, const Pose& t_curr, const FkFactor& f) {
  const Pose err = inverse(t_prev) * t_curr * inverse(f.delta);
  const Twist r = se3_log(err);
  const Matrix6d jr_inv = se3_right_jacobian_inverse(r);
  return {r.vector(), -jr_inv * adjoint(inverse(err)), jr_inv * adjoint(f.delta)};
}

inline McLinearization linearize(const Pose& t_prev, const Pose& t_curr, const ScaleVar& s,
                                 const McFactor& f) {
  McLinearization lin;
  lin.residual = mc_residual(t_prev, t_curr, s, f);
  lin.d_prev.setZero();
  lin.d_curr.setZero();

  const Matrix3d r_prev = t_prev.rotation.matrix();
  lin.d_curr.topLeftCorner<3, 3>() = t_curr.rotation.matrix();
  lin.d_prev.topLeftCorner<3, 3>() = -r_prev;
  if (f.form == TransResidualForm::kWorldAligned) {
    lin.d_prev.block<3, 3>(0, 3) = s.value() * r_prev * hat(f.delta_trans);
    lin.d_log_scale.head<3>() = -s.value() * (r_prev * f.delta_trans);
  } else {
    lin.d_log_scale.head<3>() = -s.value() * f.delta_trans;
  }
  lin.d_log_scale.tail<3>().setZero();

  const Rotation err = t_prev.rotation.inverse() * t_curr.rotation * f.delta_rot.inverse();
  const Matrix3d jr_inv = so3_right_jacobian_inverse(lin.residual.tail<3>());
  lin.d_curr.bottomRightCorner<3, 3>() = jr_inv * f.delta_rot.matrix();
  lin.d_prev.bottomRightCorner<3, 3>() = -jr_inv * err.matrix().transpose();
  return lin;
}

inline PriorLinearization linearize(const Pose& t0, const ScaleVar& s, const PriorFactor& p) {
  PriorLinearization lin;
  lin.residual = prior_residual(t0, s, p);
  lin.d_pose.setZero();
  lin.d_pose.topRows<6>() = se3_right_jacobian_inverse(Twist(Vector6d(lin.residual.head<6>())));
  lin.d_log_scale.setZero();
  lin.d_log_scale[6] = 1.0;
  return lin;
}

}  // namespace monoscale
