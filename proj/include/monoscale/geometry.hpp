#pragma once

// SO(3)/SE(3) primitives. Tangent vectors are ordered [rho; phi]
// (translation first, rotation second) everywhere in the library.

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "monoscale/errors.hpp"

namespace monoscale {

using Vector3d = Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Vector7d = Eigen::Matrix<double, 7, 1>;
using Matrix3d = Eigen::Matrix3d;
using Matrix4d = Eigen::Matrix4d;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Rotation angles at or beyond pi - kCutLocusMargin are rejected by log maps.
inline constexpr double kCutLocusMargin = 1e-6;
/// Below this angle the exp/log maps use their Taylor expansions.
inline constexpr double kSmallAngle = 1e-8;

inline Matrix3d hat(const Vector3d& v) {
  Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

inline Vector3d vee(const Matrix3d& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

/// Unit quaternion rotation. Always normalized.
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}
  explicit Rotation(const Eigen::Quaterniond& q) : q_(q.normalized()) {}
  Rotation(double w, double x, double y, double z) : Rotation(Eigen::Quaterniond(w, x, y, z)) {}

  static Rotation identity() { return {}; }
  static Rotation from_angle_axis(double angle, const Vector3d& axis) {
    return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
  }
  /// Nearest rotation to `m` is not computed; `m` must already be orthonormal.
  static Rotation from_matrix(const Matrix3d& m) { return Rotation(Eigen::Quaterniond(m)); }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Matrix3d matrix() const { return q_.toRotationMatrix(); }

  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Rotation operator*(const Rotation& other) const { return Rotation(q_ * other.q_); }
  Vector3d operator*(const Vector3d& v) const { return q_ * v; }

 private:
  Eigen::Quaterniond q_;
};

/// Rigid transform x_parent = rotation * x_child + translation.
struct Pose {
  Rotation rotation;
  Vector3d translation = Vector3d::Zero();

  Pose() = default;
  Pose(const Rotation& r, const Vector3d& t) : rotation(r), translation(t) {}

  static Pose identity() { return {}; }
  static Pose from_translation(const Vector3d& t) { return {Rotation(), t}; }
  static Pose from_rotation(const Rotation& r) { return {r, Vector3d::Zero()}; }
  static Pose from_matrix(const Matrix4d& m) {
    return {Rotation::from_matrix(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>()};
  }

  Matrix4d matrix() const {
    Matrix4d m = Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation.matrix();
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  Vector3d operator*(const Vector3d& p) const { return rotation * p + translation; }
};

inline Pose compose(const Pose& a, const Pose& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

inline Pose inverse(const Pose& p) {
  const Rotation r_inv = p.rotation.inverse();
  return {r_inv, -(r_inv * p.translation)};
}

/// se(3) coordinates: rho in meters, phi axis-angle in radians.
struct Twist {
  Vector3d rho = Vector3d::Zero();
  Vector3d phi = Vector3d::Zero();

  Twist() = default;
  Twist(const Vector3d& rho_in, const Vector3d& phi_in) : rho(rho_in), phi(phi_in) {}
  explicit Twist(const Vector6d& v) : rho(v.head<3>()), phi(v.tail<3>()) {}

  Vector6d vector() const {
    Vector6d v;
    v << rho, phi;
    return v;
  }
};

namespace detail {

enum class Branch { kAuto, kSeries, kClosed };

inline constexpr double kSeriesAngle = 1e-2;
// The Q-block coefficients lose more digits to cancellation.
inline constexpr double kSeriesAngleQ = 1e-1;

inline bool use_series(double theta, Branch b, double threshold) {
  if (b == Branch::kSeries) return true;
  if (b == Branch::kClosed) return false;
  return theta < threshold;
}

// (1 - cos t) / t^2
inline double coeff_b(double t, Branch b = Branch::kAuto) {
  if (use_series(t, b, kSmallAngle)) return 0.5 - t * t / 24.0;
  const double s = std::sin(0.5 * t) / (0.5 * t);
  return 0.5 * s * s;
}

// (t - sin t) / t^3
inline double coeff_c(double t, Branch b = Branch::kAuto) {
  if (use_series(t, b, kSeriesAngle)) {
    const double t2 = t * t;
    return 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2 * t2 * t2 / 362880.0;
  }
  return (t - std::sin(t)) / (t * t * t);
}

// (1 - (t/2) cot(t/2)) / t^2
inline double coeff_d(double t, Branch b = Branch::kAuto) {
  if (use_series(t, b, kSeriesAngle)) {
    const double t2 = t * t;
    return 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0 + t2 * t2 * t2 / 1209600.0;
  }
  const double h = 0.5 * t;
  return (1.0 - h / std::tan(h)) / (t * t);
}

// (t^2 + 2 cos t - 2) / (2 t^4)
inline double coeff_q2(double t, Branch b = Branch::kAuto) {
  if (use_series(t, b, kSeriesAngleQ)) {
    const double t2 = t * t;
    return 1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0;
  }
  const double t2 = t * t;
  return (t2 + 2.0 * std::cos(t) - 2.0) / (2.0 * t2 * t2);
}

// (2t - 3 sin t + t cos t) / (2 t^5)
inline double coeff_q3(double t, Branch b = Branch::kAuto) {
  if (use_series(t, b, kSeriesAngleQ)) {
    const double t2 = t * t;
    return 1.0 / 120.0 - t2 / 2520.0 + t2 * t2 / 120960.0;
  }
  const double t2 = t * t;
  return (2.0 * t - 3.0 * std::sin(t) + t * std::cos(t)) / (2.0 * t2 * t2 * t);
}

inline Matrix3d so3_left_jacobian(const Vector3d& phi, Branch b = Branch::kAuto) {
  const double t = phi.norm();
  const Matrix3d P = hat(phi);
  return Matrix3d::Identity() + coeff_b(t, b) * P + coeff_c(t, b) * P * P;
}

inline Matrix3d so3_left_jacobian_inverse(const Vector3d& phi, Branch b = Branch::kAuto) {
  const double t = phi.norm();
  const Matrix3d P = hat(phi);
  return Matrix3d::Identity() - 0.5 * P + coeff_d(t, b) * P * P;
}

inline Matrix3d se3_q_block(const Vector3d& rho, const Vector3d& phi, Branch b = Branch::kAuto) {
  const double t = phi.norm();
  const Matrix3d P = hat(phi);
  const Matrix3d Rh = hat(rho);
  const Matrix3d PR = P * Rh;
  const Matrix3d RP = Rh * P;
  const Matrix3d PRP = PR * P;
  return 0.5 * Rh + coeff_c(t, b) * (PR + RP + PRP) +
         coeff_q2(t, b) * (P * PR + RP * P - 3.0 * PRP) +
         coeff_q3(t, b) * (PRP * P + P * PRP);
}

inline Rotation so3_exp(const Vector3d& v, Branch b) {
  const double t = v.norm();
  if (use_series(t, b, kSmallAngle)) {
    const double t2 = t * t;
    const double w = 1.0 - t2 / 8.0;
    const double k = 0.5 - t2 / 48.0;
    return Rotation(w, k * v.x(), k * v.y(), k * v.z());
  }
  const double k = std::sin(0.5 * t) / t;
  return Rotation(std::cos(0.5 * t), k * v.x(), k * v.y(), k * v.z());
}

inline Vector3d so3_log(const Rotation& r, Branch b) {
  Eigen::Quaterniond q = r.quaternion();
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  const Vector3d u = q.vec();
  const double n = u.norm();
  const double angle = 2.0 * std::atan2(n, q.w());
  if (angle >= std::numbers::pi - kCutLocusMargin) {
    throw CutLocusError("rotation angle " + std::to_string(angle) + " rad is at the cut locus");
  }
  if (use_series(angle, b, kSmallAngle)) {
    const double w = q.w();
    return (2.0 / w) * (1.0 - n * n / (3.0 * w * w)) * u;
  }
  return (angle / n) * u;
}

}  // namespace detail

inline Rotation so3_exp(const Vector3d& v) { return detail::so3_exp(v, detail::Branch::kAuto); }

/// Axis-angle vector of `r`. Throws CutLocusError at angles >= pi - 1e-6.
inline Vector3d so3_log(const Rotation& r) { return detail::so3_log(r, detail::Branch::kAuto); }

inline Pose se3_exp(const Twist& x) {
  return {so3_exp(x.phi), detail::so3_left_jacobian(x.phi) * x.rho};
}

/// Throws CutLocusError at rotation angles >= pi - 1e-6.
inline Twist se3_log(const Pose& p) {
  const Vector3d phi = so3_log(p.rotation);
  return {detail::so3_left_jacobian_inverse(phi) * p.translation, phi};
}

/// Adjoint so that p * exp(x) * p^-1 = exp(adjoint(p) * x).
inline Matrix6d adjoint(const Pose& p) {
  const Matrix3d R = p.rotation.matrix();
  Matrix6d ad = Matrix6d::Zero();
  ad.topLeftCorner<3, 3>() = R;
  ad.topRightCorner<3, 3>() = hat(p.translation) * R;
  ad.bottomRightCorner<3, 3>() = R;
  return ad;
}

/// Inverse of the SO(3) right Jacobian: log(exp(phi) exp(d)) ~ phi + Jr^-1(phi) d.
inline Matrix3d so3_right_jacobian_inverse(const Vector3d& phi) {
  return detail::so3_left_jacobian_inverse(-phi);
}

inline Matrix6d se3_left_jacobian_inverse(const Twist& x) {
  const Matrix3d jl_inv = detail::so3_left_jacobian_inverse(x.phi);
  const Matrix3d q = detail::se3_q_block(x.rho, x.phi);
  Matrix6d out = Matrix6d::Zero();
  out.topLeftCorner<3, 3>() = jl_inv;
  out.topRightCorner<3, 3>() = -jl_inv * q * jl_inv;
  out.bottomRightCorner<3, 3>() = jl_inv;
  return out;
}

/// Inverse of the SE(3) right Jacobian: log(exp(x) exp(d)) ~ x + Jr^-1(x) d.
inline Matrix6d se3_right_jacobian_inverse(const Twist& x) {
  return se3_left_jacobian_inverse(Twist(-x.rho, -x.phi));
}

/// Rotation angle in [0, pi].
inline double rotation_angle(const Rotation& r) {
  const Eigen::Quaterniond& q = r.quaternion();
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

/// Geodesic-ish distance used by tests: norm of the tangent of a^-1 b.
inline double tangent_distance(const Pose& a, const Pose& b) {
  return se3_log(inverse(a) * b).vector().norm();
}

}  // namespace monoscale
