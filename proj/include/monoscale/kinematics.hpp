#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "monoscale/errors.hpp"
#include "monoscale/geometry.hpp"

namespace monoscale {

/// Revolute joint: move by `origin` from the previous frame, then rotate
/// about `axis` (expressed in the frame after `origin`).
struct Joint {
  Vector3d axis = Vector3d::UnitZ();
  Pose origin;
};

/// Serial chain. Gripper pose = base * prod_j(origin_j * Rot(axis_j, q_j)) * gripper_offset.
struct LimbModel {
  std::vector<Joint> joints;
  Pose base_pose;
  Pose gripper_offset;

  std::size_t dof() const { return joints.size(); }

  /// Sum of every fixed offset length along the chain, an upper bound on the
  /// distance from the base origin to the gripper origin.
  double reach() const {
    double r = 0.0;
    for (const auto& j : joints) r += j.origin.translation.norm();
    return r + gripper_offset.translation.norm();
  }

  void validate() const {
    if (joints.empty()) throw DimensionMismatch("limb model needs at least one joint");
    for (std::size_t i = 0; i < joints.size(); ++i) {
      if (std::abs(joints[i].axis.norm() - 1.0) > 1e-12) {
        throw DimensionMismatch("joint " + std::to_string(i) + " axis is not unit length");
      }
    }
  }
};

struct JointReading {
  double timestamp = 0.0;
  Eigen::VectorXd angles;
};

/// Four-joint limb used by the simulator: base yaw, then three pitch joints,
/// link lengths 0.05/0.15/0.15/0.05 m. The dimensions are placeholders, not
/// measurements of any physical robot. Gripper z (the camera axis) points
/// along the last link.
inline LimbModel default_testbed_limb() {
  LimbModel m;
  m.base_pose = Pose::from_translation({0.0, 0.0, 0.25});
  m.joints = {
      {Vector3d::UnitZ(), Pose::identity()},
      {Vector3d::UnitY(), Pose::from_translation({0.0, 0.0, 0.05})},
      {Vector3d::UnitY(), Pose::from_translation({0.15, 0.0, 0.0})},
      {Vector3d::UnitY(), Pose::from_translation({0.15, 0.0, 0.0})},
  };
  m.gripper_offset = Pose(Rotation::from_angle_axis(std::numbers::pi / 2.0, Vector3d::UnitY()),
                          Vector3d(0.05, 0.0, 0.0));
  return m;
}

inline void check_angles(const LimbModel& model, const Eigen::VectorXd& angles) {
  if (static_cast<std::size_t>(angles.size()) != model.dof()) {
    throw DimensionMismatch("expected " + std::to_string(model.dof()) + " joint angles, got " +
                            std::to_string(angles.size()));
  }
  if (!angles.allFinite()) throw DimensionMismatch("joint angles must be finite");
}

inline Pose fk_pose(const LimbModel& model, const Eigen::VectorXd& angles) {
  check_angles(model, angles);
  Pose p = model.base_pose;
  for (std::size_t j = 0; j < model.dof(); ++j) {
    const auto& joint = model.joints[j];
    p = p * joint.origin *
        Pose::from_rotation(Rotation::from_angle_axis(angles[static_cast<Eigen::Index>(j)], joint.axis));
  }
  return p * model.gripper_offset;
}

/// Relative gripper motion between two readings, fk(prev)^-1 * fk(curr).
inline Pose fk_delta(const LimbModel& model, const JointReading& prev, const JointReading& curr) {
  return inverse(fk_pose(model, prev.angles)) * fk_pose(model, curr.angles);
}

/// 6xN body-frame Jacobian by central differences: column j is
/// log(fk(q - h e_j)^-1 fk(q + h e_j)) / 2h.
inline Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian_numeric(const LimbModel& model,
                                                                 const Eigen::VectorXd& angles,
                                                                 double step = 1e-6) {
  check_angles(model, angles);
  Eigen::Matrix<double, 6, Eigen::Dynamic> J(6, angles.size());
  for (Eigen::Index j = 0; j < angles.size(); ++j) {
    Eigen::VectorXd lo = angles, hi = angles;
    lo[j] -= step;
    hi[j] += step;
    J.col(j) = se3_log(inverse(fk_pose(model, lo)) * fk_pose(model, hi)).vector() / (2.0 * step);
  }
  return J;
}

}  // namespace monoscale
