#pragma once

// Synthetic data source: limb trajectory over hemisphere terrain, noisy joint
// readings, scale-ambiguous odometry and an unscaled terrain cloud.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "monoscale/errors.hpp"
#include "monoscale/fusion.hpp"
#include "monoscale/geometry.hpp"
#include "monoscale/kinematics.hpp"
#include "monoscale/mapping.hpp"

namespace monoscale {

struct Hemisphere {
  Vector3d center = Vector3d::Zero();
  double radius = 0.03;
};

/// Ground plane z = 0 over a square patch, with hemispheres resting on it.
struct Terrain {
  Eigen::Vector2d patch_center{0.24, 0.0};
  double patch_half_extent = 0.12;
  std::vector<Hemisphere> hemispheres{
      {{0.24, 0.00, 0.0}, 0.030},
      {{0.19, 0.07, 0.0}, 0.020},
      {{0.30, -0.06, 0.0}, 0.025},
  };

  /// Surface height at (x, y).
  double height(double x, double y) const {
    double h = 0.0;
    for (const auto& s : hemispheres) {
      const double d2 = (x - s.center.x()) * (x - s.center.x()) + (y - s.center.y()) * (y - s.center.y());
      if (d2 < s.radius * s.radius) h = std::max(h, s.center.z() + std::sqrt(s.radius * s.radius - d2));
    }
    return h;
  }

  /// Outward unit normal at the surface point above (x, y).
  Vector3d normal(double x, double y) const {
    const double h = height(x, y);
    if (h <= 0.0) return Vector3d::UnitZ();
    for (const auto& s : hemispheres) {
      const Vector3d p(x, y, h);
      if (std::abs((p - s.center).norm() - s.radius) < 1e-9 * std::max(1.0, s.radius)) {
        return (p - s.center).normalized();
      }
    }
    return Vector3d::UnitZ();
  }

  std::vector<Vector3d> apexes() const {
    std::vector<Vector3d> out;
    for (const auto& s : hemispheres) out.push_back(s.center + Vector3d(0, 0, s.radius));
    return out;
  }
};

struct CameraConfig {
  double fov_deg = 100.0;
  double rate_hz = 30.0;
};

struct SimConfig {
  std::uint64_t seed = 1;
  double true_scale = 2.0;
  int keyframes = 20;
  /// Camera frames between consecutive keyframes.
  int keyframe_stride = 10;
  double joint_noise_stddev = 0.002;
  /// Absolute per-axis translation noise of odometry and cloud, unscaled units.
  double vo_trans_noise_stddev = 0.0;
  /// Per-axis translation noise of odometry relative to the step length.
  double vo_trans_noise_rel = 0.01;
  double vo_rot_noise_stddev = 0.2 * std::numbers::pi / 180.0;
  Terrain terrain;
  int cloud_points_per_keyframe = 20000;
  CameraConfig camera;
  /// Peak yaw excursion of the sweep, radians.
  double sweep_yaw = 0.35;

  void validate() const {
    auto require = [](bool ok, const char* field, const std::string& what) {
      if (!ok) throw ConfigError(field, what);
    };
    auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    require(std::isfinite(true_scale) && true_scale > 0.0, "true_scale", "must be > 0");
    require(keyframes >= 2, "keyframes", "must be >= 2");
    require(keyframe_stride >= 1, "keyframe_stride", "must be >= 1");
    require(finite_nonneg(joint_noise_stddev), "joint_noise_stddev", "must be >= 0");
    require(finite_nonneg(vo_trans_noise_stddev), "vo_trans_noise_stddev", "must be >= 0");
    require(finite_nonneg(vo_trans_noise_rel), "vo_trans_noise_rel", "must be >= 0");
    require(finite_nonneg(vo_rot_noise_stddev), "vo_rot_noise_stddev", "must be >= 0");
    require(cloud_points_per_keyframe >= 1, "cloud_points_per_keyframe", "must be >= 1");
    require(camera.fov_deg > 0.0 && camera.fov_deg < 180.0, "camera.fov_deg", "must be in (0, 180)");
    require(std::isfinite(camera.rate_hz) && camera.rate_hz > 0.0, "camera.rate_hz", "must be > 0");
    require(std::isfinite(terrain.patch_half_extent) && terrain.patch_half_extent > 0.0,
            "terrain.patch_half_extent", "must be > 0");
    require(std::isfinite(sweep_yaw), "sweep_yaw", "must be finite");
    for (const auto& h : terrain.hemispheres) {
      require(std::isfinite(h.radius) && h.radius > 0.0, "terrain.hemispheres.radius", "must be > 0");
      require(h.center.allFinite(), "terrain.hemispheres.center", "must be finite");
    }
  }
};

struct Trajectory {
  std::vector<Eigen::VectorXd> truth_angles;
  std::vector<Pose> truth_poses;
  std::vector<JointReading> readings;
};

struct SimBundle {
  std::vector<Pose> truth_poses;
  std::vector<JointReading> joint_readings;
  std::vector<VoDelta> vo_deltas;
  PointCloud unscaled_cloud;
  std::vector<Vector3d> truth_graspable;
};

namespace detail {

/// Independent engine per generator so that changing one stream leaves the
/// others untouched.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return std::mt19937_64(seq);
}

inline constexpr std::uint64_t kJointStream = 1;
inline constexpr std::uint64_t kVoStream = 2;
inline constexpr std::uint64_t kCloudStream = 3;

/// Noiseless joint angles at normalized time u in [0, 1]. For the yaw +
/// three-pitch limb the wrist keeps the camera roughly facing down.
inline Eigen::VectorXd sweep_angles(std::size_t dof, double u, double yaw_center, double sweep_yaw) {
  const double pi = std::numbers::pi;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dof));
  if (dof == 4) {
    q[0] = yaw_center + sweep_yaw * std::sin(2.0 * pi * u);
    q[1] = 0.10 + 0.15 * u;
    q[2] = 0.70 + 0.25 * u + 0.10 * std::sin(3.0 * pi * u);
    q[3] = pi / 2.0 - q[1] - q[2] + 0.20 * std::sin(2.0 * pi * u + 0.5);
    return q;
  }
  for (std::size_t j = 0; j < dof; ++j) {
    q[static_cast<Eigen::Index>(j)] = 0.3 * std::sin(2.0 * pi * u + static_cast<double>(j));
  }
  return q;
}

}  // namespace detail

/// Sweep over the terrain followed by a descent. Truth poses are forward
/// kinematics of the noiseless angles; readings add Gaussian joint noise.
inline Trajectory generate_trajectory(const LimbModel& model, const SimConfig& config) {
  config.validate();
  model.validate();
  const Vector3d base = model.base_pose.translation;
  const double reach = model.reach();
  for (const auto& apex : config.terrain.apexes()) {
    if ((apex - base).norm() > reach) {
      throw UnreachableTerrain("hemisphere apex at distance " + std::to_string((apex - base).norm()) +
                               " m exceeds the limb reach " + std::to_string(reach) + " m");
    }
  }
  const Vector3d patch(config.terrain.patch_center.x(), config.terrain.patch_center.y(), 0.0);
  if ((patch - base).norm() > reach) {
    throw UnreachableTerrain("terrain patch center lies beyond the limb reach");
  }

  const double yaw_center = std::atan2(patch.y() - base.y(), patch.x() - base.x());
  auto rng = detail::stream(config.seed, detail::kJointStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = config.keyframe_stride / config.camera.rate_hz;

  Trajectory traj;
  const auto n = static_cast<std::size_t>(config.keyframes);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(n - 1);
    Eigen::VectorXd q = detail::sweep_angles(model.dof(), u, yaw_center, config.sweep_yaw);
    traj.truth_poses.push_back(fk_pose(model, q));
    JointReading r;
    r.timestamp = static_cast<double>(k) * dt;
    r.angles = q;
    for (Eigen::Index j = 0; j < q.size(); ++j) r.angles[j] += config.joint_noise_stddev * normal(rng);
    traj.truth_angles.push_back(std::move(q));
    traj.readings.push_back(std::move(r));
  }
  return traj;
}

/// Relative motions T_{i-1}^-1 T_i with the translation divided by the true
/// scale, plus rotation and translation noise.
inline std::vector<VoDelta> generate_vo(const std::vector<Pose>& truth_poses, const SimConfig& config) {
  if (truth_poses.size() < 2) throw Error("odometry needs at least two poses");
  auto rng = detail::stream(config.seed, detail::kVoStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<VoDelta> out;
  for (std::size_t i = 1; i < truth_poses.size(); ++i) {
    const Pose d = inverse(truth_poses[i - 1]) * truth_poses[i];
    const Vector3d rot_noise(normal(rng), normal(rng), normal(rng));
    const Vector3d trans_noise(normal(rng), normal(rng), normal(rng));
    const Vector3d t = d.translation / config.true_scale;
    const double sigma_t = config.vo_trans_noise_stddev + config.vo_trans_noise_rel * t.norm();
    VoDelta v;
    v.rotation = d.rotation * so3_exp(config.vo_rot_noise_stddev * rot_noise);
    v.translation = t + sigma_t * trans_noise;
    out.push_back(v);
  }
  return out;
}

/// Terrain surface samples seen by the camera (z axis of each pose) within
/// the field of view and facing it, divided by the true scale.
inline PointCloud generate_cloud(const std::vector<Pose>& truth_poses, const SimConfig& config) {
  const Terrain& terrain = config.terrain;
  auto rng = detail::stream(config.seed, detail::kCloudStream);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double cos_half_fov = std::cos(0.5 * config.camera.fov_deg * std::numbers::pi / 180.0);
  const auto wanted = static_cast<std::size_t>(config.cloud_points_per_keyframe);
  const std::size_t max_attempts = 50 * wanted;

  PointCloud cloud;
  cloud.units = CloudUnits::kUnscaled;
  for (const auto& pose : truth_poses) {
    const Vector3d eye = pose.translation;
    const Vector3d axis = pose.rotation.matrix().col(2);
    std::size_t accepted = 0;
    for (std::size_t attempt = 0; attempt < max_attempts && accepted < wanted; ++attempt) {
      const double x = terrain.patch_center.x() + terrain.patch_half_extent * unit(rng);
      const double y = terrain.patch_center.y() + terrain.patch_half_extent * unit(rng);
      const Vector3d p(x, y, terrain.height(x, y));
      const Vector3d ray = p - eye;
      if (ray.dot(axis) < ray.norm() * cos_half_fov) continue;
      if (terrain.normal(x, y).dot(-ray) <= 0.0) continue;
      const Vector3d noise(normal(rng), normal(rng), normal(rng));
      cloud.points.push_back(p / config.true_scale + config.vo_trans_noise_stddev * noise);
      ++accepted;
    }
  }
  if (cloud.empty()) throw NoVisibleTerrain("no terrain point lies inside any camera frustum");
  return cloud;
}

inline SimBundle simulate(const LimbModel& model, const SimConfig& config) {
  Trajectory traj = generate_trajectory(model, config);
  SimBundle b;
  b.vo_deltas = generate_vo(traj.truth_poses, config);
  b.unscaled_cloud = generate_cloud(traj.truth_poses, config);
  b.truth_poses = std::move(traj.truth_poses);
  b.joint_readings = std::move(traj.readings);
  b.truth_graspable = config.terrain.apexes();
  return b;
}

}  // namespace monoscale
