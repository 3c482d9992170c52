#pragma once

// JSON configuration: simulation, factor weights, solver, detection and the
// limb model, all optional with defaults. Unknown keys are rejected.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "monoscale/errors.hpp"
#include "monoscale/fusion.hpp"
#include "monoscale/io/text.hpp"
#include "monoscale/kinematics.hpp"
#include "monoscale/mapping.hpp"
#include "monoscale/simulation.hpp"
#include "monoscale/solver.hpp"

namespace monoscale {

struct DetectionOptions {
  double voxel_size = kDefaultVoxelSize;
  int min_points = kDefaultMinPoints;
  GripperParams gripper;
};

struct PipelineConfig {
  SimConfig sim;
  FusionOptions fusion;
  SolverOptions solver;
  DetectionOptions detection;
  LimbModel limb = default_testbed_limb();
};

namespace io {

using Json = nlohmann::ordered_json;

/// 1-based line of the first occurrence of "key" in `text`, 0 if absent.
inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

/// Walks one JSON object, converting fields and remembering which keys were
/// consumed so leftovers can be reported.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path, const std::string& text)
      : j_(j), path_(std::move(path)), text_(text) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string name = key.empty() ? path_ : field(key);
    const std::string last = key.empty() ? path_.substr(path_.rfind('.') + 1) : key;
    throw ConfigError(name, what, last.empty() ? 0 : line_of_key(text_, last));
  }

  void number(const std::string& key, double& out) {
    if (!take(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number()) fail(key, "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(key, "must be finite");
  }

  void integer(const std::string& key, int& out) {
    if (!take(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      fail(key, "integer out of range");
    }
    out = static_cast<int>(x);
  }

  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    if (!take(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      fail(key, "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!take(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    out = v.get<bool>();
  }

  template <int N>
  void vector(const std::string& key, Eigen::Matrix<double, N, 1>& out) {
    if (!take(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_array() || v.size() != static_cast<std::size_t>(N)) {
      fail(key, "expected an array of " + std::to_string(N) + " numbers");
    }
    for (int i = 0; i < N; ++i) {
      if (!v[static_cast<std::size_t>(i)].is_number()) fail(key, "expected numbers");
      out[i] = v[static_cast<std::size_t>(i)].get<double>();
    }
    if (!out.allFinite()) fail(key, "must be finite");
  }

  /// Sub-object reader, or nullopt when the key is absent.
  std::optional<ObjectReader> object(const std::string& key) {
    if (!take(key)) return std::nullopt;
    const Json& v = j_.at(key);
    if (!v.is_object()) fail(key, "expected an object");
    return ObjectReader(v, field(key), text_);
  }

  /// Array of objects, or nullopt when the key is absent.
  std::optional<std::vector<ObjectReader>> objects(const std::string& key) {
    if (!take(key)) return std::nullopt;
    const Json& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected an array");
    std::vector<ObjectReader> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_object()) fail(key, "expected an array of objects");
      out.emplace_back(v[i], field(key), text_);
    }
    return out;
  }

  /// Throws for the first key that no accessor consumed.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

 private:
  bool take(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const Json& j_;
  std::string path_;
  const std::string& text_;
  std::set<std::string> seen_;
};

// --- poses and limb model ------------------------------------------------------

inline Json pose_to_json(const Pose& p) {
  const auto& q = p.rotation.quaternion();
  return Json{{"translation", {p.translation.x(), p.translation.y(), p.translation.z()}},
              {"rotation_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
}

inline Pose read_pose(ObjectReader r) {
  Vector3d t = Vector3d::Zero();
  Eigen::Vector4d q(1.0, 0.0, 0.0, 0.0);
  r.vector<3>("translation", t);
  r.vector<4>("rotation_wxyz", q);
  r.finish();
  if (q.norm() < 1e-12) r.fail("rotation_wxyz", "quaternion must be non-zero");
  return {Rotation(q[0], q[1], q[2], q[3]), t};
}

inline Json limb_to_json(const LimbModel& m) {
  Json joints = Json::array();
  for (const auto& j : m.joints) {
    joints.push_back(Json{{"axis", {j.axis.x(), j.axis.y(), j.axis.z()}}, {"origin", pose_to_json(j.origin)}});
  }
  return Json{{"base_pose", pose_to_json(m.base_pose)},
              {"joints", joints},
              {"gripper_offset", pose_to_json(m.gripper_offset)}};
}

inline LimbModel read_limb(ObjectReader r) {
  LimbModel m;
  if (auto b = r.object("base_pose")) m.base_pose = read_pose(*b);
  if (auto g = r.object("gripper_offset")) m.gripper_offset = read_pose(*g);
  auto joints = r.objects("joints");
  if (!joints || joints->empty()) r.fail("joints", "limb model needs at least one joint");
  for (auto& jr : *joints) {
    Joint j;
    Vector3d axis = Vector3d::UnitZ();
    jr.vector<3>("axis", axis);
    if (axis.norm() < 1e-12) jr.fail("axis", "joint axis must be non-zero");
    j.axis = axis.normalized();
    if (auto o = jr.object("origin")) j.origin = read_pose(*o);
    jr.finish();
    m.joints.push_back(j);
  }
  r.finish();
  return m;
}

// --- full configuration ----------------------------------------------------------

inline Json config_to_json(const PipelineConfig& c) {
  const SimConfig& s = c.sim;
  Json hemis = Json::array();
  for (const auto& h : s.terrain.hemispheres) {
    hemis.push_back(Json{{"center", {h.center.x(), h.center.y(), h.center.z()}}, {"radius", h.radius}});
  }
  return Json{
      {"seed", s.seed},
      {"true_scale", s.true_scale},
      {"keyframes", s.keyframes},
      {"keyframe_stride", s.keyframe_stride},
      {"joint_noise_stddev", s.joint_noise_stddev},
      {"vo_trans_noise_stddev", s.vo_trans_noise_stddev},
      {"vo_trans_noise_rel", s.vo_trans_noise_rel},
      {"vo_rot_noise_stddev", s.vo_rot_noise_stddev},
      {"cloud_points_per_keyframe", s.cloud_points_per_keyframe},
      {"sweep_yaw", s.sweep_yaw},
      {"camera", {{"fov_deg", s.camera.fov_deg}, {"rate_hz", s.camera.rate_hz}}},
      {"terrain",
       {{"patch_center", {s.terrain.patch_center.x(), s.terrain.patch_center.y()}},
        {"patch_half_extent", s.terrain.patch_half_extent},
        {"hemispheres", hemis}}},
      {"factors",
       {{"fk_information", c.fusion.fk_information[0]},
        {"mc_information", c.fusion.mc_information[0]},
        {"pose_prior_information", c.fusion.pose_prior_information},
        {"scale_prior", c.fusion.scale_prior},
        {"scale_prior_information", c.fusion.scale_prior_information},
        {"literal_trans_residual", c.fusion.form == TransResidualForm::kLiteral}}},
      {"solver",
       {{"max_iterations", c.solver.max_iterations},
        {"relative_tolerance", c.solver.relative_tolerance},
        {"gradient_tolerance", c.solver.gradient_tolerance},
        {"initial_lambda", c.solver.initial_lambda},
        {"max_lambda", c.solver.max_lambda}}},
      {"detection",
       {{"voxel_size", c.detection.voxel_size},
        {"min_points", c.detection.min_points},
        {"gripper",
         {{"outer_radius", c.detection.gripper.outer_radius},
          {"inner_radius", c.detection.gripper.inner_radius},
          {"depth", c.detection.gripper.depth}}}}},
      {"limb", limb_to_json(c.limb)},
  };
}

/// Parses configuration text; every key is optional.
inline PipelineConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto byte = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
    throw ConfigError("", "malformed JSON", line);
  }
  PipelineConfig c;
  SimConfig& s = c.sim;
  ObjectReader r(j, "", text);
  r.unsigned_integer("seed", s.seed);
  r.number("true_scale", s.true_scale);
  r.integer("keyframes", s.keyframes);
  r.integer("keyframe_stride", s.keyframe_stride);
  r.number("joint_noise_stddev", s.joint_noise_stddev);
  r.number("vo_trans_noise_stddev", s.vo_trans_noise_stddev);
  r.number("vo_trans_noise_rel", s.vo_trans_noise_rel);
  r.number("vo_rot_noise_stddev", s.vo_rot_noise_stddev);
  r.integer("cloud_points_per_keyframe", s.cloud_points_per_keyframe);
  r.number("sweep_yaw", s.sweep_yaw);
  if (auto cam = r.object("camera")) {
    cam->number("fov_deg", s.camera.fov_deg);
    cam->number("rate_hz", s.camera.rate_hz);
    cam->finish();
  }
  if (auto t = r.object("terrain")) {
    t->vector<2>("patch_center", s.terrain.patch_center);
    t->number("patch_half_extent", s.terrain.patch_half_extent);
    if (auto hs = t->objects("hemispheres")) {
      s.terrain.hemispheres.clear();
      for (auto& h : *hs) {
        Hemisphere hemi;
        h.vector<3>("center", hemi.center);
        h.number("radius", hemi.radius);
        h.finish();
        s.terrain.hemispheres.push_back(hemi);
      }
    }
    t->finish();
  }
  if (auto f = r.object("factors")) {
    double fk = c.fusion.fk_information[0], mc = c.fusion.mc_information[0];
    bool literal = false;
    f->number("fk_information", fk);
    f->number("mc_information", mc);
    f->number("pose_prior_information", c.fusion.pose_prior_information);
    f->number("scale_prior", c.fusion.scale_prior);
    f->number("scale_prior_information", c.fusion.scale_prior_information);
    f->boolean("literal_trans_residual", literal);
    if (!(fk > 0.0)) f->fail("fk_information", "must be > 0");
    if (!(mc > 0.0)) f->fail("mc_information", "must be > 0");
    if (!(c.fusion.pose_prior_information > 0.0)) f->fail("pose_prior_information", "must be > 0");
    if (!(c.fusion.scale_prior > 0.0)) f->fail("scale_prior", "must be > 0");
    if (!(c.fusion.scale_prior_information > 0.0)) f->fail("scale_prior_information", "must be > 0");
    c.fusion.fk_information = uniform_information(fk);
    c.fusion.mc_information = uniform_information(mc);
    c.fusion.form = literal ? TransResidualForm::kLiteral : TransResidualForm::kWorldAligned;
    f->finish();
  }
  if (auto o = r.object("solver")) {
    o->integer("max_iterations", c.solver.max_iterations);
    o->number("relative_tolerance", c.solver.relative_tolerance);
    o->number("gradient_tolerance", c.solver.gradient_tolerance);
    o->number("initial_lambda", c.solver.initial_lambda);
    o->number("max_lambda", c.solver.max_lambda);
    if (c.solver.max_iterations < 1) o->fail("max_iterations", "must be >= 1");
    if (!(c.solver.relative_tolerance >= 0.0)) o->fail("relative_tolerance", "must be >= 0");
    if (!(c.solver.gradient_tolerance >= 0.0)) o->fail("gradient_tolerance", "must be >= 0");
    if (!(c.solver.initial_lambda > 0.0)) o->fail("initial_lambda", "must be > 0");
    if (!(c.solver.max_lambda >= c.solver.initial_lambda)) o->fail("max_lambda", "must be >= initial_lambda");
    o->finish();
  }
  if (auto d = r.object("detection")) {
    d->number("voxel_size", c.detection.voxel_size);
    d->integer("min_points", c.detection.min_points);
    if (auto g = d->object("gripper")) {
      g->number("outer_radius", c.detection.gripper.outer_radius);
      g->number("inner_radius", c.detection.gripper.inner_radius);
      g->number("depth", c.detection.gripper.depth);
      g->finish();
    }
    if (!(c.detection.voxel_size > 0.0)) d->fail("voxel_size", "must be > 0");
    if (c.detection.min_points < 1) d->fail("min_points", "must be >= 1");
    d->finish();
  }
  if (auto l = r.object("limb")) c.limb = read_limb(*l);
  r.finish();

  try {
    s.validate();
  } catch (const ConfigError& e) {
    const std::string key = e.field().substr(e.field().rfind('.') + 1);
    throw ConfigError(e.field(), e.reason(), line_of_key(text, key));
  }
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path));
}

}  // namespace io
}  // namespace monoscale
