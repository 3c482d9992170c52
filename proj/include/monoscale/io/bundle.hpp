#pragma once

// Stage artifacts: simulation bundle directory, solve report, voxel grid
// dump and graspable point list.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "monoscale/errors.hpp"
#include "monoscale/io/config.hpp"
#include "monoscale/io/ply.hpp"
#include "monoscale/io/text.hpp"
#include "monoscale/mapping.hpp"
#include "monoscale/simulation.hpp"
#include "monoscale/solver.hpp"

namespace monoscale::io {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kTrajectoryFile = "trajectory.csv";
inline constexpr const char* kVoFile = "vo_deltas.csv";
inline constexpr const char* kCloudFile = "cloud.ply";
inline constexpr const char* kTruthFile = "truth_graspable.csv";

inline std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

/// Reads a CSV with a header line; every data row must have `columns`
/// numbers, or at least `columns` when `at_least` is set.
inline std::vector<std::vector<double>> read_csv(const std::filesystem::path& path, std::size_t columns,
                                                 bool at_least = false) {
  const std::string text = read_file(path);
  const auto ls = lines(text);
  if (ls.empty()) throw IoError(path.string(), "empty file");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (ls[i].empty()) continue;
    const auto fields = split(ls[i], ',');
    if (at_least ? fields.size() < columns : fields.size() != columns) {
      throw IoError(path.string(), "line " + std::to_string(i + 1) + ": expected " + std::to_string(columns) +
                                       " columns, got " + std::to_string(fields.size()));
    }
    rows.push_back(parse_numbers(fields, path.string(), i + 1));
  }
  return rows;
}

// --- simulation bundle ---------------------------------------------------------

struct BundleFiles {
  std::filesystem::path dir;
  std::filesystem::path manifest() const { return dir / kManifestFile; }
  std::filesystem::path trajectory() const { return dir / kTrajectoryFile; }
  std::filesystem::path vo() const { return dir / kVoFile; }
  std::filesystem::path cloud() const { return dir / kCloudFile; }
  std::filesystem::path truth() const { return dir / kTruthFile; }
};

/// Writes the four data files plus manifest.json and returns the file names.
inline std::vector<std::string> write_bundle(const std::filesystem::path& dir, const SimBundle& b,
                                             const PipelineConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory: " + ec.message());
  const BundleFiles f{dir};

  const std::size_t dof = b.joint_readings.empty() ? 0 : static_cast<std::size_t>(b.joint_readings[0].angles.size());
  std::string traj = "timestamp,tx,ty,tz,qw,qx,qy,qz";
  for (std::size_t j = 0; j < dof; ++j) traj += ",q" + std::to_string(j);
  traj += '\n';
  for (std::size_t k = 0; k < b.truth_poses.size(); ++k) {
    const Pose& p = b.truth_poses[k];
    const auto& q = p.rotation.quaternion();
    std::vector<double> row{b.joint_readings[k].timestamp, p.translation.x(), p.translation.y(), p.translation.z(),
                            q.w(), q.x(), q.y(), q.z()};
    for (Eigen::Index j = 0; j < b.joint_readings[k].angles.size(); ++j) row.push_back(b.joint_readings[k].angles[j]);
    traj += join_numbers(row) + '\n';
  }
  write_file(f.trajectory(), traj);

  std::string vo = "qw,qx,qy,qz,tx,ty,tz\n";
  for (const auto& d : b.vo_deltas) {
    const auto& q = d.rotation.quaternion();
    vo += join_numbers({q.w(), q.x(), q.y(), q.z(), d.translation.x(), d.translation.y(), d.translation.z()}) + '\n';
  }
  write_file(f.vo(), vo);

  write_ply(f.cloud(), b.unscaled_cloud);

  std::string truth = "x,y,z\n";
  for (const auto& a : b.truth_graspable) truth += join_numbers({a.x(), a.y(), a.z()}) + '\n';
  write_file(f.truth(), truth);

  const std::vector<std::string> files{kTrajectoryFile, kVoFile, kCloudFile, kTruthFile};
  Json manifest{{"format", "monoscale-bundle"},
                {"version", 1},
                {"seed", config.sim.seed},
                {"keyframes", b.truth_poses.size()},
                {"cloud_points", b.unscaled_cloud.size()},
                {"files", files},
                {"config", config_to_json(config)}};
  write_file(f.manifest(), manifest.dump(2) + "\n");
  return files;
}

struct LoadedBundle {
  SimBundle bundle;
  PipelineConfig config;
};

inline LoadedBundle read_bundle(const std::filesystem::path& dir) {
  const BundleFiles f{dir};
  LoadedBundle out;
  {
    const std::string text = read_file(f.manifest());
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw IoError(f.manifest().string(), "malformed JSON");
    }
    if (!j.is_object() || !j.contains("config") || !j["config"].is_object()) {
      throw IoError(f.manifest().string(), "missing config section");
    }
    out.config = parse_config(j["config"].dump());
  }
  const PipelineConfig& c = out.config;
  SimBundle& b = out.bundle;

  const std::size_t dof = c.limb.dof();
  for (const auto& row : read_csv(f.trajectory(), 8 + dof)) {
    b.truth_poses.emplace_back(Rotation(row[4], row[5], row[6], row[7]), Vector3d(row[1], row[2], row[3]));
    JointReading r;
    r.timestamp = row[0];
    r.angles = Eigen::Map<const Eigen::VectorXd>(row.data() + 8, static_cast<Eigen::Index>(dof));
    b.joint_readings.push_back(r);
  }
  for (const auto& row : read_csv(f.vo(), 7)) {
    b.vo_deltas.push_back({Rotation(row[0], row[1], row[2], row[3]), Vector3d(row[4], row[5], row[6])});
  }
  if (b.vo_deltas.size() + 1 != b.joint_readings.size()) {
    throw IoError(f.vo().string(), std::to_string(b.vo_deltas.size()) + " deltas for " +
                                       std::to_string(b.joint_readings.size()) + " keyframes");
  }
  b.unscaled_cloud = read_ply(f.cloud(), CloudUnits::kUnscaled);
  for (const auto& row : read_csv(f.truth(), 3)) b.truth_graspable.emplace_back(row[0], row[1], row[2]);
  return out;
}

// --- solve report --------------------------------------------------------------

inline Json report_to_json(const SolveReport& r, double scale_stddev) {
  return Json{{"converged", r.converged},
              {"termination", r.termination},
              {"iterations", r.iterations},
              {"initial_cost", r.initial_cost},
              {"final_cost", r.final_cost},
              {"final_scale", r.final_scale},
              {"scale_stddev", scale_stddev},
              {"step_costs", r.step_costs}};
}

inline SolveReport report_from_json(const Json& j, const std::string& path) {
  try {
    SolveReport r;
    r.converged = j.at("converged").get<bool>();
    r.termination = j.at("termination").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    r.initial_cost = j.at("initial_cost").get<double>();
    r.final_cost = j.at("final_cost").get<double>();
    r.final_scale = j.at("final_scale").get<double>();
    r.step_costs = j.at("step_costs").get<std::vector<double>>();
    return r;
  } catch (const Json::exception& e) {
    throw IoError(path, std::string("bad solve report: ") + e.what());
  }
}

// --- voxel grid dump -----------------------------------------------------------

/// Header lines, then "rle" followed by alternating free/occupied run lengths
/// (x fastest, then y, then z), starting with a free run.
inline std::string voxel_dump(const VoxelGrid& g) {
  std::string out = "# monoscale voxel grid\n";
  out += "origin " + format_double(g.origin().x()) + ' ' + format_double(g.origin().y()) + ' ' +
         format_double(g.origin().z()) + '\n';
  out += "voxel_size " + format_double(g.voxel_size()) + '\n';
  out += "dims " + std::to_string(g.dims().x()) + ' ' + std::to_string(g.dims().y()) + ' ' +
         std::to_string(g.dims().z()) + '\n';
  out += "occupied " + std::to_string(g.occupied_count()) + '\n';
  out += "rle";
  std::uint8_t value = 0;
  std::size_t run = 0;
  for (std::uint8_t v : g.data()) {
    if (v != value) {
      out += ' ' + std::to_string(run);
      value = v;
      run = 0;
    }
    ++run;
  }
  out += ' ' + std::to_string(run) + '\n';
  return out;
}

inline VoxelGrid parse_voxel_dump(const std::string& text, const std::string& path) {
  Vector3d origin = Vector3d::Zero();
  double vs = 0.0;
  Vector3i dims = Vector3i::Zero();
  std::vector<std::size_t> runs;
  bool have_rle = false;
  const auto ls = lines(text);
  for (std::size_t n = 0; n < ls.size(); ++n) {
    const auto t = tokens(ls[n]);
    if (t.empty() || t[0].front() == '#') continue;
    const std::vector<std::string_view> rest(t.begin() + 1, t.end());
    const auto v = parse_numbers(rest, path, n + 1);
    if (t[0] == "origin" && v.size() == 3) origin = Vector3d(v[0], v[1], v[2]);
    else if (t[0] == "voxel_size" && v.size() == 1) vs = v[0];
    else if (t[0] == "dims" && v.size() == 3) dims = Vector3i(static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]));
    else if (t[0] == "occupied" && v.size() == 1) continue;
    else if (t[0] == "rle") {
      for (double r : v) runs.push_back(static_cast<std::size_t>(r));
      have_rle = true;
    } else {
      throw IoError(path, "line " + std::to_string(n + 1) + ": unexpected record");
    }
  }
  if (!have_rle) throw IoError(path, "missing rle record");
  VoxelGrid g(origin, vs, dims);
  std::size_t cell = 0;
  bool value = false;
  for (std::size_t r : runs) {
    if (cell + r > g.cell_count()) throw IoError(path, "run lengths exceed the grid");
    for (std::size_t k = 0; k < r; ++k, ++cell) {
      if (value) {
        const auto x = static_cast<int>(cell % static_cast<std::size_t>(dims.x()));
        const auto y = static_cast<int>((cell / static_cast<std::size_t>(dims.x())) % static_cast<std::size_t>(dims.y()));
        const auto z = static_cast<int>(cell / (static_cast<std::size_t>(dims.x()) * static_cast<std::size_t>(dims.y())));
        g.set({x, y, z}, true);
      }
    }
    value = !value;
  }
  if (cell != g.cell_count()) throw IoError(path, "run lengths do not cover the grid");
  return g;
}

// --- graspable points ------------------------------------------------------------

inline std::string graspable_to_csv(const std::vector<GraspablePoint>& pts) {
  std::string out = "x,y,z,i,j,k,support_count\n";
  for (const auto& p : pts) {
    out += join_numbers({p.position.x(), p.position.y(), p.position.z()});
    out += ',' + std::to_string(p.cell.x()) + ',' + std::to_string(p.cell.y()) + ',' +
           std::to_string(p.cell.z()) + ',' + std::to_string(p.support_count) + '\n';
  }
  return out;
}

inline std::vector<GraspablePoint> read_graspable(const std::filesystem::path& path) {
  std::vector<GraspablePoint> out;
  for (const auto& row : read_csv(path, 7)) {
    GraspablePoint p;
    p.position = Vector3d(row[0], row[1], row[2]);
    p.cell = Vector3i(static_cast<int>(row[3]), static_cast<int>(row[4]), static_cast<int>(row[5]));
    p.support_count = static_cast<int>(row[6]);
    out.push_back(p);
  }
  return out;
}

}  // namespace monoscale::io
