#pragma once

// Command implementations behind the CLI: simulate, solve, detect and the
// full pipeline. Every stage communicates through files in one directory.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "monoscale/errors.hpp"
#include "monoscale/fusion.hpp"
#include "monoscale/io/bundle.hpp"
#include "monoscale/io/config.hpp"
#include "monoscale/io/graph_file.hpp"
#include "monoscale/io/ply.hpp"
#include "monoscale/mapping.hpp"
#include "monoscale/simulation.hpp"
#include "monoscale/solver.hpp"

namespace monoscale {

inline constexpr const char* kGraphFile = "graph.txt";
inline constexpr const char* kReportFile = "solve_report.json";
inline constexpr const char* kScaledCloudFile = "cloud_scaled.ply";
inline constexpr const char* kVoxelFile = "voxels.txt";
inline constexpr const char* kGraspableFile = "graspable.csv";
inline constexpr const char* kSummaryFile = "summary.json";

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitNotConverged = 4,
  kExitEmptyResult = 5,
};

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const NotConverged*>(&e)) return kExitNotConverged;
  if (dynamic_cast<const EmptyResult*>(&e) || dynamic_cast<const EmptyCloud*>(&e)) return kExitEmptyResult;
  return kExitOther;
}

/// Error raised inside a pipeline stage, labeled with the stage name and
/// carrying the exit code of the original error.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::exception& cause)
      : Error("stage '" + stage + "': " + cause.what()), stage_(std::move(stage)), code_(exit_code_for(cause)) {}

  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return code_; }

 private:
  std::string stage_;
  int code_;
};

// --- simulate --------------------------------------------------------------------

struct SimulateResult {
  std::uint64_t seed = 0;
  std::vector<std::string> files;
};

inline SimulateResult cmd_simulate(const PipelineConfig& config, const std::filesystem::path& out_dir) {
  const SimBundle b = simulate(config.limb, config.sim);
  SimulateResult r;
  r.seed = config.sim.seed;
  r.files = io::write_bundle(out_dir, b, config);
  r.files.push_back(io::kManifestFile);
  return r;
}

// --- solve -----------------------------------------------------------------------

struct SolveOverrides {
  std::optional<int> max_iterations;
  std::optional<double> relative_tolerance;
  std::optional<bool> literal_trans_residual;
};

struct SolveResult {
  SolveReport report;
  double scale_stddev = 0.0;
  double true_scale = 0.0;
};

/// Builds the graph from the bundle in `bundle_dir`, optimizes it and writes
/// graph.txt and solve_report.json into `out_dir`. Throws NotConverged after
/// writing when the solver gave up.
inline SolveResult cmd_solve(const std::filesystem::path& bundle_dir, const std::filesystem::path& out_dir,
                             const SolveOverrides& overrides = {}) {
  const io::LoadedBundle loaded = io::read_bundle(bundle_dir);
  PipelineConfig config = loaded.config;
  if (overrides.max_iterations) config.solver.max_iterations = *overrides.max_iterations;
  if (overrides.relative_tolerance) config.solver.relative_tolerance = *overrides.relative_tolerance;
  if (overrides.literal_trans_residual) {
    config.fusion.form = *overrides.literal_trans_residual ? TransResidualForm::kLiteral
                                                           : TransResidualForm::kWorldAligned;
  }
  if (config.solver.max_iterations < 1) throw ConfigError("max_iterations", "must be >= 1");
  if (!(config.solver.relative_tolerance >= 0.0)) throw ConfigError("relative_tolerance", "must be >= 0");

  FactorGraph g = build_fusion_graph(config.limb, loaded.bundle.joint_readings, loaded.bundle.vo_deltas,
                                     config.fusion);
  SolveResult r;
  r.report = optimize(g, config.solver);
  r.scale_stddev = marginal_scale_stddev(g);
  r.true_scale = config.sim.true_scale;

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create directory: " + ec.message());
  io::write_graph(out_dir / kGraphFile, g);
  io::write_file(out_dir / kReportFile, io::report_to_json(r.report, r.scale_stddev).dump(2) + "\n");
  if (!r.report.converged) {
    throw NotConverged("solver stopped after " + std::to_string(r.report.iterations) +
                       " iterations (" + r.report.termination + ")");
  }
  return r;
}

// --- detect ----------------------------------------------------------------------

struct DetectResult {
  std::vector<GraspablePoint> points;
  std::size_t occupied = 0;
};

/// Detects graspable points in a metric cloud and writes graspable.csv and
/// voxels.txt into `out_dir`. Throws EmptyResult after writing when nothing
/// is graspable.
inline DetectResult detect_cloud(const PointCloud& cloud, const DetectionOptions& opts,
                                 const std::filesystem::path& out_dir) {
  if (cloud.units != CloudUnits::kMeters) throw ConfigError("units", "detection needs a cloud in meters, got " + std::string(to_string(cloud.units)));
  const GripperMask mask = build_mask(opts.gripper, opts.voxel_size);
  const VoxelGrid grid = solidify(voxelize(cloud, opts.voxel_size, opts.min_points), cloud);
  DetectResult r;
  r.points = detect_graspable(grid, mask);
  r.occupied = grid.occupied_count();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create directory: " + ec.message());
  io::write_file(out_dir / kVoxelFile, io::voxel_dump(grid));
  io::write_file(out_dir / kGraspableFile, io::graspable_to_csv(r.points));
  if (r.points.empty()) throw EmptyResult("no graspable point found");
  return r;
}

inline DetectResult cmd_detect(const std::filesystem::path& cloud_path, const DetectionOptions& opts,
                               const std::filesystem::path& out_dir) {
  return detect_cloud(io::read_ply(cloud_path, CloudUnits::kMeters), opts, out_dir);
}

// --- pipeline --------------------------------------------------------------------

enum class Stage { kSimulate = 0, kSolve = 1, kDetect = 2 };

inline Stage parse_stage(const std::string& s) {
  if (s == "simulate" || s == "all") return Stage::kSimulate;
  if (s == "solve") return Stage::kSolve;
  if (s == "detect") return Stage::kDetect;
  throw ConfigError("stage", "expected simulate, solve or detect, got '" + s + "'");
}

/// Distance from `p` to the closest point in `targets`.
inline double nearest_distance(const Vector3d& p, const std::vector<Vector3d>& targets) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : targets) best = std::min(best, (p - t).norm());
  return best;
}

struct PipelineSummary {
  std::vector<std::string> stages_run;
  std::optional<double> true_scale;
  std::optional<double> estimated_scale;
  std::optional<double> scale_error_rel;
  std::optional<double> final_cost;
  std::optional<bool> converged;
  std::optional<std::size_t> graspable_count;
  std::optional<Vector3d> top_anchor;
  std::optional<double> apex_error_m;
  double wall_time_s = 0.0;

  io::Json to_json() const {
    io::Json j;
    j["stages_run"] = stages_run;
    auto opt = [&j](const char* key, const auto& v) {
      if (v) j[key] = *v;
    };
    opt("true_scale", true_scale);
    opt("estimated_scale", estimated_scale);
    opt("scale_error_rel", scale_error_rel);
    opt("final_cost", final_cost);
    opt("converged", converged);
    opt("graspable_count", graspable_count);
    if (top_anchor) j["top_anchor"] = {top_anchor->x(), top_anchor->y(), top_anchor->z()};
    opt("apex_error_m", apex_error_m);
    j["wall_time_s"] = wall_time_s;
    return j;
  }
};

/// simulate -> solve -> scale -> detect, starting at `first`. Earlier stages'
/// files must already exist in `out_dir` when `first` skips them.
inline PipelineSummary cmd_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir,
                                    Stage first = Stage::kSimulate, const SolveOverrides& overrides = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineSummary s;
  auto finish = [&]() {
    s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    io::write_file(out_dir / kSummaryFile, s.to_json().dump(2) + "\n");
  };
  auto stage = [&](const char* name, auto&& body) {
    try {
      body();
      s.stages_run.emplace_back(name);
    } catch (const std::exception& e) {
      s.stages_run.emplace_back(name);
      if (dynamic_cast<const NotConverged*>(&e) || dynamic_cast<const EmptyResult*>(&e)) finish();
      throw StageError(name, e);
    }
  };

  if (first <= Stage::kSimulate) stage("simulate", [&] { cmd_simulate(config, out_dir); });

  if (first <= Stage::kSolve) {
    stage("solve", [&] {
      try {
        const SolveResult r = cmd_solve(out_dir, out_dir, overrides);
        s.converged = true;
        s.final_cost = r.report.final_cost;
        s.estimated_scale = r.report.final_scale;
        s.true_scale = r.true_scale;
        s.scale_error_rel = std::abs(r.report.final_scale - r.true_scale) / r.true_scale;
      } catch (const NotConverged&) {
        s.converged = false;
        throw;
      }
    });
  }

  stage("detect", [&] {
    const io::LoadedBundle loaded = io::read_bundle(out_dir);
    const auto report_path = out_dir / kReportFile;
    io::Json report;
    try {
      report = io::Json::parse(io::read_file(report_path));
    } catch (const io::Json::parse_error&) {
      throw IoError(report_path.string(), "malformed JSON");
    }
    const double scale = io::report_from_json(report, report_path.string()).final_scale;
    const PointCloud metric = scale_cloud(loaded.bundle.unscaled_cloud, scale);
    io::write_ply(out_dir / kScaledCloudFile, metric);
    DetectionOptions opts = config.detection;
    try {
      const DetectResult d = detect_cloud(metric, opts, out_dir);
      s.graspable_count = d.points.size();
      s.top_anchor = d.points.front().position;
      s.apex_error_m = nearest_distance(d.points.front().position, loaded.bundle.truth_graspable);
    } catch (const EmptyResult&) {
      s.graspable_count = 0;
      throw;
    }
  });

  finish();
  return s;
}

}  // namespace monoscale
