#include "monoscale/pipeline.hpp"

#include <fstream>
#include <map>

#include <gtest/gtest.h>

#include "temp_dir.hpp"

namespace monoscale {
namespace {

using testing::TempDir;
namespace fs = std::filesystem;

PipelineConfig noiseless(std::uint64_t seed) {
  PipelineConfig c;
  c.sim.seed = seed;
  c.sim.joint_noise_stddev = 0.0;
  c.sim.vo_trans_noise_rel = 0.0;
  c.sim.vo_rot_noise_stddev = 0.0;
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    out[e.path().filename().string()] = io::read_file(e.path());
  }
  return out;
}

TEST(ExitCodes, MapErrorKinds) {
  EXPECT_EQ(exit_code_for(ConfigError("x", "bad")), kExitConfig);
  EXPECT_EQ(exit_code_for(IoError("p", "gone")), kExitIo);
  EXPECT_EQ(exit_code_for(NotConverged("slow")), kExitNotConverged);
  EXPECT_EQ(exit_code_for(EmptyResult("none")), kExitEmptyResult);
  EXPECT_EQ(exit_code_for(EmptyCloud("none")), kExitEmptyResult);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitOther);
  const StageError e("solve", IoError("p", "gone"));
  EXPECT_EQ(e.stage(), "solve");
  EXPECT_EQ(e.exit_code(), kExitIo);
}

TEST(ParseStage, KnownNames) {
  EXPECT_EQ(parse_stage("simulate"), Stage::kSimulate);
  EXPECT_EQ(parse_stage("all"), Stage::kSimulate);
  EXPECT_EQ(parse_stage("solve"), Stage::kSolve);
  EXPECT_EQ(parse_stage("detect"), Stage::kDetect);
  EXPECT_THROW(parse_stage("scale"), ConfigError);
}

TEST(Simulate, RerunIsByteIdentical) {
  TempDir a("sim_a"), b("sim_b");
  PipelineConfig c;
  c.sim.seed = 42;
  const SimulateResult r = cmd_simulate(c, a.path());
  EXPECT_EQ(r.seed, 42u);
  EXPECT_EQ(r.files.size(), 5u);
  const auto first = snapshot(a.path());
  cmd_simulate(c, a.path());
  cmd_simulate(c, b.path());
  EXPECT_EQ(snapshot(a.path()), first);
  EXPECT_EQ(snapshot(b.path()), first);
}

TEST(Simulate, SeedChangesOutput) {
  TempDir a("seed_a"), b("seed_b");
  PipelineConfig c;
  cmd_simulate(c, a.path());
  c.sim.seed = 2;
  cmd_simulate(c, b.path());
  EXPECT_NE(io::read_file(a / io::kVoFile), io::read_file(b / io::kVoFile));
}

TEST(Solve, RerunGivesIdenticalReport) {
  TempDir dir("solve");
  cmd_simulate(PipelineConfig{}, dir.path());
  const SolveResult r = cmd_solve(dir.path(), dir.path());
  EXPECT_TRUE(r.report.converged);
  const std::string report = io::read_file(dir / kReportFile);
  const std::string graph = io::read_file(dir / kGraphFile);
  cmd_solve(dir.path(), dir.path());
  EXPECT_EQ(io::read_file(dir / kReportFile), report);
  EXPECT_EQ(io::read_file(dir / kGraphFile), graph);
}

TEST(Solve, WrittenGraphReproducesFinalCost) {
  TempDir dir("solve_graph");
  cmd_simulate(PipelineConfig{}, dir.path());
  const SolveResult r = cmd_solve(dir.path(), dir.path());
  const FactorGraph g = io::read_graph(dir / kGraphFile);
  EXPECT_NEAR(total_cost(g), r.report.final_cost, 1e-12 * std::max(1.0, r.report.final_cost));
  EXPECT_EQ(g.scale().value(), r.report.final_scale);
}

TEST(Solve, IterationCapRaisesNotConvergedAfterWriting) {
  TempDir dir("solve_cap");
  cmd_simulate(PipelineConfig{}, dir.path());
  SolveOverrides o;
  o.max_iterations = 1;
  EXPECT_THROW(cmd_solve(dir.path(), dir.path(), o), NotConverged);
  const SolveReport r = io::report_from_json(io::Json::parse(io::read_file(dir / kReportFile)), "r");
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.termination, "max_iterations");
}

TEST(Solve, MissingVoFileIsIoErrorNamingPath) {
  TempDir dir("solve_missing");
  cmd_simulate(PipelineConfig{}, dir.path());
  fs::remove(dir / io::kVoFile);
  try {
    cmd_solve(dir.path(), dir.path());
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), (dir / io::kVoFile).string());
  }
}

TEST(Detect, FlatPlaneIsEmptyResultWithEmptyList) {
  TempDir dir("flat");
  PointCloud c{{}, CloudUnits::kMeters};
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) c.points.emplace_back(0.001 * i, 0.001 * j, 0.0);
  io::write_ply(dir / "plane.ply", c);
  EXPECT_THROW(cmd_detect(dir / "plane.ply", DetectionOptions{}, dir.path()), EmptyResult);
  EXPECT_TRUE(io::read_graspable(dir / kGraspableFile).empty());
  EXPECT_TRUE(fs::exists(dir / kVoxelFile));
}

TEST(Detect, EmptyCloudFile) {
  TempDir dir("empty");
  io::write_ply(dir / "e.ply", {{}, CloudUnits::kMeters});
  EXPECT_THROW(cmd_detect(dir / "e.ply", DetectionOptions{}, dir.path()), EmptyCloud);
}

TEST(Detect, UnscaledCloudRejected) {
  TempDir dir("unscaled");
  io::write_ply(dir / "u.ply", {{Vector3d::Zero()}, CloudUnits::kUnscaled});
  EXPECT_THROW(cmd_detect(dir / "u.ply", DetectionOptions{}, dir.path()), ConfigError);
}

TEST(Pipeline, NoiselessRecoversScaleAndApex) {
  TempDir dir("pipe_noiseless");
  const PipelineSummary s = cmd_pipeline(noiseless(3), dir.path());
  ASSERT_TRUE(s.scale_error_rel && s.apex_error_m && s.converged);
  EXPECT_TRUE(*s.converged);
  EXPECT_LT(*s.scale_error_rel, 1e-6);
  EXPECT_LE(*s.apex_error_m, 0.002);
  EXPECT_EQ(s.stages_run, (std::vector<std::string>{"simulate", "solve", "detect"}));
}

TEST(Pipeline, SummaryMatchesArtifacts) {
  TempDir dir("pipe_summary");
  const PipelineConfig c;
  cmd_pipeline(c, dir.path());
  const io::Json j = io::Json::parse(io::read_file(dir / kSummaryFile));
  const SolveReport r = io::report_from_json(io::Json::parse(io::read_file(dir / kReportFile)), "r");
  const auto pts = io::read_graspable(dir / kGraspableFile);
  const io::LoadedBundle b = io::read_bundle(dir.path());
  ASSERT_FALSE(pts.empty());

  EXPECT_EQ(j.at("estimated_scale").get<double>(), r.final_scale);
  EXPECT_EQ(j.at("final_cost").get<double>(), r.final_cost);
  EXPECT_EQ(j.at("true_scale").get<double>(), c.sim.true_scale);
  EXPECT_DOUBLE_EQ(j.at("scale_error_rel").get<double>(),
                   std::abs(r.final_scale - c.sim.true_scale) / c.sim.true_scale);
  EXPECT_EQ(j.at("graspable_count").get<std::size_t>(), pts.size());
  const auto top = j.at("top_anchor").get<std::vector<double>>();
  EXPECT_EQ(Vector3d(top[0], top[1], top[2]), pts.front().position);
  double best = 1e9;
  for (const auto& t : b.bundle.truth_graspable) best = std::min(best, (pts.front().position - t).norm());
  EXPECT_DOUBLE_EQ(j.at("apex_error_m").get<double>(), best);

  const PointCloud scaled = io::read_ply(dir / kScaledCloudFile);
  EXPECT_EQ(scaled.units, CloudUnits::kMeters);
  EXPECT_EQ(scaled.size(), b.bundle.unscaled_cloud.size());
  EXPECT_EQ(scaled.points[0], b.bundle.unscaled_cloud.points[0] * r.final_scale);
  const VoxelGrid g = io::parse_voxel_dump(io::read_file(dir / kVoxelFile), "v");
  EXPECT_EQ(detect_graspable(g, build_mask(c.detection.gripper, g.voxel_size())).size(), pts.size());
}

TEST(Pipeline, StageSolveReusesSimulationFiles) {
  TempDir dir("pipe_stage");
  const PipelineConfig c;
  cmd_pipeline(c, dir.path());
  const std::string cloud = io::read_file(dir / io::kCloudFile);
  const std::string graspable = io::read_file(dir / kGraspableFile);
  const auto before = fs::last_write_time(dir / io::kCloudFile);

  const PipelineSummary s = cmd_pipeline(c, dir.path(), Stage::kSolve);
  EXPECT_EQ(s.stages_run, (std::vector<std::string>{"solve", "detect"}));
  EXPECT_EQ(fs::last_write_time(dir / io::kCloudFile), before);
  EXPECT_EQ(io::read_file(dir / io::kCloudFile), cloud);
  EXPECT_EQ(io::read_file(dir / kGraspableFile), graspable);

  const PipelineSummary d = cmd_pipeline(c, dir.path(), Stage::kDetect);
  EXPECT_EQ(d.stages_run, std::vector<std::string>{"detect"});
  EXPECT_FALSE(d.estimated_scale.has_value());
  EXPECT_EQ(io::read_file(dir / kGraspableFile), graspable);
}

TEST(Pipeline, StageSolveWithoutBundleFailsInSolve) {
  TempDir dir("pipe_nobundle");
  try {
    cmd_pipeline(PipelineConfig{}, dir.path(), Stage::kSolve);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "solve");
    EXPECT_EQ(e.exit_code(), kExitIo);
  }
}

TEST(Pipeline, NotConvergedStillWritesSummary) {
  TempDir dir("pipe_cap");
  SolveOverrides o;
  o.max_iterations = 1;
  try {
    cmd_pipeline(PipelineConfig{}, dir.path(), Stage::kSimulate, o);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.exit_code(), kExitNotConverged);
  }
  const io::Json j = io::Json::parse(io::read_file(dir / kSummaryFile));
  EXPECT_FALSE(j.at("converged").get<bool>());
}

}  // namespace
}  // namespace monoscale
