// monoscale: simulate, solve, detect and the full pipeline from the shell.
// Log verbosity follows SPDLOG_LEVEL (e.g. SPDLOG_LEVEL=debug).

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "monoscale/io/config.hpp"
#include "monoscale/pipeline.hpp"

namespace fs = std::filesystem;
using namespace monoscale;

namespace {

struct Flags {
  std::string config;
  std::string out = "monoscale_out";
  std::optional<std::uint64_t> seed;
  std::string stage = "simulate";
  std::optional<double> voxel_size;
  std::optional<int> max_iter;
  std::optional<double> rel_tol;
  bool literal = false;
  std::string bundle;
  std::string cloud;
};

PipelineConfig load(const Flags& f) {
  PipelineConfig c = f.config.empty() ? PipelineConfig{} : io::load_config(f.config);
  if (f.seed) c.sim.seed = *f.seed;
  if (f.voxel_size) c.detection.voxel_size = *f.voxel_size;
  if (f.max_iter) c.solver.max_iterations = *f.max_iter;
  if (f.rel_tol) c.solver.relative_tolerance = *f.rel_tol;
  if (f.literal) c.fusion.form = TransResidualForm::kLiteral;
  return c;
}

SolveOverrides overrides(const Flags& f) {
  SolveOverrides o;
  o.max_iterations = f.max_iter;
  o.relative_tolerance = f.rel_tol;
  if (f.literal) o.literal_trans_residual = true;
  return o;
}

void print_report(const SolveResult& r) {
  fmt::print("converged: {} ({})\n", r.report.converged, r.report.termination);
  fmt::print("iterations: {}\n", r.report.iterations);
  fmt::print("final_cost: {:.6g}\n", r.report.final_cost);
  fmt::print("scale: {:.9g} (stddev {:.3g})\n", r.report.final_scale, r.scale_stddev);
}

void print_detect(const DetectResult& d) {
  fmt::print("graspable points: {}\n", d.points.size());
  if (!d.points.empty()) {
    const auto& p = d.points.front().position;
    fmt::print("top anchor: {:.6f} {:.6f} {:.6f}\n", p.x(), p.y(), p.z());
  }
}

int run(CLI::App& app, const Flags& f) {
  if (app.got_subcommand("simulate")) {
    const PipelineConfig c = load(f);
    const SimulateResult r = cmd_simulate(c, f.out);
    fmt::print("seed: {}\n", r.seed);
    for (const auto& file : r.files) fmt::print("{}\n", (fs::path(f.out) / file).string());
    return kExitOk;
  }
  if (app.got_subcommand("solve")) {
    const fs::path out = f.out.empty() || app.get_subcommand("solve")->count("--out") == 0 ? fs::path(f.bundle) : fs::path(f.out);
    print_report(cmd_solve(f.bundle, out, overrides(f)));
    return kExitOk;
  }
  if (app.got_subcommand("detect")) {
    const PipelineConfig c = load(f);
    const DetectResult d = cmd_detect(f.cloud, c.detection, f.out);
    print_detect(d);
    return kExitOk;
  }
  const PipelineConfig c = load(f);
  const PipelineSummary s = cmd_pipeline(c, f.out, parse_stage(f.stage), overrides(f));
  fmt::print("{}\n", s.to_json().dump(2));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("monoscale");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  spdlog::cfg::load_env_levels();

  CLI::App app{"Metric scale recovery and graspable point detection"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  };
  auto add_solver = [&f](CLI::App* sub) {
    sub->add_option("--max-iter", f.max_iter, "Levenberg-Marquardt iteration limit");
    sub->add_option("--rel-tol", f.rel_tol, "relative cost decrease tolerance");
    sub->add_flag("--literal-trans-residual", f.literal,
                  "use the monocular translation as a world-frame difference");
  };

  auto* sim = app.add_subcommand("simulate", "write a synthetic data bundle");
  add_common(sim);
  sim->add_option("--out", f.out, "output directory");
  sim->add_option("--seed", f.seed, "override the configured seed");

  auto* solve = app.add_subcommand("solve", "fuse a bundle and estimate the scale");
  solve->add_option("bundle", f.bundle, "bundle directory")->required();
  solve->add_option("--out", f.out, "output directory (default: the bundle directory)");
  add_solver(solve);

  auto* detect = app.add_subcommand("detect", "find graspable points in a metric cloud");
  detect->add_option("cloud", f.cloud, "ASCII PLY cloud in meters")->required();
  add_common(detect);
  detect->add_option("--out", f.out, "output directory");
  detect->add_option("--voxel-size", f.voxel_size, "voxel edge length in meters");

  auto* pipe = app.add_subcommand("pipeline", "simulate, solve, scale and detect");
  add_common(pipe);
  pipe->add_option("--out", f.out, "output directory");
  pipe->add_option("--seed", f.seed, "override the configured seed");
  pipe->add_option("--stage", f.stage, "first stage to run: simulate, solve or detect")
      ->check(CLI::IsMember({"simulate", "solve", "detect"}));
  pipe->add_option("--voxel-size", f.voxel_size, "voxel edge length in meters");
  add_solver(pipe);

  CLI11_PARSE(app, argc, argv);

  try {
    return run(app, f);
  } catch (const StageError& e) {
    spdlog::error("{}", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e);
  }
}
