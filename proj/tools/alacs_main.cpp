#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "alacs/error.hpp"
#include "alacs/io.hpp"
#include "alacs/units.hpp"
#include "alacs/version.hpp"

namespace fs = std::filesystem;
using namespace alacs;

namespace {

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidConfig:
      return 2;
    case ErrorCode::NoIntersection:
    case ErrorCode::BehindCamera:
    case ErrorCode::AllOccluded:
      return 3;
    case ErrorCode::InsufficientSamples:
      return 4;
    case ErrorCode::NoConsensus:
      return 5;
    case ErrorCode::IoFailure:
      return 6;
    default:
      return 7;
  }
}

struct SimulateArgs {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  double offset_mm = 0.0;
};

struct CalibrateArgs {
  std::string samples;
  std::string config;
  std::string out_dir;
  std::string method = "4";
  std::optional<double> epsilon_mm;
  std::optional<int> k_max;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

struct EvaluateArgs {
  std::string scene;
  std::string estimate;
  std::string sweep;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void print_report(const CalibrationReport& r) {
  std::cout << method_label(r.method) << ":\n"
            << "  alpha = " << rad_to_deg(r.estimate.alpha) << " deg\n"
            << "  L0    = " << m_to_mm(r.estimate.L0) << " mm\n";
  if (r.fits_beta) {
    std::cout << "  beta  = " << rad_to_deg(r.estimate.beta) << " deg\n";
  }
  std::cout << "  mean |z - z_hat| = " << m_to_mm(r.mean_abs_residual)
            << " mm over " << r.inlier_indices.size() << " samples\n";
}

RansacConfig ransac_from_args(const CalibrateArgs& args) {
  RansacConfig cfg;
  if (!args.config.empty()) cfg = load_ransac_json(args.config);
  if (args.epsilon_mm) cfg.epsilon = mm_to_m(*args.epsilon_mm);
  if (args.k_max) cfg.k_max = *args.k_max;
  if (args.seed) cfg.rng_seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  return cfg;
}

int run_simulate(const SimulateArgs& args) {
  SceneConfig cfg = load_scene_json(args.config);
  if (args.seed) cfg.rng_seed = *args.seed;

  const auto samples =
      generate_samples(cfg, SlideState{mm_to_m(args.offset_mm)});

  fs::create_directories(args.out_dir);
  const fs::path samples_path = fs::path(args.out_dir) / "samples.csv";
  save_samples_csv(samples_path, std::span<const LabeledSample>(samples));

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.inputs = {{"config", args.config}};
  manifest.outputs = {{"samples", samples_path.string()}};
  manifest.rng_seed = cfg.rng_seed;
  manifest.output_dir = args.out_dir;
  save_manifest(fs::path(args.out_dir) / "manifest.json", manifest);

  std::cout << "wrote " << samples.size() << " samples to "
            << samples_path.string() << "\n";
  return 0;
}

int run_calibrate(const CalibrateArgs& args, const char* command) {
  const auto samples = load_samples_csv(args.samples);
  const RansacConfig cfg = ransac_from_args(args);

  const int needed =
      (args.method == "1" || args.method == "3") ? 3 : cfg.subset_size;
  if (static_cast<int>(samples.size()) < needed) {
    fail(ErrorCode::InsufficientSamples,
         "need at least " + std::to_string(needed) + " samples, got " +
             std::to_string(samples.size()));
  }

  fs::create_directories(args.out_dir);
  RunManifest manifest;
  manifest.command = command;
  manifest.inputs = {{"samples", args.samples}};
  if (!args.config.empty()) manifest.inputs.emplace_back("config", args.config);
  manifest.rng_seed = cfg.rng_seed;
  manifest.output_dir = args.out_dir;

  const fs::path estimate_path = fs::path(args.out_dir) / "estimate.json";
  if (args.method == "all") {
    const auto reports = compare_methods(samples, cfg);
    const fs::path reports_path = fs::path(args.out_dir) / "reports.json";
    save_reports_json(reports_path, reports);
    save_extrinsics_json(estimate_path, reports.back().estimate);
    manifest.outputs = {{"reports", reports_path.string()},
                        {"estimate", estimate_path.string()}};
    std::cout << reports_table(reports);
  } else {
    CalibrationReport report;
    if (args.method == "1") {
      report = calibrate_all_data(samples, false);
    } else if (args.method == "2") {
      report = ransac_calibrate(samples, cfg, false);
    } else if (args.method == "3") {
      report = calibrate_all_data(samples, true);
    } else if (args.method == "4") {
      report = ransac_calibrate(samples, cfg, true);
    } else {
      fail(ErrorCode::InvalidConfig,
           "method must be one of 1, 2, 3, 4, all");
    }
    const fs::path report_path = fs::path(args.out_dir) / "report.json";
    std::ofstream out(report_path, std::ios::binary);
    if (!out) {
      fail(ErrorCode::IoFailure, "cannot write file: " + report_path.string());
    }
    out << report_to_json(report);
    out.close();
    save_extrinsics_json(estimate_path, report.estimate);
    manifest.outputs = {{"report", report_path.string()},
                        {"estimate", estimate_path.string()}};
    print_report(report);
  }
  save_manifest(fs::path(args.out_dir) / "manifest.json", manifest);
  return 0;
}

int run_evaluate(const EvaluateArgs& args) {
  SceneConfig cfg = load_scene_json(args.scene);
  if (args.seed) cfg.rng_seed = *args.seed;
  const ExtrinsicParams est = load_extrinsics_json(args.estimate);
  ScanSweepConfig sweep;
  if (!args.sweep.empty()) sweep = load_sweep_json(args.sweep);

  const auto stats = localization_study(cfg, sweep, est);

  fs::create_directories(args.out_dir);
  const fs::path stats_path =
      fs::path(args.out_dir) / "localization_stats.csv";
  save_localization_csv(stats_path, stats);

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.inputs = {{"scene", args.scene}, {"estimate", args.estimate}};
  if (!args.sweep.empty()) manifest.inputs.emplace_back("sweep", args.sweep);
  manifest.outputs = {{"statistics", stats_path.string()}};
  manifest.rng_seed = cfg.rng_seed;
  manifest.output_dir = args.out_dir;
  save_manifest(fs::path(args.out_dir) / "manifest.json", manifest);

  for (const auto& row : stats) {
    std::cout << "d = " << m_to_mm(row.offset)
              << " mm: max |dx| = " << m_to_mm(row.x.max)
              << " mm, max |dy| = " << m_to_mm(row.y.max)
              << " mm, max |dz| = " << m_to_mm(row.z.max) << " mm ("
              << row.n_samples << " samples)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laser-camera scanner calibration and localization toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand(
      "simulate", "Generate synthetic calibration samples from a scene");
  sim->add_option("--config", sim_args.config, "Scene configuration JSON")
      ->required();
  sim->add_option("--out", sim_args.out_dir, "Output directory")->required();
  sim->add_option("--seed", sim_args.seed, "Override the scene RNG seed");
  sim->add_option("--offset-mm", sim_args.offset_mm,
                  "Slide displacement during capture (mm)");

  CalibrateArgs cal_args;
  auto* cal = app.add_subcommand(
      "calibrate", "Estimate extrinsic parameters from a sample CSV");
  cal->add_option("--samples", cal_args.samples, "Sample CSV")->required();
  cal->add_option("--config", cal_args.config, "RANSAC configuration JSON");
  cal->add_option("--out", cal_args.out_dir, "Output directory")->required();
  cal->add_option("--method", cal_args.method, "1|2|3|4|all (default 4)");
  cal->add_option("--epsilon-mm", cal_args.epsilon_mm,
                  "Inlier residual threshold (mm)");
  cal->add_option("--kmax", cal_args.k_max, "RANSAC hypothesis rounds");
  cal->add_option("--seed", cal_args.seed, "RANSAC RNG seed");
  cal->add_option("--threads", cal_args.threads,
                  "Concurrent hypothesis evaluation threads");

  CalibrateArgs cmp_args;
  cmp_args.method = "all";
  auto* cmp = app.add_subcommand(
      "compare", "Run all four calibration methods and print the comparison");
  cmp->add_option("--samples", cmp_args.samples, "Sample CSV")->required();
  cmp->add_option("--config", cmp_args.config, "RANSAC configuration JSON");
  cmp->add_option("--out", cmp_args.out_dir, "Output directory")->required();
  cmp->add_option("--epsilon-mm", cmp_args.epsilon_mm,
                  "Inlier residual threshold (mm)");
  cmp->add_option("--kmax", cmp_args.k_max, "RANSAC hypothesis rounds");
  cmp->add_option("--seed", cmp_args.seed, "RANSAC RNG seed");
  cmp->add_option("--threads", cmp_args.threads,
                  "Concurrent hypothesis evaluation threads");

  EvaluateArgs eval_args;
  auto* ev = app.add_subcommand(
      "evaluate", "Localization accuracy sweep over slide offsets");
  ev->add_option("--scene", eval_args.scene, "Scene configuration JSON")
      ->required();
  ev->add_option("--estimate", eval_args.estimate,
                 "Extrinsic estimate JSON (alpha_deg, L0_mm, beta_deg)")
      ->required();
  ev->add_option("--sweep", eval_args.sweep,
                 "Sweep JSON with offsets_mm (default 0..200 step 50)");
  ev->add_option("--out", eval_args.out_dir, "Output directory")->required();
  ev->add_option("--seed", eval_args.seed, "Override the scene RNG seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run_simulate(sim_args);
    if (cal->parsed()) return run_calibrate(cal_args, "calibrate");
    if (cmp->parsed()) return run_calibrate(cmp_args, "compare");
    if (ev->parsed()) return run_evaluate(eval_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 7;
  }
  return 0;
}
