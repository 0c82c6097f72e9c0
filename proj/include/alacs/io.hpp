#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "alacs/calib.hpp"
#include "alacs/sim.hpp"
#include "alacs/target.hpp"

// File formats. JSON carries configuration and reports with angles in
// degrees and lengths in millimeters; CSV sample files keep the z_c_m
// column in meters.

namespace alacs {

// --- intrinsics: { "fx", "fy", "cx", "cy", "dist": [k1,k2,p1,p2,k3] } ---
CameraIntrinsics load_intrinsics_json(const std::filesystem::path& path);
void save_intrinsics_json(const std::filesystem::path& path,
                          const CameraIntrinsics& K);

// --- extrinsics: { "alpha_deg", "L0_mm", "beta_deg" } ---
ExtrinsicParams load_extrinsics_json(const std::filesystem::path& path);
void save_extrinsics_json(const std::filesystem::path& path,
                          const ExtrinsicParams& p);

// --- samples CSV: u_bar,v_bar,z_c_m[,is_outlier] ---
std::vector<DataSample> load_samples_csv(const std::filesystem::path& path);
void save_samples_csv(const std::filesystem::path& path,
                      std::span<const DataSample> samples);
void save_samples_csv(const std::filesystem::path& path,
                      std::span<const LabeledSample> samples);

// --- corners CSV: board_x_m,board_y_m,pixel_u,pixel_v ---
std::vector<CornerObservation> load_corners_csv(
    const std::filesystem::path& path);

// --- scene / RANSAC / sweep configuration ---
SceneConfig load_scene_json(const std::filesystem::path& path);
void save_scene_json(const std::filesystem::path& path, const SceneConfig& cfg);
RansacConfig load_ransac_json(const std::filesystem::path& path);
ScanSweepConfig load_sweep_json(const std::filesystem::path& path);

// --- calibration reports ---
std::string report_to_json(const CalibrationReport& report);
void save_reports_json(const std::filesystem::path& path,
                       std::span<const CalibrationReport> reports);
/// Aligned four-method comparison table (deg / mm).
std::string reports_table(std::span<const CalibrationReport> reports);

// --- localization statistics CSV (long format, one row per offset+axis) ---
void save_localization_csv(const std::filesystem::path& path,
                           std::span<const OffsetErrorStats> stats);

/// Run manifest written next to every output bundle. No timestamps: outputs
/// must be byte-identical across reruns with the same seed.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> inputs;   // name -> path
  std::vector<std::pair<std::string, std::string>> outputs;  // name -> path
  std::uint64_t rng_seed = 0;
  std::string output_dir;
};

void save_manifest(const std::filesystem::path& path, const RunManifest& m);

}  // namespace alacs
