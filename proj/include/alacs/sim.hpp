#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "alacs/calib.hpp"
#include "alacs/target.hpp"

// Deterministic synthetic-scene generator: known scanner extrinsics and
// board poses produce laser-line samples with configurable pixel noise and
// planted depth outliers.

namespace alacs {

struct SceneConfig {
  ExtrinsicParams truth;
  BoardSpec board{15, 12, 0.05};
  CameraIntrinsics intrinsics{1800.0, 1800.0, 1224.0, 1024.0,
                              {-0.10, 0.01, 5e-4, 5e-4, 0.0}};
  int n_positions = 10;        // board placements
  double depth_min = 0.6;      // meters
  double depth_max = 1.2;
  int points_per_image = 3;
  double pixel_noise_sigma = 0.0;   // pixels
  double outlier_fraction = 0.0;    // [0, 1)
  double outlier_depth_shift = 0.0; // meters, added to flagged z_c
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Slide offsets for a localization sweep, meters.
struct ScanSweepConfig {
  std::vector<double> offsets{0.0, 0.05, 0.10, 0.15, 0.20};

  void validate() const;  // each offset within the slide stroke
};

struct LabeledSample {
  DataSample sample;
  bool is_outlier = false;
  CameraPoint truth_point;  // exact laser point, before noise

  /// The checkerboard-derived 3D measurement z_c * (u, v, 1): depth from the
  /// board plane along the measured ray. This is the reference the scanner
  /// estimate is judged against.
  CameraPoint measured_point() const {
    return {sample.z_c * sample.u_bar, sample.z_c * sample.v_bar, sample.z_c};
  }
};

/// Board poses -> laser-line intersections -> pixels (+ Gaussian noise) ->
/// normalized samples. z_c is the board-plane depth of the *noisy* ray,
/// mirroring how real samples are computed from a reconstructed pose.
/// A seeded floor(outlier_fraction * n) subset gets z_c shifted by
/// outlier_depth_shift and is flagged.
/// Throws NoIntersection when the laser line misses a board.
std::vector<LabeledSample> generate_samples(const SceneConfig& cfg,
                                            const SlideState& s);

struct AxisStats {
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  double max = 0.0;
};

struct OffsetErrorStats {
  double offset = 0.0;  // meters
  int n_samples = 0;
  AxisStats x, y, z;    // absolute errors per axis, meters
};

/// For each sweep offset d: fresh samples under the ground truth, estimated
/// points via point_high_fidelity under `est` with L = L0_hat - d, absolute
/// per-axis errors against the checkerboard-derived measurement, summarized
/// as median / quartiles / max.
std::vector<OffsetErrorStats> localization_study(const SceneConfig& cfg,
                                                 const ScanSweepConfig& sweep,
                                                 const ExtrinsicParams& est);

inline constexpr int kScanBatches = 5;
inline constexpr double kScanStep = 0.01;  // meters between scan stops

struct ScanBatch {
  double offset = 0.0;  // meters
  bool occluded = false;
  std::vector<LabeledSample> samples;
  std::optional<CameraPoint> candidate;  // mean model point of the batch
};

struct IntervalScanResult {
  std::array<ScanBatch, kScanBatches> batches;
  CameraPoint selected;
  int selected_index = -1;
};

/// Interval scan: five batches at d = start_d + {0..4} cm. Masked batches
/// produce no candidate; among the rest the candidate with the median depth
/// is selected. Throws AllOccluded when every batch is masked.
IntervalScanResult interval_scan(
    const SceneConfig& cfg, double start_d,
    const std::array<bool, kScanBatches>& occlusion = {});

}  // namespace alacs
