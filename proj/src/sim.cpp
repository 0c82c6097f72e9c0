#include "alacs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alacs/error.hpp"
#include "alacs/rng.hpp"

namespace alacs {

namespace {

constexpr std::uint64_t kPositionStream = 0x504f534954494f4eULL;
constexpr std::uint64_t kOutlierStream = 0x4f55544c49455253ULL;
constexpr std::uint64_t kStudyStream = 0x53545544594f4646ULL;
constexpr std::uint64_t kScanStream = 0x5343414e42415443ULL;

// Laser points are placed evenly along the clipped laser/board segment,
// inset from the segment ends so they stay clear of the board border.
constexpr double kSegmentEndMargin = 0.08;

// Laser sheet in the camera frame: normal * p + L = 0.
Eigen::Vector3d laser_sheet_normal(const ExtrinsicParams& p) {
  return {std::cos(p.alpha), std::tan(p.beta), -std::sin(p.alpha)};
}

struct BoardSegment {
  Eigen::Vector2d base;       // point on the line, board coords
  Eigen::Vector2d direction;  // unit
  double t_min = 0.0;
  double t_max = 0.0;
};

// Intersection of the laser sheet with the board plane, clipped to the
// corner rectangle [0, W] x [0, H] in board coordinates.
BoardSegment laser_segment_on_board(const ExtrinsicParams& truth, double L,
                                    const BoardSpec& board,
                                    const PlanePose& pose) {
  const Eigen::Vector3d n_c = laser_sheet_normal(truth);
  const Eigen::Vector3d g3 = pose.rotation.transpose() * n_c;
  const Eigen::Vector2d g(g3.x(), g3.y());
  const double h = n_c.dot(pose.translation) + L;
  if (g.norm() < 1e-12) {
    fail(ErrorCode::NoIntersection,
         "board plane is parallel to the laser sheet");
  }

  BoardSegment seg;
  const Eigen::Vector2d center(board.width() / 2.0, board.height() / 2.0);
  seg.base = center - ((g.dot(center) + h) / g.squaredNorm()) * g;
  seg.direction = Eigen::Vector2d(-g.y(), g.x()).normalized();

  // Liang-Barsky clip of base + t*direction against the rectangle.
  double t_lo = -std::numeric_limits<double>::infinity();
  double t_hi = std::numeric_limits<double>::infinity();
  const double lo[2] = {0.0, 0.0};
  const double hi[2] = {board.width(), board.height()};
  for (int axis = 0; axis < 2; ++axis) {
    const double p0 = seg.base(axis);
    const double d = seg.direction(axis);
    if (std::abs(d) < 1e-15) {
      if (p0 < lo[axis] || p0 > hi[axis]) {
        fail(ErrorCode::NoIntersection, "laser line misses the board");
      }
      continue;
    }
    double t0 = (lo[axis] - p0) / d;
    double t1 = (hi[axis] - p0) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_lo = std::max(t_lo, t0);
    t_hi = std::min(t_hi, t1);
  }
  if (!(t_hi - t_lo > 1e-9)) {
    fail(ErrorCode::NoIntersection, "laser line misses the board");
  }
  seg.t_min = t_lo;
  seg.t_max = t_hi;
  return seg;
}

PlanePose random_board_pose(const SceneConfig& cfg, double L, int position,
                            Rng& rng) {
  const int n = cfg.n_positions;
  const double span = cfg.depth_max - cfg.depth_min;
  const double base_z =
      n > 1 ? cfg.depth_min + span * position / (n - 1)
            : 0.5 * (cfg.depth_min + cfg.depth_max);
  const double spacing = n > 1 ? span / (n - 1) : span;
  const double z = std::clamp(base_z + rng.uniform(-0.25, 0.25) * spacing,
                              cfg.depth_min, cfg.depth_max);

  const double tilt_x = rng.uniform(-0.20, 0.20);
  const double tilt_y = rng.uniform(-0.20, 0.20);
  const double roll = rng.uniform(-0.15, 0.15);
  const Eigen::Matrix3d R =
      (Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()) *
       Eigen::AngleAxisd(tilt_y, Eigen::Vector3d::UnitY()) *
       Eigen::AngleAxisd(tilt_x, Eigen::Vector3d::UnitX()))
          .toRotationMatrix();

  // Where the laser sheet crosses y = 0 at this depth; the board is
  // centered near that line so the projected stripe lands on it.
  const double c = std::cos(cfg.truth.alpha);
  const double laser_x = (z * std::sin(cfg.truth.alpha) - L) / c;
  const Eigen::Vector3d center(laser_x + rng.uniform(-0.02, 0.02),
                               rng.uniform(-0.05, 0.05), z);

  const Eigen::Vector3d board_center(cfg.board.width() / 2.0,
                                     cfg.board.height() / 2.0, 0.0);
  return {R, center - R * board_center};
}

}  // namespace

void SceneConfig::validate() const {
  truth.validate();
  board.validate();
  intrinsics.validate();
  if (n_positions < 1) fail(ErrorCode::InvalidConfig, "n_positions must be >= 1");
  if (!(depth_min > 0.0) || !(depth_min < depth_max)) {
    fail(ErrorCode::InvalidConfig, "depth range requires 0 < min < max");
  }
  if (points_per_image < 1) {
    fail(ErrorCode::InvalidConfig, "points_per_image must be >= 1");
  }
  if (!(pixel_noise_sigma >= 0.0)) {
    fail(ErrorCode::InvalidConfig, "pixel_noise_sigma must be >= 0");
  }
  if (!(outlier_fraction >= 0.0) || !(outlier_fraction < 1.0)) {
    fail(ErrorCode::InvalidConfig, "outlier_fraction must lie in [0, 1)");
  }
  if (!std::isfinite(outlier_depth_shift)) {
    fail(ErrorCode::InvalidConfig, "outlier_depth_shift must be finite");
  }
}

void ScanSweepConfig::validate() const {
  if (offsets.empty()) fail(ErrorCode::InvalidConfig, "sweep has no offsets");
  for (const double d : offsets) SlideState{d}.validate();
}

std::vector<LabeledSample> generate_samples(const SceneConfig& cfg,
                                            const SlideState& s) {
  cfg.validate();
  s.validate();
  const double L = effective_baseline(cfg.truth, s);

  std::vector<LabeledSample> out;
  out.reserve(static_cast<std::size_t>(cfg.n_positions) * cfg.points_per_image);

  for (int pos = 0; pos < cfg.n_positions; ++pos) {
    Rng rng = Rng::derived(cfg.rng_seed, kPositionStream,
                           static_cast<std::uint64_t>(pos));
    const PlanePose pose = random_board_pose(cfg, L, pos, rng);
    const BoardSegment seg =
        laser_segment_on_board(cfg.truth, L, cfg.board, pose);

    const int m = cfg.points_per_image;
    for (int k = 0; k < m; ++k) {
      const double frac =
          m == 1 ? 0.5
                 : kSegmentEndMargin +
                       (1.0 - 2.0 * kSegmentEndMargin) * k / (m - 1);
      const double t = seg.t_min + frac * (seg.t_max - seg.t_min);
      const Eigen::Vector2d bxy = seg.base + t * seg.direction;
      const Eigen::Vector3d p =
          pose.rotation * Eigen::Vector3d(bxy.x(), bxy.y(), 0.0) +
          pose.translation;

      const CameraPoint truth_point{p.x(), p.y(), p.z()};
      const NormalizedPoint exact = normalize(truth_point);
      PixelPoint pix = project(exact, cfg.intrinsics);
      pix.u += rng.gaussian(cfg.pixel_noise_sigma);
      pix.v += rng.gaussian(cfg.pixel_noise_sigma);
      const NormalizedPoint noisy = unproject(pix, cfg.intrinsics);

      // Depth the calibration pipeline would assign: the board plane
      // intersected along the measured (noisy) ray.
      const double z_c = depth_on_plane(noisy, pose);

      out.push_back({{noisy.x, noisy.y, z_c}, false, truth_point});
    }
  }

  const auto n = out.size();
  const auto n_outliers =
      static_cast<std::size_t>(std::floor(cfg.outlier_fraction * n));
  if (n_outliers > 0) {
    Rng rng = Rng::derived(cfg.rng_seed, kOutlierStream);
    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    for (std::size_t i = 0; i < n_outliers; ++i) {
      auto& hit = out[static_cast<std::size_t>(order[i])];
      hit.sample.z_c += cfg.outlier_depth_shift;
      hit.is_outlier = true;
    }
  }
  return out;
}

namespace {

double percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

AxisStats axis_stats(std::vector<double>& errors) {
  std::sort(errors.begin(), errors.end());
  AxisStats st;
  st.median = percentile(errors, 0.50);
  st.q25 = percentile(errors, 0.25);
  st.q75 = percentile(errors, 0.75);
  st.max = errors.empty() ? 0.0 : errors.back();
  return st;
}

}  // namespace

std::vector<OffsetErrorStats> localization_study(const SceneConfig& cfg,
                                                 const ScanSweepConfig& sweep,
                                                 const ExtrinsicParams& est) {
  sweep.validate();
  est.validate();

  std::vector<OffsetErrorStats> stats;
  stats.reserve(sweep.offsets.size());
  for (std::size_t j = 0; j < sweep.offsets.size(); ++j) {
    const double d = sweep.offsets[j];
    SceneConfig fresh = cfg;
    fresh.rng_seed = derive_seed(cfg.rng_seed, kStudyStream, j);
    const std::vector<LabeledSample> samples =
        generate_samples(fresh, SlideState{d});

    std::vector<double> ex, ey, ez;
    ex.reserve(samples.size());
    ey.reserve(samples.size());
    ez.reserve(samples.size());
    for (const auto& ls : samples) {
      const CameraPoint ref = ls.measured_point();
      const CameraPoint hat = point_high_fidelity(
          {ls.sample.u_bar, ls.sample.v_bar}, est, SlideState{d});
      ex.push_back(std::abs(hat.x - ref.x));
      ey.push_back(std::abs(hat.y - ref.y));
      ez.push_back(std::abs(hat.z - ref.z));
    }

    OffsetErrorStats row;
    row.offset = d;
    row.n_samples = static_cast<int>(samples.size());
    row.x = axis_stats(ex);
    row.y = axis_stats(ey);
    row.z = axis_stats(ez);
    stats.push_back(row);
  }
  return stats;
}

IntervalScanResult interval_scan(const SceneConfig& cfg, double start_d,
                                 const std::array<bool, kScanBatches>& occlusion) {
  const double last = start_d + (kScanBatches - 1) * kScanStep;
  if (!(start_d >= 0.0) || !(last <= kSlideStroke)) {
    fail(ErrorCode::InvalidConfig,
         "interval scan must fit within the slide stroke");
  }

  IntervalScanResult result;
  std::vector<std::pair<double, int>> depths;  // candidate depth -> batch
  for (int b = 0; b < kScanBatches; ++b) {
    ScanBatch& batch = result.batches[static_cast<std::size_t>(b)];
    batch.offset = start_d + b * kScanStep;
    batch.occluded = occlusion[static_cast<std::size_t>(b)];
    if (batch.occluded) continue;

    SceneConfig sub = cfg;
    sub.rng_seed = derive_seed(cfg.rng_seed, kScanStream,
                               static_cast<std::uint64_t>(b));
    batch.samples = generate_samples(sub, SlideState{batch.offset});

    CameraPoint mean{};
    for (const auto& ls : batch.samples) {
      const CameraPoint p =
          point_high_fidelity({ls.sample.u_bar, ls.sample.v_bar}, cfg.truth,
                              SlideState{batch.offset});
      mean.x += p.x;
      mean.y += p.y;
      mean.z += p.z;
    }
    const auto count = static_cast<double>(batch.samples.size());
    mean.x /= count;
    mean.y /= count;
    mean.z /= count;
    batch.candidate = mean;
    depths.emplace_back(mean.z, b);
  }

  if (depths.empty()) {
    fail(ErrorCode::AllOccluded, "every scan batch is occluded");
  }

  // Median-depth candidate; stand-in for a full candidate scoring scheme.
  std::sort(depths.begin(), depths.end());
  const auto mid = (depths.size() - 1) / 2;
  result.selected_index = depths[mid].second;
  result.selected =
      *result.batches[static_cast<std::size_t>(result.selected_index)].candidate;
  return result;
}

}  // namespace alacs
