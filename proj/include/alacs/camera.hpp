#pragma once

#include <array>

namespace alacs {

/// Pin-hole intrinsics with radial-tangential distortion (k1, k2, p1, p2, k3).
struct CameraIntrinsics {
  double fx = 0.0;  // focal lengths, pixels
  double fy = 0.0;
  double cx = 0.0;  // principal point, pixels
  double cy = 0.0;
  std::array<double, 5> dist{};  // k1, k2, p1, p2, k3

  /// Throws InvalidConfig unless fx > 0 and fy > 0.
  void validate() const;
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

/// Ray direction with unit depth component: (x/z, y/z).
struct NormalizedPoint {
  double x = 0.0;
  double y = 0.0;
};

/// 3D point in the camera frame, meters.
struct CameraPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// |z| below this is treated as a degenerate depth.
inline constexpr double kDepthTolerance = 1e-12;

/// (x, y, z) -> (x/z, y/z). Throws DegenerateDepth when |z| < kDepthTolerance.
NormalizedPoint normalize(const CameraPoint& p);

/// Applies distortion then intrinsics. With zero distortion this is the exact
/// affine map (fx*x + cx, fy*y + cy).
PixelPoint project(const NormalizedPoint& n, const CameraIntrinsics& K);

/// Inverse of project: removes intrinsics, then undistorts iteratively
/// (Newton, 20-iteration cap, 1e-12 step tolerance in normalized units).
/// Throws NonConvergence if the tolerance is not reached within the cap.
NormalizedPoint unproject(const PixelPoint& m, const CameraIntrinsics& K);

}  // namespace alacs
