#include "alacs/camera.hpp"

#include <cmath>

#include "alacs/error.hpp"

namespace alacs {

namespace {

constexpr int kUndistortMaxIterations = 20;
constexpr double kUndistortTolerance = 1e-12;

struct Distorted {
  double x, y;
};

Distorted apply_distortion(double x, double y, const std::array<double, 5>& d) {
  const double k1 = d[0], k2 = d[1], p1 = d[2], p2 = d[3], k3 = d[4];
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  return {x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
          y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y};
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    fail(ErrorCode::InvalidConfig, "intrinsics require fx > 0 and fy > 0");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) {
    fail(ErrorCode::InvalidConfig, "intrinsics principal point must be finite");
  }
}

NormalizedPoint normalize(const CameraPoint& p) {
  if (std::abs(p.z) < kDepthTolerance) {
    fail(ErrorCode::DegenerateDepth,
         "cannot normalize a point with |z| < 1e-12 m");
  }
  return {p.x / p.z, p.y / p.z};
}

PixelPoint project(const NormalizedPoint& n, const CameraIntrinsics& K) {
  const Distorted d = apply_distortion(n.x, n.y, K.dist);
  return {K.fx * d.x + K.cx, K.fy * d.y + K.cy};
}

NormalizedPoint unproject(const PixelPoint& m, const CameraIntrinsics& K) {
  const double xd = (m.u - K.cx) / K.fx;
  const double yd = (m.v - K.cy) / K.fy;

  // Newton iteration on (distort(x, y) - (xd, yd)) = 0, started from the
  // distorted coordinates.
  double x = xd, y = yd;
  const double k1 = K.dist[0], k2 = K.dist[1], p1 = K.dist[2], p2 = K.dist[3],
               k3 = K.dist[4];
  for (int it = 0; it < kUndistortMaxIterations; ++it) {
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
    const double dradial = k1 + r2 * (2.0 * k2 + 3.0 * k3 * r2);  // d(radial)/d(r2)

    const double fx_ = x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x) - xd;
    const double fy_ = y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y - yd;

    // Jacobian of the distortion map.
    const double j00 = radial + 2.0 * x * x * dradial + 2.0 * p1 * y + 6.0 * p2 * x;
    const double j01 = 2.0 * x * y * dradial + 2.0 * p1 * x + 2.0 * p2 * y;
    const double j10 = 2.0 * x * y * dradial + 2.0 * p1 * x + 2.0 * p2 * y;
    const double j11 = radial + 2.0 * y * y * dradial + 6.0 * p1 * y + 2.0 * p2 * x;

    const double det = j00 * j11 - j01 * j10;
    if (std::abs(det) < 1e-14 || !std::isfinite(det)) {
      fail(ErrorCode::NonConvergence,
           "undistortion Jacobian is singular; distortion not invertible here");
    }
    const double dx = (j11 * fx_ - j01 * fy_) / det;
    const double dy = (j00 * fy_ - j10 * fx_) / det;
    x -= dx;
    y -= dy;
    if (std::abs(dx) < kUndistortTolerance && std::abs(dy) < kUndistortTolerance) {
      return {x, y};
    }
  }
  fail(ErrorCode::NonConvergence,
       "undistortion did not reach 1e-12 within 20 iterations");
}

}  // namespace alacs
