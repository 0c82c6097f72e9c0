#include "alacs/scanner.hpp"

#include <cmath>
#include <numbers>

#include "alacs/error.hpp"

namespace alacs {

void ExtrinsicParams::validate() const {
  if (!(alpha > 0.0) || !(alpha < std::numbers::pi / 2.0)) {
    fail(ErrorCode::InvalidConfig, "alpha must lie in (0, pi/2)");
  }
  if (!(L0 > 0.0)) {
    fail(ErrorCode::InvalidConfig, "L0 must be positive");
  }
  if (!(std::abs(beta) < std::numbers::pi / 4.0)) {
    fail(ErrorCode::InvalidConfig, "|beta| must be below pi/4");
  }
}

void SlideState::validate() const {
  if (!(d >= 0.0) || !(d <= kSlideStroke)) {
    fail(ErrorCode::InvalidConfig, "slide offset must lie in [0, 0.20] m");
  }
}

double triangulation_denominator(const NormalizedPoint& n, double alpha,
                                 double beta) {
  return std::sin(alpha) - n.x * std::cos(alpha) - n.y * std::tan(beta);
}

double effective_baseline(const ExtrinsicParams& p, const SlideState& s) {
  const double L = p.L0 - s.d;
  if (!(L > 0.0)) {
    fail(ErrorCode::NonPositiveBaseline,
         "slide offset exceeds the home baseline: L0 - d <= 0");
  }
  return L;
}

double depth_high_fidelity(const NormalizedPoint& n, const ExtrinsicParams& p,
                           const SlideState& s) {
  const double L = effective_baseline(p, s);
  const double den = triangulation_denominator(n, p.alpha, p.beta);
  if (std::abs(den) < kSingularDenominator) {
    fail(ErrorCode::SingularRay, "ray nearly parallel to the laser sheet");
  }
  const double z = L / den;
  if (z <= 0.0) {
    fail(ErrorCode::NegativeDepth, "triangulated depth is non-positive");
  }
  return z;
}

CameraPoint point_high_fidelity(const NormalizedPoint& n,
                                const ExtrinsicParams& p,
                                const SlideState& s) {
  const double z = depth_high_fidelity(n, p, s);
  return {z * n.x, z * n.y, z};
}

double depth_low_fidelity(const NormalizedPoint& n, const ExtrinsicParams& p,
                          const SlideState& s) {
  return depth_high_fidelity(n, {p.alpha, p.L0, 0.0}, s);
}

CameraPoint camera_from_laser(const LaserFramePoint& q,
                              const ExtrinsicParams& p, const SlideState& s) {
  const double L = p.L0 - s.d;  // translation is defined for any offset
  const double c = std::cos(p.alpha);
  const double sn = std::sin(p.alpha);
  return {c * q.x + sn * q.z - L * c,
          q.y,
          -sn * q.x + c * q.z + L * sn};
}

}  // namespace alacs
