#pragma once

#include "alacs/camera.hpp"

// Laser-camera triangulation model. The laser frame F_l is related to the
// camera frame F_c by a rotation alpha about y_l and a horizontal baseline L
// along x_l; the laser sheet is skewed from the (y_l, z_l) plane by beta.
// A ray (u, v) seen on the laser sheet has depth
//
//   z = L / (sin(alpha) - u*cos(alpha) - v*tan(beta))
//
// where L = L0 - d and d is the displacement of the laser along its slide.

namespace alacs {

/// Extrinsic parameters estimated by calibration. Angles in radians,
/// lengths in meters.
struct ExtrinsicParams {
  double alpha = 0.0;  // rotation about y_l between laser and camera frames
  double L0 = 0.0;     // baseline with the slide at home
  double beta = 0.0;   // laser-sheet skew from the (y_l, z_l) plane

  /// Range check: 0 < alpha < pi/2, L0 > 0, |beta| < pi/4.
  /// Throws InvalidConfig. Calibration results and file input are checked;
  /// the forward model itself accepts boundary values.
  void validate() const;
};

// Full travel of the linear slide, meters.
inline constexpr double kSlideStroke = 0.20;

/// Laser displacement from home toward the camera, meters.
struct SlideState {
  double d = 0.0;

  void validate() const;  // 0 <= d <= kSlideStroke
};

/// 3D point in the laser frame F_l. Points emitted by the laser satisfy
/// x = -y * tan(beta).
struct LaserFramePoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

// Rays with |denominator| below this are treated as parallel to the sheet.
inline constexpr double kSingularDenominator = 1e-6;

/// sin(alpha) - u*cos(alpha) - v*tan(beta); shared by the depth model and
/// the calibration residual.
double triangulation_denominator(const NormalizedPoint& n, double alpha,
                                 double beta);

/// L = L0 - d. Throws NonPositiveBaseline when the slide would meet or pass
/// the camera.
double effective_baseline(const ExtrinsicParams& p, const SlideState& s);

/// Depth of the ray n on the laser sheet under the full model.
/// Throws SingularRay (|denominator| < 1e-6) or NegativeDepth (z <= 0).
double depth_high_fidelity(const NormalizedPoint& n, const ExtrinsicParams& p,
                           const SlideState& s);

/// (z*u, z*v, z) with z from depth_high_fidelity.
CameraPoint point_high_fidelity(const NormalizedPoint& n,
                                const ExtrinsicParams& p, const SlideState& s);

/// Depth under the reduced model that assumes beta = 0 (skew term dropped).
double depth_low_fidelity(const NormalizedPoint& n, const ExtrinsicParams& p,
                          const SlideState& s);

/// Rigid transform from the laser frame to the camera frame: rotation by
/// alpha about y and translation (-L cos(alpha), 0, L sin(alpha)).
CameraPoint camera_from_laser(const LaserFramePoint& q,
                              const ExtrinsicParams& p, const SlideState& s);

}  // namespace alacs
