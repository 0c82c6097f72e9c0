#pragma once

#include <Eigen/Dense>
#include <vector>

#include "alacs/camera.hpp"

// Planar checkerboard target: synthetic corner generation, homography-based
// pose reconstruction, and ground-truth depth by ray/plane intersection.

namespace alacs {

/// Corner grid of the calibration board.
struct BoardSpec {
  int rows = 0;
  int cols = 0;
  double square_size = 0.0;  // meters

  void validate() const;  // rows >= 3, cols >= 3, square_size > 0

  double width() const { return (cols - 1) * square_size; }
  double height() const { return (rows - 1) * square_size; }
};

/// Board-to-camera pose. rotation is orthonormal with determinant +1 and
/// translation.z() > 0 for a board in front of the camera.
struct PlanePose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d plane_normal() const { return rotation.col(2); }
};

/// One detected (or synthesized) corner: its on-board position and its pixel.
struct CornerObservation {
  Eigen::Vector2d board_xy = Eigen::Vector2d::Zero();  // meters
  PixelPoint pixel;
};

/// Projects every grid corner of `spec` under `pose`. Row-major order,
/// corner (r, c) at board position (c*square, r*square).
/// Throws BehindCamera if any corner has non-positive depth.
std::vector<CornerObservation> synthesize_corners(const BoardSpec& spec,
                                                  const PlanePose& pose,
                                                  const CameraIntrinsics& K);

/// Recovers the board pose from >= 4 non-collinear corners: normalized DLT
/// homography, decomposition into [r1 r2 t] with the sign making t.z > 0,
/// then nearest-rotation projection of (r1, r2, r1 x r2).
/// Throws DegenerateConfiguration on collinear or rank-deficient input.
PlanePose reconstruct_pose(const std::vector<CornerObservation>& corners,
                           const CameraIntrinsics& K);

// Ray/plane denominators below this are treated as parallel.
inline constexpr double kParallelRayTolerance = 1e-9;

/// Depth at which the ray (u, v, 1) pierces the board plane:
/// z = (n . t) / (n . [u, v, 1]) with n the plane normal.
/// Throws ParallelRay when the denominator is below tolerance.
double depth_on_plane(const NormalizedPoint& n, const PlanePose& pose);

}  // namespace alacs
