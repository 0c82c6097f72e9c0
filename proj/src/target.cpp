#include "alacs/target.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "alacs/error.hpp"

namespace alacs {

namespace {

// Similarity transform moving the centroid to the origin and the mean
// distance to sqrt(2); conditions the DLT system.
Eigen::Matrix3d hartley_normalization(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());

  const double scale =
      mean_dist > 1e-15 ? std::sqrt(2.0) / mean_dist : 1.0;
  Eigen::Matrix3d T = Eigen::Matrix3d::Identity();
  T(0, 0) = scale;
  T(1, 1) = scale;
  T(0, 2) = -scale * centroid.x();
  T(1, 2) = -scale * centroid.y();
  return T;
}

}  // namespace

void BoardSpec::validate() const {
  if (rows < 3 || cols < 3 || !(square_size > 0.0)) {
    fail(ErrorCode::InvalidConfig,
         "board requires rows >= 3, cols >= 3, square_size > 0");
  }
}

std::vector<CornerObservation> synthesize_corners(const BoardSpec& spec,
                                                  const PlanePose& pose,
                                                  const CameraIntrinsics& K) {
  spec.validate();
  std::vector<CornerObservation> corners;
  corners.reserve(static_cast<std::size_t>(spec.rows) * spec.cols);
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const Eigen::Vector2d xy(c * spec.square_size, r * spec.square_size);
      const Eigen::Vector3d p =
          pose.rotation * Eigen::Vector3d(xy.x(), xy.y(), 0.0) +
          pose.translation;
      if (p.z() <= kDepthTolerance) {
        fail(ErrorCode::BehindCamera,
             "board corner projects behind the camera");
      }
      const NormalizedPoint n = normalize({p.x(), p.y(), p.z()});
      corners.push_back({xy, project(n, K)});
    }
  }
  return corners;
}

PlanePose reconstruct_pose(const std::vector<CornerObservation>& corners,
                           const CameraIntrinsics& K) {
  if (corners.size() < 4) {
    fail(ErrorCode::DegenerateConfiguration,
         "pose reconstruction needs at least 4 corners");
  }

  std::vector<Eigen::Vector2d> board, image;
  board.reserve(corners.size());
  image.reserve(corners.size());
  for (const auto& c : corners) {
    board.push_back(c.board_xy);
    const NormalizedPoint n = unproject(c.pixel, K);
    image.emplace_back(n.x, n.y);
  }

  const Eigen::Matrix3d Tb = hartley_normalization(board);
  const Eigen::Matrix3d Ti = hartley_normalization(image);

  const auto n_pts = static_cast<Eigen::Index>(corners.size());
  Eigen::MatrixXd A(2 * n_pts, 9);
  for (Eigen::Index i = 0; i < n_pts; ++i) {
    const Eigen::Vector3d X = Tb * board[i].homogeneous();
    const Eigen::Vector3d x = Ti * image[i].homogeneous();
    A.row(2 * i) << X.x(), X.y(), 1.0, 0.0, 0.0, 0.0, -x.x() * X.x(),
        -x.x() * X.y(), -x.x();
    A.row(2 * i + 1) << 0.0, 0.0, 0.0, X.x(), X.y(), 1.0, -x.y() * X.x(),
        -x.y() * X.y(), -x.y();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Collinear corners leave the system rank-deficient beyond the usual
  // one-dimensional null space.
  if (sv(7) < 1e-9 * sv(0)) {
    fail(ErrorCode::DegenerateConfiguration,
         "degenerate corner configuration (collinear board points?)");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  Eigen::Matrix3d H = Ti.inverse() * Hn * Tb;

  // Decompose H ~ [r1 r2 t] up to scale; the board sits in front of the
  // camera, which fixes the sign.
  double lambda = 2.0 / (H.col(0).norm() + H.col(1).norm());
  if (H(2, 2) * lambda < 0.0) lambda = -lambda;
  const Eigen::Vector3d r1 = lambda * H.col(0);
  const Eigen::Vector3d r2 = lambda * H.col(1);
  const Eigen::Vector3d t = lambda * H.col(2);
  if (t.z() <= 0.0) {
    fail(ErrorCode::DegenerateConfiguration,
         "homography decomposition puts the board behind the camera");
  }

  Eigen::Matrix3d R0;
  R0.col(0) = r1;
  R0.col(1) = r2;
  R0.col(2) = r1.cross(r2);

  // Nearest rotation: noise breaks the orthonormality of (r1, r2).
  Eigen::JacobiSVD<Eigen::Matrix3d> rsvd(
      R0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d R = rsvd.matrixU() * rsvd.matrixV().transpose();
  if (R.determinant() < 0.0) {
    Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
    flip(2, 2) = -1.0;
    R = rsvd.matrixU() * flip * rsvd.matrixV().transpose();
  }

  return {R, t};
}

double depth_on_plane(const NormalizedPoint& n, const PlanePose& pose) {
  const Eigen::Vector3d np = pose.plane_normal();
  const double den = np.dot(Eigen::Vector3d(n.x, n.y, 1.0));
  if (std::abs(den) < kParallelRayTolerance) {
    fail(ErrorCode::ParallelRay, "ray parallel to the board plane");
  }
  return np.dot(pose.translation) / den;
}

}  // namespace alacs
