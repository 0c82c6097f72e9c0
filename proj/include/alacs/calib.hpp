#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "alacs/scanner.hpp"

// Extrinsic calibration from samples (u, v, z): nonlinear least squares on
// the depth residual, seeded by an exact linear initializer, with a
// RANSAC wrapper for outlier-contaminated data.

namespace alacs {

/// One calibration sample: a laser pixel's normalized coordinates paired
/// with its ground-truth depth from the checkerboard.
struct DataSample {
  double u_bar = 0.0;
  double v_bar = 0.0;
  double z_c = 0.0;  // meters

  void validate() const;  // z_c > 0, finite coordinates
};

struct RansacConfig {
  int k_max = 500;          // hypothesis rounds
  double epsilon = 0.002;   // inlier residual threshold, meters
  int subset_size = 4;      // samples per hypothesis
  std::uint64_t rng_seed = 0;
  int threads = 1;          // >1 evaluates rounds concurrently

  void validate(int n_samples) const;
};

enum class Method : int {
  LowFidelityAll = 1,     // beta pinned to 0, every sample used
  LowFidelityRansac = 2,  // beta pinned to 0, RANSAC consensus
  HighFidelityAll = 3,    // full model, every sample used
  HighFidelityRansac = 4, // full model, RANSAC consensus
};

const char* method_label(Method m);

struct CalibrationReport {
  Method method = Method::HighFidelityRansac;
  ExtrinsicParams estimate;  // estimate.beta == 0 when !fits_beta
  bool fits_beta = true;
  /// Evaluation set: every index for the all-data methods, the consensus
  /// set for the RANSAC methods. Ascending.
  std::vector<int> inlier_indices;
  /// Residual z - z_hat under the final estimate, all samples, meters.
  /// NaN where the estimate is singular for that ray.
  std::vector<double> residuals;
  /// Mean of |residual| over the evaluation set, meters.
  double mean_abs_residual = 0.0;
};

/// z_c - L0 / (sin(alpha) - u*cos(alpha) - v*tan(beta)).
/// Throws SingularRay when the denominator magnitude is below 1e-6.
double residual(const DataSample& sample, const ExtrinsicParams& est);

/// Analytic d(residual)/d(alpha, L0, beta) at est.
Eigen::Vector3d residual_jacobian(const DataSample& sample,
                                  const ExtrinsicParams& est);

/// Closed-form initializer. The model is exactly linear in reciprocal depth:
/// 1/z = a + b*u + c*v with a = sin(alpha)/L, b = -cos(alpha)/L,
/// c = -tan(beta)/L, so a least-squares solve recovers
/// L = 1/hypot(a, b), alpha = atan2(a, -b), beta = atan(-c*L).
/// With fit_beta false the v column is dropped and beta is 0.
/// Throws RankDeficient (needs 3 samples spanning distinct u and v;
/// 2 samples with distinct u when fit_beta is false).
ExtrinsicParams linear_init(std::span<const DataSample> samples,
                            bool fit_beta = true);

/// Levenberg-Marquardt on f = sum (z_i - z_hat_i)^2 over (alpha, L0, beta),
/// or (alpha, L0) with beta pinned to 0 when fit_beta is false.
/// Converges when the step norm < 1e-12 or the gradient norm < 1e-10;
/// throws NonConvergence after 500 iterations. The returned objective is
/// never larger than the initializer's.
ExtrinsicParams refine(std::span<const DataSample> samples,
                       const ExtrinsicParams& init, bool fit_beta);

/// linear_init followed by refine.
ExtrinsicParams fit_samples(std::span<const DataSample> samples,
                            bool fit_beta);

/// Plain least squares on every sample (methods 1 and 3).
CalibrationReport calibrate_all_data(std::span<const DataSample> samples,
                                     bool fit_beta);

/// Hypothesize-and-verify robust calibration (methods 2 and 4): k_max rounds
/// of fit-on-random-subset / count-inliers, keep the largest consensus set
/// (strict improvement, so ties keep the earliest), then refit on it.
/// Round k draws its subset from a stream derived from (rng_seed, k), so
/// serial and parallel evaluation produce identical reports.
/// Throws NoConsensus when the best inlier set is smaller than subset_size.
CalibrationReport ransac_calibrate(std::span<const DataSample> samples,
                                   const RansacConfig& cfg, bool fit_beta);

/// Runs methods 1-4 on the same samples, in method order.
std::vector<CalibrationReport> compare_methods(
    std::span<const DataSample> samples, const RansacConfig& cfg);

}  // namespace alacs
