#include "alacs/calib.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>

#include "alacs/error.hpp"
#include "alacs/rng.hpp"

namespace alacs {

namespace {

constexpr int kRefineMaxIterations = 500;
constexpr double kStepTolerance = 1e-12;
constexpr double kGradientTolerance = 1e-10;
constexpr std::uint64_t kHypothesisStream = 0x52414e5341435355ULL;

double guarded_residual(const DataSample& s, const ExtrinsicParams& est) {
  const double den =
      triangulation_denominator({s.u_bar, s.v_bar}, est.alpha, est.beta);
  if (std::abs(den) < kSingularDenominator) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return s.z_c - est.L0 / den;
}

// Sum of squared residuals, or nullopt when any sample is singular or the
// parameters left the admissible region.
std::optional<double> objective(std::span<const DataSample> samples,
                                const ExtrinsicParams& est) {
  if (!(est.L0 > 0.0) || !std::isfinite(est.alpha) ||
      !std::isfinite(est.beta) || std::abs(est.beta) >= 1.5) {
    return std::nullopt;
  }
  double f = 0.0;
  for (const auto& s : samples) {
    const double r = guarded_residual(s, est);
    if (!std::isfinite(r)) return std::nullopt;
    f += r * r;
  }
  return f;
}

CalibrationReport make_report(std::span<const DataSample> samples,
                              const ExtrinsicParams& est, Method method,
                              bool fit_beta, std::vector<int> eval_indices) {
  CalibrationReport report;
  report.method = method;
  report.estimate = est;
  report.fits_beta = fit_beta;
  report.inlier_indices = std::move(eval_indices);
  report.residuals.reserve(samples.size());
  for (const auto& s : samples) {
    report.residuals.push_back(guarded_residual(s, est));
  }
  double sum = 0.0;
  for (const int i : report.inlier_indices) {
    sum += std::abs(report.residuals[static_cast<std::size_t>(i)]);
  }
  report.mean_abs_residual =
      report.inlier_indices.empty()
          ? 0.0
          : sum / static_cast<double>(report.inlier_indices.size());
  return report;
}

std::vector<int> all_indices(std::size_t n) {
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
  return idx;
}

struct RoundResult {
  int round = -1;
  std::vector<int> inliers;
};

}  // namespace

void DataSample::validate() const {
  if (!std::isfinite(u_bar) || !std::isfinite(v_bar) || !(z_c > 0.0)) {
    fail(ErrorCode::InvalidConfig,
         "sample requires finite coordinates and z_c > 0");
  }
}

void RansacConfig::validate(int n_samples) const {
  if (k_max < 1) fail(ErrorCode::InvalidConfig, "k_max must be >= 1");
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidConfig, "epsilon must be > 0");
  if (subset_size < 3 || subset_size > n_samples) {
    fail(ErrorCode::InvalidConfig,
         "subset_size must lie in [3, n_samples]");
  }
}

const char* method_label(Method m) {
  switch (m) {
    case Method::LowFidelityAll:
      return "Low-fidelity model + All data";
    case Method::LowFidelityRansac:
      return "Low-fidelity model + RANSAC";
    case Method::HighFidelityAll:
      return "High-fidelity model + All data";
    case Method::HighFidelityRansac:
      return "High-fidelity model + RANSAC";
  }
  return "unknown";
}

double residual(const DataSample& sample, const ExtrinsicParams& est) {
  const double den = triangulation_denominator({sample.u_bar, sample.v_bar},
                                               est.alpha, est.beta);
  if (std::abs(den) < kSingularDenominator) {
    fail(ErrorCode::SingularRay,
         "sample ray nearly parallel to the laser sheet under this estimate");
  }
  return sample.z_c - est.L0 / den;
}

Eigen::Vector3d residual_jacobian(const DataSample& sample,
                                  const ExtrinsicParams& est) {
  const double den = triangulation_denominator({sample.u_bar, sample.v_bar},
                                               est.alpha, est.beta);
  if (std::abs(den) < kSingularDenominator) {
    fail(ErrorCode::SingularRay, "Jacobian undefined for a singular ray");
  }
  const double den2 = den * den;
  const double dden_dalpha =
      std::cos(est.alpha) + sample.u_bar * std::sin(est.alpha);
  const double sec_beta = 1.0 / std::cos(est.beta);
  const double dden_dbeta = -sample.v_bar * sec_beta * sec_beta;
  // residual = z - L0/den, so d(residual)/dp = L0 * dden/dp / den^2.
  return {est.L0 * dden_dalpha / den2, -1.0 / den,
          est.L0 * dden_dbeta / den2};
}

ExtrinsicParams linear_init(std::span<const DataSample> samples,
                            bool fit_beta) {
  const int min_samples = fit_beta ? 3 : 2;
  if (static_cast<int>(samples.size()) < min_samples) {
    fail(ErrorCode::RankDeficient, "too few samples for the linear solve");
  }

  const int cols = fit_beta ? 3 : 2;
  Eigen::MatrixXd A(samples.size(), cols);
  Eigen::VectorXd b(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].validate();
    A(static_cast<Eigen::Index>(i), 0) = 1.0;
    A(static_cast<Eigen::Index>(i), 1) = samples[i].u_bar;
    if (fit_beta) A(static_cast<Eigen::Index>(i), 2) = samples[i].v_bar;
    b(static_cast<Eigen::Index>(i)) = 1.0 / samples[i].z_c;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(cols - 1) < 1e-10 * sv(0)) {
    fail(ErrorCode::RankDeficient,
         "calibration design matrix is rank deficient");
  }
  const Eigen::VectorXd coef = svd.solve(b);

  const double a = coef(0);
  const double bu = coef(1);
  const double L = 1.0 / std::hypot(a, bu);
  const double alpha = std::atan2(a, -bu);
  const double beta = fit_beta ? std::atan(-coef(2) * L) : 0.0;
  if (!std::isfinite(L) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    fail(ErrorCode::RankDeficient, "linear initializer produced no finite estimate");
  }
  return {alpha, L, beta};
}

ExtrinsicParams refine(std::span<const DataSample> samples,
                       const ExtrinsicParams& init, bool fit_beta) {
  const int min_samples = fit_beta ? 3 : 2;
  if (static_cast<int>(samples.size()) < min_samples) {
    fail(ErrorCode::InsufficientSamples, "too few samples to refine");
  }

  ExtrinsicParams p = init;
  if (!fit_beta) p.beta = 0.0;

  auto current = objective(samples, p);
  if (!current) {
    fail(ErrorCode::SingularRay,
         "initializer is singular on at least one sample");
  }

  const int n_params = fit_beta ? 3 : 2;
  double lambda = 1e-3;

  for (int it = 0; it < kRefineMaxIterations; ++it) {
    Eigen::MatrixXd J(samples.size(), n_params);
    Eigen::VectorXd r(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Eigen::Vector3d ji = residual_jacobian(samples[i], p);
      J(static_cast<Eigen::Index>(i), 0) = ji(0);
      J(static_cast<Eigen::Index>(i), 1) = ji(1);
      if (fit_beta) J(static_cast<Eigen::Index>(i), 2) = ji(2);
      r(static_cast<Eigen::Index>(i)) = residual(samples[i], p);
    }

    const Eigen::VectorXd g = J.transpose() * r;
    if (g.norm() < kGradientTolerance) return p;
    const Eigen::MatrixXd JtJ = J.transpose() * J;

    bool stepped = false;
    while (lambda < 1e15) {
      Eigen::MatrixXd damped = JtJ;
      damped.diagonal().array() += lambda;
      const Eigen::VectorXd delta = damped.ldlt().solve(-g);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }

      ExtrinsicParams trial = p;
      trial.alpha += delta(0);
      trial.L0 += delta(1);
      if (fit_beta) trial.beta += delta(2);

      const auto trial_cost = objective(samples, trial);
      if (trial_cost && *trial_cost < *current) {
        p = trial;
        current = trial_cost;
        lambda = std::max(lambda * 0.1, 1e-15);
        stepped = true;
        if (delta.norm() < kStepTolerance) return p;
        break;
      }
      if (delta.norm() < kStepTolerance) return p;  // pinned at a minimum
      lambda *= 10.0;
    }
    if (!stepped && lambda >= 1e15) return p;  // damping saturated; converged
  }
  fail(ErrorCode::NonConvergence,
       "refinement did not converge within 500 iterations");
}

ExtrinsicParams fit_samples(std::span<const DataSample> samples,
                            bool fit_beta) {
  return refine(samples, linear_init(samples, fit_beta), fit_beta);
}

CalibrationReport calibrate_all_data(std::span<const DataSample> samples,
                                     bool fit_beta) {
  const ExtrinsicParams est = fit_samples(samples, fit_beta);
  return make_report(
      samples, est,
      fit_beta ? Method::HighFidelityAll : Method::LowFidelityAll, fit_beta,
      all_indices(samples.size()));
}

CalibrationReport ransac_calibrate(std::span<const DataSample> samples,
                                   const RansacConfig& cfg, bool fit_beta) {
  const int n = static_cast<int>(samples.size());
  if (n < cfg.subset_size) {
    fail(ErrorCode::InsufficientSamples,
         "fewer samples than the RANSAC subset size");
  }
  if (!(cfg.epsilon > 0.0)) {
    fail(ErrorCode::InvalidConfig, "epsilon must be > 0");
  }
  if (cfg.subset_size < 3) {
    fail(ErrorCode::InvalidConfig, "subset_size must be >= 3");
  }
  // k_max <= 0 runs zero rounds and falls through to NoConsensus below.

  // One hypothesis round; the RNG stream depends only on (seed, round), so
  // rounds can run in any order.
  auto run_round = [&](int k) -> RoundResult {
    Rng rng = Rng::derived(cfg.rng_seed, kHypothesisStream,
                           static_cast<std::uint64_t>(k));
    const std::vector<int> subset_idx = rng.sample_indices(n, cfg.subset_size);
    std::vector<DataSample> subset;
    subset.reserve(subset_idx.size());
    for (const int i : subset_idx) subset.push_back(samples[static_cast<std::size_t>(i)]);

    RoundResult result;
    result.round = k;
    ExtrinsicParams hypothesis;
    try {
      hypothesis = fit_samples(subset, fit_beta);
    } catch (const Error&) {
      return result;  // degenerate subset: skip, still counts toward k
    }
    for (int i = 0; i < n; ++i) {
      const double r =
          guarded_residual(samples[static_cast<std::size_t>(i)], hypothesis);
      if (std::isfinite(r) && std::abs(r) <= cfg.epsilon) {
        result.inliers.push_back(i);
      }
    }
    return result;
  };

  // Best round = largest inlier count, earliest round on ties (strict
  // comparison), independent of evaluation order.
  auto better = [](const RoundResult& a, const RoundResult& b) {
    if (a.inliers.size() != b.inliers.size()) {
      return a.inliers.size() > b.inliers.size();
    }
    return a.round < b.round;
  };

  RoundResult best;
  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (int k = 0; k < cfg.k_max; ++k) {
      RoundResult r = run_round(k);
      if (best.round < 0 || better(r, best)) best = std::move(r);
    }
  } else {
    std::vector<RoundResult> local_best(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t]() {
        RoundResult lb;
        for (int k = t; k < cfg.k_max; k += threads) {
          RoundResult r = run_round(k);
          if (lb.round < 0 || better(r, lb)) lb = std::move(r);
        }
        local_best[static_cast<std::size_t>(t)] = std::move(lb);
      });
    }
    for (auto& th : pool) th.join();
    for (auto& lb : local_best) {
      if (lb.round < 0) continue;
      if (best.round < 0 || better(lb, best)) best = std::move(lb);
    }
  }

  if (best.round < 0 ||
      static_cast<int>(best.inliers.size()) < cfg.subset_size) {
    fail(ErrorCode::NoConsensus,
         "no hypothesis reached a consensus of subset_size inliers");
  }

  std::vector<DataSample> consensus;
  consensus.reserve(best.inliers.size());
  for (const int i : best.inliers) consensus.push_back(samples[static_cast<std::size_t>(i)]);
  const ExtrinsicParams est = fit_samples(consensus, fit_beta);

  return make_report(
      samples, est,
      fit_beta ? Method::HighFidelityRansac : Method::LowFidelityRansac,
      fit_beta, std::move(best.inliers));
}

std::vector<CalibrationReport> compare_methods(
    std::span<const DataSample> samples, const RansacConfig& cfg) {
  std::vector<CalibrationReport> reports;
  reports.reserve(4);
  reports.push_back(calibrate_all_data(samples, /*fit_beta=*/false));
  reports.push_back(ransac_calibrate(samples, cfg, /*fit_beta=*/false));
  reports.push_back(calibrate_all_data(samples, /*fit_beta=*/true));
  reports.push_back(ransac_calibrate(samples, cfg, /*fit_beta=*/true));
  return reports;
}

}  // namespace alacs
