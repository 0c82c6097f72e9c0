#include <doctest.h>

#include <cmath>
#include <vector>

#include "alacs/calib.hpp"
#include "alacs/error.hpp"
#include "alacs/rng.hpp"
#include "alacs/units.hpp"

using namespace alacs;

namespace {

const ExtrinsicParams kTable1Method4{deg_to_rad(19.07), mm_to_m(381.98),
                                     deg_to_rad(0.69)};
constexpr double kMethod4AxialDepth = 1.1691246297533955;  // meters, u = v = 0
// Depth change from a +1 mm baseline shift on the axial sample; the model is
// linear in L, so this equals -0.001 * z / L exactly.
constexpr double kAxialResidualAfterShift = -3.0606959258427025e-3;

// Samples generated exactly from the model; a grid wide enough to make the
// design well conditioned.
std::vector<DataSample> exact_samples(const ExtrinsicParams& truth,
                                      int nu = 6, int nv = 5) {
  std::vector<DataSample> out;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double u = -0.30 + 0.38 * i / (nu - 1);
      const double v = -0.20 + 0.40 * j / (nv - 1);
      const double z = depth_high_fidelity({u, v}, truth, {0.0});
      out.push_back({u, v, z});
    }
  }
  return out;
}

std::vector<DataSample> noisy_samples(const ExtrinsicParams& truth,
                                      double z_sigma, Rng& rng, int nu = 6,
                                      int nv = 5) {
  auto out = exact_samples(truth, nu, nv);
  for (auto& s : out) s.z_c += rng.gaussian(z_sigma);
  return out;
}

double objective_of(std::span<const DataSample> samples,
                    const ExtrinsicParams& p) {
  double f = 0.0;
  for (const auto& s : samples) {
    const double r = residual(s, p);
    f += r * r;
  }
  return f;
}

}  // namespace

TEST_CASE("residual vanishes on model-consistent samples") {
  const auto samples = exact_samples(kTable1Method4);
  for (const auto& s : samples) {
    CHECK(std::abs(residual(s, kTable1Method4)) < 1e-12);
  }

  const DataSample axial{0.0, 0.0, kMethod4AxialDepth};
  CHECK(std::abs(residual(axial, kTable1Method4)) < 1e-12);
}

TEST_CASE("residual reflects a baseline shift exactly") {
  const DataSample axial{0.0, 0.0, kMethod4AxialDepth};
  ExtrinsicParams shifted = kTable1Method4;
  shifted.L0 += mm_to_m(1.0);
  const double r = residual(axial, shifted);
  CHECK(std::abs(r - kAxialResidualAfterShift) < 1e-12);
  // cross-check against the sensitivity dz/dL = z/L
  CHECK(r == doctest::Approx(-0.001 * kMethod4AxialDepth /
                             kTable1Method4.L0).epsilon(1e-9));
}

TEST_CASE("residual rejects singular rays") {
  // u = tan(alpha) zeros the denominator when beta = 0
  const DataSample singular{std::tan(kTable1Method4.alpha), 0.0, 1.0};
  CHECK_THROWS_AS(
      residual(singular, {kTable1Method4.alpha, kTable1Method4.L0, 0.0}),
      Error);
}

TEST_CASE("analytic Jacobian matches central differences") {
  Rng rng(41);
  const double h = 1e-7;
  for (int trial = 0; trial < 100; ++trial) {
    const ExtrinsicParams p{rng.uniform(0.15, 1.3), rng.uniform(0.15, 0.9),
                            rng.uniform(-0.25, 0.25)};
    const DataSample s{rng.uniform(-0.35, 0.15), rng.uniform(-0.3, 0.3),
                       rng.uniform(0.3, 2.0)};
    const double den = triangulation_denominator({s.u_bar, s.v_bar}, p.alpha, p.beta);
    if (std::abs(den) < 0.05) continue;  // keep clear of the singularity

    const Eigen::Vector3d J = residual_jacobian(s, p);
    const auto fd = [&](auto perturb) {
      ExtrinsicParams lo = p, hi = p;
      perturb(lo, -h);
      perturb(hi, +h);
      return (residual(s, hi) - residual(s, lo)) / (2.0 * h);
    };
    const double fd_alpha = fd([](ExtrinsicParams& q, double d) { q.alpha += d; });
    const double fd_L = fd([](ExtrinsicParams& q, double d) { q.L0 += d; });
    const double fd_beta = fd([](ExtrinsicParams& q, double d) { q.beta += d; });

    CHECK(std::abs(J(0) - fd_alpha) <= 1e-5 * std::max(1.0, std::abs(fd_alpha)));
    CHECK(std::abs(J(1) - fd_L) <= 1e-5 * std::max(1.0, std::abs(fd_L)));
    CHECK(std::abs(J(2) - fd_beta) <= 1e-5 * std::max(1.0, std::abs(fd_beta)));
  }
}

TEST_CASE("linear initializer recovers exact data") {
  const auto samples = exact_samples(kTable1Method4);
  const ExtrinsicParams got = linear_init(samples);
  CHECK(std::abs(got.alpha - kTable1Method4.alpha) < 1e-10);
  CHECK(std::abs(got.L0 - kTable1Method4.L0) < 1e-10);
  CHECK(std::abs(got.beta - kTable1Method4.beta) < 1e-10);
}

TEST_CASE("linear initializer finds beta = 0 when the data has none") {
  const ExtrinsicParams flat{deg_to_rad(19.07), mm_to_m(381.98), 0.0};
  const ExtrinsicParams got = linear_init(exact_samples(flat));
  CHECK(std::abs(got.beta) < 1e-10);
}

TEST_CASE("linear initializer needs a full-rank design") {
  const auto samples = exact_samples(kTable1Method4);
  const std::vector<DataSample> two{samples[0], samples[1]};
  CHECK_THROWS_AS(linear_init(two), Error);

  // every sample shares one u: the constant and u columns are parallel
  std::vector<DataSample> shared_u;
  for (int j = 0; j < 6; ++j) {
    const double v = -0.2 + 0.08 * j;
    const double z = depth_high_fidelity({0.05, v}, kTable1Method4, {0.0});
    shared_u.push_back({0.05, v, z});
  }
  CHECK_THROWS_AS(linear_init(shared_u), Error);
  try {
    linear_init(shared_u);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
}

TEST_CASE("refine returns a zero-gradient initializer unchanged") {
  const auto samples = exact_samples(kTable1Method4);
  const ExtrinsicParams got = refine(samples, kTable1Method4, true);
  CHECK(got.alpha == kTable1Method4.alpha);
  CHECK(got.L0 == kTable1Method4.L0);
  CHECK(got.beta == kTable1Method4.beta);
}

TEST_CASE("refine pulls a perturbed initializer back to the truth") {
  const auto samples = exact_samples(kTable1Method4);
  ExtrinsicParams init = kTable1Method4;
  init.alpha += deg_to_rad(2.0);
  init.L0 += mm_to_m(20.0);
  init.beta += deg_to_rad(0.5);
  const ExtrinsicParams got = refine(samples, init, true);
  CHECK(std::abs(got.alpha - kTable1Method4.alpha) < 1e-8);
  CHECK(std::abs(got.L0 - kTable1Method4.L0) < 1e-8);
  CHECK(std::abs(got.beta - kTable1Method4.beta) < 1e-8);
}

TEST_CASE("pinning beta to zero costs accuracy on skewed data") {
  Rng rng(42);
  const auto samples = noisy_samples(kTable1Method4, 1e-5, rng);
  const CalibrationReport full = calibrate_all_data(samples, true);
  const CalibrationReport flat = calibrate_all_data(samples, false);
  CHECK(flat.mean_abs_residual > full.mean_abs_residual);
}

TEST_CASE("refine never worsens the objective") {
  Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto samples = noisy_samples(kTable1Method4, 5e-4, rng);
    ExtrinsicParams init = kTable1Method4;
    init.alpha += rng.uniform(-0.05, 0.05);
    init.L0 *= rng.uniform(0.9, 1.1);
    init.beta += rng.uniform(-0.01, 0.01);
    const ExtrinsicParams got = refine(samples, init, true);
    CHECK(objective_of(samples, got) <=
          objective_of(samples, init) * (1.0 + 1e-12));
  }
}

TEST_CASE("ransac keeps everything when the data is clean") {
  const auto samples = exact_samples(kTable1Method4);
  RansacConfig cfg;
  cfg.k_max = 50;
  cfg.rng_seed = 7;
  const CalibrationReport report = ransac_calibrate(samples, cfg, true);
  CHECK(report.inlier_indices.size() == samples.size());

  const CalibrationReport all = calibrate_all_data(samples, true);
  CHECK(std::abs(report.estimate.alpha - all.estimate.alpha) < 1e-12);
  CHECK(std::abs(report.estimate.L0 - all.estimate.L0) < 1e-12);
  CHECK(std::abs(report.estimate.beta - all.estimate.beta) < 1e-12);
}

TEST_CASE("ransac isolates planted outliers") {
  Rng rng(44);
  auto samples = noisy_samples(kTable1Method4, 2e-4, rng);  // 30 samples
  REQUIRE(samples.size() == 30);
  std::vector<int> order(30);
  for (int i = 0; i < 30; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<int> planted(order.begin(), order.begin() + 6);
  for (const int i : planted) samples[static_cast<std::size_t>(i)].z_c += 0.030;
  std::sort(planted.begin(), planted.end());

  RansacConfig cfg;
  cfg.k_max = 300;
  cfg.rng_seed = 99;
  const CalibrationReport report = ransac_calibrate(samples, cfg, true);

  std::vector<int> expected;
  for (int i = 0; i < 30; ++i) {
    if (!std::binary_search(planted.begin(), planted.end(), i)) {
      expected.push_back(i);
    }
  }
  CHECK(report.inlier_indices == expected);
  CHECK(std::abs(rad_to_deg(report.estimate.alpha) - 19.07) < 0.05);
  CHECK(std::abs(m_to_mm(report.estimate.L0) - 381.98) < 0.5);
  CHECK(std::abs(rad_to_deg(report.estimate.beta) - 0.69) < 0.05);
}

TEST_CASE("ransac without rounds reports no consensus") {
  const auto samples = exact_samples(kTable1Method4);
  RansacConfig cfg;
  cfg.k_max = 0;
  CHECK_THROWS_AS(ransac_calibrate(samples, cfg, true), Error);
  try {
    ransac_calibrate(samples, cfg, true);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConsensus);
  }
}

TEST_CASE("ransac is deterministic, serial or parallel") {
  Rng rng(45);
  auto samples = noisy_samples(kTable1Method4, 2e-4, rng);
  for (std::size_t i = 0; i < 6; ++i) samples[i * 5].z_c += 0.030;

  RansacConfig cfg;
  cfg.k_max = 200;
  cfg.rng_seed = 2024;
  const CalibrationReport a = ransac_calibrate(samples, cfg, true);
  const CalibrationReport b = ransac_calibrate(samples, cfg, true);
  cfg.threads = 4;
  const CalibrationReport c = ransac_calibrate(samples, cfg, true);

  CHECK(a.estimate.alpha == b.estimate.alpha);
  CHECK(a.estimate.alpha == c.estimate.alpha);
  CHECK(a.estimate.L0 == c.estimate.L0);
  CHECK(a.estimate.beta == c.estimate.beta);
  CHECK(a.inlier_indices == b.inlier_indices);
  CHECK(a.inlier_indices == c.inlier_indices);
  CHECK(a.residuals == c.residuals);
}

TEST_CASE("ransac tolerates a 40 percent outlier fraction") {
  int successes = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(1000 + static_cast<std::uint64_t>(trial));
    auto samples = noisy_samples(kTable1Method4, 3e-4, rng);
    std::vector<int> order(static_cast<int>(samples.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    rng.shuffle(order);
    for (int i = 0; i < 12; ++i) {
      samples[static_cast<std::size_t>(order[i])].z_c +=
          rng.uniform(0.02, 0.08);
    }

    RansacConfig cfg;
    cfg.k_max = 300;
    cfg.rng_seed = static_cast<std::uint64_t>(trial);
    const CalibrationReport r = ransac_calibrate(samples, cfg, true);
    const bool ok =
        std::abs(rad_to_deg(r.estimate.alpha) - 19.07) < 0.1 &&
        std::abs(m_to_mm(r.estimate.L0) - 381.98) < 1.0 &&
        std::abs(rad_to_deg(r.estimate.beta) - 0.69) < 0.1;
    if (ok) ++successes;
  }
  CHECK(successes >= 99);
}

TEST_CASE("the four methods rank as expected") {
  RansacConfig cfg;
  cfg.k_max = 300;
  cfg.rng_seed = 5;

  SUBCASE("clean skewed data: the full model wins outright") {
    const auto samples = exact_samples(kTable1Method4);
    const auto reports = compare_methods(samples, cfg);
    REQUIRE(reports.size() == 4);
    CHECK(reports[0].method == Method::LowFidelityAll);
    CHECK(reports[3].method == Method::HighFidelityRansac);
    CHECK(reports[2].mean_abs_residual < 1e-9);
    CHECK(reports[3].mean_abs_residual < 1e-9);
    CHECK(reports[0].mean_abs_residual > 1e-4);
    CHECK(reports[1].mean_abs_residual > reports[3].mean_abs_residual);
  }

  SUBCASE("outliers: consensus methods beat their all-data versions") {
    Rng rng(46);
    auto samples = noisy_samples(kTable1Method4, 2e-4, rng);
    for (std::size_t i = 0; i < 6; ++i) samples[i * 5].z_c += 0.030;
    const auto reports = compare_methods(samples, cfg);
    CHECK(reports[3].mean_abs_residual < reports[2].mean_abs_residual);
    CHECK(reports[1].mean_abs_residual < reports[0].mean_abs_residual);
  }

  SUBCASE("beta = 0 data: every method agrees") {
    const ExtrinsicParams flat{deg_to_rad(19.07), mm_to_m(381.98), 0.0};
    const auto samples = exact_samples(flat);
    const auto reports = compare_methods(samples, cfg);
    for (const auto& r : reports) {
      CHECK(std::abs(r.estimate.alpha - flat.alpha) < 1e-8);
      CHECK(std::abs(r.estimate.L0 - flat.L0) < 1e-8);
      CHECK(std::abs(r.estimate.beta) < 1e-8);
    }
  }
}

TEST_CASE("report bookkeeping stays consistent") {
  Rng rng(47);
  auto samples = noisy_samples(kTable1Method4, 2e-4, rng);
  for (std::size_t i = 0; i < 6; ++i) samples[i * 5].z_c += 0.030;

  RansacConfig cfg;
  cfg.k_max = 200;
  cfg.rng_seed = 3;
  const CalibrationReport r = ransac_calibrate(samples, cfg, true);
  REQUIRE(r.residuals.size() == samples.size());

  double mean = 0.0;
  for (const int i : r.inlier_indices) {
    mean += std::abs(r.residuals[static_cast<std::size_t>(i)]);
  }
  mean /= static_cast<double>(r.inlier_indices.size());
  CHECK(r.mean_abs_residual == doctest::Approx(mean).epsilon(1e-12));
  CHECK(std::is_sorted(r.inlier_indices.begin(), r.inlier_indices.end()));
}
