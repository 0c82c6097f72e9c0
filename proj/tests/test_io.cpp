#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "alacs/error.hpp"
#include "alacs/io.hpp"
#include "alacs/units.hpp"

using namespace alacs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "alacs_io_tests";
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path file(const std::string& name) const { return path / name; }
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("intrinsics JSON round-trip") {
  TempDir tmp;
  CameraIntrinsics K{1800.0, 1795.5, 1224.0, 1024.0,
                     {-0.1, 0.01, 5e-4, -5e-4, 1e-3}};
  save_intrinsics_json(tmp.file("k.json"), K);
  const CameraIntrinsics got = load_intrinsics_json(tmp.file("k.json"));
  CHECK(got.fx == K.fx);
  CHECK(got.fy == K.fy);
  CHECK(got.cx == K.cx);
  CHECK(got.cy == K.cy);
  CHECK(got.dist == K.dist);
}

TEST_CASE("intrinsics JSON validation") {
  TempDir tmp;
  write(tmp.file("bad.json"), R"({"fx": -5, "fy": 1, "cx": 0, "cy": 0})");
  CHECK_THROWS_AS(load_intrinsics_json(tmp.file("bad.json")), Error);
  write(tmp.file("missing.json"), R"({"fx": 100})");
  CHECK_THROWS_AS(load_intrinsics_json(tmp.file("missing.json")), Error);
  write(tmp.file("garbage.json"), "{not json");
  CHECK_THROWS_AS(load_intrinsics_json(tmp.file("garbage.json")), Error);
}

TEST_CASE("extrinsics JSON uses degree and millimeter units") {
  TempDir tmp;
  write(tmp.file("ext.json"),
        R"({"alpha_deg": 19.07, "L0_mm": 381.98, "beta_deg": 0.69})");
  const ExtrinsicParams p = load_extrinsics_json(tmp.file("ext.json"));
  CHECK(p.alpha == doctest::Approx(deg_to_rad(19.07)).epsilon(1e-15));
  CHECK(p.L0 == doctest::Approx(0.38198).epsilon(1e-15));
  CHECK(p.beta == doctest::Approx(deg_to_rad(0.69)).epsilon(1e-15));

  save_extrinsics_json(tmp.file("ext2.json"), p);
  const ExtrinsicParams q = load_extrinsics_json(tmp.file("ext2.json"));
  CHECK(q.alpha == doctest::Approx(p.alpha).epsilon(1e-14));
  CHECK(q.L0 == doctest::Approx(p.L0).epsilon(1e-14));
  CHECK(q.beta == doctest::Approx(p.beta).epsilon(1e-14));
}

TEST_CASE("missing files raise IoFailure with the path") {
  try {
    load_samples_csv("/nonexistent/samples.csv");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoFailure);
    CHECK(std::string(e.what()).find("/nonexistent/samples.csv") !=
          std::string::npos);
  }
}

TEST_CASE("samples CSV round-trip") {
  TempDir tmp;
  std::vector<DataSample> samples{{-0.1, 0.2, 0.987654321},
                                  {0.05, -0.3, 1.23456789}};
  save_samples_csv(tmp.file("s.csv"), std::span<const DataSample>(samples));
  const auto got = load_samples_csv(tmp.file("s.csv"));
  REQUIRE(got.size() == 2);
  CHECK(got[0].u_bar == samples[0].u_bar);
  CHECK(got[0].v_bar == samples[0].v_bar);
  CHECK(got[0].z_c == samples[0].z_c);
  CHECK(got[1].z_c == samples[1].z_c);
}

TEST_CASE("labeled samples carry the outlier column") {
  TempDir tmp;
  std::vector<LabeledSample> samples(2);
  samples[0].sample = {-0.1, 0.2, 1.0};
  samples[1].sample = {0.0, 0.0, 1.5};
  samples[1].is_outlier = true;
  save_samples_csv(tmp.file("s.csv"), std::span<const LabeledSample>(samples));

  std::ifstream in(tmp.file("s.csv"));
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  CHECK(header == "u_bar,v_bar,z_c_m,is_outlier");
  CHECK(row0.back() == '0');
  CHECK(row1.back() == '1');

  // the loader still reads the three sample columns
  const auto got = load_samples_csv(tmp.file("s.csv"));
  REQUIRE(got.size() == 2);
  CHECK(got[1].z_c == 1.5);
}

TEST_CASE("malformed sample rows are rejected") {
  TempDir tmp;
  write(tmp.file("bad.csv"), "u_bar,v_bar,z_c_m\n0.1,0.2\n");
  CHECK_THROWS_AS(load_samples_csv(tmp.file("bad.csv")), Error);
  write(tmp.file("bad2.csv"), "0.1,abc,1.0\n");
  CHECK_THROWS_AS(load_samples_csv(tmp.file("bad2.csv")), Error);
  write(tmp.file("bad3.csv"), "0.1,0.2,-1.0\n");  // non-positive depth
  CHECK_THROWS_AS(load_samples_csv(tmp.file("bad3.csv")), Error);
}

TEST_CASE("corner CSV loads board and pixel columns") {
  TempDir tmp;
  write(tmp.file("c.csv"),
        "board_x_m,board_y_m,pixel_u,pixel_v\n"
        "0.0,0.0,640.0,360.0\n"
        "0.03,0.0,670.5,361.25\n");
  const auto corners = load_corners_csv(tmp.file("c.csv"));
  REQUIRE(corners.size() == 2);
  CHECK(corners[1].board_xy.x() == 0.03);
  CHECK(corners[1].pixel.u == 670.5);
  CHECK(corners[1].pixel.v == 361.25);
}

TEST_CASE("scene JSON honors units and defaults") {
  TempDir tmp;
  write(tmp.file("scene.json"), R"({
    "truth": {"alpha_deg": 19.07, "L0_mm": 381.98, "beta_deg": 0.69},
    "n_positions": 10,
    "depth_min_mm": 600,
    "depth_max_mm": 1200,
    "pixel_noise_sigma": 0.3,
    "rng_seed": 42
  })");
  const SceneConfig cfg = load_scene_json(tmp.file("scene.json"));
  CHECK(cfg.truth.L0 == doctest::Approx(0.38198).epsilon(1e-15));
  CHECK(cfg.depth_min == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(cfg.depth_max == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(cfg.rng_seed == 42);
  CHECK(cfg.board.rows == 15);  // default board
  CHECK(cfg.points_per_image == 3);

  save_scene_json(tmp.file("scene2.json"), cfg);
  const SceneConfig back = load_scene_json(tmp.file("scene2.json"));
  CHECK(back.truth.alpha == doctest::Approx(cfg.truth.alpha).epsilon(1e-14));
  CHECK(back.pixel_noise_sigma == cfg.pixel_noise_sigma);
}

TEST_CASE("ransac and sweep JSON") {
  TempDir tmp;
  write(tmp.file("r.json"),
        R"({"k_max": 250, "epsilon_mm": 2.0, "subset_size": 4, "rng_seed": 9})");
  const RansacConfig cfg = load_ransac_json(tmp.file("r.json"));
  CHECK(cfg.k_max == 250);
  CHECK(cfg.epsilon == doctest::Approx(0.002).epsilon(1e-15));
  CHECK(cfg.subset_size == 4);
  CHECK(cfg.rng_seed == 9);

  write(tmp.file("sweep.json"), R"({"offsets_mm": [0, 50, 100]})");
  const ScanSweepConfig sweep = load_sweep_json(tmp.file("sweep.json"));
  REQUIRE(sweep.offsets.size() == 3);
  CHECK(sweep.offsets[2] == doctest::Approx(0.1).epsilon(1e-15));

  write(tmp.file("sweep_bad.json"), R"({"offsets_mm": [0, 500]})");
  CHECK_THROWS_AS(load_sweep_json(tmp.file("sweep_bad.json")), Error);
}

TEST_CASE("report serialization distinguishes the low-fidelity methods") {
  CalibrationReport r;
  r.method = Method::LowFidelityRansac;
  r.estimate = {deg_to_rad(19.28), mm_to_m(386.37), 0.0};
  r.fits_beta = false;
  r.inlier_indices = {0, 2};
  r.residuals = {1e-4, 5e-3, -2e-4};
  r.mean_abs_residual = 1.5e-4;

  const std::string json = report_to_json(r);
  CHECK(json.find("\"beta_deg\": null") != std::string::npos);
  CHECK(json.find("\"evaluation_set\": \"inliers\"") != std::string::npos);
  CHECK(json.find("\"method\": 2") != std::string::npos);

  CalibrationReport full = r;
  full.method = Method::HighFidelityAll;
  full.fits_beta = true;
  std::vector<CalibrationReport> reports{r, full};
  const std::string table = reports_table(reports);
  CHECK(table.find("Low-fidelity model + RANSAC") != std::string::npos);
  CHECK(table.find("High-fidelity model + All data") != std::string::npos);
  CHECK(table.find('/') != std::string::npos);  // beta column placeholder
}
