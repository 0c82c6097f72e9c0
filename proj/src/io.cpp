#include "alacs/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "alacs/error.hpp"
#include "alacs/units.hpp"
#include "alacs/version.hpp"

namespace alacs {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoFailure, "cannot open file: " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidConfig,
         "malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    fail(ErrorCode::IoFailure, "cannot write file: " + path.string());
  }
  out << text;
}

double require_number(const json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    fail(ErrorCode::InvalidConfig,
         where + " is missing numeric field \"" + key + "\"");
  }
  return j[key].get<double>();
}

// Shortest decimal that round-trips; stable across runs of the same build.
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double parsed = 0.0;
  std::sscanf(buf, "%lf", &parsed);
  for (int prec = 15; prec <= 16; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
    std::sscanf(shorter, "%lf", &parsed);
    if (parsed == v) return shorter;
  }
  return buf;
}

std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::IoFailure, "cannot open file: " + path.string());
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidConfig,
         "bad numeric field \"" + s + "\" in " + path.string());
  }
}

}  // namespace

CameraIntrinsics load_intrinsics_json(const std::filesystem::path& path) {
  const json j = parse_file(path);
  CameraIntrinsics K;
  K.fx = require_number(j, "fx", path.string());
  K.fy = require_number(j, "fy", path.string());
  K.cx = require_number(j, "cx", path.string());
  K.cy = require_number(j, "cy", path.string());
  if (j.contains("dist")) {
    const auto& d = j["dist"];
    if (!d.is_array() || d.size() != 5) {
      fail(ErrorCode::InvalidConfig,
           path.string() + ": \"dist\" must be [k1, k2, p1, p2, k3]");
    }
    for (std::size_t i = 0; i < 5; ++i) K.dist[i] = d[i].get<double>();
  }
  K.validate();
  return K;
}

void save_intrinsics_json(const std::filesystem::path& path,
                          const CameraIntrinsics& K) {
  ordered_json j;
  j["fx"] = K.fx;
  j["fy"] = K.fy;
  j["cx"] = K.cx;
  j["cy"] = K.cy;
  j["dist"] = K.dist;
  write_text(path, j.dump(2) + "\n");
}

ExtrinsicParams load_extrinsics_json(const std::filesystem::path& path) {
  const json j = parse_file(path);
  ExtrinsicParams p;
  p.alpha = deg_to_rad(require_number(j, "alpha_deg", path.string()));
  p.L0 = mm_to_m(require_number(j, "L0_mm", path.string()));
  p.beta = deg_to_rad(require_number(j, "beta_deg", path.string()));
  p.validate();
  return p;
}

void save_extrinsics_json(const std::filesystem::path& path,
                          const ExtrinsicParams& p) {
  ordered_json j;
  j["alpha_deg"] = rad_to_deg(p.alpha);
  j["L0_mm"] = m_to_mm(p.L0);
  j["beta_deg"] = rad_to_deg(p.beta);
  write_text(path, j.dump(2) + "\n");
}

std::vector<DataSample> load_samples_csv(const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  std::vector<DataSample> samples;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && !row.empty() && row[0] == "u_bar") continue;  // header
    if (row.size() < 3) {
      fail(ErrorCode::InvalidConfig,
           path.string() + ": sample rows need u_bar,v_bar,z_c_m");
    }
    DataSample s;
    s.u_bar = parse_double(row[0], path);
    s.v_bar = parse_double(row[1], path);
    s.z_c = parse_double(row[2], path);
    s.validate();
    samples.push_back(s);
  }
  return samples;
}

void save_samples_csv(const std::filesystem::path& path,
                      std::span<const DataSample> samples) {
  std::string text = "u_bar,v_bar,z_c_m\n";
  for (const auto& s : samples) {
    text += fmt(s.u_bar) + "," + fmt(s.v_bar) + "," + fmt(s.z_c) + "\n";
  }
  write_text(path, text);
}

void save_samples_csv(const std::filesystem::path& path,
                      std::span<const LabeledSample> samples) {
  std::string text = "u_bar,v_bar,z_c_m,is_outlier\n";
  for (const auto& ls : samples) {
    text += fmt(ls.sample.u_bar) + "," + fmt(ls.sample.v_bar) + "," +
            fmt(ls.sample.z_c) + "," + (ls.is_outlier ? "1" : "0") + "\n";
  }
  write_text(path, text);
}

std::vector<CornerObservation> load_corners_csv(
    const std::filesystem::path& path) {
  const auto rows = read_csv(path);
  std::vector<CornerObservation> corners;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (i == 0 && !row.empty() && row[0] == "board_x_m") continue;
    if (row.size() < 4) {
      fail(ErrorCode::InvalidConfig,
           path.string() +
               ": corner rows need board_x_m,board_y_m,pixel_u,pixel_v");
    }
    CornerObservation c;
    c.board_xy = {parse_double(row[0], path), parse_double(row[1], path)};
    c.pixel = {parse_double(row[2], path), parse_double(row[3], path)};
    corners.push_back(c);
  }
  return corners;
}

SceneConfig load_scene_json(const std::filesystem::path& path) {
  const json j = parse_file(path);
  SceneConfig cfg;

  if (!j.contains("truth") || !j["truth"].is_object()) {
    fail(ErrorCode::InvalidConfig, path.string() + " is missing \"truth\"");
  }
  const auto& t = j["truth"];
  cfg.truth.alpha = deg_to_rad(require_number(t, "alpha_deg", "truth"));
  cfg.truth.L0 = mm_to_m(require_number(t, "L0_mm", "truth"));
  cfg.truth.beta = deg_to_rad(require_number(t, "beta_deg", "truth"));

  if (j.contains("board")) {
    const auto& b = j["board"];
    cfg.board.rows = static_cast<int>(require_number(b, "rows", "board"));
    cfg.board.cols = static_cast<int>(require_number(b, "cols", "board"));
    cfg.board.square_size = mm_to_m(require_number(b, "square_mm", "board"));
  }
  if (j.contains("intrinsics")) {
    const auto& k = j["intrinsics"];
    cfg.intrinsics.fx = require_number(k, "fx", "intrinsics");
    cfg.intrinsics.fy = require_number(k, "fy", "intrinsics");
    cfg.intrinsics.cx = require_number(k, "cx", "intrinsics");
    cfg.intrinsics.cy = require_number(k, "cy", "intrinsics");
    if (k.contains("dist")) {
      const auto& d = k["dist"];
      if (!d.is_array() || d.size() != 5) {
        fail(ErrorCode::InvalidConfig,
             path.string() + ": intrinsics \"dist\" must have 5 entries");
      }
      for (std::size_t i = 0; i < 5; ++i) cfg.intrinsics.dist[i] = d[i].get<double>();
    }
  }
  if (j.contains("n_positions")) cfg.n_positions = j["n_positions"].get<int>();
  if (j.contains("depth_min_mm")) cfg.depth_min = mm_to_m(j["depth_min_mm"].get<double>());
  if (j.contains("depth_max_mm")) cfg.depth_max = mm_to_m(j["depth_max_mm"].get<double>());
  if (j.contains("points_per_image")) cfg.points_per_image = j["points_per_image"].get<int>();
  if (j.contains("pixel_noise_sigma")) cfg.pixel_noise_sigma = j["pixel_noise_sigma"].get<double>();
  if (j.contains("outlier_fraction")) cfg.outlier_fraction = j["outlier_fraction"].get<double>();
  if (j.contains("outlier_depth_shift_mm")) {
    cfg.outlier_depth_shift = mm_to_m(j["outlier_depth_shift_mm"].get<double>());
  }
  if (j.contains("rng_seed")) cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();

  cfg.validate();
  return cfg;
}

void save_scene_json(const std::filesystem::path& path,
                     const SceneConfig& cfg) {
  ordered_json j;
  j["truth"] = {{"alpha_deg", rad_to_deg(cfg.truth.alpha)},
                {"L0_mm", m_to_mm(cfg.truth.L0)},
                {"beta_deg", rad_to_deg(cfg.truth.beta)}};
  j["board"] = {{"rows", cfg.board.rows},
                {"cols", cfg.board.cols},
                {"square_mm", m_to_mm(cfg.board.square_size)}};
  j["intrinsics"] = {{"fx", cfg.intrinsics.fx},
                     {"fy", cfg.intrinsics.fy},
                     {"cx", cfg.intrinsics.cx},
                     {"cy", cfg.intrinsics.cy},
                     {"dist", cfg.intrinsics.dist}};
  j["n_positions"] = cfg.n_positions;
  j["depth_min_mm"] = m_to_mm(cfg.depth_min);
  j["depth_max_mm"] = m_to_mm(cfg.depth_max);
  j["points_per_image"] = cfg.points_per_image;
  j["pixel_noise_sigma"] = cfg.pixel_noise_sigma;
  j["outlier_fraction"] = cfg.outlier_fraction;
  j["outlier_depth_shift_mm"] = m_to_mm(cfg.outlier_depth_shift);
  j["rng_seed"] = cfg.rng_seed;
  write_text(path, j.dump(2) + "\n");
}

RansacConfig load_ransac_json(const std::filesystem::path& path) {
  const json j = parse_file(path);
  RansacConfig cfg;
  if (j.contains("k_max")) cfg.k_max = j["k_max"].get<int>();
  if (j.contains("epsilon_mm")) cfg.epsilon = mm_to_m(j["epsilon_mm"].get<double>());
  if (j.contains("subset_size")) cfg.subset_size = j["subset_size"].get<int>();
  if (j.contains("rng_seed")) cfg.rng_seed = j["rng_seed"].get<std::uint64_t>();
  if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
  return cfg;
}

ScanSweepConfig load_sweep_json(const std::filesystem::path& path) {
  const json j = parse_file(path);
  ScanSweepConfig cfg;
  if (j.contains("offsets_mm")) {
    if (!j["offsets_mm"].is_array()) {
      fail(ErrorCode::InvalidConfig,
           path.string() + ": \"offsets_mm\" must be an array");
    }
    cfg.offsets.clear();
    for (const auto& v : j["offsets_mm"]) cfg.offsets.push_back(mm_to_m(v.get<double>()));
  }
  cfg.validate();
  return cfg;
}

namespace {

ordered_json report_json(const CalibrationReport& r) {
  ordered_json j;
  j["method"] = static_cast<int>(r.method);
  j["label"] = method_label(r.method);
  j["alpha_deg"] = rad_to_deg(r.estimate.alpha);
  j["L0_mm"] = m_to_mm(r.estimate.L0);
  if (r.fits_beta) {
    j["beta_deg"] = rad_to_deg(r.estimate.beta);
  } else {
    j["beta_deg"] = nullptr;
  }
  j["mean_abs_residual_mm"] = m_to_mm(r.mean_abs_residual);
  // Same statistic over every sample, so consensus and all-data runs can be
  // compared on either convention.
  double sum_all = 0.0;
  int n_all = 0;
  for (const double v : r.residuals) {
    if (std::isfinite(v)) {
      sum_all += std::abs(v);
      ++n_all;
    }
  }
  j["mean_abs_residual_all_mm"] =
      n_all > 0 ? ordered_json(m_to_mm(sum_all / n_all)) : ordered_json(nullptr);
  j["evaluation_set"] =
      (r.method == Method::LowFidelityRansac ||
       r.method == Method::HighFidelityRansac)
          ? "inliers"
          : "all";
  j["inlier_indices"] = r.inlier_indices;
  ordered_json res = ordered_json::array();
  for (const double v : r.residuals) {
    if (std::isfinite(v)) {
      res.push_back(m_to_mm(v));
    } else {
      res.push_back(nullptr);
    }
  }
  j["residuals_mm"] = std::move(res);
  return j;
}

}  // namespace

std::string report_to_json(const CalibrationReport& report) {
  return report_json(report).dump(2) + "\n";
}

void save_reports_json(const std::filesystem::path& path,
                       std::span<const CalibrationReport> reports) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  write_text(path, arr.dump(2) + "\n");
}

std::string reports_table(std::span<const CalibrationReport> reports) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-42s %12s %10s %10s %22s\n", "Method",
                "alpha (deg)", "L0 (mm)", "beta (deg)",
                "Mean |z - z_hat| (mm)");
  out += line;
  out += std::string(99, '-') + "\n";
  for (const auto& r : reports) {
    char beta[24];
    if (r.fits_beta) {
      std::snprintf(beta, sizeof(beta), "%10.2f", rad_to_deg(r.estimate.beta));
    } else {
      std::snprintf(beta, sizeof(beta), "%10s", "/");
    }
    std::snprintf(line, sizeof(line), "%-42s %12.2f %10.2f %s %22.2f\n",
                  method_label(r.method), rad_to_deg(r.estimate.alpha),
                  m_to_mm(r.estimate.L0), beta,
                  m_to_mm(r.mean_abs_residual));
    out += line;
  }
  return out;
}

void save_localization_csv(const std::filesystem::path& path,
                           std::span<const OffsetErrorStats> stats) {
  std::string text =
      "offset_mm,axis,median_mm,q25_mm,q75_mm,max_mm,n_samples\n";
  for (const auto& row : stats) {
    const std::pair<const char*, const AxisStats*> axes[] = {
        {"x", &row.x}, {"y", &row.y}, {"z", &row.z}};
    for (const auto& [name, st] : axes) {
      text += fmt(m_to_mm(row.offset));
      text += ",";
      text += name;
      text += "," + fmt(m_to_mm(st->median)) + "," + fmt(m_to_mm(st->q25)) +
              "," + fmt(m_to_mm(st->q75)) + "," + fmt(m_to_mm(st->max)) + "," +
              std::to_string(row.n_samples) + "\n";
    }
  }
  write_text(path, text);
}

void save_manifest(const std::filesystem::path& path, const RunManifest& m) {
  ordered_json j;
  j["command"] = m.command;
  j["toolkit_version"] = kVersion;
  j["rng_seed"] = m.rng_seed;
  j["output_dir"] = m.output_dir;
  ordered_json inputs = ordered_json::object();
  for (const auto& [name, p] : m.inputs) inputs[name] = p;
  j["inputs"] = std::move(inputs);
  ordered_json outputs = ordered_json::object();
  for (const auto& [name, p] : m.outputs) outputs[name] = p;
  j["outputs"] = std::move(outputs);
  write_text(path, j.dump(2) + "\n");
}

}  // namespace alacs
