// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <string_view>

#include <json.hpp>

#include "wallstrain/displacement_field.hpp"
#include "wallstrain/local_frame.hpp"
#include "wallstrain/perturbation.hpp"
#include "wallstrain/point_cloud.hpp"
#include "wallstrain/strain.hpp"

namespace wallstrain::io {

namespace fs = std::filesystem;

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace detail {

inline double parse_double(std::string_view text, const std::string& context) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw Error(context + ": malformed number '" + std::string(text) + "'");
  if (!std::isfinite(value)) throw Error(context + ": non-finite value");
  return value;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

/// Write-temp-then-rename so partially written outputs never exist.
inline void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Point cloud: text table `x,y,z,label`, one point per line, single header.

inline void write_cloud(const PointCloud& cloud, const fs::path& path) {
  cloud.validate();
  std::string out = "x,y,z,label\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out += format_double(p.x());
    out += ',';
    out += format_double(p.y());
    out += ',';
    out += format_double(p.z());
    out += ',';
    out += char('0' + cloud.labels[i]);
    out += '\n';
  }
  detail::atomic_write(path, out);
}

inline PointCloud read_cloud(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": missing header");
  detail::strip_cr(line);
  if (line != "x,y,z,label") throw Error(path.string() + ": missing header");

  PointCloud cloud;
  cloud.id = path.stem().string();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty() && in.peek() == EOF) break;  // trailing newline
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto fields = detail::split_csv(line);
    if (fields.size() != 4) throw Error(where + ": malformed line (expected x,y,z,label)");
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = detail::parse_double(fields[a], where);
    std::uint8_t label = 0;
    if (fields[3] == "0")
      label = kLabelWall;
    else if (fields[3] == "1")
      label = kLabelTransition;
    else
      throw Error(where + ": invalid label '" + std::string(fields[3]) + "'");
    cloud.points.push_back(p);
    cloud.labels.push_back(label);
  }
  cloud.validate();
  return cloud;
}

// ---------------------------------------------------------------------------
// Displacement field: JSON header + raw little-endian f32 binary,
// 3 interleaved components per voxel, x index fastest, then y, then z.

inline void write_field(const DisplacementField& field, const fs::path& header_path) {
  field.validate();
  const std::string data_name = header_path.stem().string() + ".bin";

  nlohmann::ordered_json header;
  header["dims"] = {field.dims[0], field.dims[1], field.dims[2]};
  header["spacing_mm"] = {field.spacing_mm.x(), field.spacing_mm.y(), field.spacing_mm.z()};
  header["origin_mm"] = {field.origin_mm.x(), field.origin_mm.y(), field.origin_mm.z()};
  header["component_order"] = "RAS";
  header["scalar"] = "f32le";
  header["data_file"] = data_name;

  std::string blob;
  blob.reserve(12 * field.voxel_count());
  for (const Vec3& v : field.data) {
    for (int a = 0; a < 3; ++a) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(float(v[a]));
      blob += char(bits & 0xff);
      blob += char((bits >> 8) & 0xff);
      blob += char((bits >> 16) & 0xff);
      blob += char((bits >> 24) & 0xff);
    }
  }
  detail::atomic_write(header_path.parent_path() / data_name, blob);
  detail::atomic_write(header_path, header.dump(2) + "\n");
}

inline DisplacementField read_field(const fs::path& header_path) {
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(detail::read_file(header_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(header_path.string() + ": invalid header: " + e.what());
  }
  for (const char* key : {"dims", "spacing_mm", "origin_mm", "scalar", "data_file"})
    if (!header.contains(key))
      throw Error(header_path.string() + ": header missing key '" + key + "'");
  if (header["scalar"] != "f32le")
    throw Error(header_path.string() + ": unsupported scalar type");
  if (header.value("component_order", "RAS") != "RAS")
    throw Error(header_path.string() + ": unsupported component order");

  DisplacementField field;
  for (int a = 0; a < 3; ++a) {
    const long long d = header["dims"].at(a).get<long long>();
    if (d < 2) throw Error(header_path.string() + ": dims must be >= 2");
    field.dims[a] = std::size_t(d);
    field.spacing_mm[a] = header["spacing_mm"].at(a).get<double>();
    field.origin_mm[a] = header["origin_mm"].at(a).get<double>();
  }

  const fs::path data_path =
      header_path.parent_path() / header["data_file"].get<std::string>();
  const std::string blob = detail::read_file(data_path);
  const std::size_t expected = 12 * field.voxel_count();
  if (blob.size() != expected)
    throw Error(data_path.string() + ": data size mismatch: expected " +
                std::to_string(expected) + " bytes, got " + std::to_string(blob.size()));

  field.data.resize(field.voxel_count());
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  for (std::size_t v = 0; v < field.data.size(); ++v) {
    for (int a = 0; a < 3; ++a) {
      const std::size_t off = (3 * v + std::size_t(a)) * 4;
      const std::uint32_t bits = std::uint32_t(bytes[off]) |
                                 (std::uint32_t(bytes[off + 1]) << 8) |
                                 (std::uint32_t(bytes[off + 2]) << 16) |
                                 (std::uint32_t(bytes[off + 3]) << 24);
      field.data[v][a] = double(std::bit_cast<float>(bits));
    }
  }
  field.validate();
  return field;
}

// ---------------------------------------------------------------------------
// Frames: text table, one row per point.

inline constexpr const char* kFramesHeader =
    "index,nx,ny,nz,t1x,t1y,t1z,t2x,t2y,t2z,radius_mm,flag";

inline void write_frames(const std::vector<LocalSurfaceFrame>& frames, const fs::path& path) {
  std::string out = std::string(kFramesHeader) + "\n";
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const LocalSurfaceFrame& f = frames[i];
    out += std::to_string(i);
    for (const Vec3* v : {&f.normal, &f.tangent1, &f.tangent2})
      for (int a = 0; a < 3; ++a) {
        out += ',';
        out += format_double((*v)[a]);
      }
    out += ',';
    out += format_double(f.radius_mm);
    out += ',';
    out += char('0' + (f.low_curvature_flag ? 1 : 0));
    out += '\n';
  }
  detail::atomic_write(path, out);
}

inline std::vector<LocalSurfaceFrame> read_frames(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": missing header");
  detail::strip_cr(line);
  if (line != kFramesHeader) throw Error(path.string() + ": missing header");

  std::vector<LocalSurfaceFrame> frames;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty() && in.peek() == EOF) break;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto fields = detail::split_csv(line);
    if (fields.size() != 12) throw Error(where + ": malformed line (expected 12 fields)");
    if (detail::parse_double(fields[0], where) != double(frames.size()))
      throw Error(where + ": frame index out of order");
    LocalSurfaceFrame frame;
    for (int a = 0; a < 3; ++a) {
      frame.normal[a] = detail::parse_double(fields[1 + a], where);
      frame.tangent1[a] = detail::parse_double(fields[4 + a], where);
      frame.tangent2[a] = detail::parse_double(fields[7 + a], where);
    }
    frame.radius_mm = detail::parse_double(fields[10], where);
    if (!(frame.radius_mm > 0.0)) throw Error(where + ": radius must be positive");
    if (fields[11] == "0")
      frame.low_curvature_flag = false;
    else if (fields[11] == "1")
      frame.low_curvature_flag = true;
    else
      throw Error(where + ": invalid flag");
    frames.push_back(frame);
  }
  if (frames.empty()) throw Error(path.string() + ": no frames");
  return frames;
}

// ---------------------------------------------------------------------------
// Strain: text table `index,strain,mask`.

inline void write_strain(const StrainField& strain, const fs::path& path) {
  std::string out = "index,strain,mask\n";
  for (std::size_t i = 0; i < strain.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double(strain.values[i]);
    out += ',';
    out += char('0' + strain.mask[i]);
    out += '\n';
  }
  detail::atomic_write(path, out);
}

inline StrainField read_strain(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": missing header");
  detail::strip_cr(line);
  if (line != "index,strain,mask") throw Error(path.string() + ": missing header");
  StrainField strain;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    detail::strip_cr(line);
    if (line.empty() && in.peek() == EOF) break;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto fields = detail::split_csv(line);
    if (fields.size() != 3) throw Error(where + ": malformed line (expected 3 fields)");
    strain.values.push_back(detail::parse_double(fields[1], where));
    if (fields[2] == "0")
      strain.mask.push_back(0);
    else if (fields[2] == "1")
      strain.mask.push_back(1);
    else
      throw Error(where + ": invalid mask");
  }
  return strain;
}

// ---------------------------------------------------------------------------
// Sweep configuration: JSON document mirroring SweepConfig plus input paths.

struct SweepJob {
  fs::path cloud_path;
  fs::path frames_path;
  fs::path field_path;
  SweepConfig config;
  bool emit_per_point = false;
};

inline NrmseDenominator parse_denominator(const std::string& name) {
  if (name == "range") return NrmseDenominator::kRange;
  if (name == "mean") return NrmseDenominator::kMean;
  if (name == "sd") return NrmseDenominator::kStdDev;
  throw Error("unknown nrmse_denominator '" + name + "' (expected range, mean or sd)");
}

inline std::string denominator_name(NrmseDenominator denom) {
  switch (denom) {
    case NrmseDenominator::kRange: return "range";
    case NrmseDenominator::kMean: return "mean";
    case NrmseDenominator::kStdDev: return "sd";
  }
  return "range";
}

inline SweepJob read_sweep_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": invalid config: " + e.what());
  }
  SweepJob job;
  const fs::path base = path.parent_path();
  for (const char* key : {"cloud", "frames", "field"})
    if (!j.contains(key)) throw Error(path.string() + ": config missing key '" + key + "'");
  job.cloud_path = base / j["cloud"].get<std::string>();
  job.frames_path = base / j["frames"].get<std::string>();
  job.field_path = base / j["field"].get<std::string>();

  const double thickness = j.value("wall_thickness_mm", 1.5);
  job.config = SweepConfig::defaults(thickness);
  if (j.contains("sigma_list_mm"))
    job.config.sigma_list_mm = j["sigma_list_mm"].get<std::vector<double>>();
  if (j.contains("mu_list_mm"))
    job.config.mu_list_mm = j["mu_list_mm"].get<std::vector<double>>();
  job.config.seed = j.value("seed", std::uint64_t{0});
  job.config.realizations = j.value("realizations", std::size_t{1});
  job.config.workers = j.value("workers", std::size_t{1});
  job.config.nrmse_denominator = parse_denominator(j.value("nrmse_denominator", "range"));
  job.emit_per_point = j.value("emit_per_point", false);
  job.config.validate();
  return job;
}

// ---------------------------------------------------------------------------
// Sweep report: summary.json, long-format metrics table, optional per-point
// scatter tables. Byte-deterministic for fixed inputs and seed; the worker
// count is deliberately not part of the report.

inline void write_sweep_report(const SweepResult& result, const SweepConfig& config,
                               const fs::path& out_dir, bool emit_per_point = false) {
  fs::create_directories(out_dir);

  nlohmann::ordered_json summary;
  summary["seed"] = config.seed;
  summary["realizations"] = config.realizations;
  summary["wall_thickness_mm"] = config.wall_thickness_mm;
  summary["sigma_list_mm"] = config.sigma_list_mm;
  summary["mu_list_mm"] = config.mu_list_mm;
  summary["nrmse_denominator"] = denominator_name(config.nrmse_denominator);
  summary["n_points"] = result.ground_truth.size();
  summary["n_masked"] = result.ground_truth.masked_count();
  summary["n_low_curvature"] = result.n_low_curvature;
  summary["cells"] = nlohmann::ordered_json::array();

  std::string long_table = "sigma,mu,realization,metric,value\n";

  for (const SweepCell& cell : result.cells) {
    nlohmann::ordered_json c;
    c["sigma_mm"] = cell.sigma_mm;
    c["mu_mm"] = cell.mu_mm;
    c["realization"] = cell.realization;
    c["failed"] = cell.failed;
    if (cell.failed) {
      c["r_squared"] = nullptr;
      c["nrmse"] = nullptr;
      c["peak"] = nullptr;
      c["p99"] = nullptr;
      c["n_points"] = nullptr;
      c["satisfactory"] = false;
      c["out_of_grid_indices"] = cell.out_of_grid_indices;
    } else {
      c["r_squared"] = cell.report.r_squared;
      c["nrmse"] = cell.report.nrmse;
      c["peak"] = cell.report.peak;
      c["p99"] = cell.report.p99;
      c["n_points"] = cell.report.n_points;
      c["satisfactory"] = cell.report.satisfactory;

      const std::string prefix = format_double(cell.sigma_mm) + "," +
                                 format_double(cell.mu_mm) + "," +
                                 std::to_string(cell.realization) + ",";
      long_table += prefix + "r_squared," + format_double(cell.report.r_squared) + "\n";
      long_table += prefix + "nrmse," + format_double(cell.report.nrmse) + "\n";
      long_table += prefix + "peak," + format_double(cell.report.peak) + "\n";
      long_table += prefix + "p99," + format_double(cell.report.p99) + "\n";
    }
    summary["cells"].push_back(std::move(c));
  }

  detail::atomic_write(out_dir / "summary.json", summary.dump(2) + "\n");
  detail::atomic_write(out_dir / "metrics_long.csv", long_table);

  if (!emit_per_point) return;
  for (const SweepCell& cell : result.cells) {
    if (cell.failed) continue;
    std::string table = "index,gt_strain,pert_strain\n";
    for (std::size_t i = 0; i < cell.strain.size(); ++i) {
      if (!cell.strain.mask[i]) continue;
      table += std::to_string(i);
      table += ',';
      table += format_double(result.ground_truth.values[i]);
      table += ',';
      table += format_double(cell.strain.values[i]);
      table += '\n';
    }
    const std::string name = "scatter_sigma" + format_double(cell.sigma_mm) + "_mu" +
                             format_double(cell.mu_mm) + "_r" +
                             std::to_string(cell.realization) + ".csv";
    detail::atomic_write(out_dir / name, table);
  }
}

}  // namespace wallstrain::io
