// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "wallstrain/io.hpp"
#include "wallstrain/phantoms.hpp"

using namespace wallstrain;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("wallstrain_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) { return io::detail::read_file(p); }

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("format_double round-trips exactly", "[io]") {
  std::mt19937_64 gen(15);
  std::normal_distribution<double> dist(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(gen);
    CHECK(io::detail::parse_double(io::format_double(v), "test") == v);
  }
  CHECK(io::format_double(1.5) == "1.5");
  CHECK(io::format_double(-0.25) == "-0.25");
}

TEST_CASE("cloud round-trip", "[io]") {
  TempDir dir;
  PointCloud cloud;
  cloud.points = {Vec3(0.1, -2.345678901234567, 3e-17), Vec3(1.0 / 3.0, 2.0, -9.75),
                  Vec3(12345.6789, -0.0001, 42.0)};
  cloud.labels = {0, 1, 0};
  const fs::path path = dir.path / "cloud.csv";
  io::write_cloud(cloud, path);

  const PointCloud back = io::read_cloud(path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.points[i] == cloud.points[i]);
    CHECK(back.labels[i] == cloud.labels[i]);
  }

  // a second write of the re-read cloud is byte-identical
  const fs::path path2 = dir.path / "cloud2.csv";
  io::write_cloud(back, path2);
  CHECK(slurp(path) == slurp(path2));
  CHECK_FALSE(fs::exists(dir.path / "cloud.csv.tmp"));
}

TEST_CASE("cloud parse errors", "[io]") {
  TempDir dir;
  const fs::path path = dir.path / "bad.csv";

  spit(path, "1,2,3,0\n");
  CHECK_THROWS_WITH(io::read_cloud(path), ContainsSubstring("missing header"));

  spit(path, "x,y,z,label\n1,2,3\n");
  CHECK_THROWS_WITH(io::read_cloud(path), ContainsSubstring(":2: malformed line"));

  spit(path, "x,y,z,label\n1,2,3,2\n");
  CHECK_THROWS_WITH(io::read_cloud(path), ContainsSubstring("invalid label"));

  spit(path, "x,y,z,label\n1,2,nan,0\n");
  CHECK_THROWS(io::read_cloud(path));

  spit(path, "x,y,z,label\n1,2,3,0\n1,bogus,3,0\n");
  CHECK_THROWS_WITH(io::read_cloud(path), ContainsSubstring(":3: malformed number 'bogus'"));

  spit(path, "x,y,z,label\n");
  CHECK_THROWS_WITH(io::read_cloud(path), "empty point cloud");
}

TEST_CASE("field round-trip", "[io]") {
  TempDir dir;
  DisplacementField field;
  field.dims = {2, 2, 2};
  field.spacing_mm = Vec3(1.0, 2.0, 0.5);
  field.origin_mm = Vec3(-1.0, 0.0, 3.0);
  field.data.assign(8, Vec3(0.25, -1.5, 3.0));  // exactly representable as f32
  const fs::path header = dir.path / "field.json";
  io::write_field(field, header);

  const DisplacementField back = io::read_field(header);
  CHECK(back.dims == field.dims);
  CHECK(back.spacing_mm == field.spacing_mm);
  CHECK(back.origin_mm == field.origin_mm);
  for (std::size_t i = 0; i < 8; ++i) CHECK(back.data[i] == field.data[i]);
}

TEST_CASE("field write quantizes to f32", "[io]") {
  TempDir dir;
  DisplacementField field;
  field.dims = {2, 2, 2};
  field.data.assign(8, Vec3(0.1, 1.0 / 3.0, -0.7));  // not f32-representable
  const fs::path header = dir.path / "field.json";
  io::write_field(field, header);
  const DisplacementField back = io::read_field(header);
  for (std::size_t i = 0; i < 8; ++i)
    for (int a = 0; a < 3; ++a) CHECK(back.data[i][a] == double(float(field.data[i][a])));
  // re-writing the quantized field reproduces the binary byte-for-byte
  io::write_field(back, dir.path / "field2.json");
  CHECK(slurp(dir.path / "field.bin") == slurp(dir.path / "field2.bin"));
}

TEST_CASE("field format errors", "[io]") {
  TempDir dir;
  DisplacementField field;
  field.dims = {2, 2, 2};
  field.data.assign(8, Vec3::Zero());
  const fs::path header = dir.path / "field.json";
  io::write_field(field, header);

  SECTION("truncated binary") {
    const std::string blob = slurp(dir.path / "field.bin");
    spit(dir.path / "field.bin", blob.substr(0, blob.size() - 4));
    CHECK_THROWS_WITH(io::read_field(header),
                      ContainsSubstring("data size mismatch: expected 96 bytes"));
  }

  SECTION("dims below 2") {
    std::string text = slurp(header);
    const auto pos = text.find("[\n    2");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 7, "[\n    1");
    spit(header, text);
    CHECK_THROWS_WITH(io::read_field(header), ContainsSubstring("dims must be >= 2"));
  }

  SECTION("missing key") {
    spit(header, "{\"dims\": [2,2,2]}");
    CHECK_THROWS_WITH(io::read_field(header), ContainsSubstring("header missing key"));
  }

  SECTION("unsupported scalar") {
    std::string text = slurp(header);
    const auto pos = text.find("f32le");
    text.replace(pos, 5, "f64le");
    spit(header, text);
    CHECK_THROWS_WITH(io::read_field(header), ContainsSubstring("unsupported scalar"));
  }
}

TEST_CASE("frames round-trip", "[io]") {
  TempDir dir;
  const PhantomSpec spec{.radius_mm = 10.0, .n_points = 150, .seed = 3};
  const PointCloud cloud = make_phantom_cloud(spec);
  SurfaceFitParams params;
  params.k_neighbors = 20;
  const auto frames = estimate_all_frames(cloud, params);
  const fs::path path = dir.path / "frames.csv";
  io::write_frames(frames, path);
  const auto back = io::read_frames(path);
  REQUIRE(back.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(back[i].normal == frames[i].normal);
    CHECK(back[i].tangent1 == frames[i].tangent1);
    CHECK(back[i].tangent2 == frames[i].tangent2);
    CHECK(back[i].radius_mm == frames[i].radius_mm);
    CHECK(back[i].low_curvature_flag == frames[i].low_curvature_flag);
  }
}

TEST_CASE("strain table round-trip", "[io]") {
  TempDir dir;
  StrainField strain;
  strain.values = {0.01, -0.003, 0.42, 0.0};
  strain.mask = {1, 1, 0, 1};
  const fs::path path = dir.path / "strain.csv";
  io::write_strain(strain, path);
  const StrainField back = io::read_strain(path);
  CHECK(back.values == strain.values);
  CHECK(back.mask == strain.mask);
}

TEST_CASE("sweep config parsing and defaults", "[io]") {
  TempDir dir;
  const fs::path path = dir.path / "config.json";

  SECTION("defaults") {
    spit(path, R"({"cloud": "c.csv", "frames": "f.csv", "field": "d.json"})");
    const io::SweepJob job = io::read_sweep_config(path);
    CHECK(job.cloud_path == dir.path / "c.csv");
    CHECK(job.config.sigma_list_mm == std::vector<double>{0, 1.5, 3, 4.5, 6, 7.5, 9});
    CHECK(job.config.mu_list_mm.size() == 13);
    CHECK(job.config.mu_list_mm.front() == -9.0);
    CHECK(job.config.realizations == 1);
    CHECK(job.config.wall_thickness_mm == 1.5);
    CHECK(job.config.nrmse_denominator == NrmseDenominator::kRange);
    CHECK_FALSE(job.emit_per_point);
  }

  SECTION("thickness scales the default grids") {
    spit(path,
         R"({"cloud": "c.csv", "frames": "f.csv", "field": "d.json",
             "wall_thickness_mm": 2.0})");
    const io::SweepJob job = io::read_sweep_config(path);
    CHECK(job.config.sigma_list_mm.back() == 12.0);
    CHECK(job.config.mu_list_mm.front() == -12.0);
  }

  SECTION("explicit values") {
    spit(path,
         R"({"cloud": "c.csv", "frames": "f.csv", "field": "d.json",
             "sigma_list_mm": [0, 1.5], "mu_list_mm": [-3, 0, 3],
             "seed": 99, "realizations": 4, "workers": 2,
             "nrmse_denominator": "sd", "emit_per_point": true})");
    const io::SweepJob job = io::read_sweep_config(path);
    CHECK(job.config.sigma_list_mm == std::vector<double>{0.0, 1.5});
    CHECK(job.config.seed == 99);
    CHECK(job.config.realizations == 4);
    CHECK(job.config.nrmse_denominator == NrmseDenominator::kStdDev);
    CHECK(job.emit_per_point);
  }

  SECTION("missing keys fail") {
    spit(path, R"({"cloud": "c.csv"})");
    CHECK_THROWS_WITH(io::read_sweep_config(path), ContainsSubstring("missing key 'frames'"));
  }

  SECTION("unknown denominator fails") {
    spit(path,
         R"({"cloud": "c", "frames": "f", "field": "d", "nrmse_denominator": "iqr"})");
    CHECK_THROWS_WITH(io::read_sweep_config(path), ContainsSubstring("unknown nrmse_denominator"));
  }
}

TEST_CASE("sweep reports are byte-deterministic", "[io]") {
  TempDir dir;
  const PhantomSpec spec{.radius_mm = 20.0, .n_points = 300, .seed = 5};
  const PointCloud cloud = make_phantom_cloud(spec);
  std::vector<LocalSurfaceFrame> frames(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 radial = cloud.points[i].normalized();
    frames[i].normal = radial;
    frames[i].tangent1 = radial.unitOrthogonal();
    frames[i].tangent2 = radial.cross(frames[i].tangent1);
    frames[i].radius_mm = 20.0;
  }
  FieldSpec fspec;
  fspec.kind = FieldSpec::Kind::kLinearRadial;
  fspec.magnitude_mm = 0.4;
  fspec.axial_gradient = 0.01;
  fspec.fit_grid(phantom_bounding_box(spec), Vec3::Constant(1.5), 10.0);
  const DisplacementField field = make_field(fspec);

  SweepConfig config;
  config.sigma_list_mm = {0.0, 1.5};
  config.mu_list_mm = {-1.5, 0.0, 1.5};
  config.seed = 31415;

  config.workers = 1;
  const SweepResult a = run_sweep(cloud, frames, field, config);
  io::write_sweep_report(a, config, dir.path / "a", true);

  config.workers = 4;  // the worker count must not leak into the report
  const SweepResult b = run_sweep(cloud, frames, field, config);
  io::write_sweep_report(b, config, dir.path / "b", true);

  CHECK(slurp(dir.path / "a" / "summary.json") == slurp(dir.path / "b" / "summary.json"));
  CHECK(slurp(dir.path / "a" / "metrics_long.csv") == slurp(dir.path / "b" / "metrics_long.csv"));
  CHECK(slurp(dir.path / "a" / "scatter_sigma1.5_mu-1.5_r0.csv") ==
        slurp(dir.path / "b" / "scatter_sigma1.5_mu-1.5_r0.csv"));

  // long table carries one row per metric per successful cell
  const std::string long_table = slurp(dir.path / "a" / "metrics_long.csv");
  CHECK(std::count(long_table.begin(), long_table.end(), '\n') == 1 + 6 * 4);
  CHECK(long_table.starts_with("sigma,mu,realization,metric,value\n"));
}
