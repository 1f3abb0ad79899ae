// SPDX-License-Identifier: Apache-2.0
//
// wallstrain CLI: phantom generation, frame estimation, strain computation,
// geometry perturbation, and (sigma, mu) sweep reports.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "wallstrain/wallstrain.hpp"

namespace fs = std::filesystem;
using namespace wallstrain;

namespace {

std::vector<double> parse_numbers(const std::string& text, char sep, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t next = text.find(sep, start);
    const std::string item =
        text.substr(start, next == std::string::npos ? std::string::npos : next - start);
    out.push_back(io::detail::parse_double(item, what));
    if (next == std::string::npos) break;
    start = next + 1;
  }
  return out;
}

/// Field descriptor: "constant-radial:M" | "linear-radial:M:G" |
/// "affine:a11,a12,...,a33,b1,b2,b3" (row-major).
FieldSpec parse_field_spec(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  FieldSpec spec;
  if (kind == "constant-radial") {
    spec.kind = FieldSpec::Kind::kConstantRadial;
    spec.magnitude_mm = io::detail::parse_double(rest, "--field magnitude");
  } else if (kind == "linear-radial") {
    spec.kind = FieldSpec::Kind::kLinearRadial;
    const auto parts = parse_numbers(rest, ':', "--field parameters");
    if (parts.size() != 2)
      throw Error("linear-radial expects magnitude:gradient");
    spec.magnitude_mm = parts[0];
    spec.axial_gradient = parts[1];
  } else if (kind == "affine") {
    spec.kind = FieldSpec::Kind::kAffine;
    const auto parts = parse_numbers(rest, ',', "--field parameters");
    if (parts.size() != 12)
      throw Error("affine expects 12 numbers: a11..a33 row-major, then b1,b2,b3");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) spec.affine_a(r, c) = parts[std::size_t(3 * r + c)];
    for (int a = 0; a < 3; ++a) spec.affine_b[a] = parts[std::size_t(9 + a)];
  } else {
    throw Error("unknown field kind '" + kind +
                "' (expected constant-radial, linear-radial or affine)");
  }
  return spec;
}

int run(int argc, char** argv) {
  CLI::App app{"Wall strain from displacement fields under geometric perturbation"};
  app.require_subcommand(1);

  // --- phantom -------------------------------------------------------------
  auto* phantom_cmd = app.add_subcommand("phantom", "Generate an analytic phantom dataset");
  std::string ph_kind = "sphere";
  double ph_radius = 25.0, ph_length = 80.0, ph_band = 0.0, ph_grid = 1.0, ph_margin = 0.0;
  std::size_t ph_points = 20000;
  std::uint64_t ph_seed = 0;
  std::string ph_field = "constant-radial:0.5";
  std::string ph_out;
  phantom_cmd->add_option("--kind", ph_kind, "sphere or cylinder")
      ->check(CLI::IsMember({"sphere", "cylinder"}));
  phantom_cmd->add_option("--radius", ph_radius, "phantom radius (mm)");
  phantom_cmd->add_option("--length", ph_length, "cylinder length (mm)");
  phantom_cmd->add_option("--points", ph_points, "number of surface points");
  phantom_cmd->add_option("--seed", ph_seed, "lattice phase seed");
  phantom_cmd->add_option("--transition-band", ph_band, "transition-zone band near caps (mm)");
  phantom_cmd->add_option("--field", ph_field,
                          "field spec, e.g. constant-radial:0.5 or linear-radial:0.5:0.02");
  phantom_cmd->add_option("--grid", ph_grid, "grid spacing (mm)");
  phantom_cmd->add_option("--margin", ph_margin, "extra grid margin beyond the default (mm)");
  phantom_cmd->add_option("--out", ph_out, "output directory")->required();

  // --- frames ---------------------------------------------------------------
  auto* frames_cmd = app.add_subcommand("frames", "Estimate per-point surface frames and radii");
  std::string fr_cloud, fr_out;
  SurfaceFitParams fr_params;
  std::size_t fr_workers = 1;
  frames_cmd->add_option("--cloud", fr_cloud, "input cloud file")->required();
  frames_cmd->add_option("--k", fr_params.k_neighbors, "neighborhood size");
  frames_cmd->add_option("--seed", fr_params.rng_seed, "consensus sampling seed");
  frames_cmd->add_option("--iterations", fr_params.mlesac_iterations, "consensus iterations");
  frames_cmd->add_option("--inlier-threshold", fr_params.inlier_threshold_mm,
                         "inlier distance threshold (mm)");
  frames_cmd->add_option("--min-inlier-fraction", fr_params.min_inlier_fraction,
                         "minimum consensus fraction");
  frames_cmd->add_option("--rmax", fr_params.r_max_mm, "radius clamp ceiling (mm)");
  frames_cmd->add_option("--workers", fr_workers, "worker threads (0 = hardware)");
  frames_cmd->add_option("--out", fr_out, "output frames file")->required();

  // --- strain ----------------------------------------------------------------
  auto* strain_cmd = app.add_subcommand("strain", "Compute strain on a (reference or perturbed) cloud");
  std::string st_cloud, st_frames, st_field, st_out;
  strain_cmd->add_option("--cloud", st_cloud, "evaluation cloud file")->required();
  strain_cmd->add_option("--frames", st_frames, "reference frames file")->required();
  strain_cmd->add_option("--field", st_field, "displacement field header")->required();
  strain_cmd->add_option("--out", st_out, "output strain table")->required();

  // --- perturb ----------------------------------------------------------------
  auto* perturb_cmd = app.add_subcommand("perturb", "Perturb a cloud along reference normals");
  std::string pe_cloud, pe_frames, pe_out;
  PerturbationSpec pe_spec;
  perturb_cmd->add_option("--cloud", pe_cloud, "reference cloud file")->required();
  perturb_cmd->add_option("--frames", pe_frames, "reference frames file")->required();
  perturb_cmd->add_option("--sigma", pe_spec.sigma_mm, "perturbation magnitude (mm)");
  perturb_cmd->add_option("--mu", pe_spec.mu_mm, "perturbation bias (mm, + outward / - inward)");
  perturb_cmd->add_option("--seed", pe_spec.seed, "perturbation seed");
  perturb_cmd->add_option("--out", pe_out, "output cloud file")->required();

  // --- sweep -----------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a (sigma, mu) sweep from a config file");
  std::string sw_config, sw_out;
  sweep_cmd->add_option("--config", sw_config, "sweep config (JSON)")->required();
  sweep_cmd->add_option("--out", sw_out, "report output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (phantom_cmd->parsed()) {
    PhantomSpec phantom;
    phantom.kind = ph_kind == "sphere" ? PhantomSpec::Kind::kSphere
                                       : PhantomSpec::Kind::kCylinder;
    phantom.radius_mm = ph_radius;
    phantom.length_mm = ph_length;
    phantom.n_points = ph_points;
    phantom.transition_band_mm = ph_band;
    phantom.seed = ph_seed;

    FieldSpec field_spec = parse_field_spec(ph_field);
    field_spec.center_mm = phantom.center_mm;
    field_spec.axis = phantom.axis;
    field_spec.axis_radial = phantom.kind == PhantomSpec::Kind::kCylinder;
    field_spec.fit_grid(phantom_bounding_box(phantom), Vec3::Constant(ph_grid), ph_margin);

    const PointCloud cloud = make_phantom_cloud(phantom);
    const DisplacementField field = make_field(field_spec);

    const fs::path dir = ph_out;
    fs::create_directories(dir);
    io::write_cloud(cloud, dir / "cloud.csv");
    io::write_field(field, dir / "field.json");
    if (field_spec.kind == FieldSpec::Kind::kConstantRadial)
      io::write_strain(analytic_strain(phantom, field_spec), dir / "strain_analytic.csv");
    return 0;
  }

  if (frames_cmd->parsed()) {
    const PointCloud cloud = io::read_cloud(fr_cloud);
    const auto frames = estimate_all_frames(cloud, fr_params, fr_workers);
    io::write_frames(frames, fr_out);
    return 0;
  }

  if (strain_cmd->parsed()) {
    const PointCloud cloud = io::read_cloud(st_cloud);
    const auto frames = io::read_frames(st_frames);
    const DisplacementField field = io::read_field(st_field);
    io::write_strain(compute_strain(cloud, frames, field, cloud.labels), st_out);
    return 0;
  }

  if (perturb_cmd->parsed()) {
    const PointCloud cloud = io::read_cloud(pe_cloud);
    const auto frames = io::read_frames(pe_frames);
    io::write_cloud(perturb(cloud, frames, pe_spec), pe_out);
    return 0;
  }

  if (sweep_cmd->parsed()) {
    const io::SweepJob job = io::read_sweep_config(sw_config);
    const PointCloud cloud = io::read_cloud(job.cloud_path);
    const auto frames = io::read_frames(job.frames_path);
    const DisplacementField field = io::read_field(job.field_path);
    const SweepResult result = run_sweep(cloud, frames, field, job.config);
    io::write_sweep_report(result, job.config, sw_out, job.emit_per_point);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
