// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wallstrain/metrics.hpp"
#include "wallstrain/rng.hpp"
#include "wallstrain/strain.hpp"

namespace wallstrain {

/// Gaussian perturbation along reference outward normals: per-point deviation
/// delta_i ~ N(mu_mm, sigma_mm^2). Positive mu biases outward, negative inward.
/// sigma and mu are conventionally expressed as multiples of the typical wall
/// thickness (1.5 mm).
struct PerturbationSpec {
  double sigma_mm = 0.0;
  double mu_mm = 0.0;
  std::uint64_t seed = 0;
  double wall_thickness_mm = 1.5;

  void validate() const {
    if (!(sigma_mm >= 0.0)) throw Error("sigma_mm must be >= 0");
    if (!std::isfinite(sigma_mm) || !std::isfinite(mu_mm))
      throw Error("non-finite perturbation parameters");
    if (!(wall_thickness_mm > 0.0)) throw Error("wall_thickness_mm must be positive");
  }
};

/// The Gaussian deviation applied at point `i` for this spec.
inline double perturbation_delta(const PerturbationSpec& spec, std::size_t i) {
  return spec.mu_mm +
         spec.sigma_mm * rng::standard_normal(spec.seed, i, 0, rng::kPerturbStream);
}

/// point'[i] = point[i] + delta_i * normal[i], labels and index order preserved.
/// Each delta_i comes from a per-point counter stream of (seed, i), so the
/// perturbed cloud is identical across evaluation orders and worker counts.
inline PointCloud perturb(const PointCloud& ref_cloud,
                          const std::vector<LocalSurfaceFrame>& ref_frames,
                          const PerturbationSpec& spec) {
  spec.validate();
  if (ref_frames.size() != ref_cloud.size())
    throw Error("frame count does not match cloud size");
  PointCloud out;
  out.points.resize(ref_cloud.size());
  out.labels = ref_cloud.labels;
  out.id = ref_cloud.id;
  for (std::size_t i = 0; i < ref_cloud.size(); ++i)
    out.points[i] = ref_cloud.points[i] + perturbation_delta(spec, i) * ref_frames[i].normal;
  return out;
}

/// (sigma, mu) sweep grid. Default grids follow the +/- six wall-thickness
/// protocol in one-thickness increments.
struct SweepConfig {
  std::vector<double> sigma_list_mm;
  std::vector<double> mu_list_mm;
  std::uint64_t seed = 0;
  std::size_t realizations = 1;
  double wall_thickness_mm = 1.5;
  std::size_t workers = 1;
  NrmseDenominator nrmse_denominator = NrmseDenominator::kRange;

  static SweepConfig defaults(double thickness_mm = 1.5) {
    SweepConfig config;
    config.wall_thickness_mm = thickness_mm;
    for (int i = 0; i <= 6; ++i) config.sigma_list_mm.push_back(double(i) * thickness_mm);
    for (int i = -6; i <= 6; ++i) config.mu_list_mm.push_back(double(i) * thickness_mm);
    return config;
  }

  void validate() const {
    if (sigma_list_mm.empty() || mu_list_mm.empty()) throw Error("empty sweep grid");
    for (const double s : sigma_list_mm)
      if (!std::isfinite(s) || s < 0.0) throw Error("invalid sigma in sweep grid");
    for (const double m : mu_list_mm)
      if (!std::isfinite(m)) throw Error("invalid mu in sweep grid");
    if (realizations == 0) throw Error("realizations must be positive");
    if (!(wall_thickness_mm > 0.0)) throw Error("wall_thickness_mm must be positive");
  }
};

/// One sweep cell: a (sigma, mu, realization) triple with either an agreement
/// report or, when perturbed points left the field grid, the failure record.
struct SweepCell {
  double sigma_mm = 0.0;
  double mu_mm = 0.0;
  std::size_t realization = 0;
  bool failed = false;
  std::vector<std::size_t> out_of_grid_indices;
  StrainField strain;
  AgreementReport report;
};

struct SweepResult {
  StrainField ground_truth;
  std::vector<SweepCell> cells;
  std::size_t n_low_curvature = 0;
};

/// Run the full (sigma, mu) x realization sweep against the ground-truth
/// strain of the reference cloud. Cells whose perturbed points leave the grid
/// are flagged failed (with indices) and the sweep continues. Output order is
/// (sigma, mu, realization); per-cell seeds derive from (config.seed,
/// cell index, realization), so reports are byte-stable for any worker count.
inline SweepResult run_sweep(const PointCloud& ref_cloud,
                             const std::vector<LocalSurfaceFrame>& ref_frames,
                             const DisplacementField& field, const SweepConfig& config) {
  config.validate();
  SweepResult result;
  result.ground_truth = compute_strain(ref_cloud, ref_frames, field, ref_cloud.labels,
                                       StrainMeta{0.0, 0.0, config.seed});
  for (const LocalSurfaceFrame& frame : ref_frames)
    result.n_low_curvature += frame.low_curvature_flag ? 1 : 0;

  const std::size_t n_cells = config.sigma_list_mm.size() * config.mu_list_mm.size();
  const std::size_t n_jobs = n_cells * config.realizations;
  result.cells.resize(n_jobs);
  std::vector<std::string> errors(n_jobs);

  detail::parallel_for(n_jobs, config.workers, [&](std::size_t job) {
    const std::size_t cell_index = job / config.realizations;
    const std::size_t realization = job % config.realizations;
    const std::size_t si = cell_index / config.mu_list_mm.size();
    const std::size_t mi = cell_index % config.mu_list_mm.size();

    SweepCell& cell = result.cells[job];
    cell.sigma_mm = config.sigma_list_mm[si];
    cell.mu_mm = config.mu_list_mm[mi];
    cell.realization = realization;

    PerturbationSpec spec;
    spec.sigma_mm = cell.sigma_mm;
    spec.mu_mm = cell.mu_mm;
    spec.seed = rng::derive_seed(config.seed, cell_index, std::uint32_t(realization));
    spec.wall_thickness_mm = config.wall_thickness_mm;

    try {
      const PointCloud perturbed = perturb(ref_cloud, ref_frames, spec);
      cell.strain = compute_strain(perturbed, ref_frames, field, ref_cloud.labels,
                                   StrainMeta{spec.sigma_mm, spec.mu_mm, spec.seed});
      cell.report = build_report(result.ground_truth, cell.strain, config.nrmse_denominator);
    } catch (const GridBoundsError& e) {
      cell.failed = true;
      cell.out_of_grid_indices = e.indices;
      cell.strain = StrainField{};
      cell.report = AgreementReport{};
    } catch (const std::exception& e) {
      errors[job] = e.what();
    }
  });

  for (const std::string& err : errors)
    if (!err.empty()) throw Error(err);
  return result;
}

}  // namespace wallstrain
