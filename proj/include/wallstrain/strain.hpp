// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <sstream>

#include "wallstrain/displacement_field.hpp"
#include "wallstrain/local_frame.hpp"
#include "wallstrain/point_cloud.hpp"

namespace wallstrain {

/// (sigma, mu, seed) provenance of the geometry a strain field was evaluated on.
struct StrainMeta {
  double sigma_mm = 0.0;
  double mu_mm = 0.0;
  std::uint64_t seed = 0;
};

/// Per-point scalar strain aligned 1:1 with the reference cloud indices.
/// mask[i] == 1 marks an analyzed wall point; transition-zone points stay
/// masked out with value 0.
struct StrainField {
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
  StrainMeta meta;

  std::size_t size() const { return values.size(); }

  std::size_t masked_count() const {
    std::size_t n = 0;
    for (const std::uint8_t m : mask) n += m != 0;
    return n;
  }

  std::vector<double> masked_values() const {
    std::vector<double> out;
    out.reserve(masked_count());
    for (std::size_t i = 0; i < values.size(); ++i)
      if (mask[i]) out.push_back(values[i]);
    return out;
  }
};

/// Local circumferential strain eps = dR / R at every analyzed wall point.
///
/// The displacement is interpolated at the evaluation geometry (reference or
/// perturbed), while the normal and radius always come from the reference
/// frames, so results are reported on the reference cloud. dR is signed,
/// positive along the outward normal. If any analyzed point falls outside the
/// field grid the whole call fails, listing the offending indices; silently
/// dropping them would bias downstream statistics.
inline StrainField compute_strain(const PointCloud& eval_cloud,
                                  const std::vector<LocalSurfaceFrame>& ref_frames,
                                  const DisplacementField& field,
                                  const std::vector<std::uint8_t>& ref_labels,
                                  const StrainMeta& meta = {}) {
  const std::size_t n = eval_cloud.size();
  if (ref_frames.size() != n) throw Error("frame count does not match cloud size");
  if (ref_labels.size() != n) throw Error("label count does not match cloud size");

  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < n; ++i) {
    if (ref_labels[i] != kLabelWall) continue;
    if (!field.contains(eval_cloud.points[i])) outside.push_back(i);
  }
  if (!outside.empty()) {
    std::ostringstream msg;
    msg << outside.size() << " points outside displacement grid:";
    for (std::size_t j = 0; j < outside.size() && j < 8; ++j) msg << ' ' << outside[j];
    if (outside.size() > 8) msg << " ...";
    throw GridBoundsError(msg.str(), std::move(outside));
  }

  StrainField out;
  out.values.assign(n, 0.0);
  out.mask.assign(n, 0);
  out.meta = meta;
  for (std::size_t i = 0; i < n; ++i) {
    if (ref_labels[i] != kLabelWall) continue;
    const Vec3 u = field.interpolate(eval_cloud.points[i]);
    out.values[i] = u.dot(ref_frames[i].normal) / ref_frames[i].radius_mm;
    out.mask[i] = 1;
  }
  return out;
}

/// Element-wise a - b where both masks are set; result mask is the conjunction.
inline StrainField strain_difference(const StrainField& a, const StrainField& b) {
  if (a.size() != b.size()) throw Error("strain field length mismatch");
  StrainField out;
  out.values.assign(a.size(), 0.0);
  out.mask.assign(a.size(), 0);
  out.meta = a.meta;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.mask[i] && b.mask[i]) {
      out.values[i] = a.values[i] - b.values[i];
      out.mask[i] = 1;
    }
  }
  return out;
}

}  // namespace wallstrain
