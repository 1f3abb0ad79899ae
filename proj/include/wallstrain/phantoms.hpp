// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numbers>

#include "wallstrain/displacement_field.hpp"
#include "wallstrain/point_cloud.hpp"
#include "wallstrain/rng.hpp"
#include "wallstrain/strain.hpp"

namespace wallstrain {

/// Analytic surface with a known radius everywhere, used as a test oracle.
/// Sphere: Fibonacci lattice. Cylinder: golden-angle helix on the side wall.
struct PhantomSpec {
  enum class Kind { kSphere, kCylinder };

  Kind kind = Kind::kSphere;
  double radius_mm = 25.0;
  double length_mm = 80.0;  // cylinder only
  Vec3 center_mm = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();  // cylinder axis / sphere pole direction
  std::size_t n_points = 20000;
  double transition_band_mm = 0.0;  // label-1 margin near the boundary caps
  std::uint64_t seed = 0;           // rotates the lattice phase

  void validate() const {
    if (!(radius_mm > 0.0)) throw Error("phantom radius must be positive");
    if (kind == Kind::kCylinder && !(length_mm > 0.0))
      throw Error("cylinder length must be positive");
    if (n_points < 100) throw Error("phantom needs at least 100 points");
    if (!(axis.norm() > 0.0)) throw Error("phantom axis must be nonzero");
    if (!(transition_band_mm >= 0.0)) throw Error("transition band must be >= 0");
  }
};

namespace detail {

/// Orthonormal basis (e1, e2, axis) with axis normalized.
inline std::array<Vec3, 3> axis_basis(const Vec3& axis) {
  const Vec3 w = axis.normalized();
  const Vec3 pick = std::abs(w.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 e1 = pick.cross(w).normalized();
  const Vec3 e2 = w.cross(e1);
  return {e1, e2, w};
}

}  // namespace detail

/// Quasi-uniform surface sampling of the phantom. Sphere points satisfy
/// |p - center| = radius exactly up to rounding; cylinder points keep the
/// exact radial distance to the axis. Points within `transition_band_mm` of
/// the boundary (cylinder ends, sphere poles) are labeled transition zone.
inline PointCloud make_phantom_cloud(const PhantomSpec& spec) {
  spec.validate();
  const auto [e1, e2, w] = detail::axis_basis(spec.axis);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const rng::Counter r = rng::block(spec.seed, 0, 0, rng::kLatticeStream);
  const double phase = 2.0 * std::numbers::pi * rng::uniform01(r[0], r[1]);
  const std::size_t n = spec.n_points;

  PointCloud cloud;
  cloud.points.resize(n);
  cloud.labels.assign(n, kLabelWall);
  if (spec.kind == PhantomSpec::Kind::kSphere) {
    cloud.id = "sphere";
    for (std::size_t i = 0; i < n; ++i) {
      const double h = 1.0 - 2.0 * (double(i) + 0.5) / double(n);  // along axis, in [-1, 1]
      const double s = std::sqrt(std::max(0.0, 1.0 - h * h));
      const double phi = golden * double(i) + phase;
      const Vec3 dir = s * std::cos(phi) * e1 + s * std::sin(phi) * e2 + h * w;
      cloud.points[i] = spec.center_mm + spec.radius_mm * dir;
      if (spec.transition_band_mm > 0.0 &&
          spec.radius_mm * (1.0 - std::abs(h)) < spec.transition_band_mm)
        cloud.labels[i] = kLabelTransition;
    }
  } else {
    cloud.id = "cylinder";
    for (std::size_t i = 0; i < n; ++i) {
      const double z = -0.5 * spec.length_mm +
                       spec.length_mm * (double(i) + 0.5) / double(n);
      const double phi = golden * double(i) + phase;
      cloud.points[i] = spec.center_mm + z * w +
                        spec.radius_mm * (std::cos(phi) * e1 + std::sin(phi) * e2);
      if (spec.transition_band_mm > 0.0 &&
          0.5 * spec.length_mm - std::abs(z) < spec.transition_band_mm)
        cloud.labels[i] = kLabelTransition;
    }
  }
  return cloud;
}

inline std::pair<Vec3, Vec3> phantom_bounding_box(const PhantomSpec& spec) {
  spec.validate();
  if (spec.kind == PhantomSpec::Kind::kSphere) {
    const Vec3 r = Vec3::Constant(spec.radius_mm);
    return {spec.center_mm - r, spec.center_mm + r};
  }
  const Vec3 ext = Vec3::Constant(spec.radius_mm) +
                   0.5 * spec.length_mm * spec.axis.normalized().cwiseAbs();
  return {spec.center_mm - ext, spec.center_mm + ext};
}

/// Analytic displacement field sampled onto a regular grid.
///
/// Kinds:
///   constant_radial  u(x) = m * d(x)            with d the unit radial direction
///   linear_radial    u(x) = (m + g * a(x)) * d(x) with a(x) = (x - center) . axis,
///                    a radial field whose magnitude varies linearly along the axis
///   affine           u(x) = A x + b
/// Radial direction is from the center point, or from the axis line when
/// `axis_radial` is set (cylinder phantoms). The grid must cover
/// [cover_min, cover_max] with a margin of at least 9 mm plus 3 voxels per
/// axis, so sweep offsets up to six wall thicknesses stay interpolable.
struct FieldSpec {
  enum class Kind { kConstantRadial, kLinearRadial, kAffine };

  Kind kind = Kind::kConstantRadial;
  double magnitude_mm = 0.5;
  double axial_gradient = 0.0;  // linear_radial: magnitude change per mm along axis
  Eigen::Matrix3d affine_a = Eigen::Matrix3d::Zero();
  Vec3 affine_b = Vec3::Zero();
  Vec3 center_mm = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();
  bool axis_radial = false;

  std::array<std::size_t, 3> dims{0, 0, 0};
  Vec3 spacing_mm = Vec3::Ones();
  Vec3 origin_mm = Vec3::Zero();
  Vec3 cover_min_mm = Vec3::Zero();  // region the grid must cover with margin
  Vec3 cover_max_mm = Vec3::Zero();

  static constexpr double kSweepMarginMm = 9.0;  // six wall thicknesses

  /// Size the grid to cover `box` with the required margin plus `extra_margin_mm`.
  void fit_grid(const std::pair<Vec3, Vec3>& box, const Vec3& spacing,
                double extra_margin_mm = 0.0) {
    cover_min_mm = box.first;
    cover_max_mm = box.second;
    spacing_mm = spacing;
    for (int a = 0; a < 3; ++a) {
      const double margin = kSweepMarginMm + 3.0 * spacing[a] + extra_margin_mm;
      origin_mm[a] = box.first[a] - margin;
      const double span = box.second[a] + margin - origin_mm[a];
      dims[a] = std::size_t(std::ceil(span / spacing[a])) + 1;
    }
  }

  Vec3 evaluate(const Vec3& x) const {
    switch (kind) {
      case Kind::kAffine:
        return affine_a * x + affine_b;
      case Kind::kConstantRadial:
      case Kind::kLinearRadial: {
        const Vec3 rel = x - center_mm;
        const Vec3 w = axis.normalized();
        const Vec3 radial = axis_radial ? Vec3(rel - rel.dot(w) * w) : rel;
        const double dist = radial.norm();
        if (dist == 0.0) return Vec3::Zero();  // singular voxel on the center/axis
        const double magnitude = kind == Kind::kConstantRadial
                                     ? magnitude_mm
                                     : magnitude_mm + axial_gradient * rel.dot(w);
        return (magnitude / dist) * radial;
      }
    }
    return Vec3::Zero();
  }
};

inline DisplacementField make_field(const FieldSpec& spec) {
  DisplacementField field;
  field.dims = spec.dims;
  field.spacing_mm = spec.spacing_mm;
  field.origin_mm = spec.origin_mm;
  for (int a = 0; a < 3; ++a) {
    if (field.dims[a] < 2) throw Error("dims must be >= 2");
    if (!(field.spacing_mm[a] > 0.0)) throw Error("spacing must be positive");
    const double margin = FieldSpec::kSweepMarginMm + 3.0 * spec.spacing_mm[a];
    const double grid_lo = spec.origin_mm[a];
    const double grid_hi = spec.origin_mm[a] + double(field.dims[a] - 1) * spec.spacing_mm[a];
    if (grid_lo > spec.cover_min_mm[a] - margin || grid_hi < spec.cover_max_mm[a] + margin)
      throw Error("field grid does not cover the phantom with the required margin");
  }
  field.data.resize(field.voxel_count());
  for (std::size_t iz = 0; iz < field.dims[2]; ++iz)
    for (std::size_t iy = 0; iy < field.dims[1]; ++iy)
      for (std::size_t ix = 0; ix < field.dims[0]; ++ix) {
        const Vec3 x = field.origin_mm +
                       Vec3(double(ix) * field.spacing_mm.x(), double(iy) * field.spacing_mm.y(),
                            double(iz) * field.spacing_mm.z());
        field.at(ix, iy, iz) = spec.evaluate(x);
      }
  return field;
}

/// Closed-form strain for the combinations that have one:
/// {sphere, cylinder} x constant_radial gives eps = magnitude / radius at
/// every wall point (the normal is radial and the radius is the phantom's).
inline StrainField analytic_strain(const PhantomSpec& phantom, const FieldSpec& field) {
  if (field.kind != FieldSpec::Kind::kConstantRadial)
    throw Error("no closed form for this phantom/field combination");
  const PointCloud cloud = make_phantom_cloud(phantom);
  StrainField out;
  out.values.assign(cloud.size(), 0.0);
  out.mask.assign(cloud.size(), 0);
  const double eps = field.magnitude_mm / phantom.radius_mm;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] != kLabelWall) continue;
    out.values[i] = eps;
    out.mask[i] = 1;
  }
  return out;
}

}  // namespace wallstrain
