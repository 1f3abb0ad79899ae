// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>

#include "wallstrain/core.hpp"
#include "wallstrain/local_frame.hpp"

namespace wallstrain {

/// Regular-grid 3D displacement field (mm) with voxel-center addressing:
/// `origin_mm` is the center of voxel (0,0,0) and `data` stores one 3-vector
/// per voxel, x index fastest, then y, then z. Component order follows the
/// patient (R, A, S) axes. Immutable after load; interpolation is pure.
struct DisplacementField {
  std::array<std::size_t, 3> dims{0, 0, 0};
  Vec3 spacing_mm = Vec3::Ones();
  Vec3 origin_mm = Vec3::Zero();
  std::vector<Vec3> data;

  std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

  std::size_t linear_index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return ix + dims[0] * (iy + dims[1] * iz);
  }

  const Vec3& at(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return data[linear_index(ix, iy, iz)];
  }
  Vec3& at(std::size_t ix, std::size_t iy, std::size_t iz) {
    return data[linear_index(ix, iy, iz)];
  }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (dims[a] < 2) throw Error("dims must be >= 2");
      if (!(spacing_mm[a] > 0.0)) throw Error("spacing must be positive");
    }
    if (!origin_mm.allFinite() || !spacing_mm.allFinite())
      throw Error("non-finite grid geometry");
    if (data.size() != voxel_count())
      throw Error("field data length " + std::to_string(data.size()) + " does not match dims");
    for (const Vec3& v : data)
      if (!v.allFinite()) throw Error("non-finite displacement vector");
  }

  /// True when p lies inside the voxel-center bounding box.
  bool contains(const Vec3& p) const {
    for (int a = 0; a < 3; ++a) {
      const double t = (p[a] - origin_mm[a]) / spacing_mm[a];
      if (!(t >= 0.0 && t <= double(dims[a] - 1))) return false;
    }
    return true;
  }

  /// Component-wise trilinear interpolation from the 8 surrounding voxel
  /// centers. No extrapolation: out-of-bounds points are a hard error.
  Vec3 interpolate(const Vec3& p) const {
    std::array<std::size_t, 3> i0;
    Vec3 frac;
    for (int a = 0; a < 3; ++a) {
      const double t = (p[a] - origin_mm[a]) / spacing_mm[a];
      if (!(t >= 0.0 && t <= double(dims[a] - 1)))
        throw Error("point outside displacement grid");
      std::size_t cell = std::size_t(t);
      if (cell > dims[a] - 2) cell = dims[a] - 2;
      i0[a] = cell;
      frac[a] = t - double(cell);
    }
    auto lerp3 = [](const Vec3& u, const Vec3& v, double f) {
      // std::lerp is exact at f == 0 and f == 1, which nodal exactness needs
      return Vec3(std::lerp(u.x(), v.x(), f), std::lerp(u.y(), v.y(), f),
                  std::lerp(u.z(), v.z(), f));
    };
    const auto [x, y, z] = i0;
    const Vec3 c00 = lerp3(at(x, y, z), at(x + 1, y, z), frac[0]);
    const Vec3 c10 = lerp3(at(x, y + 1, z), at(x + 1, y + 1, z), frac[0]);
    const Vec3 c01 = lerp3(at(x, y, z + 1), at(x + 1, y, z + 1), frac[0]);
    const Vec3 c11 = lerp3(at(x, y + 1, z + 1), at(x + 1, y + 1, z + 1), frac[0]);
    return lerp3(lerp3(c00, c10, frac[1]), lerp3(c01, c11, frac[1]), frac[2]);
  }
};

/// Wall displacement split into its normal and tangential parts.
/// `delta_r_mm` is signed, positive along the outward normal.
struct DecomposedDisplacement {
  double delta_r_mm;
  Eigen::Vector2d tangential_mm;
};

inline DecomposedDisplacement decompose(const Vec3& u, const LocalSurfaceFrame& frame) {
  return {u.dot(frame.normal), {u.dot(frame.tangent1), u.dot(frame.tangent2)}};
}

}  // namespace wallstrain
