// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "wallstrain/core.hpp"

namespace wallstrain {

constexpr std::uint8_t kLabelWall = 0;
constexpr std::uint8_t kLabelTransition = 1;

/// Ordered 3D point set (mm) with a per-point region label.
/// Label 0 marks analyzed wall points, label 1 the transition zone that is
/// excluded from strain statistics. Index order is the identity that ties
/// reference, perturbed and strain data together; nothing may reorder it.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::uint8_t> labels;
  std::string id;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void validate() const {
    if (points.empty()) throw Error("empty point cloud");
    if (labels.size() != points.size())
      throw Error("point cloud has " + std::to_string(points.size()) + " points but " +
                  std::to_string(labels.size()) + " labels");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!points[i].allFinite())
        throw Error("non-finite coordinate at point " + std::to_string(i));
      if (labels[i] != kLabelWall && labels[i] != kLabelTransition)
        throw Error("invalid label " + std::to_string(int(labels[i])) + " at point " +
                    std::to_string(i));
    }
  }
};

inline Vec3 centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("empty point cloud");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : cloud.points) sum += p;
  return sum / double(cloud.size());
}

/// Axis-aligned bounding box as (min corner, max corner).
inline std::pair<Vec3, Vec3> bounding_box(const PointCloud& cloud) {
  if (cloud.empty()) throw Error("empty point cloud");
  Vec3 lo = cloud.points.front();
  Vec3 hi = cloud.points.front();
  for (const Vec3& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return {lo, hi};
}

}  // namespace wallstrain
