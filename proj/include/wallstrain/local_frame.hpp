// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <queue>
#include <tuple>

#include "wallstrain/neighbor_index.hpp"
#include "wallstrain/point_cloud.hpp"
#include "wallstrain/rng.hpp"

namespace wallstrain {

/// Local biological coordinate system at a wall point: outward unit normal,
/// two perpendicular tangents, and the local radius of wall curvature from a
/// robust sphere fit. `low_curvature_flag` is set when the fitted radius was
/// clamped at the configured ceiling (near-flat or saddle neighborhoods).
struct LocalSurfaceFrame {
  Vec3 normal = Vec3::UnitZ();
  Vec3 tangent1 = Vec3::UnitX();
  Vec3 tangent2 = Vec3::UnitY();
  double radius_mm = 0.0;
  bool low_curvature_flag = false;
};

struct SurfaceFitParams {
  std::size_t k_neighbors = 30;
  std::size_t mlesac_iterations = 200;
  double inlier_threshold_mm = 0.3;
  double min_inlier_fraction = 0.5;
  double r_max_mm = 300.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (k_neighbors < 6) throw Error("k_neighbors must be at least 6");
    if (mlesac_iterations == 0) throw Error("mlesac_iterations must be positive");
    if (!(inlier_threshold_mm > 0.0)) throw Error("inlier_threshold_mm must be positive");
    if (!(min_inlier_fraction > 0.0 && min_inlier_fraction <= 1.0))
      throw Error("min_inlier_fraction must be in (0, 1]");
    if (!(r_max_mm > 0.0)) throw Error("r_max_mm must be positive");
  }
};

/// Unoriented orthonormal frame from a plane fit (sign of `normal` is arbitrary).
struct PlaneFrame {
  Vec3 normal;
  Vec3 tangent1;
  Vec3 tangent2;
};

namespace detail {

struct Scatter {
  Vec3 mean;
  Eigen::Matrix3d matrix;  // sum of outer products of centered points
};

template <typename GetPoint>
Scatter scatter_of(std::size_t n, GetPoint&& point) {
  Vec3 mean = Vec3::Zero();
  for (std::size_t j = 0; j < n; ++j) mean += point(j);
  mean /= double(n);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (std::size_t j = 0; j < n; ++j) {
    const Vec3 d = point(j) - mean;
    m += d * d.transpose();
  }
  return {mean, m};
}

}  // namespace detail

/// Plane fit over the k-nearest neighborhood of point `i`: the normal is the
/// direction of least variance of the centered neighborhood, the tangents span
/// the orthogonal complement. The returned normal is unoriented.
inline PlaneFrame fit_plane_frame(const PointCloud& cloud, const NeighborIndex& index,
                                  std::size_t i, const SurfaceFitParams& params) {
  params.validate();
  if (params.k_neighbors > index.size()) throw Error("k_neighbors exceeds cloud size");
  const auto nbs = index.k_nearest(cloud.points[i], params.k_neighbors);
  const auto sc = detail::scatter_of(nbs.size(),
                                     [&](std::size_t j) { return cloud.points[nbs[j].index]; });
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sc.matrix);
  const Eigen::Vector3d ev = es.eigenvalues();  // ascending
  // rank < 2 after centering: all neighbors collinear or coincident
  if (std::sqrt(std::max(ev(1), 0.0) / double(nbs.size())) <= 1e-9)
    throw Error("degenerate neighborhood at point " + std::to_string(i));
  PlaneFrame frame;
  frame.normal = es.eigenvectors().col(0);
  frame.tangent1 = es.eigenvectors().col(2);
  frame.tangent2 = frame.normal.cross(frame.tangent1);
  return frame;
}

/// Flip the unoriented normals into a consistent outward orientation.
///
/// Within each connected component of the k-nearest-neighbor graph, the point
/// whose normal is least ambiguous against the centroid direction seeds the
/// orientation (flipped so n . (p - centroid) > 0), which is then propagated
/// along a minimum-spanning traversal with edge weight 1 - |n_i . n_j|,
/// flipping a neighbor whenever its dot product with the propagated normal is
/// negative.
///
/// Exactly planar patches have n . (p - centroid) == 0 everywhere, so outward
/// is undefined; a patch of at least 3 points still gets a consistent
/// orientation from a canonical seed sign (dominant normal component made
/// positive). Smaller ambiguous clouds carry no surface evidence at all and
/// are an error.
inline std::vector<Vec3> orient_normals(const PointCloud& cloud, const NeighborIndex& index,
                                        std::vector<Vec3> normals, std::size_t k_neighbors) {
  const std::size_t n = cloud.size();
  if (normals.size() != n) throw Error("one normal per point required");
  const std::size_t k = std::min(k_neighbors + 1, n);  // +1: query returns the point itself
  const Vec3 center = centroid(cloud);

  std::vector<std::uint8_t> visited(n, 0);
  std::size_t n_visited = 0;
  // (weight, to, from): lexicographic pop order makes the traversal deterministic
  using Edge = std::tuple<double, std::size_t, std::size_t>;
  std::priority_queue<Edge, std::vector<Edge>, std::greater<Edge>> queue;

  auto push_edges = [&](std::size_t from) {
    for (const Neighbor& nb : index.k_nearest(cloud.points[from], k)) {
      if (nb.index == from || visited[nb.index]) continue;
      queue.emplace(1.0 - std::abs(normals[from].dot(normals[nb.index])), nb.index, from);
    }
  };

  while (n_visited < n) {
    // seed the next component at the most outward-unambiguous unvisited point
    std::size_t seed = n;
    std::size_t n_unvisited = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (visited[i]) continue;
      ++n_unvisited;
      const double d = std::abs(normals[i].dot(cloud.points[i] - center));
      if (seed == n || d > best) {
        seed = i;
        best = d;
      }
    }
    if (best > 0.0) {
      if (normals[seed].dot(cloud.points[seed] - center) < 0.0) normals[seed] = -normals[seed];
    } else {
      if (n_unvisited < 3) throw Error("cannot establish outward orientation");
      seed = std::size_t(std::find(visited.begin(), visited.end(), 0) - visited.begin());
      int dominant = 0;
      normals[seed].cwiseAbs().maxCoeff(&dominant);
      if (normals[seed][dominant] < 0.0) normals[seed] = -normals[seed];
    }
    visited[seed] = 1;
    ++n_visited;
    push_edges(seed);

    while (!queue.empty()) {
      const auto [weight, to, from] = queue.top();
      queue.pop();
      (void)weight;
      if (visited[to]) continue;
      if (normals[from].dot(normals[to]) < 0.0) normals[to] = -normals[to];
      visited[to] = 1;
      ++n_visited;
      push_edges(to);
    }
  }
  return normals;
}

namespace detail {

struct SphereModel {
  Vec3 center;
  double radius;
};

/// Algebraic least-squares sphere (Coope): |p|^2 = 2 c.p + (r^2 - |c|^2).
inline bool algebraic_sphere(const std::vector<Vec3>& pts, SphereModel& out) {
  const Eigen::Index n = Eigen::Index(pts.size());
  Eigen::MatrixXd m(n, 4);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    m.row(j) << 2.0 * pts[j].x(), 2.0 * pts[j].y(), 2.0 * pts[j].z(), 1.0;
    y(j) = pts[j].squaredNorm();
  }
  const Eigen::Vector4d x = m.colPivHouseholderQr().solve(y);
  const Vec3 c = x.head<3>();
  const double r2 = x(3) + c.squaredNorm();
  if (!(r2 > 0.0) || !std::isfinite(r2)) return false;
  out = {c, std::sqrt(r2)};
  return true;
}

/// Geometric least-squares refinement: Gauss-Newton on |p - c| - r.
inline SphereModel refine_sphere(const std::vector<Vec3>& pts, SphereModel model,
                                 double r_max_mm) {
  SphereModel alg;
  if (algebraic_sphere(pts, alg)) model = alg;
  const Eigen::Index n = Eigen::Index(pts.size());
  Eigen::MatrixXd jac(n, 4);
  Eigen::VectorXd res(n);
  for (int iter = 0; iter < 25; ++iter) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vec3 d = pts[j] - model.center;
      const double dist = d.norm();
      if (dist < 1e-12) return model;  // a point sits on the center: stop refining
      jac.row(j) << -d.x() / dist, -d.y() / dist, -d.z() / dist, -1.0;
      res(j) = dist - model.radius;
    }
    const Eigen::Vector4d step =
        (jac.transpose() * jac).ldlt().solve(-jac.transpose() * res);
    if (!step.allFinite()) break;
    const SphereModel next{model.center + step.head<3>(), model.radius + step(3)};
    if (!std::isfinite(next.radius) || std::abs(next.radius) > 10.0 * r_max_mm) break;
    model = next;
    if (step.norm() < 1e-12 * std::max(1.0, std::abs(model.radius))) break;
  }
  return model;
}

}  // namespace detail

/// Local radius of wall curvature at point `i` via MLESAC-style consensus.
///
/// Repeatedly samples 4 neighborhood points, solves the sphere through them,
/// and scores the model by the number of neighborhood points within
/// `inlier_threshold_mm` of its surface. A coplanar sample is the infinite-
/// radius limit and is scored as a plane; a collinear sample is discarded.
/// The best consensus set is refined with a geometric least-squares sphere
/// fit, and the radius magnitude is clamped at `r_max_mm` (flag set). All
/// draws derive from (rng_seed, i), so the result is deterministic.
///
/// Returns (radius_mm, low_curvature_flag).
inline std::pair<double, bool> fit_local_radius(const PointCloud& cloud,
                                                const NeighborIndex& index, std::size_t i,
                                                const SurfaceFitParams& params) {
  params.validate();
  if (params.k_neighbors > index.size()) throw Error("k_neighbors exceeds cloud size");
  const std::size_t k = params.k_neighbors;
  const auto nbs = index.k_nearest(cloud.points[i], k);
  std::vector<Vec3> pts(k);
  for (std::size_t j = 0; j < k; ++j) pts[j] = cloud.points[nbs[j].index];

  enum class Kind { None, Sphere, Plane };
  Kind best_kind = Kind::None;
  detail::SphereModel best_sphere{Vec3::Zero(), 0.0};
  Vec3 best_plane_point = Vec3::Zero(), best_plane_normal = Vec3::UnitZ();
  std::size_t best_score = 0;

  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  for (std::uint32_t t = 0; t < params.mlesac_iterations; ++t) {
    // 4 distinct indices via a partial Fisher-Yates driven by one Philox block
    const rng::Counter w = rng::block(params.rng_seed, i, t, rng::kMlesacStream);
    std::array<std::size_t, 4> draw{};
    std::array<std::size_t, 4> sample{};
    for (std::size_t j = 0; j < 4; ++j) {
      draw[j] = j + w[j] % (k - j);
      std::swap(perm[j], perm[draw[j]]);
      sample[j] = perm[j];
    }
    for (std::size_t j = 4; j-- > 0;) std::swap(perm[j], perm[draw[j]]);  // restore

    const Vec3 p0 = pts[sample[0]];
    Eigen::Matrix3d a;
    Eigen::Vector3d b;
    double scale = 0.0;
    for (std::size_t j = 1; j < 4; ++j) {
      const Vec3 row = 2.0 * (pts[sample[j]] - p0);
      a.row(Eigen::Index(j - 1)) = row;
      b(Eigen::Index(j - 1)) = pts[sample[j]].squaredNorm() - p0.squaredNorm();
      scale = std::max(scale, row.norm());
    }

    Kind kind;
    detail::SphereModel sphere{Vec3::Zero(), 0.0};
    Vec3 plane_point = Vec3::Zero(), plane_normal = Vec3::UnitZ();
    if (std::abs(a.determinant()) <= 1e-10 * scale * scale * scale) {
      // coplanar sample: treat as the infinite-radius sphere
      const auto sc = detail::scatter_of(4, [&](std::size_t j) { return pts[sample[j]]; });
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sc.matrix);
      if (std::sqrt(std::max(es.eigenvalues()(1), 0.0) / 4.0) <= 1e-9) continue;  // collinear: resample
      kind = Kind::Plane;
      plane_point = sc.mean;
      plane_normal = es.eigenvectors().col(0);
    } else {
      const Vec3 c = a.partialPivLu().solve(b);
      kind = Kind::Sphere;
      sphere = {c, (p0 - c).norm()};
    }

    std::size_t score = 0;
    for (const Vec3& p : pts) {
      const double dist = kind == Kind::Sphere
                              ? std::abs((p - sphere.center).norm() - sphere.radius)
                              : std::abs((p - plane_point).dot(plane_normal));
      if (dist <= params.inlier_threshold_mm) ++score;
    }
    if (score > best_score) {
      best_score = score;
      best_kind = kind;
      best_sphere = sphere;
      best_plane_point = plane_point;
      best_plane_normal = plane_normal;
    }
  }

  if (best_kind == Kind::None || double(best_score) < params.min_inlier_fraction * double(k))
    throw Error("no consensus sphere at point " + std::to_string(i));

  if (best_kind == Kind::Plane) return {params.r_max_mm, true};

  std::vector<Vec3> inliers;
  inliers.reserve(best_score);
  for (const Vec3& p : pts) {
    if (std::abs((p - best_sphere.center).norm() - best_sphere.radius) <=
        params.inlier_threshold_mm)
      inliers.push_back(p);
  }
  detail::SphereModel refined = best_sphere;
  if (inliers.size() >= 4) refined = detail::refine_sphere(inliers, best_sphere, params.r_max_mm);
  double radius = std::abs(refined.radius);
  if (!std::isfinite(radius) || radius <= 0.0) radius = std::abs(best_sphere.radius);
  if (radius >= params.r_max_mm) return {params.r_max_mm, true};
  return {radius, false};
}

/// Estimate the full per-point frame list: plane-fit normals and tangents,
/// outward orientation, then robust curvature radii. Deterministic for a
/// given `params.rng_seed` regardless of `workers`.
inline std::vector<LocalSurfaceFrame> estimate_all_frames(const PointCloud& cloud,
                                                          const SurfaceFitParams& params,
                                                          std::size_t workers = 1) {
  cloud.validate();
  params.validate();
  if (params.k_neighbors > cloud.size()) throw Error("k_neighbors exceeds cloud size");
  const std::size_t n = cloud.size();
  const NeighborIndex index(cloud);

  std::vector<LocalSurfaceFrame> frames(n);
  std::vector<std::string> errors(n);
  detail::parallel_for(n, workers, [&](std::size_t i) {
    try {
      const PlaneFrame pf = fit_plane_frame(cloud, index, i, params);
      frames[i].normal = pf.normal;
      frames[i].tangent1 = pf.tangent1;
      frames[i].tangent2 = pf.tangent2;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    if (!errors[i].empty()) throw Error(errors[i]);

  std::vector<Vec3> normals(n);
  for (std::size_t i = 0; i < n; ++i) normals[i] = frames[i].normal;
  normals = orient_normals(cloud, index, std::move(normals), params.k_neighbors);
  for (std::size_t i = 0; i < n; ++i) {
    frames[i].normal = normals[i];
    frames[i].tangent2 = frames[i].normal.cross(frames[i].tangent1);
  }

  detail::parallel_for(n, workers, [&](std::size_t i) {
    try {
      const auto [radius, flag] = fit_local_radius(cloud, index, i, params);
      frames[i].radius_mm = radius;
      frames[i].low_curvature_flag = flag;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    if (!errors[i].empty()) throw Error(errors[i]);

  return frames;
}

}  // namespace wallstrain
