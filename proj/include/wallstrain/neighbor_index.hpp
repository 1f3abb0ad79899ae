// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "wallstrain/point_cloud.hpp"

namespace wallstrain {

/// One k-nearest-neighbor query result.
struct Neighbor {
  std::size_t index;
  double distance_mm;
};

/// Exact k-nearest-neighbor index over a PointCloud snapshot.
///
/// A median-split kd-tree over a copy of the points. Queries are exact, never
/// approximate: results always equal an exhaustive distance-sorted scan, with
/// equal distances broken by the lower point index. The index is immutable
/// after construction and safe for concurrent read-only queries.
class NeighborIndex {
 public:
  explicit NeighborIndex(const PointCloud& cloud) : points_(cloud.points) {
    if (points_.empty()) throw Error("empty point cloud");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, points_.size());
  }

  std::size_t size() const { return points_.size(); }

  /// The k nearest points to `query`, sorted by nondecreasing distance,
  /// ties broken by lower point index.
  std::vector<Neighbor> k_nearest(const Vec3& query, std::size_t k) const {
    if (k == 0) throw Error("k must be at least 1");
    if (k > points_.size()) throw Error("k exceeds cloud size");
    Heap heap;
    search(root_, query, k, heap);
    std::vector<Neighbor> out(k);
    for (std::size_t j = k; j-- > 0;) {
      const Candidate& c = heap.top();
      out[j] = Neighbor{c.index, std::sqrt(c.dist2)};
      heap.pop();
    }
    return out;
  }

 private:
  static constexpr std::size_t kLeafSize = 16;
  static constexpr std::size_t kNone = std::size_t(-1);

  struct Node {
    std::size_t begin = 0, end = 0;     // leaf range in order_
    std::size_t left = kNone, right = kNone;
    int axis = -1;
    double split = 0.0;
    bool leaf() const { return axis < 0; }
  };

  struct Candidate {
    double dist2;
    std::size_t index;
    // max-heap on (dist2, index): top() is the current worst candidate
    bool operator<(const Candidate& o) const {
      return dist2 != o.dist2 ? dist2 < o.dist2 : index < o.index;
    }
  };
  using Heap = std::priority_queue<Candidate>;

  std::size_t build(std::size_t begin, std::size_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin > kLeafSize) {
      Vec3 lo = points_[order_[begin]], hi = lo;
      for (std::size_t i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
      }
      int axis = 0;
      (hi - lo).maxCoeff(&axis);
      if (hi[axis] > lo[axis]) {
        const std::size_t mid = begin + (end - begin) / 2;
        // total order (coordinate, index) keeps the partition deterministic
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](std::size_t a, std::size_t b) {
                           const double ca = points_[a][axis], cb = points_[b][axis];
                           return ca != cb ? ca < cb : a < b;
                         });
        node.axis = axis;
        node.split = points_[order_[mid]][axis];
        nodes_.push_back(node);
        const std::size_t self = nodes_.size() - 1;
        const std::size_t left = build(begin, mid);
        const std::size_t right = build(mid, end);
        nodes_[self].left = left;
        nodes_[self].right = right;
        return self;
      }
      // all points coincide on the widest axis: keep as one leaf
    }
    nodes_.push_back(node);
    return nodes_.size() - 1;
  }

  void search(std::size_t ni, const Vec3& query, std::size_t k, Heap& heap) const {
    const Node& node = nodes_[ni];
    if (node.leaf()) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const std::size_t idx = order_[i];
        const Candidate c{(points_[idx] - query).squaredNorm(), idx};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = query[node.axis] - node.split;
    const std::size_t near = diff < 0.0 ? node.left : node.right;
    const std::size_t far = diff < 0.0 ? node.right : node.left;
    search(near, query, k, heap);
    // visit the far side on exact ties as well, so index tie-breaking stays exact
    if (heap.size() < k || diff * diff <= heap.top().dist2) search(far, query, k, heap);
  }

  std::vector<Vec3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

}  // namespace wallstrain
