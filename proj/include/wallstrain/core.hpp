// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace wallstrain {

/// 3D position / vector in mm, patient (R, A, S) axes.
using Vec3 = Eigen::Vector3d;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when points that must be interpolated fall outside the grid.
/// Carries every offending point index so callers can report, not guess.
struct GridBoundsError : Error {
  GridBoundsError(const std::string& msg, std::vector<std::size_t> idx)
      : Error(msg), indices(std::move(idx)) {}
  std::vector<std::size_t> indices;
};

namespace detail {

/// Static-partition parallel loop over [0, n). `fn(i)` must be pure per
/// element and must not throw; callers that need error propagation record
/// per-index failures and rethrow the lowest index afterwards so results
/// do not depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<std::size_t>(workers, std::max<std::size_t>(n, 1));
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

}  // namespace wallstrain
