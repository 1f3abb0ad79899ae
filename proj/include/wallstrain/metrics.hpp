// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "wallstrain/strain.hpp"

namespace wallstrain {

/// Denominator used to normalize the identity-fit RMSE. Range of the
/// ground-truth strain is the default convention.
enum class NrmseDenominator { kRange, kMean, kStdDev };

/// Agreement between a perturbed-geometry strain field and the ground truth.
struct AgreementReport {
  double r_squared = 0.0;  // may be negative
  double nrmse = 0.0;
  double peak = 0.0;
  double p99 = 0.0;
  std::size_t n_points = 0;
  bool satisfactory = false;
};

/// Satisfactory agreement: both thresholds are strict.
inline bool satisfies_agreement(double r_squared, double nrmse) {
  return r_squared > 0.8 && nrmse < 0.05;
}

/// R^2 and NRMSE of the identity-line fit y = x, where x is ground truth.
///   R^2   = 1 - sum (y_i - x_i)^2 / sum (x_i - mean x)^2
///   NRMSE = sqrt(sum (y_i - x_i)^2 / n) / denom(x)
inline std::pair<double, double> identity_fit(std::span<const double> x,
                                              std::span<const double> y,
                                              NrmseDenominator denom = NrmseDenominator::kRange) {
  if (x.size() != y.size()) throw Error("identity_fit length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw Error("identity_fit needs at least 2 points");

  double mean = 0.0;
  for (const double v : x) mean += v;
  mean /= double(n);

  double ss_res = 0.0, ss_tot = 0.0;
  double lo = x[0], hi = x[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - x[i];
    ss_res += d * d;
    const double c = x[i] - mean;
    ss_tot += c * c;
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  if (ss_tot == 0.0) throw Error("ground-truth strain is constant");

  double denominator = 0.0;
  switch (denom) {
    case NrmseDenominator::kRange:
      denominator = hi - lo;
      break;
    case NrmseDenominator::kMean:
      denominator = std::abs(mean);
      break;
    case NrmseDenominator::kStdDev:
      denominator = std::sqrt(ss_tot / double(n));
      break;
  }
  if (denominator == 0.0) throw Error("NRMSE denominator is zero");

  const double r_squared = 1.0 - ss_res / ss_tot;
  const double nrmse = std::sqrt(ss_res / double(n)) / denominator;
  return {r_squared, nrmse};
}

/// Linear order-statistic interpolation at fraction q in (0, 1):
/// h = q (n - 1); result interpolates the two bracketing sorted values.
inline double percentile_of(std::vector<double> values, double q) {
  if (!(q > 0.0 && q < 1.0)) throw Error("percentile fraction must be in (0, 1)");
  if (values.size() < 2) throw Error("percentile needs at least 2 values");
  std::sort(values.begin(), values.end());
  const double h = q * double(values.size() - 1);
  const std::size_t lo = std::size_t(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - double(lo)) * (values[lo + 1] - values[lo]);
}

/// Maximum strain over masked points.
inline double peak(const StrainField& strain) {
  bool any = false;
  double best = 0.0;
  for (std::size_t i = 0; i < strain.size(); ++i) {
    if (!strain.mask[i]) continue;
    if (!any || strain.values[i] > best) best = strain.values[i];
    any = true;
  }
  if (!any) throw Error("peak of empty strain mask");
  return best;
}

inline double percentile(const StrainField& strain, double q) {
  return percentile_of(strain.masked_values(), q);
}

/// Identity-line fit over the jointly masked pairs, plus peak and 99th
/// percentile of the perturbed field. `gt` must be the ground truth.
inline AgreementReport build_report(const StrainField& gt, const StrainField& pert,
                                    NrmseDenominator denom = NrmseDenominator::kRange) {
  if (gt.size() != pert.size()) throw Error("strain field length mismatch");
  if (gt.mask != pert.mask) throw Error("strain field mask mismatch");
  const std::vector<double> x = gt.masked_values();
  const std::vector<double> y = pert.masked_values();
  const auto [r_squared, nrmse] = identity_fit(x, y, denom);
  AgreementReport report;
  report.r_squared = r_squared;
  report.nrmse = nrmse;
  report.peak = peak(pert);
  report.p99 = percentile_of(y, 0.99);
  report.n_points = x.size();
  report.satisfactory = satisfies_agreement(r_squared, nrmse);
  return report;
}

}  // namespace wallstrain
