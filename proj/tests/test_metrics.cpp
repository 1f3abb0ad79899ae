// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "wallstrain/metrics.hpp"

using namespace wallstrain;
using Catch::Matchers::WithinAbs;

namespace {

StrainField make_strain(std::vector<double> values, std::vector<std::uint8_t> mask = {}) {
  StrainField s;
  if (mask.empty()) mask.assign(values.size(), 1);
  s.values = std::move(values);
  s.mask = std::move(mask);
  return s;
}

}  // namespace

TEST_CASE("identity fit of y = x", "[metrics]") {
  const std::vector<double> x{0.011, 0.034, 0.002, 0.077, -0.01};
  const auto [r2, nrmse] = identity_fit(x, x);
  CHECK(r2 == 1.0);
  CHECK(nrmse == 0.0);
}

TEST_CASE("identity fit worked example", "[metrics]") {
  // ss_res = 7.5e-5, ss_tot = 2e-4, range = 0.02
  const std::vector<double> x{0.01, 0.02, 0.03};
  const std::vector<double> y{0.015, 0.025, 0.035};
  const auto [r2, nrmse] = identity_fit(x, y);
  CHECK_THAT(r2, WithinAbs(0.625, 1e-12));
  CHECK_THAT(nrmse, WithinAbs(0.25, 1e-12));
}

TEST_CASE("constant prediction at the mean gives R^2 = 0", "[metrics]") {
  const std::vector<double> x{0.01, 0.02, 0.03, 0.06};
  const double mean = 0.03;
  const std::vector<double> y(x.size(), mean);
  const auto [r2, nrmse] = identity_fit(x, y);
  CHECK_THAT(r2, WithinAbs(0.0, 1e-12));
  CHECK(nrmse > 0.0);
}

TEST_CASE("identity fit error paths", "[metrics]") {
  CHECK_THROWS_WITH(identity_fit(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 2.0}),
                    "ground-truth strain is constant");
  CHECK_THROWS_WITH(identity_fit(std::vector<double>{1.0}, std::vector<double>{1.0}),
                    "identity_fit needs at least 2 points");
  CHECK_THROWS_WITH(identity_fit(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}),
                    "identity_fit length mismatch");
}

TEST_CASE("NRMSE shift invariance and R^2 affine invariance", "[metrics]") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> dist(0.02, 0.01);
  std::vector<double> x(50), y(50);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = dist(gen);
    y[i] = x[i] + 0.3 * dist(gen);
  }
  const auto [r2, nrmse] = identity_fit(x, y);

  SECTION("common shift leaves both unchanged") {
    const double c = 0.875;
    std::vector<double> xs = x, ys = y;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xs[i] += c;
      ys[i] += c;
    }
    const auto [r2_s, nrmse_s] = identity_fit(xs, ys);
    CHECK_THAT(r2_s, WithinAbs(r2, 1e-9));
    CHECK_THAT(nrmse_s, WithinAbs(nrmse, 1e-9));
  }

  SECTION("common affine map leaves R^2 unchanged") {
    const double a = -2.25, b = 0.4;
    std::vector<double> xs = x, ys = y;
    for (std::size_t i = 0; i < x.size(); ++i) {
      xs[i] = a * x[i] + b;
      ys[i] = a * y[i] + b;
    }
    const auto [r2_a, nrmse_a] = identity_fit(xs, ys);
    CHECK_THAT(r2_a, WithinAbs(r2, 1e-9));
    CHECK_THAT(nrmse_a, WithinAbs(nrmse, 1e-9));  // range also scales by |a|
  }
}

TEST_CASE("NRMSE denominator options", "[metrics]") {
  const std::vector<double> x{0.01, 0.02, 0.03};
  const std::vector<double> y{0.015, 0.025, 0.035};
  const double rmse = 0.005;
  const auto [r2m, nrmse_mean] = identity_fit(x, y, NrmseDenominator::kMean);
  CHECK_THAT(nrmse_mean, WithinAbs(rmse / 0.02, 1e-12));
  const auto [r2s, nrmse_sd] = identity_fit(x, y, NrmseDenominator::kStdDev);
  CHECK_THAT(nrmse_sd, WithinAbs(rmse / std::sqrt(2e-4 / 3.0), 1e-12));
  CHECK(r2m == r2s);
}

TEST_CASE("percentile order-statistic interpolation", "[metrics]") {
  std::vector<double> v(100);
  for (std::size_t i = 0; i < 100; ++i) v[i] = double(i + 1);
  CHECK_THAT(percentile_of(v, 0.99), WithinAbs(99.01, 1e-9));
  CHECK_THAT(percentile_of({1.0, 2.0, 3.0}, 0.5), WithinAbs(2.0, 1e-15));
  CHECK(percentile_of(std::vector<double>(10, 3.25), 0.7) == 3.25);
  CHECK_THROWS_WITH(percentile_of(v, 0.0), "percentile fraction must be in (0, 1)");
  CHECK_THROWS_WITH(percentile_of(v, 1.0), "percentile fraction must be in (0, 1)");
  CHECK_THROWS(percentile_of(std::vector<double>{1.0}, 0.5));
}

TEST_CASE("percentile is monotone in q and bounded", "[metrics]") {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(200);
  for (double& x : v) x = dist(gen);
  const double lo = *std::min_element(v.begin(), v.end());
  const double hi = *std::max_element(v.begin(), v.end());
  double prev = lo;
  for (double q = 0.05; q < 1.0; q += 0.05) {
    const double p = percentile_of(v, q);
    CHECK(p >= prev);
    CHECK(p >= lo);
    CHECK(p <= hi);
    prev = p;
  }
}

TEST_CASE("peak respects the mask", "[metrics]") {
  CHECK(peak(make_strain({0.01, 0.05, 0.03})) == 0.05);
  CHECK(peak(make_strain({0.42}, {1})) == 0.42);
  // maximum sits at a masked-false point
  CHECK(peak(make_strain({0.01, 0.99, 0.03}, {1, 0, 1})) == 0.03);
  CHECK_THROWS_WITH(peak(make_strain({1.0, 2.0}, {0, 0})), "peak of empty strain mask");
}

TEST_CASE("report on identical fields", "[metrics]") {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> dist(0.02, 0.008);
  std::vector<double> values(500);
  for (double& v : values) v = dist(gen);
  const StrainField gt = make_strain(values);
  const AgreementReport report = build_report(gt, gt);
  CHECK(report.r_squared == 1.0);
  CHECK(report.nrmse == 0.0);
  CHECK(report.satisfactory);
  CHECK(report.n_points == 500);
  CHECK(report.peak == peak(gt));
  CHECK_THAT(report.p99, WithinAbs(percentile(gt, 0.99), 1e-15));
}

TEST_CASE("peak is fragile and p99 robust to one huge outlier", "[metrics]") {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> dist(0.02, 0.005);
  std::vector<double> values(2000);
  for (double& v : values) v = dist(gen);
  const StrainField gt = make_strain(values);
  const double old_p99 = percentile(gt, 0.99);

  StrainField pert = gt;
  const double outlier = 10.0 * old_p99;
  pert.values[137] = outlier;
  const AgreementReport report = build_report(gt, pert);
  CHECK(report.peak == outlier);

  // p99 moves by at most the gap between the neighboring order statistics
  std::vector<double> sorted = gt.values;
  std::sort(sorted.begin(), sorted.end());
  const double h = 0.99 * double(sorted.size() - 1);
  const std::size_t lo = std::size_t(h);
  const double bound = sorted[lo + 2] - sorted[lo];
  CHECK(std::abs(report.p99 - old_p99) <= bound);
  CHECK(std::abs(report.p99 - old_p99) < outlier - old_p99);
}

TEST_CASE("satisfactory thresholds are strict", "[metrics]") {
  CHECK(satisfies_agreement(0.81, 0.049));
  CHECK_FALSE(satisfies_agreement(0.8, 0.01));   // R^2 must exceed 0.8
  CHECK_FALSE(satisfies_agreement(0.9, 0.05));   // NRMSE must be below 0.05
  CHECK_FALSE(satisfies_agreement(0.8, 0.05));
  CHECK(satisfies_agreement(std::nextafter(0.8, 1.0), std::nextafter(0.05, 0.0)));
}

TEST_CASE("report rejects mismatched masks", "[metrics]") {
  const StrainField a = make_strain({1.0, 2.0, 3.0});
  StrainField b = a;
  b.mask[1] = 0;
  CHECK_THROWS_WITH(build_report(a, b), "strain field mask mismatch");
}
