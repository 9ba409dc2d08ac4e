#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dblrank/detail/gamma.hpp"
#include "dblrank/doublerank.hpp"
#include "dblrank/fitkit.hpp"

using namespace dblrank;

namespace {

PercentileSeries exact_series(double a, double alpha, const std::vector<double>& grid,
                              const std::string& label = "exact") {
  std::vector<PercentilePoint> points;
  double n_max = a * std::pow(grid.back(), alpha);
  auto local_size = static_cast<std::int64_t>(std::ceil(n_max)) + 1;
  for (double x : grid) {
    double n = a * std::pow(x, alpha);
    points.push_back({x, n, n / static_cast<double>(local_size) * 100.0});
  }
  return PercentileSeries("w", label, std::nullopt, local_size, std::move(points), true);
}

const std::vector<double> kFitGrid{1, 2, 4, 7, 12, 20, 35, 60};

PercentileSeries usa_series() {
  return series_from_shares(
      {{1, 1.94}, {5, 8.33}, {10, 15.40}, {25, 33.68}, {50, 59.29}, {100, 100.0}},
      std::nullopt, "USA");
}

}  // namespace

TEST_CASE("log-space regression reproduces the published national fit") {
  auto fit = fit_lr(usa_series(), {100.0});
  CHECK(fit.a() == Catch::Approx(1.99).margin(0.005));
  CHECK(fit.alpha() == Catch::Approx(0.876).margin(0.002));
  CHECK(fit.predict(100.0) == Catch::Approx(112.48).margin(0.05));
  REQUIRE(fit.points_used().size() == 5);  // 100 excluded
  REQUIRE(fit.p_value().has_value());
  CHECK(*fit.p_value() > 0.9);
  CHECK(*fit.dof() == 3);
}

TEST_CASE("regression recovers exact power-law series") {
  auto series = exact_series(7.0, 1.3, kFitGrid);
  auto fit = fit_lr(series, {});
  CHECK(fit.a() == Catch::Approx(7.0).epsilon(1e-12));
  CHECK(fit.alpha() == Catch::Approx(1.3).epsilon(1e-12));
  CHECK(*fit.chi2() == Catch::Approx(0.0).margin(1e-18));
  CHECK(*fit.p_value() == 1.0);
}

TEST_CASE("regression preconditions") {
  auto tiny = series_from_shares({{1, 1}, {10, 10}, {100, 100}}, std::nullopt, "g");
  CHECK_THROWS_AS(fit_lr(tiny, {100.0}), Error);
  try {
    fit_lr(tiny, {100.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooFewPoints);
  }

  PercentileSeries zero("w", "z", std::nullopt, 100,
                        {{1, 0, 0}, {10, 10, 10}, {50, 50, 50}, {100, 100, 100}}, true);
  try {
    fit_lr(zero, {100.0});
    FAIL("expected ZeroCount");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroCount);
  }
}

TEST_CASE("scaling every count by c shifts A and leaves alpha untouched") {
  auto base = exact_series(3.0, 0.8, kFitGrid);
  auto fit_base = fit_lr(base, {});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> noise(0.9, 1.1);
  // also on noisy data: multiply all n by 5
  std::vector<PercentilePoint> noisy, scaled;
  for (const auto& p : base.points()) {
    double n = p.n_local * noise(rng);
    noisy.push_back({p.x, n, n});
    scaled.push_back({p.x, 5.0 * n, 5.0 * n});
  }
  PercentileSeries s1("w", "n", std::nullopt, 10000, noisy, true);
  PercentileSeries s2("w", "s", std::nullopt, 10000, scaled, true);
  auto f1 = fit_lr(s1, {});
  auto f2 = fit_lr(s2, {});
  CHECK(f2.alpha() == Catch::Approx(f1.alpha()).epsilon(1e-12));
  CHECK(f2.a() == Catch::Approx(5.0 * f1.a()).epsilon(1e-12));
  CHECK(fit_base.alpha() == Catch::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("damped least squares recovers exact series and stays order-independent") {
  auto series = exact_series(7.0, 1.3, kFitGrid);
  auto fit = fit_lm(series, {});
  CHECK(fit.a() == Catch::Approx(7.0).epsilon(1e-9));
  CHECK(fit.alpha() == Catch::Approx(1.3).epsilon(1e-9));

  // identical result regardless of the order points arrive in
  std::vector<std::pair<double, double>> ascending, descending;
  for (const auto& p : usa_series().points()) ascending.emplace_back(p.x, p.share);
  descending.assign(ascending.rbegin(), ascending.rend());
  auto s_up = series_from_shares(ascending, std::nullopt, "up");
  auto s_down = series_from_shares(descending, std::nullopt, "down");
  auto f_up = fit_lm(s_up, {100.0});
  auto f_down = fit_lm(s_down, {100.0});
  CHECK(f_up.a() == f_down.a());
  CHECK(f_up.alpha() == f_down.alpha());
}

TEST_CASE("an inflated top point drags the linear-space fit harder") {
  // exact law with the highest-percentile count inflated by 25%
  const double truth_a = 2.0;
  const double truth_alpha = 0.9;
  std::vector<PercentilePoint> points;
  for (double x : kFitGrid) {
    double n = truth_a * std::pow(x, truth_alpha);
    if (x == 60.0) n *= 1.25;
    points.push_back({x, n, n});
  }
  PercentileSeries series("w", "pert", std::nullopt, 1000, std::move(points), true);
  auto lr = fit_lr(series, {});
  auto lm = fit_lm(series, {});
  CHECK(std::abs(lm.alpha() - lr.alpha()) > 1e-3);
  double truth_at = truth_a * std::pow(0.01, truth_alpha);
  double lr_err = std::abs(lr.predict(0.01) - truth_at);
  double lm_err = std::abs(lm.predict(0.01) - truth_at);
  INFO("lr " << lr_err << " lm " << lm_err);
  CHECK(lr_err < lm_err);
}

TEST_CASE("grouped likelihood fit recovers exact data") {
  auto series = exact_series(7.0, 1.3, kFitGrid);
  auto fit = fit_ml(series, {});
  CHECK(fit.alpha() == Catch::Approx(1.3).epsilon(1e-6));
  CHECK(fit.a() == Catch::Approx(7.0).epsilon(1e-6));

  auto unit = exact_series(5.0, 1.0, kFitGrid);
  auto fit1 = fit_ml(unit, {});
  CHECK(fit1.alpha() == Catch::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("closed-form percentile MLE matches its sampling oracle") {
  // invert-CDF draws from P(X <= x) = (x/100)^2
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> draws(100000);
  for (auto& x : draws) x = 100.0 * std::sqrt(unit(rng));
  double alpha = fit_ml_percentiles(draws, 100.0);
  CHECK(alpha == Catch::Approx(2.0).margin(0.02));
}

TEST_CASE("grouped and per-paper likelihood agree on a fine grid") {
  std::mt19937_64 rng(777);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double truth = 1.3;
  std::vector<double> draws(20000);
  for (auto& x : draws) x = 100.0 * std::pow(unit(rng), 1.0 / truth);
  double per_paper = fit_ml_percentiles(draws, 100.0);

  std::vector<double> grid;
  for (int i = 1; i <= 60; ++i) grid.push_back(100.0 * i / 60.0);
  std::sort(draws.begin(), draws.end());
  std::vector<PercentilePoint> points;
  for (double x : grid) {
    auto it = std::upper_bound(draws.begin(), draws.end(), x);
    auto n = static_cast<double>(std::distance(draws.begin(), it));
    points.push_back({x, n, n / 200.0});
  }
  PercentileSeries series("w", "ml", std::nullopt, 20000, std::move(points));
  auto grouped = fit_ml(series, {});
  CHECK(std::abs(grouped.alpha() - per_paper) < 0.01);
}

TEST_CASE("likelihood fit flags an unbounded exponent") {
  PercentileSeries top_heavy("w", "t", std::nullopt, 100,
                             {{1, 0, 0}, {10, 0, 0}, {50, 0, 0}, {100, 100, 100}}, true);
  try {
    fit_ml(top_heavy, {});
    FAIL("expected Degenerate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
  CHECK_THROWS_AS(fit_ml_percentiles({100.0, 100.0, 100.0}, 100.0), Error);
}

TEST_CASE("chi-square scoring") {
  SECTION("a perfect fit scores p = 1") {
    auto series = exact_series(7.0, 1.3, kFitGrid);
    auto fit = fit_lr(series, {});
    auto score = score_fit(series, fit);
    CHECK(score.chi2 == Catch::Approx(0.0).margin(1e-18));
    CHECK(score.p_value == 1.0);
    CHECK(score.dof == static_cast<int>(kFitGrid.size()) - 2);
  }

  SECTION("the canonical 5% quantile at one degree of freedom") {
    CHECK(detail::chi2_pvalue(3.841, 1) == Catch::Approx(0.050).margin(0.001));
    CHECK(detail::chi2_pvalue(0.0, 1) == 1.0);
    CHECK(detail::chi2_pvalue(0.0, 7) == 1.0);
  }

  SECTION("p decreases monotonically in chi2 at fixed dof") {
    for (int dof : {1, 3, 10}) {
      double prev = 1.1;
      for (double chi2 = 0.0; chi2 <= 40.0; chi2 += 0.5) {
        double p = detail::chi2_pvalue(chi2, dof);
        CHECK(p < prev + 1e-15);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
      }
    }
  }

  SECTION("closed forms at even degrees of freedom") {
    // dof=2: p = exp(-x/2); dof=4: p = exp(-x/2)(1 + x/2)
    for (double x : {0.5, 1.0, 3.0, 8.0}) {
      CHECK(detail::chi2_pvalue(x, 2) == Catch::Approx(std::exp(-x / 2)).epsilon(1e-12));
      CHECK(detail::chi2_pvalue(x, 4) ==
            Catch::Approx(std::exp(-x / 2) * (1 + x / 2)).epsilon(1e-12));
    }
  }

  SECTION("too few points leave no residual freedom") {
    auto series = exact_series(7.0, 1.3, kFitGrid);
    PowerLawFit two_points(7.0, 1.3, FitMethod::LR, {{1.0, 7.0}, {2.0, 17.2}});
    CHECK_THROWS_AS(score_fit(series, two_points), Error);
  }
}

TEST_CASE("excluding the top percentile rescues the national fit") {
  auto series = usa_series();
  auto excl = fit_lr(series, {100.0});
  REQUIRE(excl.p_value().has_value());
  CHECK(*excl.p_value() > 0.9);
  // the residual at the excluded percentile stays visible as a diagnostic
  CHECK(series.points().back().n_local - excl.predict(100.0) ==
        Catch::Approx(-12.48).margin(0.05));
}

TEST_CASE("clean_series drops thin points but never the anchor") {
  PercentileSeries series("w", "c", std::nullopt, 80,
                          {{1, 3, 0}, {10, 12, 0}, {100, 80, 100}}, true);
  auto cleaned = clean_series(series, 10);
  REQUIRE(cleaned.points().size() == 2);
  CHECK(cleaned.points()[0].x == 10.0);
  CHECK(cleaned.points()[1].x == 100.0);

  auto untouched = clean_series(series, 0);
  CHECK(untouched.points().size() == 3);

  PercentileSeries thin("w", "t", std::nullopt, 80,
                        {{1, 1, 0}, {10, 2, 0}, {50, 5, 0}, {100, 80, 100}}, true);
  auto only_anchor = clean_series(thin, 10);
  REQUIRE(only_anchor.points().size() == 1);
  CHECK(only_anchor.points()[0].x == 100.0);
  CHECK_THROWS_AS(fit_lr(only_anchor, {}), Error);
}
