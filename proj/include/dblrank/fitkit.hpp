// Power-law fitting of percentile series by linear regression, damped
// Gauss-Newton, and maximum likelihood, with chi-square goodness of fit.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dblrank/core.hpp"
#include "dblrank/detail/gamma.hpp"
#include "dblrank/distkit.hpp"

namespace dblrank {

namespace detail {

inline bool percentile_matches(double x, double candidate) {
  return std::abs(x - candidate) <= 1e-9 * std::max(1.0, std::abs(x));
}

inline bool is_excluded(double x, const std::vector<double>& exclude) {
  for (double e : exclude)
    if (percentile_matches(x, e)) return true;
  return false;
}

// Non-excluded (x, n) pairs in ascending x, validated for fitting.
inline std::vector<std::pair<double, double>> fit_points(
    const PercentileSeries& series, const std::vector<double>& exclude,
    bool require_positive = true) {
  std::vector<std::pair<double, double>> points;
  for (const auto& p : series.points())
    if (!is_excluded(p.x, exclude)) points.emplace_back(p.x, p.n_local);
  if (points.size() < 3)
    fail(ErrorKind::TooFewPoints, "fit needs at least 3 points, got " +
                                      std::to_string(points.size()));
  if (require_positive)
    for (const auto& [x, n] : points)
      if (!(n > 0.0))
        fail(ErrorKind::ZeroCount,
             "cannot fit a zero count at percentile " + std::to_string(x));
  return points;
}

inline double pearson_chi2(const std::vector<std::pair<double, double>>& points, double a,
                           double alpha) {
  double chi2 = 0.0;
  for (const auto& [x, n] : points) {
    double expected = a * std::pow(x, alpha);
    double r = n - expected;
    chi2 += r * r / expected;
  }
  return chi2;
}

}  // namespace detail

struct FitScore {
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

// Pearson chi-square of the fit over its own fitted points, with
// dof = #points - 2 and the p-value from the upper incomplete gamma.
inline FitScore score_fit(const PercentileSeries& series, const PowerLawFit& fit) {
  const auto& points = fit.points_used();
  for (const auto& [x, n] : points) {
    bool found = false;
    for (const auto& p : series.points())
      if (detail::percentile_matches(p.x, x)) {
        found = true;
        break;
      }
    if (!found)
      fail(ErrorKind::BadGrid,
           "fit point x=" + std::to_string(x) + " is not part of the series");
  }
  int dof = static_cast<int>(points.size()) - 2;
  if (dof < 1)
    fail(ErrorKind::NonPositiveDof, "goodness of fit needs more than 2 points");
  FitScore score;
  score.chi2 = detail::pearson_chi2(points, fit.a(), fit.alpha());
  score.dof = dof;
  score.p_value = detail::chi2_pvalue(score.chi2, dof);
  return score;
}

namespace detail {

inline PowerLawFit finish_fit(double a, double alpha, FitMethod method,
                              std::vector<std::pair<double, double>> points) {
  double chi2 = pearson_chi2(points, a, alpha);
  int dof = static_cast<int>(points.size()) - 2;
  double p = chi2_pvalue(chi2, dof);
  return PowerLawFit(a, alpha, method, std::move(points), chi2, dof, p);
}

}  // namespace detail

// Ordinary least squares of ln(n) on ln(x): A = exp(intercept), alpha = slope.
inline PowerLawFit fit_lr(const PercentileSeries& series,
                          const std::vector<double>& exclude = {100.0}) {
  auto points = detail::fit_points(series, exclude);
  auto ols = detail::ols_loglog(points);
  return detail::finish_fit(std::exp(ols.intercept), ols.slope, FitMethod::LR,
                            std::move(points));
}

// Minimizes sum (n - A x^alpha)^2 in linear space by damped Gauss-Newton,
// initialized from the log-space regression. Lambda grows tenfold on a
// rejected step and shrinks tenfold on an accepted one.
inline PowerLawFit fit_lm(const PercentileSeries& series,
                          const std::vector<double>& exclude = {100.0},
                          int max_iterations = 200) {
  auto points = detail::fit_points(series, exclude);
  auto ols = detail::ols_loglog(points);
  double a = std::exp(ols.intercept);
  double alpha = ols.slope;

  auto sse = [&points](double a_, double alpha_) {
    double s = 0.0;
    for (const auto& [x, n] : points) {
      double r = n - a_ * std::pow(x, alpha_);
      s += r * r;
    }
    return s;
  };

  double lambda = 1e-3;
  double current = sse(a, alpha);
  bool converged = false;
  for (int iter = 0; iter < max_iterations && !converged; ++iter) {
    // J columns: d/dA = x^alpha, d/dalpha = A x^alpha ln x
    double jaa = 0.0, jab = 0.0, jbb = 0.0, ga = 0.0, gb = 0.0;
    for (const auto& [x, n] : points) {
      double f = a * std::pow(x, alpha);
      double da = f / a;
      double db = f * std::log(x);
      double r = n - f;
      jaa += da * da;
      jab += da * db;
      jbb += db * db;
      ga += da * r;
      gb += db * r;
    }
    bool stepped = false;
    while (lambda < 1e15) {
      double m00 = jaa * (1.0 + lambda);
      double m11 = jbb * (1.0 + lambda);
      double det = m00 * m11 - jab * jab;
      if (std::abs(det) > 1e-300) {
        double step_a = (m11 * ga - jab * gb) / det;
        double step_alpha = (m00 * gb - jab * ga) / det;
        double trial_a = a + step_a;
        double trial_alpha = alpha + step_alpha;
        if (trial_a > 0.0) {
          double trial = sse(trial_a, trial_alpha);
          if (trial <= current) {
            double rel = std::max(std::abs(step_a) / std::max(std::abs(trial_a), 1e-300),
                                  std::abs(step_alpha) / std::max(std::abs(trial_alpha), 1e-300));
            a = trial_a;
            alpha = trial_alpha;
            current = trial;
            lambda = std::max(lambda / 10.0, 1e-300);
            stepped = true;
            if (rel < 1e-10) converged = true;
            break;
          }
        }
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // No acceptable step at any damping: we are at a stationary point iff
      // the gradient has vanished relative to the data scale.
      double gnorm = std::sqrt(ga * ga + gb * gb);
      if (gnorm <= 1e-8 * (1.0 + current)) {
        converged = true;
      } else {
        fail(ErrorKind::NoConvergence, "damping exhausted away from a minimum");
      }
    }
  }
  if (!converged)
    fail(ErrorKind::NoConvergence,
         "no convergence within " + std::to_string(max_iterations) + " iterations");
  return detail::finish_fit(a, alpha, FitMethod::LM, std::move(points));
}

namespace detail {

// Log-likelihood of grouped bin counts under P(X <= x) = (x/x_max)^alpha.
// Bins are (x_{j-1}, x_j] with x_0 = 0.
class GroupedLikelihood {
 public:
  GroupedLikelihood(const std::vector<std::pair<double, double>>& points) {
    x_max_ = points.back().first;
    double prev_x = 0.0;
    double prev_n = 0.0;
    for (const auto& [x, n] : points) {
      double b = n - prev_n;
      if (b < -1e-9) fail(ErrorKind::NonMonotone, "bin count negative");
      bins_.push_back({prev_x / x_max_, x / x_max_, std::max(b, 0.0)});
      prev_x = x;
      prev_n = n;
    }
  }

  double x_max() const noexcept { return x_max_; }

  bool degenerate() const {
    // all mass in the last bin leaves the exponent unbounded
    double below = 0.0;
    for (std::size_t j = 0; j + 1 < bins_.size(); ++j) below += bins_[j].weight;
    return below <= 0.0;
  }

  double operator()(double alpha) const {
    double ll = 0.0;
    for (const auto& bin : bins_) {
      if (bin.weight <= 0.0) continue;
      double p_hi = std::pow(bin.hi, alpha);
      double p_lo = bin.lo > 0.0 ? std::pow(bin.lo, alpha) : 0.0;
      double p = p_hi - p_lo;
      if (p <= 0.0) return -1e300;
      ll += bin.weight * std::log(p);
    }
    return ll;
  }

 private:
  struct Bin {
    double lo;
    double hi;
    double weight;
  };
  double x_max_ = 0.0;
  std::vector<Bin> bins_;
};

// One-dimensional maximizer: coarse scan then golden-section refinement.
template <typename F>
double maximize_scalar(const F& f, double lo, double hi, int coarse = 4096) {
  double best_x = lo;
  double best_f = f(lo);
  for (int i = 1; i <= coarse; ++i) {
    double x = lo + (hi - lo) * static_cast<double>(i) / coarse;
    double v = f(x);
    if (v > best_f) {
      best_f = v;
      best_x = x;
    }
  }
  double step = (hi - lo) / coarse;
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > 1e-12 * std::max(1.0, std::abs(b))) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return (a + b) / 2.0;
}

}  // namespace detail

// Maximum likelihood on grouped data: the observed bin counts are modeled as
// multinomial draws from the power-function law P(X <= x) = (x/x_max)^alpha,
// maximized by one-dimensional search. A is set so that A x^alpha passes
// through the total count at x_max.
inline PowerLawFit fit_ml(const PercentileSeries& series,
                          const std::vector<double>& exclude = {100.0}) {
  // zero counts are legitimate grouped observations (empty lower bins)
  auto points = detail::fit_points(series, exclude, /*require_positive=*/false);
  detail::GroupedLikelihood likelihood(points);
  if (likelihood.degenerate())
    fail(ErrorKind::Degenerate, "all papers sit in the top grid bin; exponent unbounded");
  double alpha = detail::maximize_scalar(likelihood, 1e-4, 64.0);
  double total = points.back().second;
  double a = total * std::pow(likelihood.x_max(), -alpha);
  return detail::finish_fit(a, alpha, FitMethod::ML, std::move(points));
}

// Closed-form MLE from per-paper world percentiles under the same law:
// alpha = n / sum ln(x_max / x_i).
inline double fit_ml_percentiles(const std::vector<double>& percentiles, double x_max) {
  if (percentiles.empty()) fail(ErrorKind::TooFewPoints, "no percentile observations");
  double denom = 0.0;
  for (double x : percentiles) {
    if (!(x > 0.0) || x > x_max + 1e-12)
      fail(ErrorKind::BadPercentile, "observation outside (0, x_max]");
    denom += std::log(x_max / x);
  }
  if (denom <= 0.0)
    fail(ErrorKind::Degenerate, "all observations at x_max; exponent unbounded");
  return static_cast<double>(percentiles.size()) / denom;
}

// Drops points whose count falls below min_count; the largest-x point always
// survives so downstream code keeps its normalization anchor.
inline PercentileSeries clean_series(const PercentileSeries& series, std::int64_t min_count = 10) {
  if (min_count < 0) fail(ErrorKind::BadSpec, "min_count must be >= 0");
  std::vector<PercentilePoint> kept;
  const auto& points = series.points();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i + 1 == points.size() || points[i].n_local >= static_cast<double>(min_count))
      kept.push_back(points[i]);
  }
  return PercentileSeries(series.world_label(), series.local_label(), series.world_size(),
                          series.local_size(), std::move(kept), series.counts_synthetic());
}

}  // namespace dblrank
