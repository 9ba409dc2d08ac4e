// Assessment indicators derived from the double-rank power law: P(x), N(x),
// the e_p index, and expected counts in top percentiles.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dblrank/core.hpp"

namespace dblrank {

namespace detail {

inline void require_percentile(double x) {
  if (!(x > 0.0) || x > 100.0)
    fail(ErrorKind::BadPercentile, "percentile must lie in (0, 100], got " + std::to_string(x));
}

}  // namespace detail

// Cumulative probability that one of the group's papers lies inside the world
// top-x percent: P(x) = (x/100)^alpha.
inline double prob_at(const PowerLawFit& fit, double x) {
  detail::require_percentile(x);
  if (!(fit.alpha() > 0.0))
    fail(ErrorKind::Degenerate, "probability needs a positive exponent");
  return std::pow(x / 100.0, fit.alpha());
}

// Expected number of the group's papers inside the world top-x percent:
// N(x) = N (x/100)^alpha.
inline double freq_at(const PowerLawFit& fit, double x, std::int64_t n_total) {
  if (n_total < 1) fail(ErrorKind::BadCounts, "n_total must be >= 1");
  return static_cast<double>(n_total) * prob_at(fit, x);
}

inline double ep_from_alpha(double alpha) { return std::pow(10.0, -alpha); }

struct ClosedFormFit {
  double e_p = 0.0;
  double a = 0.0;
  double alpha = 0.0;
};

// Two-point closed form: A = P_top1%, alpha = lg(P_top10% / P_top1%),
// e_p = P_top1% / P_top10%.
inline ClosedFormFit ep_from_ptops(double p_top1, double p_top10) {
  if (!(p_top1 > 0.0) || !(p_top10 > 0.0))
    fail(ErrorKind::BadCounts, "top-percentile counts must be > 0");
  if (p_top10 < p_top1)
    fail(ErrorKind::BadCounts, "top-10% count cannot be below the top-1% count");
  ClosedFormFit out;
  out.e_p = p_top1 / p_top10;
  out.a = p_top1;
  out.alpha = std::log10(p_top10 / p_top1);
  return out;
}

inline PowerLawFit closed_form_fit(double p_top1, double p_top10) {
  auto cf = ep_from_ptops(p_top1, p_top10);
  return PowerLawFit(cf.a, cf.alpha, FitMethod::ClosedForm,
                     {{1.0, p_top1}, {10.0, p_top10}});
}

// Expected papers in the world top 0.01%: N e_p^4.
inline double p_top_001(std::int64_t n_total, double e_p) {
  return static_cast<double>(n_total) * e_p * e_p * e_p * e_p;
}

// Indicator bundle for one group. Carries the evaluation percentile and the
// fit method because both choices shape the numbers.
class IndicatorSet {
 public:
  IndicatorSet(const PowerLawFit& fit, std::int64_t n_total, double percentile = 0.01)
      : method_(fit.method()), alpha_(fit.alpha()), percentile_(percentile), n_total_(n_total) {
    if (n_total < 1) fail(ErrorKind::BadCounts, "n_total must be >= 1");
    detail::require_percentile(percentile);
    e_p_ = ep_from_alpha(alpha_);
    double n = static_cast<double>(n_total_);
    p_top_1_ = n * prob_at(1.0);
    p_top_10_ = n * prob_at(10.0);
    p_top_001_ = n * e_p_ * e_p_ * e_p_ * e_p_;
    prob_at_percentile_ = prob_at(percentile_);
    freq_at_percentile_ = n * prob_at_percentile_;
  }

  FitMethod method() const noexcept { return method_; }
  double alpha() const noexcept { return alpha_; }
  double percentile() const noexcept { return percentile_; }
  std::int64_t n_total() const noexcept { return n_total_; }
  double e_p() const noexcept { return e_p_; }
  double p_top_1() const noexcept { return p_top_1_; }
  double p_top_10() const noexcept { return p_top_10_; }
  double p_top_001() const noexcept { return p_top_001_; }
  double prob_at_percentile() const noexcept { return prob_at_percentile_; }
  double freq_at_percentile() const noexcept { return freq_at_percentile_; }

  double prob_at(double x) const {
    detail::require_percentile(x);
    return std::pow(x / 100.0, alpha_);
  }

  // e_p outside (0, 1] signals a pathological fit (alpha <= 0); the values
  // are reported as-is rather than clamped.
  bool quality_ok() const noexcept { return e_p_ > 0.0 && e_p_ <= 1.0; }

 private:
  FitMethod method_;
  double alpha_;
  double percentile_;
  std::int64_t n_total_;
  double e_p_ = 0.0;
  double p_top_1_ = 0.0;
  double p_top_10_ = 0.0;
  double p_top_001_ = 0.0;
  double prob_at_percentile_ = 0.0;
  double freq_at_percentile_ = 0.0;
};

}  // namespace dblrank
