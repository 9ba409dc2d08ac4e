// Regularized incomplete gamma functions, series + continued-fraction form.
#pragma once

#include <cmath>
#include <limits>

#include "dblrank/core.hpp"

namespace dblrank::detail {

// Lower regularized incomplete gamma P(a, x) by power series; valid x < a + 1.
inline double gamma_p_series(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  double ap = a;
  double sum = 1.0 / a;
  double term = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * eps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by modified Lentz continued
// fraction; valid x >= a + 1.
inline double gamma_q_cf(double a, double x) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::numeric_limits<double>::min() / eps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Q(a, x) = 1 - P(a, x), the upper regularized incomplete gamma function.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0)) fail(ErrorKind::BadSpec, "gamma_q requires a > 0");
  if (x < 0.0) fail(ErrorKind::BadSpec, "gamma_q requires x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

// Upper-tail probability of the chi-square distribution with dof degrees of
// freedom evaluated at statistic chi2.
inline double chi2_pvalue(double chi2, int dof) {
  if (dof < 1) fail(ErrorKind::NonPositiveDof, "chi-square needs dof >= 1");
  if (chi2 < 0.0) fail(ErrorKind::BadSpec, "chi-square statistic must be >= 0");
  return gamma_q(0.5 * static_cast<double>(dof), 0.5 * chi2);
}

}  // namespace dblrank::detail
