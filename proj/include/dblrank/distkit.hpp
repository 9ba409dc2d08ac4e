// Single-distribution analysis: histograms, log binning, rank-frequency
// curves, CSS classification, and the pseudo-power-law tail fit.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dblrank/core.hpp"

namespace dblrank {

struct Histogram {
  std::vector<std::int64_t> counts;  // counts[c] = papers with exactly c citations
  std::int64_t omitted_tail = 0;     // papers above max_citations
};

inline Histogram histogram(const CitationSet& set, std::int64_t max_citations) {
  if (max_citations < 0) fail(ErrorKind::BadSpec, "max_citations must be >= 0");
  Histogram h;
  h.counts.assign(static_cast<std::size_t>(max_citations) + 1, 0);
  for (auto c : set.counts()) {
    if (c > max_citations)
      ++h.omitted_tail;
    else
      ++h.counts[static_cast<std::size_t>(c)];
  }
  return h;
}

struct LogBin {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::int64_t count = 0;
};

// Power-of-two bins 1-2, 3-4, 5-8, 9-16, ... with a separate leading bin for
// zero-citation papers. The first two bins are irregular; perfect logarithmic
// bins are impossible for small integer counts.
inline std::vector<LogBin> log_bins(const CitationSet& set) {
  std::int64_t zeros = 0;
  std::int64_t max_count = 0;
  for (auto c : set.counts()) {
    if (c == 0) ++zeros;
    if (c > max_count) max_count = c;
  }
  std::vector<LogBin> bins;
  if (zeros > 0) bins.push_back({0, 0, zeros});
  if (max_count == 0) return bins;
  std::int64_t hi = 2;
  std::int64_t lo = 1;
  while (true) {
    LogBin bin{lo, hi, 0};
    for (auto c : set.counts())
      if (c >= lo && c <= hi) ++bin.count;
    bins.push_back(bin);
    if (hi >= max_count) break;
    lo = hi + 1;
    hi *= 2;
  }
  return bins;
}

// Papers ranked 1..N from most to least cited; exposes the empirical
// cumulative probability that a paper has at least a given citation count.
class RankFrequency {
 public:
  explicit RankFrequency(const CitationSet& set)
      : label_(set.label()), sorted_desc_(set.counts()) {
    std::sort(sorted_desc_.begin(), sorted_desc_.end(), std::greater<>());
  }

  const std::string& label() const noexcept { return label_; }
  std::int64_t size() const noexcept { return static_cast<std::int64_t>(sorted_desc_.size()); }

  // Citation count of the paper at the given 1-based rank.
  std::int64_t citations_at(std::int64_t rank) const {
    return sorted_desc_[static_cast<std::size_t>(rank - 1)];
  }

  const std::vector<std::int64_t>& sorted_counts() const noexcept { return sorted_desc_; }

  // Probability that a paper received at least c citations: rank of the last
  // paper with >= c citations divided by the set size.
  double cumulative_probability(std::int64_t c) const {
    auto it = std::upper_bound(sorted_desc_.begin(), sorted_desc_.end(), c, std::greater<>());
    auto at_least = static_cast<double>(std::distance(sorted_desc_.begin(), it));
    return at_least / static_cast<double>(sorted_desc_.size());
  }

 private:
  std::string label_;
  std::vector<std::int64_t> sorted_desc_;
};

inline RankFrequency rank_frequency(const CitationSet& set) { return RankFrequency(set); }

// Iterated-mean classification: m1 = mean of all papers, m_{k+1} = mean of
// papers cited more than m_k. Papers exactly at a threshold fall in the lower
// class.
inline CssResult css_classify(const CitationSet& set, int depth) {
  if (depth < 1) fail(ErrorKind::BadSpec, "css depth must be >= 1");
  std::vector<double> thresholds;
  std::vector<std::int64_t> current(set.counts());
  for (int k = 0; k < depth; ++k) {
    double sum = 0.0;
    for (auto c : current) sum += static_cast<double>(c);
    double mean = sum / static_cast<double>(current.size());
    std::vector<std::int64_t> above;
    for (auto c : current)
      if (static_cast<double>(c) > mean) above.push_back(c);
    if (above.empty())
      fail(ErrorKind::DegenerateSet,
           "no papers above iterated mean " + std::to_string(mean));
    thresholds.push_back(mean);
    current = std::move(above);
  }
  std::vector<double> shares(thresholds.size() + 1, 0.0);
  for (auto c : set.counts()) {
    std::size_t cls = 0;
    while (cls < thresholds.size() && static_cast<double>(c) > thresholds[cls]) ++cls;
    shares[cls] += 1.0;
  }
  for (auto& s : shares) s = s * 100.0 / static_cast<double>(set.size());
  return CssResult(std::move(thresholds), std::move(shares));
}

namespace detail {

struct LogLogOls {
  double intercept = 0.0;
  double slope = 0.0;
};

// Ordinary least squares of ln(y) on ln(x).
inline LogLogOls ols_loglog(const std::vector<std::pair<double, double>>& points) {
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += std::log(x);
    my += std::log(y);
  }
  auto n = static_cast<double>(points.size());
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [x, y] : points) {
    double dx = std::log(x) - mx;
    sxy += dx * (std::log(y) - my);
    sxx += dx * dx;
  }
  if (sxx <= 0.0) fail(ErrorKind::Degenerate, "all abscissae coincide in log space");
  LogLogOls fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace detail

// Fits rank = a * citations^(-decay) over papers whose citation count lies in
// [fit_lo, fit_hi], by least squares on the log-transformed per-paper points.
// The returned fit stores the signed model exponent (negative).
inline PowerLawFit tail_power_fit(const RankFrequency& rf, std::int64_t fit_lo,
                                  std::int64_t fit_hi) {
  if (fit_lo >= fit_hi) fail(ErrorKind::BadGrid, "tail window requires fit_lo < fit_hi");
  if (fit_lo < 1) fit_lo = 1;  // log of a zero citation count is undefined
  std::vector<std::pair<double, double>> points;
  const auto& sorted = rf.sorted_counts();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    auto c = sorted[i];
    if (c >= fit_lo && c <= fit_hi)
      points.emplace_back(static_cast<double>(c), static_cast<double>(i + 1));
  }
  if (points.size() < 5)
    fail(ErrorKind::TooFewPoints, "tail window holds " + std::to_string(points.size()) +
                                      " points; need at least 5");
  auto ols = detail::ols_loglog(points);
  return PowerLawFit(std::exp(ols.intercept), ols.slope, FitMethod::LR, std::move(points));
}

}  // namespace dblrank
