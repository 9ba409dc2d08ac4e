// Core domain types: citation sets, percentile series, fit results.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dblrank {

enum class ErrorKind {
  EmptySet,
  NegativeCount,
  BadLabel,
  BadSpec,
  NotSubset,
  BadGrid,
  NonMonotone,
  TooFewPoints,
  ZeroCount,
  NoConvergence,
  Degenerate,
  DegenerateSet,
  BadPercentile,
  BadCounts,
  NonPositiveDof,
  ParseError,
  BadConfig,
  IoError,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::NegativeCount: return "NegativeCount";
    case ErrorKind::BadLabel: return "BadLabel";
    case ErrorKind::BadSpec: return "BadSpec";
    case ErrorKind::NotSubset: return "NotSubset";
    case ErrorKind::BadGrid: return "BadGrid";
    case ErrorKind::NonMonotone: return "NonMonotone";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::ZeroCount: return "ZeroCount";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::DegenerateSet: return "DegenerateSet";
    case ErrorKind::BadPercentile: return "BadPercentile";
    case ErrorKind::BadCounts: return "BadCounts";
    case ErrorKind::NonPositiveDof: return "NonPositiveDof";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::BadConfig: return "BadConfig";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// Single exception type; tests discriminate on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

// A labeled multiset of per-paper citation counts. Immutable once built.
class CitationSet {
 public:
  CitationSet(std::string label, std::vector<std::int64_t> counts)
      : label_(std::move(label)), counts_(std::move(counts)) {
    if (label_.empty()) fail(ErrorKind::BadLabel, "citation set label must be non-empty");
    if (counts_.empty()) fail(ErrorKind::EmptySet, "citation set '" + label_ + "' has no papers");
    for (auto c : counts_) {
      if (c < 0)
        fail(ErrorKind::NegativeCount,
             "citation set '" + label_ + "' contains a negative count");
    }
  }

  const std::string& label() const noexcept { return label_; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  std::int64_t size() const noexcept { return static_cast<std::int64_t>(counts_.size()); }

  double mean() const {
    double sum = 0.0;
    for (auto c : counts_) sum += static_cast<double>(c);
    return sum / static_cast<double>(counts_.size());
  }

  std::int64_t max_count() const { return *std::max_element(counts_.begin(), counts_.end()); }

 private:
  std::string label_;
  std::vector<std::int64_t> counts_;
};

inline CitationSet validate_citation_set(std::vector<std::int64_t> raw, std::string label) {
  return CitationSet(std::move(label), std::move(raw));
}

// Recipe for a synthetic lognormal citation set.
class LognormalSpec {
 public:
  LognormalSpec(double mu, double sigma, std::int64_t n_papers, std::uint64_t seed)
      : mu_(mu), sigma_(sigma), n_papers_(n_papers), seed_(seed) {
    if (!(sigma > 0.0)) fail(ErrorKind::BadSpec, "sigma must be > 0");
    if (n_papers < 1) fail(ErrorKind::BadSpec, "n_papers must be >= 1");
    if (!std::isfinite(mu)) fail(ErrorKind::BadSpec, "mu must be finite");
  }

  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }
  std::int64_t n_papers() const noexcept { return n_papers_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  double mu_;
  double sigma_;
  std::int64_t n_papers_;
  std::uint64_t seed_;
};

struct PercentilePoint {
  double x = 0.0;      // top percentile, in (0, 100]
  double n_local = 0.0;  // local papers at or above the world top-x threshold
  double share = 0.0;    // n_local / local_size * 100
};

// Local-in-global percentile series: how many of a group's papers fall inside
// the world's top-x percent, on a fixed percentile grid.
class PercentileSeries {
 public:
  PercentileSeries(std::string world_label, std::string local_label,
                   std::optional<std::int64_t> world_size, std::int64_t local_size,
                   std::vector<PercentilePoint> points, bool counts_synthetic = false)
      : world_label_(std::move(world_label)),
        local_label_(std::move(local_label)),
        world_size_(world_size),
        local_size_(local_size),
        points_(std::move(points)),
        counts_synthetic_(counts_synthetic) {
    if (local_label_.empty()) fail(ErrorKind::BadLabel, "series local label must be non-empty");
    if (local_size_ < 1) fail(ErrorKind::BadSpec, "series local_size must be >= 1");
    if (world_size_ && *world_size_ < 1) fail(ErrorKind::BadSpec, "series world_size must be >= 1");
    if (points_.empty()) fail(ErrorKind::BadGrid, "series must contain at least one point");
    double prev_x = 0.0;
    double prev_n = -1.0;
    for (const auto& p : points_) {
      if (!(p.x > 0.0) || p.x > 100.0)
        fail(ErrorKind::BadGrid, "percentile out of (0, 100]: " + std::to_string(p.x));
      if (p.x <= prev_x) fail(ErrorKind::BadGrid, "percentiles must be strictly increasing");
      if (p.n_local < -kCountTol || p.n_local > static_cast<double>(local_size_) + kCountTol)
        fail(ErrorKind::NonMonotone, "point count outside [0, local_size]");
      if (p.n_local < prev_n - kCountTol)
        fail(ErrorKind::NonMonotone, "point counts must be non-decreasing in x");
      prev_x = p.x;
      prev_n = p.n_local;
    }
    const auto& last = points_.back();
    if (last.x == 100.0 &&
        std::abs(last.n_local - static_cast<double>(local_size_)) > kCountTol)
      fail(ErrorKind::NonMonotone, "count at x=100 must equal local_size");
  }

  const std::string& world_label() const noexcept { return world_label_; }
  const std::string& local_label() const noexcept { return local_label_; }
  std::optional<std::int64_t> world_size() const noexcept { return world_size_; }
  std::int64_t local_size() const noexcept { return local_size_; }
  const std::vector<PercentilePoint>& points() const noexcept { return points_; }
  bool counts_synthetic() const noexcept { return counts_synthetic_; }

 private:
  static constexpr double kCountTol = 1e-6;

  std::string world_label_;
  std::string local_label_;
  std::optional<std::int64_t> world_size_;
  std::int64_t local_size_;
  std::vector<PercentilePoint> points_;
  bool counts_synthetic_;
};

enum class FitMethod { LR, LM, ML, ClosedForm };

inline const char* to_string(FitMethod m) {
  switch (m) {
    case FitMethod::LR: return "lr";
    case FitMethod::LM: return "lm";
    case FitMethod::ML: return "ml";
    case FitMethod::ClosedForm: return "closed_form";
  }
  return "unknown";
}

// Fitted power law value = a * x^alpha. alpha is the signed model exponent:
// positive for double-rank series, negative for rank-frequency tails.
class PowerLawFit {
 public:
  PowerLawFit(double a, double alpha, FitMethod method,
              std::vector<std::pair<double, double>> points_used,
              std::optional<double> chi2 = std::nullopt,
              std::optional<int> dof = std::nullopt,
              std::optional<double> p_value = std::nullopt)
      : a_(a),
        alpha_(alpha),
        method_(method),
        chi2_(chi2),
        dof_(dof),
        p_value_(p_value),
        points_used_(std::move(points_used)) {
    if (!(a > 0.0)) fail(ErrorKind::BadSpec, "fit prefactor must be > 0");
    if (!std::isfinite(alpha)) fail(ErrorKind::BadSpec, "fit exponent must be finite");
    if (chi2_.has_value() != dof_.has_value() || dof_.has_value() != p_value_.has_value())
      fail(ErrorKind::BadSpec, "chi2/dof/p_value must be all present or all absent");
    if (chi2_) {
      if (*chi2_ < 0.0) fail(ErrorKind::BadSpec, "chi2 must be >= 0");
      if (*dof_ < 1) fail(ErrorKind::NonPositiveDof, "dof must be >= 1");
      if (*p_value_ < 0.0 || *p_value_ > 1.0) fail(ErrorKind::BadSpec, "p out of [0, 1]");
    }
    if (method_ == FitMethod::ClosedForm && chi2_)
      fail(ErrorKind::BadSpec, "closed-form fits carry no goodness-of-fit");
  }

  double a() const noexcept { return a_; }
  double alpha() const noexcept { return alpha_; }
  FitMethod method() const noexcept { return method_; }
  std::optional<double> chi2() const noexcept { return chi2_; }
  std::optional<int> dof() const noexcept { return dof_; }
  std::optional<double> p_value() const noexcept { return p_value_; }
  const std::vector<std::pair<double, double>>& points_used() const noexcept {
    return points_used_;
  }

  double predict(double x) const { return a_ * std::pow(x, alpha_); }

  // Positive decay exponent for tail fits of the form value = a * x^(-decay).
  double decay_exponent() const noexcept { return -alpha_; }

 private:
  double a_;
  double alpha_;
  FitMethod method_;
  std::optional<double> chi2_;
  std::optional<int> dof_;
  std::optional<double> p_value_;
  std::vector<std::pair<double, double>> points_used_;
};

// Characteristic scores and scales: iterated-mean thresholds and the share of
// papers falling in each class.
class CssResult {
 public:
  CssResult(std::vector<double> thresholds, std::vector<double> class_shares)
      : thresholds_(std::move(thresholds)), class_shares_(std::move(class_shares)) {
    if (thresholds_.empty()) fail(ErrorKind::BadSpec, "css requires at least one threshold");
    if (class_shares_.size() != thresholds_.size() + 1)
      fail(ErrorKind::BadSpec, "css needs one more class than thresholds");
    for (std::size_t i = 1; i < thresholds_.size(); ++i)
      if (!(thresholds_[i] > thresholds_[i - 1]))
        fail(ErrorKind::BadSpec, "css thresholds must strictly increase");
    double sum = 0.0;
    for (double s : class_shares_) {
      if (s < 0.0) fail(ErrorKind::BadSpec, "css shares must be >= 0");
      sum += s;
    }
    if (std::abs(sum - 100.0) > 1e-9) fail(ErrorKind::BadSpec, "css shares must sum to 100");
  }

  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  const std::vector<double>& class_shares() const noexcept { return class_shares_; }
  int depth() const noexcept { return static_cast<int>(thresholds_.size()); }

 private:
  std::vector<double> thresholds_;
  std::vector<double> class_shares_;
};

}  // namespace dblrank
