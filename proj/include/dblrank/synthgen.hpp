// Synthetic citation sets: lognormal sampling and world composition.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dblrank/core.hpp"

namespace dblrank {

namespace detail {

inline double to_unit_interval(std::uint64_t word) {
  // 53-bit mantissa, offset by half a step so the result stays in (0, 1).
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal deviates via Box-Muller. Consumes exactly two engine words
// per deviate so the stream layout is independent of the standard library.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    double u1 = to_unit_interval(engine_());
    double u2 = to_unit_interval(engine_());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace detail

// Draws spec.n_papers() integer citation counts: round(exp(mu + sigma*z))
// with z standard normal, floored at zero. Deterministic for a given seed.
inline CitationSet sample_lognormal(const LognormalSpec& spec,
                                    std::string label = "synthetic") {
  detail::NormalSampler normal(spec.seed());
  std::vector<std::int64_t> counts;
  counts.reserve(static_cast<std::size_t>(spec.n_papers()));
  for (std::int64_t i = 0; i < spec.n_papers(); ++i) {
    double value = std::exp(spec.mu() + spec.sigma() * normal());
    if (value >= 9.0e18)
      fail(ErrorKind::BadSpec, "lognormal draw overflows citation count");
    std::int64_t count = std::llround(value);
    counts.push_back(count < 0 ? 0 : count);
  }
  return CitationSet(std::move(label), std::move(counts));
}

// Multiset union of the local sets plus an optional sampled background.
inline CitationSet compose_world(const std::vector<CitationSet>& locals,
                                 const std::optional<LognormalSpec>& extra = std::nullopt,
                                 std::string label = "WORLD") {
  std::vector<std::int64_t> counts;
  for (const auto& set : locals)
    counts.insert(counts.end(), set.counts().begin(), set.counts().end());
  if (extra) {
    CitationSet background = sample_lognormal(*extra, "background");
    counts.insert(counts.end(), background.counts().begin(), background.counts().end());
  }
  if (counts.empty()) fail(ErrorKind::EmptySet, "world composition has no papers");
  return CitationSet(std::move(label), std::move(counts));
}

}  // namespace dblrank
