// Local-in-global structure: world midranks of local papers and the
// percentile series N(x).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dblrank/core.hpp"

namespace dblrank {

// World set prepared for rank lookups. Ties share their block's midrank, so
// results do not depend on sort stability. Immutable; safe to share across
// concurrent local evaluations.
class WorldIndex {
 public:
  explicit WorldIndex(const CitationSet& world)
      : label_(world.label()), size_(world.size()) {
    std::vector<std::int64_t> sorted(world.counts());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      // ranks i+1 .. j share the block; midrank is their average
      double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
      blocks_.emplace(sorted[i], Block{midrank, static_cast<std::int64_t>(j - i)});
      i = j;
    }
  }

  const std::string& label() const noexcept { return label_; }
  std::int64_t size() const noexcept { return size_; }

  bool contains(std::int64_t count) const { return blocks_.count(count) > 0; }

  std::int64_t multiplicity(std::int64_t count) const {
    auto it = blocks_.find(count);
    return it == blocks_.end() ? 0 : it->second.multiplicity;
  }

  double midrank(std::int64_t count) const {
    auto it = blocks_.find(count);
    if (it == blocks_.end())
      fail(ErrorKind::NotSubset,
           "citation count " + std::to_string(count) + " absent from world set");
    return it->second.midrank;
  }

  double percentile(std::int64_t count) const {
    return midrank(count) / static_cast<double>(size_) * 100.0;
  }

 private:
  struct Block {
    double midrank;
    std::int64_t multiplicity;
  };

  std::string label_;
  std::int64_t size_;
  std::unordered_map<std::int64_t, Block> blocks_;
};

namespace detail {

inline void require_submultiset(const CitationSet& local, const WorldIndex& world) {
  std::unordered_map<std::int64_t, std::int64_t> local_mult;
  for (auto c : local.counts()) ++local_mult[c];
  for (const auto& [count, mult] : local_mult) {
    if (world.multiplicity(count) < mult)
      fail(ErrorKind::NotSubset, "local set '" + local.label() + "' has " +
                                     std::to_string(mult) + " papers with " +
                                     std::to_string(count) +
                                     " citations but the world has fewer");
  }
}

}  // namespace detail

struct RankPair {
  std::int64_t local_rank = 0;
  double global_rank = 0.0;  // world midrank; fractional inside tie blocks
};

// Pairs each local paper's rank in its own list with its midrank in the world
// list, both sorted by citations from the top.
inline std::vector<RankPair> global_ranks(const CitationSet& local, const WorldIndex& world) {
  detail::require_submultiset(local, world);
  std::vector<std::int64_t> sorted(local.counts());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<RankPair> pairs;
  pairs.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    pairs.push_back({static_cast<std::int64_t>(i + 1), world.midrank(sorted[i])});
  return pairs;
}

inline std::vector<RankPair> global_ranks(const CitationSet& local, const CitationSet& world) {
  return global_ranks(local, WorldIndex(world));
}

inline const std::vector<double>& default_grid() {
  static const std::vector<double> grid = {1, 2, 4, 7, 12, 20, 35, 60, 100};
  return grid;
}

// Counts, for each top percentile x of the grid, the local papers whose world
// midrank percentile is <= x.
inline PercentileSeries percentile_series(const CitationSet& local, const WorldIndex& world,
                                          const std::vector<double>& grid = default_grid()) {
  if (grid.empty()) fail(ErrorKind::BadGrid, "percentile grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || grid[i] > 100.0)
      fail(ErrorKind::BadGrid, "grid percentile out of (0, 100]");
    if (i > 0 && grid[i] <= grid[i - 1])
      fail(ErrorKind::BadGrid, "grid must be strictly increasing");
  }
  detail::require_submultiset(local, world);
  std::vector<double> percentiles;
  percentiles.reserve(local.counts().size());
  for (auto c : local.counts()) percentiles.push_back(world.percentile(c));
  std::sort(percentiles.begin(), percentiles.end());
  std::vector<PercentilePoint> points;
  points.reserve(grid.size());
  auto local_size = static_cast<double>(local.size());
  for (double x : grid) {
    auto it = std::upper_bound(percentiles.begin(), percentiles.end(), x);
    auto n = static_cast<double>(std::distance(percentiles.begin(), it));
    points.push_back({x, n, n / local_size * 100.0});
  }
  return PercentileSeries(world.label(), local.label(), world.size(), local.size(),
                          std::move(points));
}

inline PercentileSeries percentile_series(const CitationSet& local, const CitationSet& world,
                                          const std::vector<double>& grid = default_grid()) {
  return percentile_series(local, WorldIndex(world), grid);
}

// Wraps externally supplied percentile shares (x, share-in-percent) into a
// series. With a known group size the counts are share * size / 100;
// otherwise the series is normalized to a nominal size of 100 and the counts
// are flagged synthetic.
inline PercentileSeries series_from_shares(std::vector<std::pair<double, double>> shares,
                                           std::optional<std::int64_t> local_size,
                                           std::string label,
                                           std::string world_label = "(external)") {
  if (shares.empty()) fail(ErrorKind::BadGrid, "no share points supplied");
  std::sort(shares.begin(), shares.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < shares.size(); ++i) {
    if (shares[i].first == shares[i - 1].first)
      fail(ErrorKind::BadGrid, "duplicate percentile " + std::to_string(shares[i].first));
    if (shares[i].second < shares[i - 1].second)
      fail(ErrorKind::NonMonotone, "shares must be non-decreasing in x");
  }
  std::int64_t size = local_size.value_or(100);
  std::vector<PercentilePoint> points;
  points.reserve(shares.size());
  for (const auto& [x, share] : shares)
    points.push_back({x, share * static_cast<double>(size) / 100.0, share});
  return PercentileSeries(std::move(world_label), std::move(label), std::nullopt, size,
                          std::move(points), !local_size.has_value());
}

}  // namespace dblrank
