#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "prefrec/common.hpp"

namespace prefrec {

// Engagement ranks: click counts are bucketed by a sorted list of lower
// bounds. Bound k is inclusive, bound k+1 exclusive; the last rank is
// unbounded above. Higher rank index means more engagement.
class BinningScheme {
public:
  explicit BinningScheme(std::vector<std::int64_t> lower_bounds)
      : bounds_(std::move(lower_bounds)) {
    if (bounds_.empty()) throw ConfigError("binning: need at least one lower bound");
    if (bounds_.front() != 0) throw ConfigError("binning: first lower bound must be 0");
    for (std::size_t i = 1; i < bounds_.size(); ++i) {
      if (bounds_[i] <= bounds_[i - 1])
        throw ConfigError("binning: lower bounds must be strictly increasing");
    }
  }

  std::size_t num_ranks() const { return bounds_.size(); }
  const std::vector<std::int64_t>& lower_bounds() const { return bounds_; }

  std::size_t rank_of(std::int64_t clicks) const {
    if (clicks < 0) throw DataError("rank_of: negative click count " + std::to_string(clicks));
    auto it = std::upper_bound(bounds_.begin(), bounds_.end(), clicks);
    return static_cast<std::size_t>(it - bounds_.begin()) - 1;
  }

  // Histogram of click counts by rank.
  template <class It>
  std::vector<std::size_t> histogram(It first, It last) const {
    std::vector<std::size_t> counts(num_ranks(), 0);
    for (; first != last; ++first) ++counts[rank_of(*first)];
    return counts;
  }

private:
  std::vector<std::int64_t> bounds_;
};

// The seven-rank scheme used throughout: 0, 100, 1k, 5k, 10k, 50k, 100k.
inline BinningScheme default_engagement_bins() {
  return BinningScheme({0, 100, 1000, 5000, 10000, 50000, 100000});
}

}  // namespace prefrec
