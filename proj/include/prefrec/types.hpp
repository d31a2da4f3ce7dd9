#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "prefrec/common.hpp"

namespace prefrec {

struct Headline {
  std::int64_t id = 0;
  std::vector<double> embedding;
  std::int64_t clicks = 0;
  int day = 0;
  std::string text;  // optional; empty for synthetic data
};

// Owning collection of headlines with validated invariants: ids unique and
// non-negative, one consistent embedding dimension, all values finite,
// clicks and days non-negative.
class Corpus {
public:
  Corpus() = default;

  explicit Corpus(std::vector<Headline> headlines) : items_(std::move(headlines)) {
    if (!items_.empty()) dim_ = items_.front().embedding.size();
    index_.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
      const Headline& h = items_[i];
      if (h.id < 0) throw DataError("headline id must be non-negative, got " + std::to_string(h.id));
      if (h.clicks < 0)
        throw DataError("headline " + std::to_string(h.id) + " has negative clicks");
      if (h.day < 0) throw DataError("headline " + std::to_string(h.id) + " has negative day");
      if (h.embedding.size() != dim_)
        throw DataError("headline " + std::to_string(h.id) + " has embedding dimension " +
                        std::to_string(h.embedding.size()) + ", expected " + std::to_string(dim_));
      for (double v : h.embedding) {
        if (!std::isfinite(v))
          throw DataError("headline " + std::to_string(h.id) + " has a non-finite embedding value");
      }
      auto [it, inserted] = index_.emplace(h.id, i);
      (void)it;
      if (!inserted) throw DataError("duplicate headline id " + std::to_string(h.id));
    }
  }

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  std::size_t dim() const { return dim_; }

  const std::vector<Headline>& items() const { return items_; }
  const Headline& operator[](std::size_t i) const { return items_[i]; }

  bool contains(std::int64_t id) const { return index_.count(id) != 0; }

  const Headline& by_id(std::int64_t id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("unknown headline id " + std::to_string(id));
    return items_[it->second];
  }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

private:
  std::vector<Headline> items_;
  std::unordered_map<std::int64_t, std::size_t> index_;
  std::size_t dim_ = 0;
};

}  // namespace prefrec
