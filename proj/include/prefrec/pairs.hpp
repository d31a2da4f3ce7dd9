#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prefrec/binning.hpp"
#include "prefrec/rng.hpp"
#include "prefrec/types.hpp"

namespace prefrec {

// A preference between two headlines. Stored canonically: `low_id` is the
// less-engaged side (strictly lower rank), `high_id` the more-engaged side,
// so the preferred direction never needs a separate label.
struct PreferencePair {
  std::int64_t low_id = 0;
  std::int64_t high_id = 0;

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
  friend auto operator<=>(const PreferencePair&, const PreferencePair&) = default;
};

struct PairDataset {
  std::vector<PreferencePair> pairs;
  std::vector<std::int64_t> source_ids;  // sorted, unique ids appearing in pairs
};

struct IdClicks {
  std::int64_t id = 0;
  std::int64_t clicks = 0;
};

namespace detail {

inline std::vector<std::int64_t> collect_source_ids(const std::vector<PreferencePair>& pairs) {
  std::vector<std::int64_t> ids;
  ids.reserve(pairs.size() * 2);
  for (const PreferencePair& p : pairs) {
    ids.push_back(p.low_id);
    ids.push_back(p.high_id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace detail

// Pairs each headline with up to `per_rank_samples` headlines drawn without
// replacement from every strictly superior engagement rank. Headlines in the
// same rank are never paired. Anchors are visited in ascending id order and
// superior ranks in ascending order, so output order is a pure function of
// the inputs and the random stream.
inline PairDataset generate_pairs(std::span<const IdClicks> items, const BinningScheme& scheme,
                                  std::size_t per_rank_samples, Rng& rng) {
  if (per_rank_samples == 0) throw ConfigError("generate_pairs: per_rank_samples must be positive");

  struct Entry {
    std::int64_t id;
    std::size_t rank;
  };
  std::vector<Entry> entries;
  entries.reserve(items.size());
  for (const IdClicks& it : items) entries.push_back({it.id, scheme.rank_of(it.clicks)});
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].id == entries[i - 1].id)
      throw DataError("generate_pairs: duplicate id " + std::to_string(entries[i].id));
  }

  std::vector<std::vector<std::int64_t>> by_rank(scheme.num_ranks());
  for (const Entry& e : entries) by_rank[e.rank].push_back(e.id);  // id-sorted within rank

  PairDataset out;
  for (const Entry& anchor : entries) {
    for (std::size_t r = anchor.rank + 1; r < scheme.num_ranks(); ++r) {
      const std::vector<std::int64_t>& pool = by_rank[r];
      if (pool.empty()) continue;
      const std::size_t take = std::min(per_rank_samples, pool.size());
      for (std::size_t idx : rng.sample_indices(pool.size(), take)) {
        out.pairs.push_back({anchor.id, pool[idx]});
      }
    }
  }
  out.source_ids = detail::collect_source_ids(out.pairs);
  return out;
}

inline PairDataset generate_pairs(std::span<const Headline> items, const BinningScheme& scheme,
                                  std::size_t per_rank_samples, Rng& rng) {
  std::vector<IdClicks> flat;
  flat.reserve(items.size());
  for (const Headline& h : items) flat.push_back({h.id, h.clicks});
  return generate_pairs(std::span<const IdClicks>(flat), scheme, per_rank_samples, rng);
}

inline PairDataset generate_pairs(const Corpus& corpus, const BinningScheme& scheme,
                                  std::size_t per_rank_samples, Rng& rng) {
  return generate_pairs(std::span<const Headline>(corpus.items()), scheme, per_rank_samples, rng);
}

struct SplitResult {
  std::vector<Headline> train;
  std::vector<Headline> test;
};

// Chronological split: order by (day, id), earliest fraction goes to train.
// The boundary count is ceil(fraction * n) with a tiny slack so that exact
// products such as 0.8 * 3305 = 2644 are not pushed up by one ulp, clamped
// so both sides stay non-empty.
inline SplitResult chronological_split(const Corpus& corpus, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("chronological_split: fraction must be in (0,1)");
  const std::size_t n = corpus.size();
  if (n < 2) throw DataError("chronological_split: need at least two headlines");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Headline& ha = corpus[a];
    const Headline& hb = corpus[b];
    if (ha.day != hb.day) return ha.day < hb.day;
    return ha.id < hb.id;
  });

  auto n_train = static_cast<std::size_t>(
      std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  SplitResult split;
  split.train.reserve(n_train);
  split.test.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? split.train : split.test).push_back(corpus[order[i]]);
  }
  return split;
}

struct PairSplit {
  PairDataset train;
  PairDataset val;
};

// Random split of pairs into train and validation. The validation share is
// rounded up, so any positive fraction yields at least one validation pair
// when two or more pairs exist.
inline PairSplit split_pairs(const PairDataset& dataset, double val_fraction, Rng& rng) {
  if (!(val_fraction >= 0.0 && val_fraction < 1.0))
    throw ConfigError("split_pairs: fraction must be in [0,1)");
  const std::size_t n = dataset.pairs.size();
  std::size_t n_val = 0;
  if (val_fraction > 0.0 && n >= 2) {
    n_val = static_cast<std::size_t>(
        std::ceil(val_fraction * static_cast<double>(n) - 1e-9));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  PairSplit out;
  out.val.pairs.reserve(n_val);
  out.train.pairs.reserve(n - n_val);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_val ? out.val.pairs : out.train.pairs).push_back(dataset.pairs[order[i]]);
  }
  out.train.source_ids = detail::collect_source_ids(out.train.pairs);
  out.val.source_ids = detail::collect_source_ids(out.val.pairs);
  return out;
}

}  // namespace prefrec
