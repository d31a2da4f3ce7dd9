#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "prefrec/binning.hpp"
#include "prefrec/net.hpp"
#include "prefrec/pairs.hpp"
#include "prefrec/types.hpp"

namespace prefrec {

struct EvalReport {
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  double weighted_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> rank_accuracy;     // NaN for ranks no pair touches
  std::vector<std::size_t> rank_pairs;   // pairs touching each rank
  std::vector<std::size_t> skipped_ranks;
  std::size_t n_pairs = 0;
};

// Scores every distinct headline once with `score_of(const Headline&)` and
// grades each pair by a strict comparison: a pair counts as correct only if
// the preferred side scores strictly higher, so ties are wrong. Both
// metrics depend on scores only through these comparisons, which makes them
// invariant under any strictly increasing transform of the scorer.
//
// The weighted variant averages per-rank accuracies: a pair belongs to the
// rank set of both of its sides, and ranks touched by no pair are skipped
// (and reported) rather than averaged as zeros.
template <class ScoreFn>
EvalReport evaluate_with(ScoreFn&& score_of, const PairDataset& ds, const Corpus& corpus,
                         const BinningScheme& scheme) {
  if (ds.pairs.empty()) throw DataError("evaluate: empty pair set");

  struct IdInfo {
    double score;
    std::size_t rank;
  };
  std::unordered_map<std::int64_t, IdInfo> info;
  info.reserve(ds.source_ids.size());
  for (std::int64_t id : ds.source_ids) {
    const Headline& h = corpus.by_id(id);
    info.emplace(id, IdInfo{score_of(h), scheme.rank_of(h.clicks)});
  }

  const std::size_t K = scheme.num_ranks();
  std::vector<std::size_t> touched(K, 0), correct(K, 0);
  std::size_t n_correct = 0;
  for (const PreferencePair& p : ds.pairs) {
    const IdInfo& lo = info.at(p.low_id);
    const IdInfo& hi = info.at(p.high_id);
    const bool ok = hi.score > lo.score;
    n_correct += ok;
    ++touched[lo.rank];
    ++touched[hi.rank];
    correct[lo.rank] += ok;
    correct[hi.rank] += ok;
  }

  EvalReport r;
  r.n_pairs = ds.pairs.size();
  r.accuracy = static_cast<double>(n_correct) / static_cast<double>(r.n_pairs);
  r.rank_accuracy.assign(K, std::numeric_limits<double>::quiet_NaN());
  r.rank_pairs.assign(K, 0);
  double sum = 0.0;
  std::size_t n_ranks = 0;
  for (std::size_t k = 0; k < K; ++k) {
    r.rank_pairs[k] = touched[k];
    if (touched[k] == 0) {
      r.skipped_ranks.push_back(k);
      continue;
    }
    r.rank_accuracy[k] = static_cast<double>(correct[k]) / static_cast<double>(touched[k]);
    sum += r.rank_accuracy[k];
    ++n_ranks;
  }
  r.weighted_accuracy = sum / static_cast<double>(n_ranks);
  return r;
}

// Inference-mode evaluation of a trained scorer.
inline EvalReport evaluate(const PreferenceNet& net, const PairDataset& ds, const Corpus& corpus,
                           const BinningScheme& scheme) {
  PreferenceNet::Scratch scratch;
  return evaluate_with(
      [&](const Headline& h) { return net.forward(h.embedding, scratch); }, ds, corpus, scheme);
}

}  // namespace prefrec
