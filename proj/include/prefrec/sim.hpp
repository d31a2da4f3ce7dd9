#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prefrec/binning.hpp"
#include "prefrec/eval.hpp"
#include "prefrec/net.hpp"
#include "prefrec/pairs.hpp"
#include "prefrec/policies.hpp"
#include "prefrec/rng.hpp"
#include "prefrec/train.hpp"
#include "prefrec/types.hpp"

namespace prefrec {

// Day-stepped serving loop with delayed feedback. Headlines published
// before the warm-up window's end form the pool from which the initial
// click history is sampled; afterwards each calendar day offers that day's
// headlines as candidates, the policy picks one, and its click count
// arrives `feedback_delay_days` later. The scorer is retrained once per day
// that receives at least one arrival, on preference pairs regenerated from
// the full observed history, so selection on day t always uses a model that
// has seen only feedback due by day t-1.
struct SimulationConfig {
  int warmup_window_days = 90;
  std::size_t warmup_sample_size = 90;
  int feedback_delay_days = 7;
  std::size_t pairing_M = 2;  // per-superior-rank samples when pairing history
  std::vector<std::int64_t> rank_bounds = {0, 100, 1000, 5000, 10000, 50000, 100000};

  // Accuracy-vs-time points stop once the calendar day exceeds this cutoff
  // (the fixed evaluation pairs' headlines start appearing as candidates).
  // Defaults to the day before the last fifth of the corpus begins.
  std::optional<int> eval_cutoff_day;

  Policy policy = Policy::Greedy;
  double nts_nu = 1.0;
  double nts_lambda = 1.0;

  NetConfig net{.dim = 0, .hidden = 200, .blocks = 1};  // dim 0: take the corpus's
  TrainConfig initial_train{.max_epochs = 40};
  TrainConfig retrain{.max_epochs = 3};
  bool warm_start = true;     // retrains continue from current parameters
  bool track_model = true;    // false skips all training (oracle/random speed-up)
  std::size_t min_pairs_for_validation = 50;  // below this, monitor training loss
};

struct DayRecord {
  int day = 0;
  std::int64_t chosen_id = 0;
  std::int64_t clicks = 0;        // observed later; recorded here for scoring
  std::int64_t best_clicks = 0;   // candidate max
  std::int64_t worst_clicks = 0;  // candidate min
  std::size_t n_candidates = 0;
  std::size_t model_version = 0;  // model that made this selection
};

struct DeliveryRecord {
  int day = 0;
  std::size_t n_arrived = 0;
};

struct AccuracyPoint {
  int day = 0;
  double accuracy = 0.0;
  double weighted_accuracy = 0.0;
  std::size_t model_version = 0;
};

struct SimulationResult {
  std::vector<DayRecord> trajectory;        // one entry per day with candidates
  std::vector<DeliveryRecord> deliveries;   // one entry per day with arrivals
  std::vector<AccuracyPoint> accuracy_series;
  std::vector<std::int64_t> warmup_ids;     // sorted
  std::size_t final_model_version = 0;
  std::size_t final_history_size = 0;
  std::optional<PreferenceNet> final_model;
};

inline double total_clicks(const std::vector<DayRecord>& trajectory) {
  double s = 0.0;
  for (const DayRecord& r : trajectory) s += static_cast<double>(r.clicks);
  return s;
}

// Sum over days of (Y - Ymin)/(Ymax - Ymin) against that day's candidate
// extremes; degenerate days (all candidates equal) contribute 1.
inline double normalized_clicks(const std::vector<DayRecord>& trajectory) {
  double s = 0.0;
  for (const DayRecord& r : trajectory) {
    if (r.best_clicks == r.worst_clicks) {
      s += 1.0;
    } else {
      s += static_cast<double>(r.clicks - r.worst_clicks) /
           static_cast<double>(r.best_clicks - r.worst_clicks);
    }
  }
  return s;
}

inline SimulationResult run_simulation(const Corpus& corpus, const SimulationConfig& cfg,
                                       std::uint64_t seed,
                                       const PairDataset* eval_pairs = nullptr,
                                       std::ostream* log = nullptr) {
  if (corpus.empty()) throw DataError("simulation: empty corpus");
  if (cfg.warmup_window_days <= 0) throw ConfigError("simulation: warm-up window must be positive");
  if (cfg.warmup_sample_size == 0) throw ConfigError("simulation: warm-up sample must be positive");
  if (cfg.feedback_delay_days < 0) throw ConfigError("simulation: feedback delay must be >= 0");
  if (policy_needs_model(cfg.policy) && !cfg.track_model)
    throw ConfigError("simulation: policy \"" + std::string(to_string(cfg.policy)) +
                      "\" needs a tracked model");
  const BinningScheme bins{cfg.rank_bounds};

  // Candidates per calendar day, id-sorted.
  std::map<int, std::vector<const Headline*>> by_day;
  int last_day = 0;
  for (const Headline& h : corpus) {
    by_day[h.day].push_back(&h);
    last_day = std::max(last_day, h.day);
  }
  for (auto& [day, list] : by_day)
    std::sort(list.begin(), list.end(),
              [](const Headline* a, const Headline* b) { return a->id < b->id; });

  // Warm-up: uniform sample without replacement from the pre-window pool.
  std::vector<const Headline*> pool;
  for (const Headline& h : corpus)
    if (h.day < cfg.warmup_window_days) pool.push_back(&h);
  std::sort(pool.begin(), pool.end(),
            [](const Headline* a, const Headline* b) { return a->id < b->id; });
  if (pool.size() < cfg.warmup_sample_size)
    throw DataError("simulation: warm-up pool has " + std::to_string(pool.size()) +
                    " headlines, need " + std::to_string(cfg.warmup_sample_size));

  Rng warmup_rng = substream(seed, "sim.warmup");
  Rng policy_rng = substream(seed, "sim.policy");
  Rng pair_rng = substream(seed, "sim.pairs");
  Rng init_rng = substream(seed, "sim.init");
  Rng train_rng = substream(seed, "sim.train");

  std::vector<IdClicks> history;
  SimulationResult result;
  for (std::size_t idx : warmup_rng.sample_indices(pool.size(), cfg.warmup_sample_size)) {
    history.push_back({pool[idx]->id, pool[idx]->clicks});
    result.warmup_ids.push_back(pool[idx]->id);
  }
  std::sort(result.warmup_ids.begin(), result.warmup_ids.end());

  NetConfig net_cfg = cfg.net;
  if (net_cfg.dim == 0) net_cfg.dim = corpus.dim();
  if (net_cfg.dim != corpus.dim())
    throw ConfigError("simulation: network dimension does not match corpus");

  int cutoff = 0;
  if (eval_pairs && cfg.track_model)
    cutoff = cfg.eval_cutoff_day ? *cfg.eval_cutoff_day
                                 : chronological_split(corpus, 0.8).test.front().day - 1;

  // Trains on pairs regenerated from the full history; returns false when
  // the history spans a single rank and no pairs exist.
  PreferenceNet net(net_cfg);
  auto fit = [&](const TrainConfig& tc, bool reinit) {
    const PairDataset ds =
        generate_pairs(std::span<const IdClicks>(history), bins, cfg.pairing_M, pair_rng);
    if (ds.pairs.empty()) return false;
    if (reinit) net.init(init_rng);
    PairDataset train_split = ds, val_split;
    if (ds.pairs.size() >= cfg.min_pairs_for_validation && tc.validation_fraction > 0.0) {
      PairSplit s = split_pairs(ds, tc.validation_fraction, pair_rng);
      train_split = std::move(s.train);
      val_split = std::move(s.val);
    }
    train(net, train_split, val_split, corpus, tc, train_rng, log);
    return true;
  };

  std::optional<NeuralTsState> ts;
  if (cfg.track_model) {
    net.init(init_rng);
    fit(cfg.initial_train, /*reinit=*/false);
    if (cfg.policy == Policy::NeuralTs)
      ts.emplace(cfg.nts_nu, cfg.nts_lambda, net.params.size());
  }

  auto record_accuracy = [&](int day) {
    if (!eval_pairs || !cfg.track_model) return;
    const EvalReport r = evaluate(net, *eval_pairs, corpus, bins);
    result.accuracy_series.push_back(
        {day, r.accuracy, r.weighted_accuracy, result.final_model_version});
  };
  record_accuracy(0);  // the warm-up model, before any online feedback

  // Pending feedback, ordered by due day.
  std::map<int, std::vector<IdClicks>> queue;

  for (int day = cfg.warmup_window_days; day <= last_day; ++day) {
    // Selection (days without candidates publish nothing to choose from).
    if (auto it = by_day.find(day); it != by_day.end()) {
      const std::vector<const Headline*>& cands = it->second;
      const Headline* chosen = nullptr;
      switch (cfg.policy) {
        case Policy::Random:
          chosen = select_random(cands, policy_rng);
          break;
        case Policy::Greedy:
          chosen = select_greedy(cands, net);
          break;
        case Policy::NeuralTs:
          chosen = select_neural_ts(cands, net, *ts, policy_rng);
          break;
        case Policy::OracleBest:
          chosen = select_oracle_best(cands);
          break;
        case Policy::OracleSecond:
          chosen = select_oracle_second(cands);
          break;
      }
      DayRecord rec;
      rec.day = day;
      rec.chosen_id = chosen->id;
      rec.clicks = chosen->clicks;
      rec.best_clicks = (*std::max_element(cands.begin(), cands.end(),
                                           [](const Headline* a, const Headline* b) {
                                             return a->clicks < b->clicks;
                                           }))
                            ->clicks;
      rec.worst_clicks = (*std::min_element(cands.begin(), cands.end(),
                                            [](const Headline* a, const Headline* b) {
                                              return a->clicks < b->clicks;
                                            }))
                             ->clicks;
      rec.n_candidates = cands.size();
      rec.model_version = result.final_model_version;
      result.trajectory.push_back(rec);
      queue[day + cfg.feedback_delay_days].push_back({chosen->id, chosen->clicks});
    }

    // Arrivals due by today join the history.
    std::size_t arrived = 0;
    while (!queue.empty() && queue.begin()->first <= day) {
      for (const IdClicks& f : queue.begin()->second) {
        history.push_back(f);
        ++arrived;
      }
      queue.erase(queue.begin());
    }
    if (arrived > 0) {
      result.deliveries.push_back({day, arrived});
      if (cfg.track_model && fit(cfg.retrain, /*reinit=*/!cfg.warm_start)) {
        ++result.final_model_version;
        if (eval_pairs && day <= cutoff) record_accuracy(day);
      }
    }
  }

  result.final_history_size = history.size();
  if (cfg.track_model) result.final_model = net;
  return result;
}

}  // namespace prefrec
