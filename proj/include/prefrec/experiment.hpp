#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "prefrec/binning.hpp"
#include "prefrec/corpus_io.hpp"
#include "prefrec/csv.hpp"
#include "prefrec/eval.hpp"
#include "prefrec/net.hpp"
#include "prefrec/pairs.hpp"
#include "prefrec/policies.hpp"
#include "prefrec/rng.hpp"
#include "prefrec/sim.hpp"
#include "prefrec/stats.hpp"
#include "prefrec/synth.hpp"
#include "prefrec/train.hpp"
#include "prefrec/types.hpp"

namespace prefrec {

// ------------------------------------------------------------ configuration

enum class Mode { Supervised, Online, SynthGen, Plot };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Supervised: return "supervised";
    case Mode::Online: return "online";
    case Mode::SynthGen: return "synth-gen";
    case Mode::Plot: return "plot";
  }
  throw ConfigError("unknown mode");
}

inline Mode parse_mode(const std::string& s) {
  if (s == "supervised") return Mode::Supervised;
  if (s == "online") return Mode::Online;
  if (s == "synth-gen") return Mode::SynthGen;
  if (s == "plot") return Mode::Plot;
  throw ConfigError("unknown mode \"" + s + "\" (choose supervised, online, synth-gen, plot)");
}

// "0..19", "7", or a comma list mixing both ("0..3,10"). Duplicates collapse
// and the result is sorted, so replicate order never depends on flag order.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  auto parse_u64 = [&](const std::string& tok) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw ConfigError("seeds: not a number: \"" + tok + "\"");
    return v;
  };
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', start), spec.size());
    const std::string tok = spec.substr(start, comma - start);
    start = comma + 1;
    if (tok.empty()) throw ConfigError("seeds: empty entry in \"" + spec + "\"");
    const std::size_t dots = tok.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(parse_u64(tok));
    } else {
      const std::uint64_t lo = parse_u64(tok.substr(0, dots));
      const std::uint64_t hi = parse_u64(tok.substr(dots + 2));
      if (hi < lo) throw ConfigError("seeds: backwards range \"" + tok + "\"");
      if (hi - lo > 1000000) throw ConfigError("seeds: range \"" + tok + "\" is unreasonably wide");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    if (comma == spec.size()) break;
  }
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  if (seeds.empty()) throw ConfigError("seeds: at least one seed required");
  return seeds;
}

inline std::vector<Policy> parse_policy_list(const std::string& spec) {
  std::vector<Policy> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', start), spec.size());
    const std::string tok = spec.substr(start, comma - start);
    start = comma + 1;
    if (!tok.empty()) out.push_back(parse_policy(tok));
    if (comma == spec.size()) break;
  }
  if (out.empty()) throw ConfigError("policies: at least one policy required");
  std::sort(out.begin(), out.end(), [](Policy a, Policy b) {
    return std::string(to_string(a)) < std::string(to_string(b));
  });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct ExperimentConfig {
  Mode mode = Mode::Supervised;

  // Data source: a corpus file, or (default) the synthetic generator.
  // Setting both is a configuration conflict.
  std::string corpus_path;
  bool synthetic_requested = false;
  SyntheticSpec synthetic;
  std::uint64_t data_seed = 42;

  std::vector<std::uint64_t> seeds = {0,  1,  2,  3,  4,  5,  6,  7,  8,  9,
                                      10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
  std::vector<Policy> policies = {Policy::Greedy, Policy::NeuralTs, Policy::OracleBest,
                                  Policy::OracleSecond, Policy::Random};

  std::vector<std::int64_t> rank_bounds = {0, 100, 1000, 5000, 10000, 50000, 100000};
  std::size_t pairing_M = 2;
  double split_fraction = 0.8;      // chronological train/test corpus split
  double pair_val_fraction = 0.1;   // of the training pairs, for validation

  NetConfig net{.dim = 0, .hidden = 200, .blocks = 1};  // dim 0: corpus decides
  TrainConfig train;       // supervised sweeps and the history-sized baseline
  SimulationConfig sim;    // online sweeps (policy/net/cutoff filled per run)

  std::string out_dir = "results";
  std::size_t workers = 1;
  bool emit_plots_after = false;
};

inline Corpus resolve_corpus(const ExperimentConfig& cfg) {
  if (!cfg.corpus_path.empty() && cfg.synthetic_requested)
    throw ConfigError("experiment: give either --corpus or synthetic options, not both");
  if (!cfg.corpus_path.empty()) return load_corpus(cfg.corpus_path);
  return generate_synthetic(cfg.synthetic, cfg.data_seed);
}

namespace detail {

// Fixed-size task pool: workers pull indices from a shared counter, results
// land in preassigned slots, so output order never depends on scheduling.
inline void run_tasks(std::size_t n_tasks, std::size_t workers,
                      const std::function<void(std::size_t)>& fn) {
  if (workers == 0) throw ConfigError("experiment: workers must be at least 1");
  if (workers <= 1 || n_tasks <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        next.store(n_tasks);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n_tasks); ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

inline void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("experiment: cannot create output directory " + dir);
}

}  // namespace detail

// ------------------------------------------------------------- supervised

struct SupervisedSeedResult {
  std::uint64_t seed = 0;
  std::size_t n_train_pairs = 0;
  std::size_t n_val_pairs = 0;
  std::size_t n_test_pairs = 0;
  std::size_t best_epoch = 0;
  bool monitored_train_loss = false;
  EvalReport report;
};

// One replicate: chronological corpus split, pair generation on each side,
// 90/10 validation carve-out of the training pairs, training, held-out
// evaluation. All randomness comes from named substreams of `seed`.
inline SupervisedSeedResult run_supervised_seed(const Corpus& corpus, const BinningScheme& bins,
                                                const ExperimentConfig& cfg, std::uint64_t seed,
                                                std::ostream* log = nullptr) {
  const SplitResult split = chronological_split(corpus, cfg.split_fraction);
  Rng train_pair_rng = substream(seed, "sup.pairs.train");
  Rng test_pair_rng = substream(seed, "sup.pairs.test");
  Rng split_rng = substream(seed, "sup.split");
  Rng init_rng = substream(seed, "sup.init");
  Rng train_rng = substream(seed, "sup.train");

  const PairDataset train_pairs =
      generate_pairs(std::span<const Headline>(split.train), bins, cfg.pairing_M, train_pair_rng);
  const PairDataset test_pairs =
      generate_pairs(std::span<const Headline>(split.test), bins, cfg.pairing_M, test_pair_rng);
  if (train_pairs.pairs.empty())
    throw DataError("supervised: training split yields no preference pairs");
  if (test_pairs.pairs.empty()) throw DataError("supervised: test split yields no preference pairs");
  PairSplit tv = split_pairs(train_pairs, cfg.pair_val_fraction, split_rng);

  NetConfig nc = cfg.net;
  if (nc.dim == 0) nc.dim = corpus.dim();
  if (nc.dim != corpus.dim()) throw ConfigError("supervised: network dimension does not match corpus");
  PreferenceNet net(nc);
  net.init(init_rng);
  const TrainResult tr = train(net, tv.train, tv.val, corpus, cfg.train, train_rng, log);

  SupervisedSeedResult out;
  out.seed = seed;
  out.n_train_pairs = tv.train.pairs.size();
  out.n_val_pairs = tv.val.pairs.size();
  out.n_test_pairs = test_pairs.pairs.size();
  out.best_epoch = tr.best_epoch;
  out.monitored_train_loss = tr.monitored_train_loss;
  out.report = evaluate(net, test_pairs, corpus, bins);
  return out;
}

struct SupervisedSummary {
  std::vector<SupervisedSeedResult> per_seed;  // ascending seed
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double weighted_accuracy_mean = 0.0;
  double weighted_accuracy_std = 0.0;
  std::string per_seed_csv;
  std::string aggregate_csv;
};

inline SupervisedSummary run_supervised(const Corpus& corpus, const ExperimentConfig& cfg,
                                        std::ostream* log = nullptr) {
  const BinningScheme bins{cfg.rank_bounds};
  detail::ensure_out_dir(cfg.out_dir);

  SupervisedSummary summary;
  summary.per_seed.resize(cfg.seeds.size());
  std::mutex log_mu;
  detail::run_tasks(cfg.seeds.size(), cfg.workers, [&](std::size_t i) {
    summary.per_seed[i] = run_supervised_seed(corpus, bins, cfg, cfg.seeds[i]);
    if (log) {
      std::lock_guard<std::mutex> lock(log_mu);
      (*log) << "[supervised] seed " << cfg.seeds[i] << ": accuracy "
             << fmt_double(summary.per_seed[i].report.accuracy) << ", weighted "
             << fmt_double(summary.per_seed[i].report.weighted_accuracy) << "\n";
    }
  });

  std::vector<double> accs, waccs;
  for (const SupervisedSeedResult& r : summary.per_seed) {
    accs.push_back(r.report.accuracy);
    waccs.push_back(r.report.weighted_accuracy);
  }
  summary.accuracy_mean = mean_of(accs);
  summary.accuracy_std = sample_std(accs);
  summary.weighted_accuracy_mean = mean_of(waccs);
  summary.weighted_accuracy_std = sample_std(waccs);

  // Per-seed table: one row per replicate, plus per-rank accuracies
  // ("nan" marks ranks absent from the test pairs).
  summary.per_seed_csv = cfg.out_dir + "/supervised_per_seed.csv";
  std::vector<std::string> header = {"seed",        "accuracy",   "weighted_accuracy",
                                     "n_train_pairs", "n_val_pairs", "n_test_pairs",
                                     "best_epoch",  "monitor"};
  for (std::size_t k = 0; k < bins.num_ranks(); ++k) header.push_back("rank_accuracy_" + std::to_string(k));
  CsvWriter per_seed(summary.per_seed_csv, header);
  for (const SupervisedSeedResult& r : summary.per_seed) {
    std::vector<std::string> row = {fmt_int(r.seed),
                                    fmt_double(r.report.accuracy),
                                    fmt_double(r.report.weighted_accuracy),
                                    fmt_int(r.n_train_pairs),
                                    fmt_int(r.n_val_pairs),
                                    fmt_int(r.n_test_pairs),
                                    fmt_int(r.best_epoch),
                                    r.monitored_train_loss ? "train_loss" : "val_loss"};
    for (double a : r.report.rank_accuracy) row.push_back(fmt_double(a));
    per_seed.row(row);
  }
  per_seed.close();

  summary.aggregate_csv = cfg.out_dir + "/supervised_aggregate.csv";
  CsvWriter agg(summary.aggregate_csv,
                {"n_seeds", "accuracy_mean", "accuracy_std", "weighted_accuracy_mean",
                 "weighted_accuracy_std"});
  agg.row({fmt_int(summary.per_seed.size()), fmt_double(summary.accuracy_mean),
           fmt_double(summary.accuracy_std), fmt_double(summary.weighted_accuracy_mean),
           fmt_double(summary.weighted_accuracy_std)});
  agg.close();
  return summary;
}

// ---------------------------------------------------------------- online

inline constexpr const char* kHistorySizedBaseline = "supervised-equivalent";

struct HistorySizedBaseline {
  std::uint64_t seed = 0;
  std::size_t n_history = 0;
  std::size_t n_pairs = 0;
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  double weighted_accuracy = std::numeric_limits<double>::quiet_NaN();
};

// Static comparison model for the accuracy-over-time series: trained once on
// a uniform random sample of pre-cutoff headlines, sized like the serving
// history the online policies accumulate (warm-up plus arrivals), so the
// curves answer "what did interaction buy over plain supervised training on
// as much data".
inline HistorySizedBaseline run_history_sized_baseline(const Corpus& corpus,
                                                       const BinningScheme& bins,
                                                       const ExperimentConfig& cfg,
                                                       std::uint64_t seed,
                                                       std::size_t history_size, int cutoff_day,
                                                       const PairDataset& eval_pairs,
                                                       std::ostream* log = nullptr) {
  std::vector<const Headline*> pool;
  for (const Headline& h : corpus)
    if (h.day <= cutoff_day) pool.push_back(&h);
  std::sort(pool.begin(), pool.end(),
            [](const Headline* a, const Headline* b) { return a->id < b->id; });
  if (pool.empty()) throw DataError("baseline: no headlines on or before the cutoff day");

  HistorySizedBaseline out;
  out.seed = seed;
  out.n_history = std::min(history_size, pool.size());

  Rng sample_rng = substream(seed, "supeq.sample");
  std::vector<IdClicks> hist;
  for (std::size_t idx : sample_rng.sample_indices(pool.size(), out.n_history))
    hist.push_back({pool[idx]->id, pool[idx]->clicks});

  Rng pair_rng = substream(seed, "supeq.pairs");
  const PairDataset ds =
      generate_pairs(std::span<const IdClicks>(hist), bins, cfg.sim.pairing_M, pair_rng);
  out.n_pairs = ds.pairs.size();
  if (ds.pairs.empty()) return out;  // accuracy stays NaN: single-rank sample

  PairDataset train_split = ds, val_split;
  if (ds.pairs.size() >= cfg.sim.min_pairs_for_validation &&
      cfg.train.validation_fraction > 0.0) {
    Rng split_rng = substream(seed, "supeq.split");
    PairSplit s = split_pairs(ds, cfg.train.validation_fraction, split_rng);
    train_split = std::move(s.train);
    val_split = std::move(s.val);
  }

  NetConfig nc = cfg.sim.net;
  if (nc.dim == 0) nc.dim = corpus.dim();
  PreferenceNet net(nc);
  Rng init_rng = substream(seed, "supeq.init");
  net.init(init_rng);
  Rng train_rng = substream(seed, "supeq.train");
  train(net, train_split, val_split, corpus, cfg.train, train_rng, log);

  const EvalReport rep = evaluate(net, eval_pairs, corpus, bins);
  out.accuracy = rep.accuracy;
  out.weighted_accuracy = rep.weighted_accuracy;
  return out;
}

struct OnlinePolicyAggregate {
  Policy policy = Policy::Random;
  std::size_t n_seeds = 0;
  double total_clicks_mean = 0.0;
  double total_clicks_std = 0.0;
  double normalized_clicks_mean = 0.0;
  double normalized_clicks_std = 0.0;
};

struct OnlineSummary {
  std::vector<std::uint64_t> seeds;
  std::vector<Policy> policies;  // name-sorted
  std::size_t serving_days = 0;
  std::vector<OnlinePolicyAggregate> aggregates;         // one per policy
  std::vector<HistorySizedBaseline> baselines;           // one per seed
  std::vector<SimulationResult> runs;                    // seed-major, policy-minor
  std::string trajectory_csv;
  std::string accuracy_csv;
  std::string aggregate_csv;
};

inline OnlineSummary run_online(const Corpus& corpus, const ExperimentConfig& cfg,
                                std::ostream* log = nullptr) {
  const BinningScheme bins{cfg.rank_bounds};
  detail::ensure_out_dir(cfg.out_dir);

  OnlineSummary summary;
  summary.seeds = cfg.seeds;
  summary.policies = cfg.policies;
  std::sort(summary.policies.begin(), summary.policies.end(), [](Policy a, Policy b) {
    return std::string(to_string(a)) < std::string(to_string(b));
  });
  summary.policies.erase(std::unique(summary.policies.begin(), summary.policies.end()),
                         summary.policies.end());

  // The accuracy series needs a fixed cutoff and per-seed evaluation pairs
  // drawn from the headlines the online phase never serves for training.
  const SplitResult split = chronological_split(corpus, cfg.split_fraction);
  const int cutoff_day =
      cfg.sim.eval_cutoff_day ? *cfg.sim.eval_cutoff_day : split.test.front().day - 1;
  const bool any_tracked = std::any_of(summary.policies.begin(), summary.policies.end(),
                                       [](Policy p) { return p != Policy::OracleBest &&
                                                             p != Policy::OracleSecond; });
  std::vector<PairDataset> eval_pairs(cfg.seeds.size());
  if (any_tracked) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
      Rng rng = substream(cfg.seeds[i], "eval.pairs");
      eval_pairs[i] =
          generate_pairs(std::span<const Headline>(split.test), bins, cfg.pairing_M, rng);
      if (eval_pairs[i].pairs.empty())
        throw DataError("online: test split yields no evaluation pairs");
    }
  }

  const std::size_t n_policies = summary.policies.size();
  summary.runs.resize(cfg.seeds.size() * n_policies);
  std::mutex log_mu;
  detail::run_tasks(summary.runs.size(), cfg.workers, [&](std::size_t t) {
    const std::size_t si = t / n_policies;
    const Policy policy = summary.policies[t % n_policies];
    SimulationConfig scfg = cfg.sim;
    scfg.policy = policy;
    scfg.rank_bounds = cfg.rank_bounds;
    scfg.eval_cutoff_day = cutoff_day;
    // Oracles are clairvoyant reference curves: no model to track. Random
    // keeps a tracked model so its accuracy-over-time series exists even
    // though selection ignores the scores.
    scfg.track_model = policy != Policy::OracleBest && policy != Policy::OracleSecond;
    SimulationResult res = run_simulation(corpus, scfg, cfg.seeds[si],
                                          scfg.track_model ? &eval_pairs[si] : nullptr);
    res.final_model.reset();  // not needed downstream; keep memory flat
    summary.runs[t] = std::move(res);
    if (log) {
      std::lock_guard<std::mutex> lock(log_mu);
      (*log) << "[online] seed " << cfg.seeds[si] << " " << to_string(policy) << ": clicks "
             << fmt_double(total_clicks(summary.runs[t].trajectory)) << "\n";
    }
  });

  // History size is policy-independent (one pick per serving day, same
  // delivery schedule), so any tracked-model run of the seed pins it; fall
  // back to computing it from the first run's delivery log otherwise.
  summary.baselines.resize(cfg.seeds.size());
  if (any_tracked) {
    detail::run_tasks(cfg.seeds.size(), cfg.workers, [&](std::size_t si) {
      std::size_t history_size = 0;
      for (std::size_t pi = 0; pi < n_policies; ++pi) {
        const SimulationResult& r = summary.runs[si * n_policies + pi];
        history_size = std::max(history_size, r.final_history_size);
      }
      summary.baselines[si] =
          run_history_sized_baseline(corpus, bins, cfg, cfg.seeds[si], history_size, cutoff_day,
                                     eval_pairs[si]);
      if (log) {
        std::lock_guard<std::mutex> lock(log_mu);
        (*log) << "[online] seed " << cfg.seeds[si] << " " << kHistorySizedBaseline
               << ": accuracy " << fmt_double(summary.baselines[si].accuracy) << "\n";
      }
    });
  }

  if (!summary.runs.empty()) summary.serving_days = summary.runs.front().trajectory.size();

  // ---- trajectory.csv: one row per (seed, policy, serving day)
  summary.trajectory_csv = cfg.out_dir + "/trajectory.csv";
  CsvWriter traj(summary.trajectory_csv,
                 {"seed", "policy", "day", "chosen_id", "clicks", "best_clicks", "worst_clicks",
                  "n_candidates", "model_version", "n_delivered"});
  for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
    for (std::size_t pi = 0; pi < n_policies; ++pi) {
      const SimulationResult& res = summary.runs[si * n_policies + pi];
      std::size_t di = 0;  // deliveries are day-ordered; join on day
      for (const DayRecord& r : res.trajectory) {
        while (di < res.deliveries.size() && res.deliveries[di].day < r.day) ++di;
        const std::size_t delivered =
            di < res.deliveries.size() && res.deliveries[di].day == r.day
                ? res.deliveries[di].n_arrived
                : 0;
        traj.row({fmt_int(cfg.seeds[si]), to_string(summary.policies[pi]), fmt_int(r.day),
                  fmt_int(r.chosen_id), fmt_int(r.clicks), fmt_int(r.best_clicks),
                  fmt_int(r.worst_clicks), fmt_int(r.n_candidates), fmt_int(r.model_version),
                  fmt_int(delivered)});
      }
    }
  }
  traj.close();

  // ---- accuracy.csv: model accuracy over time for tracked policies, plus
  // the static history-sized baseline as a day-0 row per seed.
  summary.accuracy_csv = cfg.out_dir + "/accuracy.csv";
  CsvWriter acc(summary.accuracy_csv,
                {"seed", "policy", "day", "model_version", "accuracy", "weighted_accuracy"});
  for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
    for (std::size_t pi = 0; pi < n_policies; ++pi) {
      const SimulationResult& res = summary.runs[si * n_policies + pi];
      for (const AccuracyPoint& p : res.accuracy_series)
        acc.row({fmt_int(cfg.seeds[si]), to_string(summary.policies[pi]), fmt_int(p.day),
                 fmt_int(p.model_version), fmt_double(p.accuracy),
                 fmt_double(p.weighted_accuracy)});
    }
    if (any_tracked) {
      const HistorySizedBaseline& b = summary.baselines[si];
      acc.row({fmt_int(b.seed), kHistorySizedBaseline, "0", "0", fmt_double(b.accuracy),
               fmt_double(b.weighted_accuracy)});
    }
  }
  acc.close();

  // ---- online_aggregate.csv: click totals per policy across seeds
  summary.aggregate_csv = cfg.out_dir + "/online_aggregate.csv";
  CsvWriter agg(summary.aggregate_csv,
                {"policy", "n_seeds", "serving_days", "total_clicks_mean", "total_clicks_std",
                 "normalized_clicks_mean", "normalized_clicks_std"});
  for (std::size_t pi = 0; pi < n_policies; ++pi) {
    std::vector<double> totals, norms;
    for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
      const SimulationResult& res = summary.runs[si * n_policies + pi];
      totals.push_back(total_clicks(res.trajectory));
      norms.push_back(normalized_clicks(res.trajectory));
    }
    OnlinePolicyAggregate a;
    a.policy = summary.policies[pi];
    a.n_seeds = cfg.seeds.size();
    a.total_clicks_mean = mean_of(totals);
    a.total_clicks_std = sample_std(totals);
    a.normalized_clicks_mean = mean_of(norms);
    a.normalized_clicks_std = sample_std(norms);
    summary.aggregates.push_back(a);
    agg.row({to_string(a.policy), fmt_int(a.n_seeds), fmt_int(summary.serving_days),
             fmt_double(a.total_clicks_mean), fmt_double(a.total_clicks_std),
             fmt_double(a.normalized_clicks_mean), fmt_double(a.normalized_clicks_std)});
  }
  agg.close();
  return summary;
}

// ---------------------------------------------------------------- synth-gen

inline std::string run_synth_gen(const ExperimentConfig& cfg) {
  if (!cfg.corpus_path.empty())
    throw ConfigError("synth-gen: --corpus conflicts with generating a synthetic corpus");
  detail::ensure_out_dir(cfg.out_dir);
  const Corpus corpus = generate_synthetic(cfg.synthetic, cfg.data_seed);
  const std::string path = cfg.out_dir + "/synthetic.jsonl";
  write_corpus(corpus, path, "synthetic");
  return path;
}

}  // namespace prefrec
