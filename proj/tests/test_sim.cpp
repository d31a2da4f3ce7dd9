#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "prefrec/pairs.hpp"
#include "prefrec/sim.hpp"
#include "prefrec/types.hpp"

namespace prefrec {
namespace {

// Small corpus with `per_day` headlines on each of `n_days` consecutive
// days. Clicks follow exp(5 + 2.5*x0), so they span several engagement
// ranks and are monotone in the first embedding coordinate.
Corpus sim_corpus(int n_days, int per_day, int dim = 4, std::uint64_t seed = 303) {
  Rng rng(seed);
  std::vector<Headline> hs;
  for (int d = 0; d < n_days; ++d) {
    for (int j = 0; j < per_day; ++j) {
      Headline h;
      h.id = static_cast<std::int64_t>(d * per_day + j);
      h.day = d;
      h.embedding.resize(dim);
      for (double& v : h.embedding) v = rng.normal();
      h.clicks = std::llround(std::exp(5.0 + 2.5 * h.embedding[0]));
      hs.push_back(std::move(h));
    }
  }
  return Corpus(std::move(hs));
}

SimulationConfig small_cfg() {
  SimulationConfig cfg;
  cfg.warmup_window_days = 5;
  cfg.warmup_sample_size = 15;
  cfg.feedback_delay_days = 2;
  cfg.net = NetConfig{.dim = 0, .hidden = 4, .blocks = 1};
  cfg.initial_train.max_epochs = 4;
  cfg.initial_train.batch_size = 16;
  cfg.retrain.max_epochs = 2;
  cfg.retrain.batch_size = 16;
  return cfg;
}

TEST(Simulation, TrajectoryCoversEveryServingDay) {
  const Corpus corpus = sim_corpus(15, 5);
  const SimulationConfig cfg = small_cfg();
  const SimulationResult res = run_simulation(corpus, cfg, 11);

  // Days 5..14 all publish candidates, so each produces one record.
  ASSERT_EQ(res.trajectory.size(), 10u);
  for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
    const DayRecord& r = res.trajectory[i];
    EXPECT_EQ(r.day, 5 + static_cast<int>(i));
    EXPECT_EQ(r.n_candidates, 5u);

    // The chosen headline belongs to that day and the recorded clicks and
    // candidate extremes match the corpus.
    std::int64_t best = -1, worst = -1;
    bool found = false;
    for (const Headline& h : corpus) {
      if (h.day != r.day) continue;
      best = best < 0 ? h.clicks : std::max(best, h.clicks);
      worst = worst < 0 ? h.clicks : std::min(worst, h.clicks);
      if (h.id == r.chosen_id) {
        found = true;
        EXPECT_EQ(h.clicks, r.clicks);
      }
    }
    EXPECT_TRUE(found);
    EXPECT_EQ(r.best_clicks, best);
    EXPECT_EQ(r.worst_clicks, worst);
    EXPECT_GE(r.clicks, r.worst_clicks);
    EXPECT_LE(r.clicks, r.best_clicks);
  }

  // Warm-up history: the requested number of distinct pre-window headlines.
  EXPECT_EQ(res.warmup_ids.size(), 15u);
  EXPECT_TRUE(std::is_sorted(res.warmup_ids.begin(), res.warmup_ids.end()));
  std::set<std::int64_t> distinct(res.warmup_ids.begin(), res.warmup_ids.end());
  EXPECT_EQ(distinct.size(), res.warmup_ids.size());
  for (std::int64_t id : res.warmup_ids) EXPECT_LT(corpus.by_id(id).day, 5);
}

TEST(Simulation, FeedbackArrivesExactlyDelayDaysLater) {
  const Corpus corpus = sim_corpus(16, 4);
  SimulationConfig cfg = small_cfg();
  cfg.feedback_delay_days = 3;
  const SimulationResult res = run_simulation(corpus, cfg, 21);

  // Every selection on day t, t + 3 <= 15, arrives on day t + 3; later
  // selections never make it back inside the horizon.
  std::map<int, std::size_t> expected;  // arrival day -> count
  std::size_t expected_total = 0;
  for (const DayRecord& r : res.trajectory) {
    if (r.day + 3 <= 15) {
      expected[r.day + 3]++;
      expected_total++;
    }
  }
  ASSERT_EQ(res.deliveries.size(), expected.size());
  for (const DeliveryRecord& d : res.deliveries) {
    ASSERT_TRUE(expected.count(d.day)) << "unexpected arrival day " << d.day;
    EXPECT_EQ(d.n_arrived, expected[d.day]);
  }
  EXPECT_EQ(res.final_history_size, cfg.warmup_sample_size + expected_total);

  // Selections on the last `delay` days are still pending at the horizon.
  EXPECT_LT(expected_total, res.trajectory.size());
  EXPECT_EQ(res.trajectory.size() - expected_total, 3u);
}

TEST(Simulation, ModelVersionLagsSelectionsByTheDelay) {
  const Corpus corpus = sim_corpus(16, 4);
  SimulationConfig cfg = small_cfg();
  cfg.feedback_delay_days = 3;
  const SimulationResult res = run_simulation(corpus, cfg, 21);

  // Selection happens before same-day arrivals are folded in, so the first
  // 1 + delay serving days still use the warm-up model (version 0); after
  // that each day's arrival triggers exactly one retrain.
  for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
    const std::size_t want = i <= 3 ? 0 : i - 3;
    EXPECT_EQ(res.trajectory[i].model_version, want) << "day index " << i;
  }
  EXPECT_EQ(res.final_model_version, res.deliveries.size());
  ASSERT_TRUE(res.final_model.has_value());
}

TEST(Simulation, ZeroDelayDeliversOnTheSelectionDay) {
  const Corpus corpus = sim_corpus(12, 4);
  SimulationConfig cfg = small_cfg();
  cfg.feedback_delay_days = 0;
  const SimulationResult res = run_simulation(corpus, cfg, 5);

  ASSERT_EQ(res.deliveries.size(), res.trajectory.size());
  for (std::size_t i = 0; i < res.deliveries.size(); ++i) {
    EXPECT_EQ(res.deliveries[i].day, res.trajectory[i].day);
    EXPECT_EQ(res.deliveries[i].n_arrived, 1u);
  }
  EXPECT_EQ(res.final_history_size, cfg.warmup_sample_size + res.trajectory.size());

  // Even with zero delay the day's own selection cannot see its own
  // feedback: version increments only show up the following day.
  for (std::size_t i = 0; i < res.trajectory.size(); ++i)
    EXPECT_EQ(res.trajectory[i].model_version, i);
}

TEST(Simulation, DeterministicPerSeedDistinctAcrossSeeds) {
  const Corpus corpus = sim_corpus(14, 5);
  SimulationConfig cfg = small_cfg();
  cfg.policy = Policy::NeuralTs;  // exercises the policy stream too

  const SimulationResult a = run_simulation(corpus, cfg, 42);
  const SimulationResult b = run_simulation(corpus, cfg, 42);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    EXPECT_EQ(a.trajectory[i].chosen_id, b.trajectory[i].chosen_id);
    EXPECT_EQ(a.trajectory[i].model_version, b.trajectory[i].model_version);
  }
  EXPECT_EQ(a.warmup_ids, b.warmup_ids);
  ASSERT_TRUE(a.final_model && b.final_model);
  EXPECT_EQ(a.final_model->params, b.final_model->params);
  EXPECT_EQ(a.final_model->running, b.final_model->running);

  const SimulationResult c = run_simulation(corpus, cfg, 43);
  bool differs = a.warmup_ids != c.warmup_ids;
  for (std::size_t i = 0; !differs && i < a.trajectory.size(); ++i)
    differs = a.trajectory[i].chosen_id != c.trajectory[i].chosen_id;
  differs = differs || a.final_model->params != c.final_model->params;
  EXPECT_TRUE(differs);
}

TEST(Simulation, OraclePoliciesBracketTheScore) {
  const Corpus corpus = sim_corpus(15, 5);
  SimulationConfig cfg = small_cfg();
  cfg.track_model = false;

  cfg.policy = Policy::OracleBest;
  const SimulationResult top = run_simulation(corpus, cfg, 9);
  for (const DayRecord& r : top.trajectory) EXPECT_EQ(r.clicks, r.best_clicks);
  EXPECT_DOUBLE_EQ(normalized_clicks(top.trajectory),
                   static_cast<double>(top.trajectory.size()));
  EXPECT_EQ(top.final_model_version, 0u);
  EXPECT_FALSE(top.final_model.has_value());
  EXPECT_TRUE(top.accuracy_series.empty());

  cfg.policy = Policy::OracleSecond;
  const SimulationResult second = run_simulation(corpus, cfg, 9);
  ASSERT_EQ(second.trajectory.size(), top.trajectory.size());
  double top_sum = 0.0, second_sum = 0.0;
  for (std::size_t i = 0; i < second.trajectory.size(); ++i) {
    const DayRecord& r = second.trajectory[i];
    EXPECT_LE(r.clicks, r.best_clicks);
    // Independent recomputation of the runner-up click count for the day.
    std::int64_t runner = -1;
    for (const Headline& h : corpus)
      if (h.day == r.day && h.clicks < r.best_clicks) runner = std::max(runner, h.clicks);
    ASSERT_GE(runner, 0) << "day " << r.day << " has no strictly-lower candidate";
    EXPECT_EQ(r.clicks, runner);
    top_sum += static_cast<double>(top.trajectory[i].clicks);
    second_sum += static_cast<double>(r.clicks);
  }
  EXPECT_LT(second_sum, top_sum);
  EXPECT_DOUBLE_EQ(total_clicks(second.trajectory), second_sum);
}

TEST(Simulation, ScoreHelpersMatchHandComputation) {
  std::vector<DayRecord> t(3);
  t[0] = {.day = 1, .chosen_id = 0, .clicks = 30, .best_clicks = 40, .worst_clicks = 20};
  t[1] = {.day = 2, .chosen_id = 1, .clicks = 7, .best_clicks = 7, .worst_clicks = 7};
  t[2] = {.day = 3, .chosen_id = 2, .clicks = 10, .best_clicks = 50, .worst_clicks = 10};
  EXPECT_DOUBLE_EQ(total_clicks(t), 47.0);
  // (30-20)/(40-20) + 1 (degenerate day) + 0
  EXPECT_DOUBLE_EQ(normalized_clicks(t), 1.5);
}

TEST(Simulation, UntrackedModelPoliciesSkipTraining) {
  const Corpus corpus = sim_corpus(12, 4);
  SimulationConfig cfg = small_cfg();
  cfg.policy = Policy::Random;
  cfg.track_model = false;
  const SimulationResult res = run_simulation(corpus, cfg, 3);
  EXPECT_FALSE(res.final_model.has_value());
  EXPECT_EQ(res.final_model_version, 0u);
  for (const DayRecord& r : res.trajectory) EXPECT_EQ(r.model_version, 0u);
  // Feedback still queues and arrives; only the model is skipped.
  EXPECT_GT(res.deliveries.size(), 0u);

  cfg.policy = Policy::Greedy;
  EXPECT_THROW(run_simulation(corpus, cfg, 3), ConfigError);
  cfg.policy = Policy::NeuralTs;
  EXPECT_THROW(run_simulation(corpus, cfg, 3), ConfigError);
}

TEST(Simulation, AccuracySeriesStartsAtWarmupAndStopsAtCutoff) {
  const Corpus corpus = sim_corpus(15, 5);
  SimulationConfig cfg = small_cfg();
  cfg.eval_cutoff_day = 9;

  Rng pair_rng(777);
  const PairDataset eval_pairs = generate_pairs(corpus, BinningScheme{cfg.rank_bounds}, 1, pair_rng);
  ASSERT_FALSE(eval_pairs.pairs.empty());

  const SimulationResult res = run_simulation(corpus, cfg, 31, &eval_pairs);
  ASSERT_FALSE(res.accuracy_series.empty());

  // First point: the warm-up model, tagged day 0 / version 0.
  EXPECT_EQ(res.accuracy_series.front().day, 0);
  EXPECT_EQ(res.accuracy_series.front().model_version, 0u);

  for (std::size_t i = 0; i < res.accuracy_series.size(); ++i) {
    const AccuracyPoint& p = res.accuracy_series[i];
    EXPECT_LE(p.day, 9);
    EXPECT_GE(p.accuracy, 0.0);
    EXPECT_LE(p.accuracy, 1.0);
    EXPECT_GE(p.weighted_accuracy, 0.0);
    EXPECT_LE(p.weighted_accuracy, 1.0);
    if (i > 0) {
      EXPECT_GT(p.day, res.accuracy_series[i - 1].day);
      EXPECT_GT(p.model_version, res.accuracy_series[i - 1].model_version);
      EXPECT_GE(p.day, cfg.warmup_window_days);
    }
  }

  // Retrains keep happening after the cutoff even though no points are added.
  EXPECT_GT(res.final_model_version, res.accuracy_series.back().model_version);

  // Without evaluation pairs there is no series at all.
  const SimulationResult bare = run_simulation(corpus, cfg, 31);
  EXPECT_TRUE(bare.accuracy_series.empty());
}

TEST(Simulation, ColdStartRetrainsDivergeFromWarmStart) {
  const Corpus corpus = sim_corpus(12, 4);
  SimulationConfig cfg = small_cfg();
  const SimulationResult warm = run_simulation(corpus, cfg, 13);
  cfg.warm_start = false;
  const SimulationResult cold = run_simulation(corpus, cfg, 13);
  ASSERT_TRUE(warm.final_model && cold.final_model);
  EXPECT_NE(warm.final_model->params, cold.final_model->params);
  // The serving schedule itself is unchanged.
  EXPECT_EQ(warm.trajectory.size(), cold.trajectory.size());
}

TEST(Simulation, ValidatesConfigurationAndData) {
  const Corpus corpus = sim_corpus(12, 4);
  {
    SimulationConfig cfg = small_cfg();
    cfg.warmup_sample_size = 1000;  // pool only has 20
    EXPECT_THROW(run_simulation(corpus, cfg, 1), DataError);
  }
  {
    SimulationConfig cfg = small_cfg();
    cfg.warmup_window_days = 0;
    EXPECT_THROW(run_simulation(corpus, cfg, 1), ConfigError);
  }
  {
    SimulationConfig cfg = small_cfg();
    cfg.feedback_delay_days = -1;
    EXPECT_THROW(run_simulation(corpus, cfg, 1), ConfigError);
  }
  {
    SimulationConfig cfg = small_cfg();
    cfg.net.dim = 3;  // corpus embeddings are 4-dimensional
    EXPECT_THROW(run_simulation(corpus, cfg, 1), ConfigError);
  }
  {
    SimulationConfig cfg = small_cfg();
    EXPECT_THROW(run_simulation(Corpus(std::vector<Headline>{}), cfg, 1), DataError);
  }
}

}  // namespace
}  // namespace prefrec
