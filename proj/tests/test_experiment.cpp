#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "prefrec/experiment.hpp"
#include "prefrec/plots.hpp"

namespace prefrec {
namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  EXPECT_TRUE(in.good()) << path;
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string make_temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("prefrec_exp_" + tag + "_" + std::to_string(counter.fetch_add(1)));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

Corpus exp_corpus(int n_days, int per_day, int dim = 4, std::uint64_t seed = 404) {
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

ExperimentConfig small_supervised_cfg(const std::string& out) {
  ExperimentConfig cfg;
  cfg.mode = Mode::Supervised;
  cfg.seeds = {0, 1, 2};
  cfg.net = NetConfig{.dim = 0, .hidden = 4, .blocks = 1};
  cfg.train.max_epochs = 4;
  cfg.train.batch_size = 32;
  cfg.out_dir = out;
  return cfg;
}

ExperimentConfig small_online_cfg(const std::string& out) {
  ExperimentConfig cfg;
  cfg.mode = Mode::Online;
  cfg.seeds = {0, 1};
  cfg.policies = {Policy::Random, Policy::Greedy, Policy::OracleBest};
  cfg.net = NetConfig{.dim = 0, .hidden = 4, .blocks = 1};
  cfg.sim.net = cfg.net;
  cfg.sim.warmup_window_days = 5;
  cfg.sim.warmup_sample_size = 15;
  cfg.sim.feedback_delay_days = 2;
  cfg.sim.initial_train.max_epochs = 3;
  cfg.sim.initial_train.batch_size = 16;
  cfg.sim.retrain.max_epochs = 2;
  cfg.sim.retrain.batch_size = 16;
  cfg.train.max_epochs = 3;        // history-sized baseline
  cfg.train.batch_size = 16;
  cfg.out_dir = out;
  return cfg;
}

TEST(CsvFormat, ShortestRoundTripDoubles) {
  EXPECT_EQ(fmt_double(0.1), "0.1");
  EXPECT_EQ(fmt_double(42.0), "42");
  EXPECT_EQ(fmt_double(-0.0), "-0");
  for (double v : {1.0 / 3.0, 6.02214076e23, -2.5e-308, 84.48, 0.0}) {
    const std::string s = fmt_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, v) << s;
  }
  EXPECT_EQ(fmt_double(std::numeric_limits<double>::quiet_NaN()), "nan");
}

TEST(CsvFormat, WriterQuotesAndReaderRestores) {
  const std::string dir = make_temp_dir("csv");
  const std::string path = dir + "/t.csv";
  {
    CsvWriter w(path, {"a", "b", "c"});
    w.row({"plain", "with,comma", "with \"quote\""});
    w.row({"line\nbreak", "", "trailing"});
    EXPECT_THROW(w.row({"too", "few"}), ConfigError);
    w.close();
  }
  const CsvTable t = read_csv(path);
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b", "c"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "with,comma");
  EXPECT_EQ(t.rows[0][2], "with \"quote\"");
  EXPECT_EQ(t.rows[1][0], "line\nbreak");
  EXPECT_EQ(t.rows[1][1], "");
  EXPECT_EQ(t.col("b"), 1u);
  EXPECT_THROW(t.col("missing"), ParseError);
  fs::remove_all(dir);
}

TEST(CsvFormat, ReaderRejectsMalformedInput) {
  const std::string dir = make_temp_dir("csvbad");
  auto write_raw = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir + "/" + name, std::ios::binary);
    out << body;
    return dir + "/" + name;
  };
  EXPECT_THROW(read_csv(dir + "/absent.csv"), DataError);
  EXPECT_THROW(read_csv(write_raw("ragged.csv", "a,b\n1,2,3\n")), ParseError);
  EXPECT_THROW(read_csv(write_raw("stray.csv", "a,b\nx\"y,2\n")), ParseError);
  EXPECT_THROW(read_csv(write_raw("open.csv", "a,b\n\"unterminated,2\n")), ParseError);
  EXPECT_THROW(read_csv(write_raw("empty.csv", "")), ParseError);
  // CRLF input and a blank trailing line are tolerated.
  const CsvTable t = read_csv(write_raw("crlf.csv", "a,b\r\n1,2\r\n\r\n"));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][1], "2");
  fs::remove_all(dir);
}

TEST(SeedList, ParsesRangesAndLists) {
  EXPECT_EQ(parse_seed_list("0..3"), (std::vector<std::uint64_t>{0, 1, 2, 3}));
  EXPECT_EQ(parse_seed_list("7"), (std::vector<std::uint64_t>{7}));
  EXPECT_EQ(parse_seed_list("1,5,2..4"), (std::vector<std::uint64_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(parse_seed_list("3,3,1"), (std::vector<std::uint64_t>{1, 3}));
  EXPECT_THROW(parse_seed_list(""), ConfigError);
  EXPECT_THROW(parse_seed_list("a"), ConfigError);
  EXPECT_THROW(parse_seed_list("5..1"), ConfigError);
  EXPECT_THROW(parse_seed_list("1,,2"), ConfigError);
}

TEST(PolicyList, ParsesSortsAndDeduplicates) {
  const std::vector<Policy> got = parse_policy_list("random,greedy,random,oracle-best");
  EXPECT_EQ(got, (std::vector<Policy>{Policy::Greedy, Policy::OracleBest, Policy::Random}));
  EXPECT_THROW(parse_policy_list("ucb"), ConfigError);
  EXPECT_THROW(parse_policy_list(""), ConfigError);
}

TEST(ModeNames, RoundTrip) {
  for (Mode m : {Mode::Supervised, Mode::Online, Mode::SynthGen, Mode::Plot})
    EXPECT_EQ(parse_mode(to_string(m)), m);
  EXPECT_THROW(parse_mode("offline"), ConfigError);
}

TEST(WorkerPool, PropagatesFirstTaskError) {
  std::atomic<int> ran{0};
  EXPECT_THROW(detail::run_tasks(8, 4,
                                 [&](std::size_t i) {
                                   if (i == 3) throw DataError("task 3 exploded");
                                   ran.fetch_add(1);
                                 }),
               DataError);
  // Order of completions is free, but the pool must not swallow the error.
}

TEST(Experiment, RejectsConflictingDataSources) {
  ExperimentConfig cfg;
  cfg.corpus_path = "somewhere.jsonl";
  cfg.synthetic_requested = true;
  EXPECT_THROW(resolve_corpus(cfg), ConfigError);
}

TEST(Supervised, CsvMatchesReturnedSummaryAndRecomputedAggregates) {
  const Corpus corpus = exp_corpus(20, 8);
  const std::string dir = make_temp_dir("sup");
  const ExperimentConfig cfg = small_supervised_cfg(dir);
  const SupervisedSummary s = run_supervised(corpus, cfg);

  const CsvTable per_seed = read_csv(dir + "/supervised_per_seed.csv");
  ASSERT_EQ(per_seed.rows.size(), 3u);
  EXPECT_EQ(per_seed.header.size(), 8u + 7u);  // fixed columns + one per rank
  std::vector<double> accs, waccs;
  for (std::size_t i = 0; i < per_seed.rows.size(); ++i) {
    const auto& row = per_seed.rows[i];
    EXPECT_EQ(parse_csv_int(per_seed, row, per_seed.col("seed")),
              static_cast<std::int64_t>(cfg.seeds[i]));
    const double a = parse_csv_double(per_seed, row, per_seed.col("accuracy"));
    const double w = parse_csv_double(per_seed, row, per_seed.col("weighted_accuracy"));
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    EXPECT_EQ(a, s.per_seed[i].report.accuracy);  // shortest form parses back exactly
    accs.push_back(a);
    waccs.push_back(w);
    EXPECT_EQ(row[per_seed.col("monitor")], "val_loss");
  }

  // The aggregate row must equal a recomputation from the per-seed file.
  const CsvTable agg = read_csv(dir + "/supervised_aggregate.csv");
  ASSERT_EQ(agg.rows.size(), 1u);
  EXPECT_EQ(parse_csv_int(agg, agg.rows[0], agg.col("n_seeds")), 3);
  EXPECT_DOUBLE_EQ(parse_csv_double(agg, agg.rows[0], agg.col("accuracy_mean")), mean_of(accs));
  EXPECT_DOUBLE_EQ(parse_csv_double(agg, agg.rows[0], agg.col("accuracy_std")), sample_std(accs));
  EXPECT_DOUBLE_EQ(parse_csv_double(agg, agg.rows[0], agg.col("weighted_accuracy_mean")),
                   mean_of(waccs));
  EXPECT_DOUBLE_EQ(parse_csv_double(agg, agg.rows[0], agg.col("weighted_accuracy_std")),
                   sample_std(waccs));
  fs::remove_all(dir);
}

TEST(Supervised, SingleSeedAggregateHasZeroStd) {
  const Corpus corpus = exp_corpus(20, 8);
  const std::string dir = make_temp_dir("sup1");
  ExperimentConfig cfg = small_supervised_cfg(dir);
  cfg.seeds = {5};
  const SupervisedSummary s = run_supervised(corpus, cfg);
  EXPECT_EQ(s.accuracy_std, 0.0);
  EXPECT_EQ(s.accuracy_mean, s.per_seed[0].report.accuracy);
  const CsvTable agg = read_csv(dir + "/supervised_aggregate.csv");
  EXPECT_EQ(agg.rows[0][agg.col("accuracy_std")], "0");
  fs::remove_all(dir);
}

TEST(Supervised, RerunsProduceIdenticalBytes) {
  const Corpus corpus = exp_corpus(20, 8);
  const std::string dir_a = make_temp_dir("supA");
  const std::string dir_b = make_temp_dir("supB");
  ExperimentConfig cfg = small_supervised_cfg(dir_a);
  run_supervised(corpus, cfg);
  cfg.out_dir = dir_b;
  cfg.workers = 3;  // worker count must not leak into the bytes either
  run_supervised(corpus, cfg);
  EXPECT_EQ(read_file(dir_a + "/supervised_per_seed.csv"),
            read_file(dir_b + "/supervised_per_seed.csv"));
  EXPECT_EQ(read_file(dir_a + "/supervised_aggregate.csv"),
            read_file(dir_b + "/supervised_aggregate.csv"));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST(Online, CsvShapesWorkerInvarianceAndBaselineRows) {
  const Corpus corpus = exp_corpus(15, 5);
  const std::string dir_a = make_temp_dir("onA");
  const std::string dir_b = make_temp_dir("onB");
  ExperimentConfig cfg = small_online_cfg(dir_a);
  const OnlineSummary s = run_online(corpus, cfg);
  cfg.out_dir = dir_b;
  cfg.workers = 3;
  run_online(corpus, cfg);
  for (const char* name : {"trajectory.csv", "accuracy.csv", "online_aggregate.csv"})
    EXPECT_EQ(read_file(dir_a + "/" + name), read_file(dir_b + "/" + name)) << name;

  // 2 seeds x 3 policies x 10 serving days.
  EXPECT_EQ(s.serving_days, 10u);
  const CsvTable traj = read_csv(dir_a + "/trajectory.csv");
  EXPECT_EQ(traj.rows.size(), 60u);
  const std::size_t c_pol = traj.col("policy");
  const std::size_t c_clicks = traj.col("clicks");
  const std::size_t c_best = traj.col("best_clicks");
  const std::size_t c_worst = traj.col("worst_clicks");
  for (const auto& row : traj.rows) {
    const std::int64_t clicks = parse_csv_int(traj, row, c_clicks);
    EXPECT_LE(clicks, parse_csv_int(traj, row, c_best));
    EXPECT_GE(clicks, parse_csv_int(traj, row, c_worst));
    if (row[c_pol] == "oracle-best")
      EXPECT_EQ(clicks, parse_csv_int(traj, row, c_best));
  }

  // Accuracy series exist for the tracked policies; the clairvoyant oracle
  // has none; each seed contributes one static-baseline row at day 0.
  const CsvTable acc = read_csv(dir_a + "/accuracy.csv");
  std::set<std::string> acc_policies;
  std::size_t baseline_rows = 0;
  for (const auto& row : acc.rows) {
    acc_policies.insert(row[acc.col("policy")]);
    if (row[acc.col("policy")] == kHistorySizedBaseline) {
      ++baseline_rows;
      EXPECT_EQ(row[acc.col("day")], "0");
    }
  }
  EXPECT_TRUE(acc_policies.count("greedy"));
  EXPECT_TRUE(acc_policies.count("random"));
  EXPECT_FALSE(acc_policies.count("oracle-best"));
  EXPECT_EQ(baseline_rows, 2u);

  // Aggregate table: one row per policy in name order; the clairvoyant
  // oracle's normalized score is exactly the number of serving days.
  const CsvTable agg = read_csv(dir_a + "/online_aggregate.csv");
  ASSERT_EQ(agg.rows.size(), 3u);
  EXPECT_EQ(agg.rows[0][agg.col("policy")], "greedy");
  EXPECT_EQ(agg.rows[1][agg.col("policy")], "oracle-best");
  EXPECT_EQ(agg.rows[2][agg.col("policy")], "random");
  EXPECT_DOUBLE_EQ(parse_csv_double(agg, agg.rows[1], agg.col("normalized_clicks_mean")), 10.0);
  EXPECT_EQ(parse_csv_double(agg, agg.rows[1], agg.col("normalized_clicks_std")), 0.0);

  // Oracle dominance in totals, per construction of the reference policy.
  const double oracle_total = parse_csv_double(agg, agg.rows[1], agg.col("total_clicks_mean"));
  EXPECT_GE(oracle_total, parse_csv_double(agg, agg.rows[0], agg.col("total_clicks_mean")));
  EXPECT_GE(oracle_total, parse_csv_double(agg, agg.rows[2], agg.col("total_clicks_mean")));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST(Online, OracleOnlyRunsSkipAccuracyMachinery) {
  const Corpus corpus = exp_corpus(12, 4);
  const std::string dir = make_temp_dir("onOracle");
  ExperimentConfig cfg = small_online_cfg(dir);
  cfg.policies = {Policy::OracleBest, Policy::OracleSecond};
  const OnlineSummary s = run_online(corpus, cfg);
  EXPECT_EQ(s.baselines[0].n_pairs, 0u);  // never trained
  const CsvTable acc = read_csv(dir + "/accuracy.csv");
  EXPECT_TRUE(acc.rows.empty());
  fs::remove_all(dir);
}

TEST(Plots, EmitsThreeFiguresFromOnlineResults) {
  const Corpus corpus = exp_corpus(15, 5);
  const std::string dir = make_temp_dir("plots");
  ExperimentConfig cfg = small_online_cfg(dir);
  run_online(corpus, cfg);

  const std::vector<std::string> paths = emit_plots(dir);
  ASSERT_EQ(paths.size(), 3u);
  for (const std::string& p : paths) {
    const std::string svg = read_file(p);
    EXPECT_GT(svg.size(), 500u) << p;
    EXPECT_EQ(svg.rfind("<svg", 0), 0u) << p;
    EXPECT_NE(svg.find("</svg>"), std::string::npos) << p;
  }
  // Determinism extends to the figures.
  const std::string before = read_file(paths[0]);
  emit_plots(dir);
  EXPECT_EQ(read_file(paths[0]), before);
  fs::remove_all(dir);
}

TEST(Plots, MissingOrEmptyInputsAreNamedInErrors) {
  const std::string dir = make_temp_dir("plotsbad");
  try {
    emit_plots(dir);
    FAIL() << "expected missing trajectory.csv to throw";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("trajectory.csv"), std::string::npos) << e.what();
  }

  // An oracle-only run has trajectories but no accuracy rows.
  const Corpus corpus = exp_corpus(12, 4);
  ExperimentConfig cfg = small_online_cfg(dir);
  cfg.policies = {Policy::OracleBest};
  run_online(corpus, cfg);
  try {
    emit_plots(dir);
    FAIL() << "expected empty accuracy.csv to throw";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("accuracy.csv"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(SynthGen, WritesLoadableCorpus) {
  const std::string dir = make_temp_dir("synthgen");
  ExperimentConfig cfg;
  cfg.mode = Mode::SynthGen;
  cfg.synthetic.n_headlines = 120;
  cfg.synthetic.n_days = 30;
  cfg.synthetic.dim = 6;
  cfg.out_dir = dir;
  const std::string path = run_synth_gen(cfg);
  const Corpus corpus = load_corpus(path);
  EXPECT_EQ(corpus.size(), 120u);
  EXPECT_EQ(corpus.dim(), 6u);

  cfg.corpus_path = "clash.jsonl";
  EXPECT_THROW(run_synth_gen(cfg), ConfigError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace prefrec
