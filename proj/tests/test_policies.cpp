#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "prefrec/policies.hpp"
#include "prefrec/rng.hpp"
#include "prefrec/types.hpp"

namespace prefrec {
namespace {

std::vector<Headline> make_candidates(const std::vector<std::int64_t>& clicks, int dim = 2) {
  Rng rng(99);
  std::vector<Headline> out;
  for (std::size_t i = 0; i < clicks.size(); ++i) {
    Headline h;
    h.id = static_cast<std::int64_t>(10 * (i + 1));  // ids 10, 20, 30, ...
    h.clicks = clicks[i];
    h.day = 0;
    h.embedding.resize(dim);
    for (double& v : h.embedding) v = rng.normal();
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<const Headline*> ptrs(const std::vector<Headline>& hs) {
  std::vector<const Headline*> out;
  for (const Headline& h : hs) out.push_back(&h);
  return out;
}

// d=1, H=1 net whose inference score is 2*max(x, 0): input affine is the
// identity, both block affines are the identity, batch norms are neutral
// (gamma=1, beta=0, running mean 0, running var 1-eps so the divisor is
// exactly 1), and the head is the identity. The residual sum doubles the
// activation.
PreferenceNet ramp_net() {
  PreferenceNet net(NetConfig{.dim = 1, .hidden = 1, .blocks = 1});
  std::fill(net.params.begin(), net.params.end(), 0.0);
  net.params[net.w_in_off()] = 1.0;
  const auto& off = net.block_offsets()[0];
  net.params[off.A1] = 1.0;
  net.params[off.g1] = 1.0;
  net.params[off.A2] = 1.0;
  net.params[off.g2] = 1.0;
  net.params[net.head_w_off()] = 1.0;
  std::fill(net.running.begin(), net.running.end(), 0.0);
  net.running[off.v1] = 1.0 - PreferenceNet::kBnEps;
  net.running[off.v2] = 1.0 - PreferenceNet::kBnEps;
  return net;
}

TEST(PolicyNames, RoundTripAndValidation) {
  for (Policy p : {Policy::Random, Policy::Greedy, Policy::NeuralTs, Policy::OracleBest,
                   Policy::OracleSecond}) {
    EXPECT_EQ(parse_policy(to_string(p)), p);
  }
  EXPECT_STREQ(to_string(Policy::NeuralTs), "neural-ts");
  EXPECT_THROW(parse_policy("epsilon-greedy"), ConfigError);
  EXPECT_THROW(parse_policy(""), ConfigError);

  EXPECT_FALSE(policy_needs_model(Policy::Random));
  EXPECT_TRUE(policy_needs_model(Policy::Greedy));
  EXPECT_TRUE(policy_needs_model(Policy::NeuralTs));
  EXPECT_FALSE(policy_needs_model(Policy::OracleBest));
  EXPECT_FALSE(policy_needs_model(Policy::OracleSecond));
}

TEST(RandomPolicy, UniformOverCandidates) {
  const auto hs = make_candidates({1, 2, 3, 4, 5});
  const auto cand = ptrs(hs);
  Rng rng(7);
  std::vector<int> counts(cand.size(), 0);
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Headline* pick = select_random(cand, rng);
    counts[static_cast<std::size_t>(pick->id / 10 - 1)]++;
  }
  // Each cell is Binomial(20000, 1/5): sd ~ 56.6, so +/-250 is > 4 sigma.
  for (int c : counts) EXPECT_NEAR(c, n / 5, 250);

  EXPECT_THROW(select_random({}, rng), DataError);
}

TEST(GreedyPolicy, PicksHighestScoreLowestIdOnTies) {
  const PreferenceNet net = ramp_net();
  std::vector<Headline> hs = make_candidates({0, 0, 0}, 1);
  hs[0].embedding = {0.5};  // score 1.0
  hs[1].embedding = {2.0};  // score 4.0
  hs[2].embedding = {1.0};  // score 2.0
  EXPECT_EQ(select_greedy(ptrs(hs), net)->id, 20);

  hs[2].embedding = {2.0};  // ids 20 and 30 now tie at score 4.0
  EXPECT_EQ(select_greedy(ptrs(hs), net)->id, 20);

  hs[1].id = 31;  // tie is now 31 vs 30: the later candidate wins on id
  EXPECT_EQ(select_greedy(ptrs(hs), net)->id, 30);

  EXPECT_THROW(select_greedy({}, net), DataError);
}

TEST(OraclePolicies, BestAndRunnerUpSemantics) {
  {
    const auto hs = make_candidates({5, 9, 9, 2});
    EXPECT_EQ(select_oracle_best(ptrs(hs))->id, 20);    // first 9 by id
    EXPECT_EQ(select_oracle_second(ptrs(hs))->id, 10);  // 5 is the top value below 9
  }
  {
    const auto hs = make_candidates({1, 2, 3});
    EXPECT_EQ(select_oracle_best(ptrs(hs))->id, 30);
    EXPECT_EQ(select_oracle_second(ptrs(hs))->id, 20);
  }
  {
    // All candidates equal: no strictly-lower value exists, fall back to
    // the same headline the best-oracle picks.
    const auto hs = make_candidates({4, 4, 4});
    EXPECT_EQ(select_oracle_best(ptrs(hs))->id, 10);
    EXPECT_EQ(select_oracle_second(ptrs(hs))->id, 10);
  }
  {
    const auto hs = make_candidates({7});
    EXPECT_EQ(select_oracle_second(ptrs(hs))->id, 10);
  }
  {
    // Ties inside the runner-up value resolve to the lowest id.
    const auto hs = make_candidates({3, 9, 3});
    EXPECT_EQ(select_oracle_second(ptrs(hs))->id, 10);
  }
  EXPECT_THROW(select_oracle_best({}), DataError);
  EXPECT_THROW(select_oracle_second({}), DataError);
}

TEST(ThompsonSampling, VarianceMatchesHandComputation) {
  const std::vector<double> grad = {1.0, 2.0, 3.0};
  const std::vector<double> precision = {1.0, 4.0, 9.0};
  // nu^2 * (1/1 + 4/4 + 9/9) = 4 * 3
  EXPECT_DOUBLE_EQ(ts_variance(grad, precision, 2.0), 12.0);
  EXPECT_DOUBLE_EQ(ts_variance(grad, precision, 0.0), 0.0);
  EXPECT_THROW(ts_variance(grad, {1.0, 2.0}, 1.0), ConfigError);
}

TEST(ThompsonSampling, StateValidation) {
  EXPECT_THROW(NeuralTsState(-0.5, 1.0, 4), ConfigError);
  EXPECT_THROW(NeuralTsState(1.0, 0.0, 4), ConfigError);
  EXPECT_THROW(NeuralTsState(1.0, -1.0, 4), ConfigError);

  PreferenceNet net(NetConfig{.dim = 2, .hidden = 3, .blocks = 1});
  Rng rng(1);
  net.init(rng);
  NeuralTsState wrong(1.0, 1.0, net.params.size() + 1);
  const auto hs = make_candidates({1, 2});
  EXPECT_THROW(select_neural_ts(ptrs(hs), net, wrong, rng), ConfigError);
}

TEST(ThompsonSampling, ZeroNuMatchesGreedyAndConsumesSameDraws) {
  PreferenceNet net(NetConfig{.dim = 3, .hidden = 8, .blocks = 1});
  Rng init_rng(5);
  net.init(init_rng);
  const auto hs = make_candidates({1, 2, 3, 4, 5, 6}, 3);
  const auto cand = ptrs(hs);

  NeuralTsState state(0.0, 1.0, net.params.size());
  Rng used(123), reference(123);
  const Headline* ts_pick = select_neural_ts(cand, net, state, used);
  EXPECT_EQ(ts_pick->id, select_greedy(cand, net)->id);

  // One normal per candidate, drawn whether or not the noise is used.
  for (std::size_t i = 0; i < cand.size(); ++i) reference.normal();
  EXPECT_EQ(used.next_u64(), reference.next_u64());
}

TEST(ThompsonSampling, PrecisionSharpensWithChosenGradient) {
  PreferenceNet net(NetConfig{.dim = 2, .hidden = 4, .blocks = 1});
  Rng init_rng(11);
  net.init(init_rng);
  const auto hs = make_candidates({1, 2, 3}, 2);
  const auto cand = ptrs(hs);

  const double lambda = 2.5;
  NeuralTsState state(1.0, lambda, net.params.size());
  Rng rng(77);
  const Headline* pick = select_neural_ts(cand, net, state, rng);

  std::vector<double> g;
  net.score_and_gradient(pick->embedding, g);
  for (std::size_t j = 0; j < g.size(); ++j)
    EXPECT_DOUBLE_EQ(state.precision[j], lambda + g[j] * g[j]);

  // Repeatedly observing the same direction shrinks its sampled variance.
  const double var_before = ts_variance(g, std::vector<double>(g.size(), lambda), 1.0);
  const double var_after = ts_variance(g, state.precision, 1.0);
  EXPECT_LT(var_after, var_before);
}

}  // namespace
}  // namespace prefrec
