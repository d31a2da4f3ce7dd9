#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "prefrec/common.hpp"
#include "prefrec/net.hpp"
#include "prefrec/rng.hpp"
#include "prefrec/types.hpp"

namespace prefrec {

enum class Policy { Random, Greedy, NeuralTs, OracleBest, OracleSecond };

inline const char* to_string(Policy p) {
  switch (p) {
    case Policy::Random: return "random";
    case Policy::Greedy: return "greedy";
    case Policy::NeuralTs: return "neural-ts";
    case Policy::OracleBest: return "oracle-best";
    case Policy::OracleSecond: return "oracle-second";
  }
  throw ConfigError("unknown policy value");
}

inline Policy parse_policy(const std::string& s) {
  if (s == "random") return Policy::Random;
  if (s == "greedy") return Policy::Greedy;
  if (s == "neural-ts") return Policy::NeuralTs;
  if (s == "oracle-best") return Policy::OracleBest;
  if (s == "oracle-second") return Policy::OracleSecond;
  throw ConfigError("unknown policy \"" + s + "\" (expected random, greedy, neural-ts, "
                    "oracle-best, or oracle-second)");
}

inline bool policy_needs_model(Policy p) {
  return p == Policy::Greedy || p == Policy::NeuralTs;
}

// All selectors break ties toward the lowest headline id, which makes every
// policy a pure function of its inputs (and its random draws).

inline const Headline* select_random(std::span<const Headline* const> candidates, Rng& rng) {
  if (candidates.empty()) throw DataError("select: no candidates");
  return candidates[static_cast<std::size_t>(rng.bounded(candidates.size()))];
}

inline const Headline* select_greedy(std::span<const Headline* const> candidates,
                                     const PreferenceNet& net) {
  if (candidates.empty()) throw DataError("select: no candidates");
  PreferenceNet::Scratch scratch;
  const Headline* best = nullptr;
  double best_score = 0.0;
  for (const Headline* h : candidates) {
    const double s = net.forward(h->embedding, scratch);
    if (!best || s > best_score || (s == best_score && h->id < best->id)) {
      best = h;
      best_score = s;
    }
  }
  return best;
}

inline const Headline* select_oracle_best(std::span<const Headline* const> candidates) {
  if (candidates.empty()) throw DataError("select: no candidates");
  const Headline* best = nullptr;
  for (const Headline* h : candidates) {
    if (!best || h->clicks > best->clicks || (h->clicks == best->clicks && h->id < best->id))
      best = h;
  }
  return best;
}

// The runner-up by click value: highest headline among those strictly below
// the best click count, lowest id on ties. When every candidate has the
// same click count there is no runner-up value, and the lowest id wins
// (matching what the best-oracle would pick).
inline const Headline* select_oracle_second(std::span<const Headline* const> candidates) {
  if (candidates.empty()) throw DataError("select: no candidates");
  const Headline* best = select_oracle_best(candidates);
  const Headline* second = nullptr;
  for (const Headline* h : candidates) {
    if (h->clicks >= best->clicks) continue;
    if (!second || h->clicks > second->clicks ||
        (h->clicks == second->clicks && h->id < second->id))
      second = h;
  }
  return second ? second : best;
}

// ------------------------------------------------------- Thompson sampling

// Diagonal-precision Thompson sampling on the scorer's parameter gradient:
// each candidate's score is perturbed with variance nu^2 * sum_j g_j^2/Z_j,
// where g is d(score)/d(params) at the candidate and Z the per-coordinate
// precision accumulated from previously chosen candidates' gradients.
struct NeuralTsState {
  double nu = 1.0;
  std::vector<double> precision;

  NeuralTsState(double nu_, double lambda, std::size_t n_params) : nu(nu_) {
    if (!(nu_ >= 0.0)) throw ConfigError("thompson: nu must be non-negative");
    if (!(lambda > 0.0)) throw ConfigError("thompson: lambda must be positive");
    precision.assign(n_params, lambda);
  }
};

inline double ts_variance(const std::vector<double>& grad, const std::vector<double>& precision,
                          double nu) {
  if (grad.size() != precision.size()) throw ConfigError("thompson: gradient size mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < grad.size(); ++j) s += grad[j] * grad[j] / precision[j];
  return nu * nu * s;
}

// Samples one score per candidate (one normal draw each, in candidate
// order), picks the argmax, then sharpens the precision with the chosen
// candidate's squared gradient. With nu = 0 this reduces exactly to the
// greedy selector while consuming the same random draws.
inline const Headline* select_neural_ts(std::span<const Headline* const> candidates,
                                        const PreferenceNet& net, NeuralTsState& state,
                                        Rng& rng) {
  if (candidates.empty()) throw DataError("select: no candidates");
  if (state.precision.size() != net.params.size())
    throw ConfigError("thompson: state does not match network");

  std::vector<std::vector<double>> grads(candidates.size());
  const Headline* best = nullptr;
  double best_sample = 0.0;
  std::size_t best_idx = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Headline* h = candidates[i];
    const double mean = net.score_and_gradient(h->embedding, grads[i]);
    const double sd = std::sqrt(ts_variance(grads[i], state.precision, state.nu));
    const double sample = mean + sd * rng.normal();
    if (!best || sample > best_sample || (sample == best_sample && h->id < best->id)) {
      best = h;
      best_sample = sample;
      best_idx = i;
    }
  }
  const std::vector<double>& g = grads[best_idx];
  for (std::size_t j = 0; j < g.size(); ++j) state.precision[j] += g[j] * g[j];
  return best;
}

}  // namespace prefrec
