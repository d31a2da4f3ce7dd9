#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "prefrec/common.hpp"
#include "prefrec/rng.hpp"
#include "prefrec/types.hpp"

namespace prefrec {

// Synthetic corpus with the statistical signature of real engagement data:
// a hidden linear quality score drives clicks through a heavy-tailed
// monotone curve, so click counts span several orders of magnitude with the
// vast majority of headlines near the bottom and a handful of huge outliers.
struct SyntheticSpec {
  std::size_t n_headlines = 3305;
  std::size_t n_days = 692;
  std::size_t dim = 64;
  // Seed for the hidden scorer direction; kept separate from the corpus seed
  // so different corpora can share one latent preference rule.
  std::uint64_t latent_weight_seed = 7;
  // Log-space noise on clicks; 0 makes clicks a deterministic monotone
  // function of the latent score.
  double noise_scale = 0.15;
  // Tail exponent for click counts beyond the last rank bound.
  double pareto_alpha = 1.5;
  // Engagement-rank lower bounds and the click histogram the noiseless
  // curve is calibrated to reproduce (as proportions of the total).
  std::vector<std::int64_t> rank_bounds = {0, 100, 1000, 5000, 10000, 50000, 100000};
  std::vector<std::size_t> target_counts = {883, 1660, 583, 96, 60, 19, 4};
};

namespace detail {

// Monotone map from a standard-normal quality score q to expected clicks.
// Piecewise log-linear through knots (probit(c_k), log bound_{k+1}), where
// c_k is the target cumulative mass below bound_{k+1}: a score at the c_k
// quantile lands exactly on the k-th rank boundary, so the noiseless rank
// histogram reproduces the target proportions. Below the first knot the
// first segment extends leftward (clicks fall smoothly toward zero); above
// the last knot a survival-matched Pareto tail takes over, continuous at
// the joint.
class ClickCurve {
public:
  explicit ClickCurve(const SyntheticSpec& spec) : alpha_(spec.pareto_alpha) {
    const std::size_t K = spec.rank_bounds.size();
    if (K < 2) throw ConfigError("synthetic: need at least two rank bounds");
    if (spec.target_counts.size() != K)
      throw ConfigError("synthetic: target_counts must match rank_bounds");
    if (!(alpha_ > 0.0)) throw ConfigError("synthetic: tail exponent must be positive");
    for (std::size_t k = 0; k + 1 < K; ++k) {
      if (spec.rank_bounds[k + 1] <= std::max<std::int64_t>(spec.rank_bounds[k], 0))
        throw ConfigError("synthetic: rank bounds must be positive and increasing");
    }
    for (std::size_t c : spec.target_counts) {
      if (c == 0) throw ConfigError("synthetic: every rank needs positive target mass");
    }

    const double total = static_cast<double>(
        std::accumulate(spec.target_counts.begin(), spec.target_counts.end(), std::size_t{0}));
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      cum += static_cast<double>(spec.target_counts[k]);
      knots_u_.push_back(probit(cum / total));
      knots_log_.push_back(std::log(static_cast<double>(spec.rank_bounds[k + 1])));
    }
    tail_mass_ = 1.0 - cum / total;
    tail_bound_ = static_cast<double>(spec.rank_bounds.back());
  }

  double operator()(double q) const {
    if (q > knots_u_.back()) {
      const double surv = normal_cdf(-q);
      return tail_bound_ * std::pow(surv / tail_mass_, -1.0 / alpha_);
    }
    // Segment whose left knot is at or below q; q below the first knot uses
    // the first segment's slope.
    std::size_t i = 0;
    if (knots_u_.size() > 2) {
      const auto it = std::upper_bound(knots_u_.begin(), knots_u_.end() - 1, q);
      i = it == knots_u_.begin() ? 0 : static_cast<std::size_t>(it - knots_u_.begin()) - 1;
      i = std::min(i, knots_u_.size() - 2);
    }
    const double slope = (knots_log_[i + 1] - knots_log_[i]) / (knots_u_[i + 1] - knots_u_[i]);
    return std::exp(knots_log_[i] + slope * (q - knots_u_[i]));
  }

private:
  std::vector<double> knots_u_, knots_log_;
  double tail_mass_ = 0.0, tail_bound_ = 0.0, alpha_ = 1.5;
};

}  // namespace detail

// The hidden unit-length scorer direction (exposed for diagnostics and for
// tests that need the ground-truth quality of a headline).
inline std::vector<double> latent_direction(const SyntheticSpec& spec) {
  Rng latent = substream(spec.latent_weight_seed, "latent");
  std::vector<double> w(spec.dim);
  double norm = 0.0;
  for (double& v : w) {
    v = latent.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : w) v /= norm;
  return w;
}

inline Corpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.n_headlines == 0) throw ConfigError("synthetic: n_headlines must be positive");
  if (spec.n_days == 0) throw ConfigError("synthetic: n_days must be positive");
  if (spec.dim == 0) throw ConfigError("synthetic: dim must be positive");
  if (!(spec.noise_scale >= 0.0)) throw ConfigError("synthetic: noise_scale must be >= 0");
  const detail::ClickCurve curve(spec);
  const std::vector<double> w = latent_direction(spec);

  Rng emb = substream(seed, "embeddings");
  Rng noise = substream(seed, "noise");
  Rng days = substream(seed, "days");

  struct Draft {
    std::vector<double> x;
    int day;
    std::int64_t clicks;
  };
  std::vector<Draft> drafts;
  drafts.reserve(spec.n_headlines);
  constexpr double kMaxClicks = 1e15;
  for (std::size_t i = 0; i < spec.n_headlines; ++i) {
    Draft d;
    d.x.resize(spec.dim);
    double q = 0.0;
    for (std::size_t k = 0; k < spec.dim; ++k) {
      d.x[k] = emb.normal();
      q += w[k] * d.x[k];
    }
    const double z = noise.normal();  // drawn unconditionally to keep streams aligned
    const double mu = curve(q) * std::exp(spec.noise_scale * z);
    d.clicks = static_cast<std::int64_t>(std::floor(std::min(mu, kMaxClicks)));
    d.day = static_cast<int>(days.bounded(spec.n_days));
    drafts.push_back(std::move(d));
  }

  // Ids follow publication order, as they would in a real feed.
  std::vector<std::size_t> order(drafts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return drafts[a].day < drafts[b].day; });

  std::vector<Headline> items;
  items.reserve(drafts.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    Draft& d = drafts[order[pos]];
    Headline h;
    h.id = static_cast<std::int64_t>(pos);
    h.day = d.day;
    h.clicks = d.clicks;
    h.embedding = std::move(d.x);
    items.push_back(std::move(h));
  }
  return Corpus(std::move(items));
}

}  // namespace prefrec
