#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "prefrec/net.hpp"
#include "prefrec/pairs.hpp"
#include "prefrec/rng.hpp"
#include "prefrec/types.hpp"

namespace prefrec {

// Hinge on the score gap of a preference pair: zero once the preferred side
// leads by at least `margin`.
inline double mrl_loss(double score_low, double score_high, double margin) {
  const double l = margin - (score_high - score_low);
  return l > 0.0 ? l : 0.0;
}

struct TrainConfig {
  double lr = 0.005;
  std::size_t batch_size = 128;
  double weight_decay = 0.001;
  double margin = 1.0;
  std::size_t lr_patience = 1;          // epochs without improvement before decay
  double lr_factor = 0.1;
  std::size_t early_stop_patience = 5;  // epochs without improvement before stopping
  std::size_t max_epochs = 100;
  double validation_fraction = 0.1;
};

// ------------------------------------------------------------- optimizer

struct AdamState {
  std::vector<double> m, v;
  std::uint64_t step = 0;
};

// Adam with decoupled weight decay: coordinates flagged in `no_decay` (the
// batch-norm scales/shifts) skip the decay term but still take the Adam
// step. Decay is applied to the parameter before the moment update, so it
// does not leak into the moment estimates.
inline void adamw_update(std::vector<double>& params, const std::vector<char>& no_decay,
                         const std::vector<double>& grad, double lr, double weight_decay,
                         AdamState& st) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const std::size_t n = params.size();
  if (grad.size() != n || no_decay.size() != n)
    throw ConfigError("adamw_update: size mismatch");
  if (st.m.empty()) {
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);
  } else if (st.m.size() != n) {
    throw ConfigError("adamw_update: optimizer state does not match parameter count");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) throw NumericError("adamw_update: non-finite gradient");
  }
  ++st.step;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.step));
  for (std::size_t k = 0; k < n; ++k) {
    if (weight_decay != 0.0 && !no_decay[k]) params[k] -= lr * weight_decay * params[k];
    const double g = grad[k];
    st.m[k] = kBeta1 * st.m[k] + (1.0 - kBeta1) * g;
    st.v[k] = kBeta2 * st.v[k] + (1.0 - kBeta2) * g * g;
    params[k] -= lr * (st.m[k] / c1) / (std::sqrt(st.v[k] / c2) + kEps);
  }
}

// ------------------------------------------------------- training batches

// Training-mode forward/backward over one batch of pairs. Both sides of
// every pair are pushed through the network together as one batch of
// 2*B rows (rows [0,B) = less-engaged side, rows [B,2B) = preferred side),
// so batch-norm statistics are computed over the concatenation.
class PairBatch {
public:
  explicit PairBatch(const PreferenceNet& net)
      : H_(net.hidden()), d_(net.dim()), n_blocks_(net.num_blocks()) {
    blocks_.resize(n_blocks_);
  }

  // `rows` holds 2*n_pairs embedding pointers (each dim() doubles). With
  // `update_running`, the net's running statistics absorb this batch's
  // mean/var under the usual momentum rule (unbiased variance).
  void forward(PreferenceNet& net, const double* const* rows, std::size_t n_pairs,
               bool update_running) {
    n_ = 2 * n_pairs;
    if (n_ < 2) throw ConfigError("PairBatch: need at least one pair");
    rows_ = rows;
    const std::size_t H = H_, d = d_, n = n_;

    h0_.resize(n * H);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = rows[i];
      double* out = &h0_[i * H];
      for (std::size_t o = 0; o < H; ++o) {
        const double* w = &net.params[net.w_in_off() + o * d];
        double acc = net.params[net.b_in_off() + o];
        for (std::size_t k = 0; k < d; ++k) acc += w[k] * x[k];
        out[o] = acc > 0.0 ? acc : 0.0;
      }
    }

    const std::vector<double>* h_in = &h0_;
    for (std::size_t bi = 0; bi < n_blocks_; ++bi) {
      const auto& off = net.block_offsets()[bi];
      BlockCache& cb = blocks_[bi];
      cb.h_in = h_in;
      affine_forward(net, off.A1, off.a1, *h_in, z_);
      bn_forward(net, off.g1, off.be1, off.m1, off.v1, z_, cb.xh1, cb.istd1, update_running);
      cb.r1.resize(n * H);
      for (std::size_t i = 0; i < n * H; ++i) cb.r1[i] = z_[i] > 0.0 ? z_[i] : 0.0;
      affine_forward(net, off.A2, off.a2, cb.r1, z_);
      bn_forward(net, off.g2, off.be2, off.m2, off.v2, z_, cb.xh2, cb.istd2, update_running);
      cb.h_out.resize(n * H);
      const std::vector<double>& prev = *h_in;
      for (std::size_t i = 0; i < n * H; ++i) {
        const double v = prev[i] + z_[i];
        cb.h_out[i] = v > 0.0 ? v : 0.0;
      }
      h_in = &cb.h_out;
    }

    scores_.resize(n);
    const std::vector<double>& last = *h_in;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = net.params[net.head_b_off()];
      const double* h = &last[i * H];
      for (std::size_t j = 0; j < H; ++j) acc += net.params[net.head_w_off() + j] * h[j];
      scores_[i] = acc;
    }
  }

  const std::vector<double>& scores() const { return scores_; }
  std::size_t rows_in_batch() const { return n_; }

  // Accumulates d(loss)/d(params) into `grad` given d(loss)/d(score) per
  // row. Must follow a forward() on the same net parameters.
  void backward(const PreferenceNet& net, std::span<const double> dscore,
                std::vector<double>& grad) const {
    const std::size_t H = H_, d = d_, n = n_;
    if (dscore.size() != n) throw ConfigError("PairBatch::backward: dscore size mismatch");
    grad.assign(net.params.size(), 0.0);

    const std::vector<double>& last = n_blocks_ ? blocks_.back().h_out : h0_;
    dh_.resize(n * H);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = dscore[i];
      const double* h = &last[i * H];
      double* dh = &dh_[i * H];
      for (std::size_t j = 0; j < H; ++j) {
        grad[net.head_w_off() + j] += g * h[j];
        dh[j] = g * net.params[net.head_w_off() + j];
      }
      grad[net.head_b_off()] += g;
    }

    for (std::size_t bi = n_blocks_; bi-- > 0;) {
      const auto& off = net.block_offsets()[bi];
      const BlockCache& cb = blocks_[bi];

      // Trailing ReLU; its input sign is recoverable from the stored output.
      ds_.resize(n * H);
      for (std::size_t i = 0; i < n * H; ++i) ds_[i] = cb.h_out[i] > 0.0 ? dh_[i] : 0.0;

      bn_backward(net, off.g2, off.be2, cb.xh2, cb.istd2, ds_, dz_, grad);
      affine_backward(net, off.A2, off.a2, cb.r1, dz_, dx_, grad);

      for (std::size_t i = 0; i < n * H; ++i) dx_[i] = cb.r1[i] > 0.0 ? dx_[i] : 0.0;
      bn_backward(net, off.g1, off.be1, cb.xh1, cb.istd1, dx_, dz_, grad);
      affine_backward(net, off.A1, off.a1, *cb.h_in, dz_, dh_, grad);

      // Skip connection joins the affine path before the trailing ReLU.
      for (std::size_t i = 0; i < n * H; ++i) dh_[i] += ds_[i];
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double* x = rows_[i];
      const double* h = &h0_[i * H];
      const double* dh = &dh_[i * H];
      for (std::size_t o = 0; o < H; ++o) {
        if (h[o] <= 0.0) continue;
        const double g = dh[o];
        double* gw = &grad[net.w_in_off() + o * d];
        for (std::size_t k = 0; k < d; ++k) gw[k] += g * x[k];
        grad[net.b_in_off() + o] += g;
      }
    }
  }

private:
  struct BlockCache {
    const std::vector<double>* h_in = nullptr;
    std::vector<double> xh1, r1, xh2, h_out;
    std::vector<double> istd1, istd2;
  };

  void affine_forward(const PreferenceNet& net, std::size_t W_off, std::size_t b_off,
                      const std::vector<double>& in, std::vector<double>& out) const {
    const std::size_t H = H_, n = n_;
    out.resize(n * H);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = &in[i * H];
      double* y = &out[i * H];
      for (std::size_t o = 0; o < H; ++o) {
        const double* w = &net.params[W_off + o * H];
        double acc = net.params[b_off + o];
        for (std::size_t k = 0; k < H; ++k) acc += w[k] * x[k];
        y[o] = acc;
      }
    }
  }

  // Normalizes `z` in place with this batch's statistics and stores xhat
  // and 1/sqrt(var+eps) for the backward pass.
  void bn_forward(PreferenceNet& net, std::size_t g_off, std::size_t be_off, std::size_t m_off,
                  std::size_t v_off, std::vector<double>& z, std::vector<double>& xh,
                  std::vector<double>& istd, bool update_running) {
    const std::size_t H = H_, n = n_;
    mean_.assign(H, 0.0);
    var_.assign(H, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = &z[i * H];
      for (std::size_t j = 0; j < H; ++j) mean_[j] += row[j];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < H; ++j) mean_[j] *= inv_n;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = &z[i * H];
      for (std::size_t j = 0; j < H; ++j) {
        const double c = row[j] - mean_[j];
        var_[j] += c * c;
      }
    }
    for (std::size_t j = 0; j < H; ++j) var_[j] *= inv_n;

    istd.resize(H);
    for (std::size_t j = 0; j < H; ++j)
      istd[j] = 1.0 / std::sqrt(var_[j] + PreferenceNet::kBnEps);

    if (update_running) {
      const double mom = PreferenceNet::kBnMomentum;
      const double bias = static_cast<double>(n) / static_cast<double>(n - 1);
      for (std::size_t j = 0; j < H; ++j) {
        net.running[m_off + j] = (1.0 - mom) * net.running[m_off + j] + mom * mean_[j];
        net.running[v_off + j] = (1.0 - mom) * net.running[v_off + j] + mom * var_[j] * bias;
      }
    }

    xh.resize(n * H);
    for (std::size_t i = 0; i < n; ++i) {
      double* row = &z[i * H];
      double* xrow = &xh[i * H];
      for (std::size_t j = 0; j < H; ++j) {
        const double x = (row[j] - mean_[j]) * istd[j];
        xrow[j] = x;
        row[j] = net.params[g_off + j] * x + net.params[be_off + j];
      }
    }
  }

  // Batch-statistics backward: the batch mean/var depend on every row, so
  //   dz_ij = istd_j/n * (n*dxhat_ij - sum_i dxhat_ij - xhat_ij * sum_i dxhat_ij*xhat_ij).
  void bn_backward(const PreferenceNet& net, std::size_t g_off, std::size_t be_off,
                   const std::vector<double>& xh, const std::vector<double>& istd,
                   const std::vector<double>& dy, std::vector<double>& dz,
                   std::vector<double>& grad) const {
    const std::size_t H = H_, n = n_;
    sum1_.assign(H, 0.0);   // column sums of dxhat
    sum2_.assign(H, 0.0);   // column sums of dxhat * xhat
    for (std::size_t i = 0; i < n; ++i) {
      const double* dyr = &dy[i * H];
      const double* xr = &xh[i * H];
      for (std::size_t j = 0; j < H; ++j) {
        const double dxh = dyr[j] * net.params[g_off + j];
        sum1_[j] += dxh;
        sum2_[j] += dxh * xr[j];
        grad[g_off + j] += dyr[j] * xr[j];
        grad[be_off + j] += dyr[j];
      }
    }
    dz.resize(n * H);
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double* dyr = &dy[i * H];
      const double* xr = &xh[i * H];
      double* dzr = &dz[i * H];
      for (std::size_t j = 0; j < H; ++j) {
        const double dxh = dyr[j] * net.params[g_off + j];
        dzr[j] = istd[j] / nd * (nd * dxh - sum1_[j] - xr[j] * sum2_[j]);
      }
    }
  }

  void affine_backward(const PreferenceNet& net, std::size_t W_off, std::size_t b_off,
                       const std::vector<double>& in, const std::vector<double>& dy,
                       std::vector<double>& dx, std::vector<double>& grad) const {
    const std::size_t H = H_, n = n_;
    dx.assign(n * H, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* x = &in[i * H];
      const double* dyr = &dy[i * H];
      double* dxr = &dx[i * H];
      for (std::size_t o = 0; o < H; ++o) {
        const double g = dyr[o];
        if (g == 0.0) continue;
        double* gw = &grad[W_off + o * H];
        const double* w = &net.params[W_off + o * H];
        for (std::size_t k = 0; k < H; ++k) {
          gw[k] += g * x[k];
          dxr[k] += w[k] * g;
        }
        grad[b_off + o] += g;
      }
    }
  }

  std::size_t H_, d_, n_blocks_;
  std::size_t n_ = 0;
  const double* const* rows_ = nullptr;
  std::vector<double> h0_, z_, scores_;
  std::vector<BlockCache> blocks_;
  // scratch reused across calls
  mutable std::vector<double> dh_, ds_, dz_, dx_;
  mutable std::vector<double> mean_, var_, sum1_, sum2_;
};

// --------------------------------------------------------- loop plumbing

// Learning-rate decay on plateau: any epoch that fails to improve the best
// monitored value counts; after `patience` consecutive such epochs the rate
// is multiplied by `factor` and the counter resets.
struct PlateauScheduler {
  double factor = 0.1;
  std::size_t patience = 1;
  double best = std::numeric_limits<double>::infinity();
  std::size_t bad = 0;

  double observe(double monitor, double lr) {
    if (monitor < best) {
      best = monitor;
      bad = 0;
      return lr;
    }
    if (++bad >= patience) {
      bad = 0;
      return lr * factor;
    }
    return lr;
  }
};

struct EarlyStopper {
  std::size_t patience = 5;
  double best = std::numeric_limits<double>::infinity();
  std::size_t bad = 0;

  bool observe(double monitor) {
    if (monitor < best) {
      best = monitor;
      bad = 0;
      return false;
    }
    return ++bad >= patience;
  }
};

// Mean pair loss in inference mode; each distinct headline is scored once.
inline double dataset_mrl(const PreferenceNet& net, const PairDataset& ds, const Corpus& corpus,
                          double margin) {
  if (ds.pairs.empty()) throw DataError("dataset_mrl: empty pair set");
  std::unordered_map<std::int64_t, double> score;
  score.reserve(ds.source_ids.size());
  PreferenceNet::Scratch scratch;
  for (std::int64_t id : ds.source_ids)
    score.emplace(id, net.forward(corpus.by_id(id).embedding, scratch));
  double total = 0.0;
  for (const PreferencePair& p : ds.pairs)
    total += mrl_loss(score.at(p.low_id), score.at(p.high_id), margin);
  return total / static_cast<double>(ds.pairs.size());
}

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = std::numeric_limits<double>::quiet_NaN();  // NaN when no validation pairs
  double lr = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;   // index into history
  double best_monitor = 0.0;    // best validation loss (or train loss fallback)
  bool monitored_train_loss = false;
};

// Mini-batch training with per-epoch reshuffles. The monitored quantity is
// the validation pair loss (inference mode) after each epoch, or the epoch's
// mean training loss when no validation pairs were provided. The parameters
// and running statistics from the best monitored epoch are restored before
// returning.
inline TrainResult train(PreferenceNet& net, const PairDataset& train_pairs,
                         const PairDataset& val_pairs, const Corpus& corpus,
                         const TrainConfig& cfg, Rng& rng, std::ostream* log = nullptr) {
  if (cfg.max_epochs == 0) throw ConfigError("train: max_epochs must be positive");
  if (cfg.batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (!(cfg.lr > 0.0)) throw ConfigError("train: learning rate must be positive");
  if (train_pairs.pairs.empty()) throw DataError("train: no training pairs");

  const bool has_val = !val_pairs.pairs.empty();
  if (!has_val && log)
    *log << "warning: no validation pairs; monitoring training loss instead\n";

  const std::size_t n_pairs = train_pairs.pairs.size();
  std::vector<const double*> low(n_pairs), high(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    low[i] = corpus.by_id(train_pairs.pairs[i].low_id).embedding.data();
    high[i] = corpus.by_id(train_pairs.pairs[i].high_id).embedding.data();
  }

  PairBatch batch(net);
  AdamState adam;
  std::vector<double> grad;
  std::vector<const double*> rows;
  std::vector<double> dscore;
  std::vector<std::size_t> order(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) order[i] = i;

  TrainResult result;
  result.monitored_train_loss = !has_val;
  PlateauScheduler sched{cfg.lr_factor, cfg.lr_patience};
  EarlyStopper stopper{cfg.early_stop_patience};
  double lr = cfg.lr;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_params, best_running;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t b0 = 0; b0 < n_pairs; b0 += cfg.batch_size) {
      const std::size_t B = std::min(cfg.batch_size, n_pairs - b0);
      rows.resize(2 * B);
      for (std::size_t i = 0; i < B; ++i) {
        rows[i] = low[order[b0 + i]];
        rows[B + i] = high[order[b0 + i]];
      }
      batch.forward(net, rows.data(), B, /*update_running=*/true);

      const std::vector<double>& s = batch.scores();
      dscore.assign(2 * B, 0.0);
      double batch_loss = 0.0;
      const double inv_b = 1.0 / static_cast<double>(B);
      for (std::size_t i = 0; i < B; ++i) {
        const double l = cfg.margin - (s[B + i] - s[i]);
        if (l > 0.0) {
          batch_loss += l;
          dscore[i] += inv_b;
          dscore[B + i] -= inv_b;
        }
      }
      loss_sum += batch_loss;  // sum of per-pair losses
      batch.backward(net, dscore, grad);
      adamw_update(net.params, net.bn_param_mask(), grad, lr, cfg.weight_decay, adam);
    }

    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(n_pairs);
    if (has_val) stats.val_loss = dataset_mrl(net, val_pairs, corpus, cfg.margin);
    stats.lr = lr;
    result.history.push_back(stats);

    const double monitor = has_val ? stats.val_loss : stats.train_loss;
    if (monitor < best) {
      best = monitor;
      result.best_epoch = epoch;
      best_params = net.params;
      best_running = net.running;
    }
    const bool stop = stopper.observe(monitor);
    lr = sched.observe(monitor, lr);
    if (stop) break;
  }

  net.params = std::move(best_params);
  net.running = std::move(best_running);
  result.best_monitor = best;
  return result;
}

}  // namespace prefrec
