#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "prefrec/common.hpp"
#include "prefrec/rng.hpp"

namespace prefrec {

struct NetConfig {
  std::size_t dim = 0;
  std::size_t hidden = 200;
  std::size_t blocks = 1;
};

// Scoring network: input projection + ReLU, then residual blocks of
// [affine, batch-norm, ReLU, affine, batch-norm] with a skip connection and
// a trailing ReLU, then a scalar affine head.
//
// Parameters live in one flat vector (layout below) so the optimizer and
// gradient code can treat the model as a single coordinate vector. Batch
// norm keeps running mean/var per normalized layer in a second flat vector;
// inference normalizes with the running statistics, training with batch
// statistics (see train.hpp).
//
// Layout of `params`:
//   W_in [hidden x dim], b_in [hidden],
//   per block: A1 [HxH], a1 [H], gamma1 [H], beta1 [H],
//              A2 [HxH], a2 [H], gamma2 [H], beta2 [H],
//   head_w [hidden], head_b [1]
// Layout of `running`, per block: mean1 [H], var1 [H], mean2 [H], var2 [H].
class PreferenceNet {
public:
  static constexpr double kBnEps = 1e-5;
  static constexpr double kBnMomentum = 0.1;

  struct BlockOffsets {
    std::size_t A1, a1, g1, be1, A2, a2, g2, be2;  // into params
    std::size_t m1, v1, m2, v2;                    // into running
  };

  explicit PreferenceNet(NetConfig cfg) : cfg_(cfg) {
    if (cfg_.dim == 0) throw ConfigError("net: input dimension must be positive");
    if (cfg_.hidden == 0) throw ConfigError("net: hidden width must be positive");
    const std::size_t H = cfg_.hidden, d = cfg_.dim;
    w_in_ = 0;
    b_in_ = H * d;
    std::size_t off = H * d + H;
    std::size_t run = 0;
    blocks_.resize(cfg_.blocks);
    for (BlockOffsets& b : blocks_) {
      b.A1 = off;
      b.a1 = b.A1 + H * H;
      b.g1 = b.a1 + H;
      b.be1 = b.g1 + H;
      b.A2 = b.be1 + H;
      b.a2 = b.A2 + H * H;
      b.g2 = b.a2 + H;
      b.be2 = b.g2 + H;
      off = b.be2 + H;
      b.m1 = run;
      b.v1 = run + H;
      b.m2 = run + 2 * H;
      b.v2 = run + 3 * H;
      run += 4 * H;
    }
    head_w_ = off;
    head_b_ = head_w_ + H;
    params.assign(head_b_ + 1, 0.0);
    running.assign(run, 0.0);

    bn_param_.assign(params.size(), 0);
    for (const BlockOffsets& b : blocks_) {
      for (std::size_t j = 0; j < H; ++j) {
        bn_param_[b.g1 + j] = bn_param_[b.be1 + j] = 1;
        bn_param_[b.g2 + j] = bn_param_[b.be2 + j] = 1;
      }
    }
  }

  const NetConfig& config() const { return cfg_; }
  std::size_t dim() const { return cfg_.dim; }
  std::size_t hidden() const { return cfg_.hidden; }
  std::size_t num_blocks() const { return cfg_.blocks; }
  const std::vector<BlockOffsets>& block_offsets() const { return blocks_; }
  std::size_t w_in_off() const { return w_in_; }
  std::size_t b_in_off() const { return b_in_; }
  std::size_t head_w_off() const { return head_w_; }
  std::size_t head_b_off() const { return head_b_; }

  // True for batch-norm scale/shift coordinates (kept out of weight decay).
  const std::vector<char>& bn_param_mask() const { return bn_param_; }

  // Weights ~ N(0, 2/fan_in), biases 0, scales 1, shifts 0, running
  // mean/var 0/1. Draws happen in parameter-layout order.
  void init(Rng& rng) {
    const std::size_t H = cfg_.hidden, d = cfg_.dim;
    const double s_in = std::sqrt(2.0 / static_cast<double>(d));
    const double s_hid = std::sqrt(2.0 / static_cast<double>(H));
    for (std::size_t i = 0; i < H * d; ++i) params[w_in_ + i] = s_in * rng.normal();
    for (std::size_t i = 0; i < H; ++i) params[b_in_ + i] = 0.0;
    for (const BlockOffsets& b : blocks_) {
      for (std::size_t i = 0; i < H * H; ++i) params[b.A1 + i] = s_hid * rng.normal();
      for (std::size_t i = 0; i < H; ++i) params[b.a1 + i] = 0.0;
      for (std::size_t i = 0; i < H; ++i) params[b.g1 + i] = 1.0;
      for (std::size_t i = 0; i < H; ++i) params[b.be1 + i] = 0.0;
      for (std::size_t i = 0; i < H * H; ++i) params[b.A2 + i] = s_hid * rng.normal();
      for (std::size_t i = 0; i < H; ++i) params[b.a2 + i] = 0.0;
      for (std::size_t i = 0; i < H; ++i) params[b.g2 + i] = 1.0;
      for (std::size_t i = 0; i < H; ++i) params[b.be2 + i] = 0.0;
      for (std::size_t i = 0; i < H; ++i) running[b.m1 + i] = 0.0;
      for (std::size_t i = 0; i < H; ++i) running[b.v1 + i] = 1.0;
      for (std::size_t i = 0; i < H; ++i) running[b.m2 + i] = 0.0;
      for (std::size_t i = 0; i < H; ++i) running[b.v2 + i] = 1.0;
    }
    for (std::size_t i = 0; i < H; ++i) params[head_w_ + i] = s_hid * rng.normal();
    params[head_b_] = 0.0;
  }

  struct Scratch {
    std::vector<double> h, t1, t2;
  };

  // Inference-mode score (batch norm uses running statistics).
  double forward(std::span<const double> x, Scratch& s) const {
    if (x.size() != cfg_.dim) throw DataError("net: input dimension mismatch");
    const std::size_t H = cfg_.hidden, d = cfg_.dim;
    s.h.resize(H);
    s.t1.resize(H);
    s.t2.resize(H);

    for (std::size_t o = 0; o < H; ++o) {
      const double* w = &params[w_in_ + o * d];
      double acc = params[b_in_ + o];
      for (std::size_t k = 0; k < d; ++k) acc += w[k] * x[k];
      s.h[o] = acc > 0.0 ? acc : 0.0;
    }

    for (const BlockOffsets& b : blocks_) {
      affine(&params[b.A1], &params[b.a1], s.h.data(), s.t1.data(), H, H);
      bn_inference(b.m1, b.v1, b.g1, b.be1, s.t1.data(), H);
      for (std::size_t j = 0; j < H; ++j)
        if (s.t1[j] < 0.0) s.t1[j] = 0.0;
      affine(&params[b.A2], &params[b.a2], s.t1.data(), s.t2.data(), H, H);
      bn_inference(b.m2, b.v2, b.g2, b.be2, s.t2.data(), H);
      for (std::size_t j = 0; j < H; ++j) {
        const double v = s.h[j] + s.t2[j];
        s.h[j] = v > 0.0 ? v : 0.0;
      }
    }

    double score = params[head_b_];
    for (std::size_t j = 0; j < H; ++j) score += params[head_w_ + j] * s.h[j];
    return score;
  }

  double forward(std::span<const double> x) const {
    Scratch s;
    return forward(x, s);
  }

  // Inference-mode score plus d(score)/d(params) for every parameter,
  // including batch-norm scales/shifts (running stats are constants here).
  double score_and_gradient(std::span<const double> x, std::vector<double>& grad) const {
    if (x.size() != cfg_.dim) throw DataError("net: input dimension mismatch");
    const std::size_t H = cfg_.hidden, d = cfg_.dim;
    grad.assign(params.size(), 0.0);

    // Forward with caches.
    std::vector<double> h0(H);
    for (std::size_t o = 0; o < H; ++o) {
      const double* w = &params[w_in_ + o * d];
      double acc = params[b_in_ + o];
      for (std::size_t k = 0; k < d; ++k) acc += w[k] * x[k];
      h0[o] = acc > 0.0 ? acc : 0.0;
    }
    struct BlockTrace {
      std::vector<double> h_in, xh1, u1, r1, xh2, u2, h_out;
    };
    std::vector<BlockTrace> traces(blocks_.size());
    std::vector<double> h = h0;
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      const BlockOffsets& b = blocks_[bi];
      BlockTrace& t = traces[bi];
      t.h_in = h;
      t.xh1.resize(H);
      t.u1.resize(H);
      t.r1.resize(H);
      t.xh2.resize(H);
      t.u2.resize(H);
      t.h_out.resize(H);
      std::vector<double> z(H);
      affine(&params[b.A1], &params[b.a1], t.h_in.data(), z.data(), H, H);
      for (std::size_t j = 0; j < H; ++j) {
        t.xh1[j] = (z[j] - running[b.m1 + j]) / std::sqrt(running[b.v1 + j] + kBnEps);
        t.u1[j] = params[b.g1 + j] * t.xh1[j] + params[b.be1 + j];
        t.r1[j] = t.u1[j] > 0.0 ? t.u1[j] : 0.0;
      }
      affine(&params[b.A2], &params[b.a2], t.r1.data(), z.data(), H, H);
      for (std::size_t j = 0; j < H; ++j) {
        t.xh2[j] = (z[j] - running[b.m2 + j]) / std::sqrt(running[b.v2 + j] + kBnEps);
        t.u2[j] = params[b.g2 + j] * t.xh2[j] + params[b.be2 + j];
        const double v = t.h_in[j] + t.u2[j];
        t.h_out[j] = v > 0.0 ? v : 0.0;
      }
      h = t.h_out;
    }
    double score = params[head_b_];
    for (std::size_t j = 0; j < H; ++j) score += params[head_w_ + j] * h[j];

    // Backward, dscore = 1.
    std::vector<double> dh(H);
    for (std::size_t j = 0; j < H; ++j) {
      grad[head_w_ + j] = h[j];
      dh[j] = params[head_w_ + j];
    }
    grad[head_b_] = 1.0;

    std::vector<double> du2(H), dz(H), dr1(H), dhin(H);
    for (std::size_t bi = blocks_.size(); bi-- > 0;) {
      const BlockOffsets& b = blocks_[bi];
      const BlockTrace& t = traces[bi];
      for (std::size_t j = 0; j < H; ++j) {
        const double active = (t.h_in[j] + t.u2[j]) > 0.0 ? 1.0 : 0.0;
        du2[j] = dh[j] * active;
        dhin[j] = du2[j];  // skip path
      }
      for (std::size_t j = 0; j < H; ++j) {
        grad[b.g2 + j] += du2[j] * t.xh2[j];
        grad[b.be2 + j] += du2[j];
        dz[j] = du2[j] * params[b.g2 + j] / std::sqrt(running[b.v2 + j] + kBnEps);
      }
      for (std::size_t o = 0; o < H; ++o) {
        const double g = dz[o];
        double* gA = &grad[b.A2 + o * H];
        for (std::size_t k = 0; k < H; ++k) gA[k] += g * t.r1[k];
        grad[b.a2 + o] += g;
      }
      std::fill(dr1.begin(), dr1.end(), 0.0);
      for (std::size_t o = 0; o < H; ++o) {
        const double g = dz[o];
        const double* A = &params[b.A2 + o * H];
        for (std::size_t k = 0; k < H; ++k) dr1[k] += A[k] * g;
      }
      for (std::size_t j = 0; j < H; ++j) {
        const double du1 = dr1[j] * (t.u1[j] > 0.0 ? 1.0 : 0.0);
        grad[b.g1 + j] += du1 * t.xh1[j];
        grad[b.be1 + j] += du1;
        dz[j] = du1 * params[b.g1 + j] / std::sqrt(running[b.v1 + j] + kBnEps);
      }
      for (std::size_t o = 0; o < H; ++o) {
        const double g = dz[o];
        double* gA = &grad[b.A1 + o * H];
        for (std::size_t k = 0; k < H; ++k) gA[k] += g * t.h_in[k];
        grad[b.a1 + o] += g;
      }
      for (std::size_t o = 0; o < H; ++o) {
        const double g = dz[o];
        const double* A = &params[b.A1 + o * H];
        for (std::size_t k = 0; k < H; ++k) dhin[k] += A[k] * g;
      }
      dh = dhin;
    }

    for (std::size_t o = 0; o < H; ++o) {
      double acc = params[b_in_ + o];
      const double* w = &params[w_in_ + o * d];
      for (std::size_t k = 0; k < d; ++k) acc += w[k] * x[k];
      if (acc > 0.0) {
        const double g = dh[o];
        double* gW = &grad[w_in_ + o * d];
        for (std::size_t k = 0; k < d; ++k) gW[k] += g * x[k];
        grad[b_in_ + o] += g;
      }
    }
    return score;
  }

  std::vector<double> params;
  std::vector<double> running;

private:
  static void affine(const double* W, const double* b, const double* x, double* y,
                     std::size_t out, std::size_t in) {
    for (std::size_t o = 0; o < out; ++o) {
      const double* row = W + o * in;
      double acc = b[o];
      for (std::size_t k = 0; k < in; ++k) acc += row[k] * x[k];
      y[o] = acc;
    }
  }

  void bn_inference(std::size_t m_off, std::size_t v_off, std::size_t g_off, std::size_t be_off,
                    double* v, std::size_t H) const {
    for (std::size_t j = 0; j < H; ++j) {
      const double xhat = (v[j] - running[m_off + j]) / std::sqrt(running[v_off + j] + kBnEps);
      v[j] = params[g_off + j] * xhat + params[be_off + j];
    }
  }

  NetConfig cfg_;
  std::size_t w_in_ = 0, b_in_ = 0, head_w_ = 0, head_b_ = 0;
  std::vector<BlockOffsets> blocks_;
  std::vector<char> bn_param_;
};

// ------------------------------------------------------------ checkpoints
//
// Binary format (little-endian):
//   8 bytes  magic "PREFNET\1"
//   u32      format version (1)
//   u32      dim, u32 hidden, u32 blocks
//   u64      parameter count, u64 running-stat count
//   doubles  parameters, then running statistics, raw bits

namespace detail {
constexpr char kNetMagic[8] = {'P', 'R', 'E', 'F', 'N', 'E', 'T', '\1'};

template <class T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <class T>
T read_pod(std::istream& is, const std::string& what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
    throw ParseError("checkpoint: truncated while reading " + what);
  return v;
}
}  // namespace detail

inline void save_net(const PreferenceNet& net, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParseError("checkpoint: cannot open for writing: " + path);
  os.write(detail::kNetMagic, sizeof(detail::kNetMagic));
  detail::write_pod<std::uint32_t>(os, 1);
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.dim()));
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.hidden()));
  detail::write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(net.num_blocks()));
  detail::write_pod<std::uint64_t>(os, net.params.size());
  detail::write_pod<std::uint64_t>(os, net.running.size());
  os.write(reinterpret_cast<const char*>(net.params.data()),
           static_cast<std::streamsize>(net.params.size() * sizeof(double)));
  os.write(reinterpret_cast<const char*>(net.running.data()),
           static_cast<std::streamsize>(net.running.size() * sizeof(double)));
  if (!os) throw ParseError("checkpoint: write failed: " + path);
}

inline PreferenceNet load_net(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("checkpoint: cannot open: " + path);
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, detail::kNetMagic, 8) != 0)
    throw ParseError("checkpoint: bad magic in " + path);
  const auto version = detail::read_pod<std::uint32_t>(is, "version");
  if (version != 1)
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  NetConfig cfg;
  cfg.dim = detail::read_pod<std::uint32_t>(is, "dim");
  cfg.hidden = detail::read_pod<std::uint32_t>(is, "hidden");
  cfg.blocks = detail::read_pod<std::uint32_t>(is, "blocks");
  const auto n_params = detail::read_pod<std::uint64_t>(is, "parameter count");
  const auto n_running = detail::read_pod<std::uint64_t>(is, "running-stat count");
  PreferenceNet net(cfg);
  if (n_params != net.params.size() || n_running != net.running.size())
    throw ParseError("checkpoint: size fields do not match architecture in " + path);
  if (!is.read(reinterpret_cast<char*>(net.params.data()),
               static_cast<std::streamsize>(n_params * sizeof(double))))
    throw ParseError("checkpoint: truncated parameter block in " + path);
  if (!is.read(reinterpret_cast<char*>(net.running.data()),
               static_cast<std::streamsize>(n_running * sizeof(double))))
    throw ParseError("checkpoint: truncated running-stat block in " + path);
  return net;
}

}  // namespace prefrec
