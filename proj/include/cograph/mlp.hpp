#pragma once

// Minimal MLP machinery for the feature autoencoder: linear layers, batch
// normalization, ReLU, and the reconstruction loss, with forward and backward
// passes over row-major [batch, dim] matrices.
//
// Everything is templated on the scalar type: the production codec runs in
// float through the kernel layer, while gradient-correctness tests instantiate
// the identical formulas in double and compare against finite differences.

#include <cstddef>
#include <cmath>
#include <optional>
#include <vector>

#include "cograph/error.hpp"
#include "cograph/kernels.hpp"
#include "cograph/rng.hpp"

namespace cograph::mlp {

// Dense helpers. The generic version is a plain loop; float forwards to the
// dispatched kernels so both paths share the surrounding layer math.
template <typename S>
struct Ops {
  // C[M,N] += A[M,K] * B[K,N]
  static void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const S* a, const S* b, S* c) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        S av = a[i * k + p];
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] += av * b[p * n + j];
      }
  }
  // C[M,N] += A[M,K] * B[N,K]^T
  static void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const S* a, const S* b, S* c) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        S s = 0;
        for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
        c[i * n + j] += s;
      }
  }
  // C[M,N] += A[K,M]^T * B[K,N]
  static void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const S* a, const S* b, S* c) {
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t i = 0; i < m; ++i) {
        S av = a[p * m + i];
        for (std::size_t j = 0; j < n; ++j) c[i * n + j] += av * b[p * n + j];
      }
  }
  static void relu_fwd(const S* x, S* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > S(0) ? x[i] : S(0);
  }
  static void relu_bwd(const S* x, const S* dy, S* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > S(0) ? dy[i] : S(0);
  }
  static S dot(const S* a, const S* b, std::size_t n) {
    S s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  static S sum_sq_diff(const S* a, const S* b, std::size_t n) {
    S s = 0;
    for (std::size_t i = 0; i < n; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
  }
};

template <>
struct Ops<float> {
  static void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                      float* c) {
    kern::active().gemm_nn(m, n, k, a, b, c);
  }
  static void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                      float* c) {
    kern::active().gemm_nt(m, n, k, a, b, c);
  }
  static void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const float* a, const float* b,
                      float* c) {
    kern::active().gemm_tn(m, n, k, a, b, c);
  }
  static void relu_fwd(const float* x, float* y, std::size_t n) { kern::active().relu_fwd(x, y, n); }
  static void relu_bwd(const float* x, const float* dy, float* dx, std::size_t n) {
    kern::active().relu_bwd(x, dy, dx, n);
  }
  static float dot(const float* a, const float* b, std::size_t n) {
    return kern::active().dot(a, b, n);
  }
  static float sum_sq_diff(const float* a, const float* b, std::size_t n) {
    return kern::active().sum_sq_diff(a, b, n);
  }
};

template <typename S>
struct Linear {
  std::size_t in = 0, out = 0;
  std::vector<S> w;  // [out, in] row-major
  std::vector<S> b;  // [out]

  static Linear sized(std::size_t in, std::size_t out) {
    Linear l;
    l.in = in;
    l.out = out;
    l.w.assign(out * in, S(0));
    l.b.assign(out, S(0));
    return l;
  }
};

template <typename S>
struct BatchNorm {
  std::size_t dim = 0;
  std::vector<S> gamma, beta;
  std::vector<S> run_mean, run_var;
  S momentum = S(0.1);
  S eps = S(1e-5);

  static BatchNorm sized(std::size_t dim) {
    BatchNorm bn;
    bn.dim = dim;
    bn.gamma.assign(dim, S(1));
    bn.beta.assign(dim, S(0));
    bn.run_mean.assign(dim, S(0));
    bn.run_var.assign(dim, S(1));
    return bn;
  }
};

// One block: Linear, optionally BatchNorm, optionally ReLU.
template <typename S>
struct Block {
  Linear<S> lin;
  std::optional<BatchNorm<S>> bn;
  bool relu = false;
};

template <typename S>
struct Mlp {
  std::vector<Block<S>> blocks;

  std::size_t in_dim() const { return blocks.front().lin.in; }
  std::size_t out_dim() const { return blocks.back().lin.out; }
  std::vector<std::size_t> layer_sizes() const {
    std::vector<std::size_t> s{in_dim()};
    for (const auto& b : blocks) s.push_back(b.lin.out);
    return s;
  }
};

// Encoder shape: BatchNorm + ReLU after every linear except the last, which
// stays bare so the latent is unconstrained.
template <typename S>
Mlp<S> make_encoder_mlp(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) raise(Errc::config, "encoder needs at least two layer sizes");
  Mlp<S> m;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    Block<S> b;
    b.lin = Linear<S>::sized(sizes[i], sizes[i + 1]);
    if (i + 2 < sizes.size()) {
      b.bn = BatchNorm<S>::sized(sizes[i + 1]);
      b.relu = true;
    }
    m.blocks.push_back(std::move(b));
  }
  return m;
}

// Decoder shape: ReLU after every linear except the last (linear output,
// re-normalized by the caller before similarity use).
template <typename S>
Mlp<S> make_decoder_mlp(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) raise(Errc::config, "decoder needs at least two layer sizes");
  Mlp<S> m;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    Block<S> b;
    b.lin = Linear<S>::sized(sizes[i], sizes[i + 1]);
    b.relu = (i + 2 < sizes.size());
    m.blocks.push_back(std::move(b));
  }
  return m;
}

// Uniform fan-in initialization, U(-1/sqrt(in), 1/sqrt(in)) for weights and
// biases alike.
template <typename S>
void init_mlp(Mlp<S>& m, Rng& rng) {
  for (auto& blk : m.blocks) {
    const double bound = 1.0 / std::sqrt(double(blk.lin.in));
    for (auto& w : blk.lin.w) w = S(rng.uniform(-bound, bound));
    for (auto& b : blk.lin.b) b = S(rng.uniform(-bound, bound));
  }
}

// Per-block forward state kept for the backward pass.
template <typename S>
struct BlockCache {
  std::vector<S> x;        // linear input [B, in]
  std::vector<S> z;        // linear output [B, out]
  std::vector<S> xhat;     // batch-normalized z
  std::vector<S> inv_std;  // [out]
  std::vector<S> act_in;   // values entering relu [B, out]
};

template <typename S>
struct ForwardCache {
  std::size_t batch = 0;
  std::vector<BlockCache<S>> blocks;
  std::vector<S> out;
};

namespace detail {

// Shared forward core. `mut` is non-null exactly in training mode, where
// BatchNorm uses batch statistics (biased variance) and updates the running
// statistics; inference applies the stored running statistics.
template <typename S>
const std::vector<S>& mlp_forward_impl(const Mlp<S>& m, Mlp<S>* mut, const S* x,
                                       std::size_t batch, ForwardCache<S>& cache) {
  const bool training = mut != nullptr;
  cache.batch = batch;
  cache.blocks.resize(m.blocks.size());

  std::vector<S> cur(x, x + batch * m.in_dim());
  for (std::size_t bi = 0; bi < m.blocks.size(); ++bi) {
    const Block<S>& blk = m.blocks[bi];
    BlockCache<S>& c = cache.blocks[bi];
    const std::size_t in = blk.lin.in, out = blk.lin.out;

    c.x = std::move(cur);

    // z = x * W^T + b
    c.z.resize(batch * out);
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < out; ++j) c.z[i * out + j] = blk.lin.b[j];
    Ops<S>::gemm_nt(batch, out, in, c.x.data(), blk.lin.w.data(), c.z.data());

    std::vector<S>* stage = &c.z;

    if (blk.bn) {
      const BatchNorm<S>& bn = *blk.bn;
      c.xhat.resize(batch * out);
      c.inv_std.resize(out);
      if (training) {
        if (batch < 2) raise(Errc::config, "batch normalization needs batch >= 2 in training");
        BatchNorm<S>& wbn = *mut->blocks[bi].bn;
        for (std::size_t j = 0; j < out; ++j) {
          S mean = 0;
          for (std::size_t i = 0; i < batch; ++i) mean += c.z[i * out + j];
          mean /= S(batch);
          S var = 0;
          for (std::size_t i = 0; i < batch; ++i) {
            S d = c.z[i * out + j] - mean;
            var += d * d;
          }
          var /= S(batch);  // biased, matching the normalization below
          const S inv = S(1) / std::sqrt(var + bn.eps);
          c.inv_std[j] = inv;
          for (std::size_t i = 0; i < batch; ++i)
            c.xhat[i * out + j] = (c.z[i * out + j] - mean) * inv;
          wbn.run_mean[j] = (S(1) - bn.momentum) * bn.run_mean[j] + bn.momentum * mean;
          wbn.run_var[j] = (S(1) - bn.momentum) * bn.run_var[j] + bn.momentum * var;
        }
      } else {
        for (std::size_t j = 0; j < out; ++j) {
          const S inv = S(1) / std::sqrt(bn.run_var[j] + bn.eps);
          c.inv_std[j] = inv;
          for (std::size_t i = 0; i < batch; ++i)
            c.xhat[i * out + j] = (c.z[i * out + j] - bn.run_mean[j]) * inv;
        }
      }
      c.act_in.resize(batch * out);
      for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t j = 0; j < out; ++j)
          c.act_in[i * out + j] = bn.gamma[j] * c.xhat[i * out + j] + bn.beta[j];
      stage = &c.act_in;
    } else if (blk.relu) {
      c.act_in = c.z;
      stage = &c.act_in;
    }

    if (blk.relu) {
      cur.resize(batch * out);
      Ops<S>::relu_fwd(stage->data(), cur.data(), batch * out);
    } else {
      cur = *stage;
    }
  }
  cache.out = std::move(cur);
  return cache.out;
}

}  // namespace detail

// Training-capable forward over a [batch, in_dim] matrix.
template <typename S>
const std::vector<S>& mlp_forward(Mlp<S>& m, const S* x, std::size_t batch, bool training,
                                  ForwardCache<S>& cache) {
  return detail::mlp_forward_impl<S>(m, training ? &m : nullptr, x, batch, cache);
}

// Inference-only forward (running statistics, no mutation).
template <typename S>
const std::vector<S>& mlp_infer(const Mlp<S>& m, const S* x, std::size_t batch,
                                ForwardCache<S>& cache) {
  return detail::mlp_forward_impl<S>(m, nullptr, x, batch, cache);
}

// Gradients in the same shape as the parameters.
template <typename S>
struct MlpGrads {
  struct BlockGrads {
    std::vector<S> dw, db;
    std::vector<S> dgamma, dbeta;
  };
  std::vector<BlockGrads> blocks;

  static MlpGrads like(const Mlp<S>& m) {
    MlpGrads g;
    g.blocks.resize(m.blocks.size());
    for (std::size_t i = 0; i < m.blocks.size(); ++i) {
      const Block<S>& b = m.blocks[i];
      g.blocks[i].dw.assign(b.lin.w.size(), S(0));
      g.blocks[i].db.assign(b.lin.b.size(), S(0));
      if (b.bn) {
        g.blocks[i].dgamma.assign(b.bn->dim, S(0));
        g.blocks[i].dbeta.assign(b.bn->dim, S(0));
      }
    }
    return g;
  }

  void zero() {
    for (auto& b : blocks) {
      std::fill(b.dw.begin(), b.dw.end(), S(0));
      std::fill(b.db.begin(), b.db.end(), S(0));
      std::fill(b.dgamma.begin(), b.dgamma.end(), S(0));
      std::fill(b.dbeta.begin(), b.dbeta.end(), S(0));
    }
  }
};

// Backward through the cached forward pass (training-mode BatchNorm).
// Accumulates parameter gradients into `grads` and returns dL/dInput.
template <typename S>
std::vector<S> mlp_backward(const Mlp<S>& m, const ForwardCache<S>& cache,
                            const std::vector<S>& dout, MlpGrads<S>& grads) {
  const std::size_t batch = cache.batch;
  std::vector<S> d = dout;

  for (std::size_t bi = m.blocks.size(); bi-- > 0;) {
    const Block<S>& blk = m.blocks[bi];
    const BlockCache<S>& c = cache.blocks[bi];
    auto& g = grads.blocks[bi];
    const std::size_t in = blk.lin.in, out = blk.lin.out;

    if (blk.relu) {
      std::vector<S> masked(batch * out);
      Ops<S>::relu_bwd(c.act_in.data(), d.data(), masked.data(), batch * out);
      d = std::move(masked);
    }

    if (blk.bn) {
      const BatchNorm<S>& bn = *blk.bn;
      std::vector<S> dz(batch * out);
      for (std::size_t j = 0; j < out; ++j) {
        S sum_dy = 0, sum_dy_xhat = 0;
        for (std::size_t i = 0; i < batch; ++i) {
          const S dy = d[i * out + j];
          sum_dy += dy;
          sum_dy_xhat += dy * c.xhat[i * out + j];
        }
        g.dbeta[j] += sum_dy;
        g.dgamma[j] += sum_dy_xhat;
        const S k = bn.gamma[j] * c.inv_std[j] / S(batch);
        for (std::size_t i = 0; i < batch; ++i) {
          const S dy = d[i * out + j];
          dz[i * out + j] =
              k * (S(batch) * dy - sum_dy - c.xhat[i * out + j] * sum_dy_xhat);
        }
      }
      d = std::move(dz);
    }

    // Linear backward: dW += d^T x, db += column sums, dx = d W.
    Ops<S>::gemm_tn(out, in, batch, d.data(), c.x.data(), g.dw.data());
    for (std::size_t i = 0; i < batch; ++i)
      for (std::size_t j = 0; j < out; ++j) g.db[j] += d[i * out + j];

    std::vector<S> dx(batch * in, S(0));
    Ops<S>::gemm_nn(batch, in, out, d.data(), blk.lin.w.data(), dx.data());
    d = std::move(dx);
  }
  return d;
}

// Reconstruction loss of Eq.-style form: L = ||raw - rec||^2 + (1 - cos).
// Optionally writes dL/drec. Throws ZeroVector on zero norms.
template <typename S>
S recon_loss(const S* raw, const S* rec, std::size_t n, S* drec = nullptr) {
  const S l2 = Ops<S>::sum_sq_diff(raw, rec, n);
  const S rr = Ops<S>::dot(raw, raw, n);
  const S xx = Ops<S>::dot(rec, rec, n);
  if (rr <= S(0) || xx <= S(0)) raise(Errc::zero_vector, "loss on a zero vector");
  const S nr = std::sqrt(rr);
  const S nx = std::sqrt(xx);
  const S rx = Ops<S>::dot(raw, rec, n);
  const S cos = rx / (nr * nx);

  if (drec) {
    // d/drec ||raw-rec||^2 = 2(rec-raw)
    // d/drec (-cos)        = -(raw/(nr*nx) - cos * rec/nx^2)
    const S a = S(1) / (nr * nx);
    const S b = cos / xx;
    for (std::size_t i = 0; i < n; ++i) {
      drec[i] = S(2) * (rec[i] - raw[i]) - (raw[i] * a - rec[i] * b);
    }
  }
  return l2 + (S(1) - cos);
}

// Flat views over every trainable tensor, in a fixed traversal order shared
// by parameters and gradients (drives the optimizer).
template <typename S>
std::vector<std::pair<S*, std::size_t>> param_views(Mlp<S>& m) {
  std::vector<std::pair<S*, std::size_t>> v;
  for (auto& b : m.blocks) {
    v.push_back({b.lin.w.data(), b.lin.w.size()});
    v.push_back({b.lin.b.data(), b.lin.b.size()});
    if (b.bn) {
      v.push_back({b.bn->gamma.data(), b.bn->gamma.size()});
      v.push_back({b.bn->beta.data(), b.bn->beta.size()});
    }
  }
  return v;
}

template <typename S>
std::vector<std::pair<S*, std::size_t>> grad_views(MlpGrads<S>& g) {
  std::vector<std::pair<S*, std::size_t>> v;
  for (auto& b : g.blocks) {
    v.push_back({b.dw.data(), b.dw.size()});
    v.push_back({b.db.data(), b.db.size()});
    if (!b.dgamma.empty()) {
      v.push_back({b.dgamma.data(), b.dgamma.size()});
      v.push_back({b.dbeta.data(), b.dbeta.size()});
    }
  }
  return v;
}

}  // namespace cograph::mlp
