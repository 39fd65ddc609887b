#include "cograph/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace cograph {

const std::vector<std::size_t>& default_encoder_sizes() {
  static const std::vector<std::size_t> s{512, 256, 256, 128, 64, 32, 16, 3};
  return s;
}

const std::vector<std::size_t>& default_decoder_sizes() {
  static const std::vector<std::size_t> s{3, 8, 16, 32, 64, 128, 256, 256, 512};
  return s;
}

Feature3Q quantize(const std::array<float, kLatentDim>& z, const QuantRange& r) {
  Feature3Q q;
  for (std::size_t i = 0; i < kLatentDim; ++i) {
    const float span = r.max[i] - r.min[i];
    float t = (z[i] - r.min[i]) / span * 255.0f;
    if (t <= 0.0f) {
      q.q[i] = 0;
    } else if (t >= 255.0f) {
      q.q[i] = 255;
    } else {
      q.q[i] = static_cast<std::uint8_t>(std::lround(t));
    }
  }
  return q;
}

std::array<float, kLatentDim> dequantize(const Feature3Q& q, const QuantRange& r) {
  std::array<float, kLatentDim> z{};
  for (std::size_t i = 0; i < kLatentDim; ++i) {
    const float span = r.max[i] - r.min[i];
    z[i] = r.min[i] + static_cast<float>(q.q[i]) * (span / 255.0f);
  }
  return z;
}

CodecParams make_codec(const std::vector<std::size_t>& encoder_sizes,
                       const std::vector<std::size_t>& decoder_sizes) {
  if (encoder_sizes.back() != kLatentDim || decoder_sizes.front() != kLatentDim ||
      encoder_sizes.front() != decoder_sizes.back()) {
    raise(Errc::config, "encoder/decoder layer sizes do not chain 512 -> 3 -> 512");
  }
  CodecParams p;
  p.encoder = mlp::make_encoder_mlp<float>(encoder_sizes);
  p.decoder = mlp::make_decoder_mlp<float>(decoder_sizes);
  for (std::size_t i = 0; i < kLatentDim; ++i) {
    p.qrange.min[i] = -1.0f;
    p.qrange.max[i] = 1.0f;
  }
  return p;
}

std::array<float, kLatentDim> encode(const CodecParams& p, const Feature512& f) {
  mlp::ForwardCache<float> cache;
  const std::vector<float>& out = mlp::mlp_infer(p.encoder, f.data(), 1, cache);
  std::array<float, kLatentDim> z{};
  std::copy(out.begin(), out.end(), z.begin());
  return z;
}

Feature512 decode(const CodecParams& p, const std::array<float, kLatentDim>& z) {
  mlp::ForwardCache<float> cache;
  const std::vector<float>& out = mlp::mlp_infer(p.decoder, z.data(), 1, cache);
  Feature512 f;
  std::copy(out.begin(), out.end(), f.v.begin());
  return normalized(f);
}

double round_trip_cosine(const CodecParams& p, const Feature512& f) {
  return cosine(f, decode(p, encode(p, f)));
}

bool validate_compression(const Feature512& f, const CodecParams& p, double theta_keep) {
  return round_trip_cosine(p, f) < theta_keep;
}

Feature3Q encode_quantized(const CodecParams& p, const Feature512& f) {
  return quantize(encode(p, f), p.qrange);
}

Feature512 decode_quantized(const CodecParams& p, const Feature3Q& q) {
  return decode(p, dequantize(q, p.qrange));
}

namespace {

// Adam with bias correction over flat parameter/gradient views.
class Adam {
 public:
  Adam(std::vector<std::pair<float*, std::size_t>> params, const TrainingConfig& cfg)
      : params_(std::move(params)), cfg_(cfg) {
    std::size_t total = 0;
    for (auto& [p, n] : params_) total += n;
    m_.assign(total, 0.0f);
    v_.assign(total, 0.0f);
  }

  void step(const std::vector<std::pair<float*, std::size_t>>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));
    std::size_t off = 0;
    for (std::size_t k = 0; k < params_.size(); ++k) {
      float* p = params_[k].first;
      const float* g = grads[k].first;
      const std::size_t n = params_[k].second;
      for (std::size_t i = 0; i < n; ++i) {
        float& m = m_[off + i];
        float& v = v_[off + i];
        m = float(cfg_.beta1) * m + float(1.0 - cfg_.beta1) * g[i];
        v = float(cfg_.beta2) * v + float(1.0 - cfg_.beta2) * g[i] * g[i];
        const double mhat = double(m) / bc1;
        const double vhat = double(v) / bc2;
        p[i] -= float(cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.adam_eps));
      }
      off += n;
    }
  }

 private:
  std::vector<std::pair<float*, std::size_t>> params_;
  TrainingConfig cfg_;
  std::vector<float> m_, v_;
  std::size_t t_ = 0;
};

// Mean loss over a matrix of examples, optionally with dL/drec (scaled 1/B).
double batch_loss(const std::vector<float>& raw, const std::vector<float>& rec, std::size_t batch,
                  std::size_t dim, std::vector<float>* drec) {
  double total = 0;
  if (drec) drec->assign(batch * dim, 0.0f);
  for (std::size_t i = 0; i < batch; ++i) {
    float* g = drec ? drec->data() + i * dim : nullptr;
    total += double(mlp::recon_loss(raw.data() + i * dim, rec.data() + i * dim, dim, g));
  }
  if (drec) {
    const float inv = 1.0f / float(batch);
    for (float& x : *drec) x *= inv;
  }
  return total / double(batch);
}

}  // namespace

TrainResult train_codec(const FeatureCorpus& corpus, const TrainingConfig& cfg,
                        const std::vector<std::size_t>& encoder_sizes,
                        const std::vector<std::size_t>& decoder_sizes) {
  if (cfg.epochs == 0 || cfg.batch < 2 || cfg.lr <= 0) {
    raise(Errc::config, "training needs epochs >= 1, batch >= 2, lr > 0");
  }
  if (cfg.val_split < 0.0 || cfg.val_split >= 1.0) {
    raise(Errc::config, "validation split must be in [0, 1)");
  }
  const std::size_t n_total = corpus.vectors.size();
  const std::size_t dim = encoder_sizes.front();
  if (n_total < cfg.batch) raise(Errc::config, "corpus smaller than one batch");

  TrainResult result;
  result.params = make_codec(encoder_sizes, decoder_sizes);
  Rng init_rng(mix_seed(cfg.seed, hash64("init")));
  mlp::init_mlp(result.params.encoder, init_rng);
  mlp::init_mlp(result.params.decoder, init_rng);

  // Deterministic split: shuffled index list, validation head.
  std::vector<std::size_t> order(n_total);
  for (std::size_t i = 0; i < n_total; ++i) order[i] = i;
  Rng split_rng(mix_seed(cfg.seed, hash64("split")));
  for (std::size_t i = n_total; i > 1; --i) {
    std::swap(order[i - 1], order[split_rng.below(std::uint32_t(i))]);
  }
  const std::size_t n_val = std::size_t(std::llround(cfg.val_split * double(n_total)));
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
  std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());
  if (train_idx.size() < cfg.batch) raise(Errc::config, "training split smaller than one batch");

  auto gather = [&](const std::vector<std::size_t>& idx, std::size_t from, std::size_t count,
                    std::vector<float>& out) {
    out.resize(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
      std::memcpy(out.data() + i * dim, corpus.vectors[idx[from + i]].data(),
                  dim * sizeof(float));
    }
  };

  mlp::MlpGrads<float> enc_grads = mlp::MlpGrads<float>::like(result.params.encoder);
  mlp::MlpGrads<float> dec_grads = mlp::MlpGrads<float>::like(result.params.decoder);

  auto params = mlp::param_views(result.params.encoder);
  {
    auto dec_params = mlp::param_views(result.params.decoder);
    params.insert(params.end(), dec_params.begin(), dec_params.end());
  }
  Adam opt(params, cfg);

  Rng shuffle_rng(mix_seed(cfg.seed, hash64("shuffle")));
  mlp::ForwardCache<float> enc_cache, dec_cache;
  std::vector<float> batch_x, drec;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = train_idx.size(); i > 1; --i) {
      std::swap(train_idx[i - 1], train_idx[shuffle_rng.below(std::uint32_t(i))]);
    }

    double epoch_loss = 0;
    std::size_t batches = 0;
    // Partial tail batches are dropped so batch statistics stay comparable.
    for (std::size_t start = 0; start + cfg.batch <= train_idx.size(); start += cfg.batch) {
      gather(train_idx, start, cfg.batch, batch_x);

      mlp_forward(result.params.encoder, batch_x.data(), cfg.batch, true, enc_cache);
      const std::vector<float>& rec =
          mlp_forward(result.params.decoder, enc_cache.out.data(), cfg.batch, true, dec_cache);

      const double loss = batch_loss(batch_x, rec, cfg.batch, dim, &drec);
      if (!std::isfinite(loss)) {
        raise(Errc::diverged, "training loss became non-finite at epoch " +
                                  std::to_string(epoch));
      }
      epoch_loss += loss;
      ++batches;

      enc_grads.zero();
      dec_grads.zero();
      std::vector<float> dz = mlp_backward(result.params.decoder, dec_cache, drec, dec_grads);
      mlp_backward(result.params.encoder, enc_cache, dz, enc_grads);

      auto grads = mlp::grad_views(enc_grads);
      {
        auto dg = mlp::grad_views(dec_grads);
        grads.insert(grads.end(), dg.begin(), dg.end());
      }
      opt.step(grads);
    }
    result.train_loss.push_back(epoch_loss / double(batches));

    if (!val_idx.empty()) {
      std::vector<float> vx;
      gather(val_idx, 0, val_idx.size(), vx);
      mlp_forward(result.params.encoder, vx.data(), val_idx.size(), false, enc_cache);
      const std::vector<float>& rec =
          mlp_forward(result.params.decoder, enc_cache.out.data(), val_idx.size(), false,
                      dec_cache);
      result.val_loss.push_back(batch_loss(vx, rec, val_idx.size(), dim, nullptr));
    }
  }

  // Latent quantization range over the whole corpus, inference-mode stats.
  QuantRange& qr = result.params.qrange;
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    qr.min[d] = std::numeric_limits<float>::infinity();
    qr.max[d] = -std::numeric_limits<float>::infinity();
  }
  std::vector<float> all;
  std::vector<std::size_t> all_idx(n_total);
  for (std::size_t i = 0; i < n_total; ++i) all_idx[i] = i;
  gather(all_idx, 0, n_total, all);
  mlp::ForwardCache<float> qcache;
  const std::vector<float>& lat =
      mlp_forward(result.params.encoder, all.data(), n_total, false, qcache);
  for (std::size_t i = 0; i < n_total; ++i) {
    for (std::size_t d = 0; d < kLatentDim; ++d) {
      qr.min[d] = std::min(qr.min[d], lat[i * kLatentDim + d]);
      qr.max[d] = std::max(qr.max[d], lat[i * kLatentDim + d]);
    }
  }
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    // A collapsed latent dimension would make the affine map degenerate.
    if (!(qr.max[d] > qr.min[d])) qr.max[d] = qr.min[d] + 1e-6f;
  }
  return result;
}

// --- persistence ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'C', 'O', 'G', 'C', 'O', 'D', 'E', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& f, std::uint32_t v) {
  std::uint8_t b[4];
  for (int i = 0; i < 4; ++i) b[i] = std::uint8_t((v >> (8 * i)) & 0xff);
  f.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& f) {
  std::uint8_t b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) raise(Errc::truncated, "codec file ends early");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

void put_f32s(std::ofstream& f, const std::vector<float>& v) {
  for (float x : v) {
    std::uint32_t bits;
    std::memcpy(&bits, &x, 4);
    put_u32(f, bits);
  }
}

void get_f32s(std::ifstream& f, std::vector<float>& v) {
  for (float& x : v) {
    std::uint32_t bits = get_u32(f);
    std::memcpy(&x, &bits, 4);
  }
}

void put_mlp(std::ofstream& f, const mlp::Mlp<float>& m) {
  for (const auto& b : m.blocks) {
    put_f32s(f, b.lin.w);
    put_f32s(f, b.lin.b);
    if (b.bn) {
      put_f32s(f, b.bn->gamma);
      put_f32s(f, b.bn->beta);
      put_f32s(f, b.bn->run_mean);
      put_f32s(f, b.bn->run_var);
    }
  }
}

void get_mlp(std::ifstream& f, mlp::Mlp<float>& m) {
  for (auto& b : m.blocks) {
    get_f32s(f, b.lin.w);
    get_f32s(f, b.lin.b);
    if (b.bn) {
      get_f32s(f, b.bn->gamma);
      get_f32s(f, b.bn->beta);
      get_f32s(f, b.bn->run_mean);
      get_f32s(f, b.bn->run_var);
    }
  }
}

}  // namespace

void save_codec(const CodecParams& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) raise(Errc::io, "cannot open " + path + " for writing");
  f.write(kMagic, sizeof(kMagic));
  put_u32(f, kVersion);

  auto put_sizes = [&](const std::vector<std::size_t>& sizes) {
    put_u32(f, std::uint32_t(sizes.size()));
    for (std::size_t s : sizes) put_u32(f, std::uint32_t(s));
  };
  put_sizes(p.encoder.layer_sizes());
  put_sizes(p.decoder.layer_sizes());
  put_mlp(f, p.encoder);
  put_mlp(f, p.decoder);

  std::vector<float> qmin(p.qrange.min.begin(), p.qrange.min.end());
  std::vector<float> qmax(p.qrange.max.begin(), p.qrange.max.end());
  put_f32s(f, qmin);
  put_f32s(f, qmax);
  if (!f) raise(Errc::io, "write failed: " + path);
}

CodecParams load_codec(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(Errc::codec_not_found, "no codec file at " + path);

  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    raise(Errc::io, path + " is not a codec file");
  }
  if (get_u32(f) != kVersion) raise(Errc::io, "unsupported codec file version");

  auto get_sizes = [&]() {
    std::uint32_t count = get_u32(f);
    if (count < 2 || count > 64) raise(Errc::io, "implausible layer count in codec file");
    std::vector<std::size_t> sizes(count);
    for (auto& s : sizes) {
      s = get_u32(f);
      if (s == 0 || s > 65536) raise(Errc::io, "implausible layer size in codec file");
    }
    return sizes;
  };
  const auto enc_sizes = get_sizes();
  const auto dec_sizes = get_sizes();

  CodecParams p = make_codec(enc_sizes, dec_sizes);
  get_mlp(f, p.encoder);
  get_mlp(f, p.decoder);

  std::vector<float> qmin(kLatentDim), qmax(kLatentDim);
  get_f32s(f, qmin);
  get_f32s(f, qmax);
  std::copy(qmin.begin(), qmin.end(), p.qrange.min.begin());
  std::copy(qmax.begin(), qmax.end(), p.qrange.max.begin());

  f.peek();
  if (!f.eof()) raise(Errc::io, "trailing bytes in codec file");
  return p;
}

}  // namespace cograph
