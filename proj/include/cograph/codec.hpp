#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cograph/feature.hpp"
#include "cograph/mlp.hpp"

namespace cograph {

inline constexpr std::size_t kLatentDim = 3;

// Default autoencoder architecture: 512 -> 3 encoder, 3 -> 512 decoder.
const std::vector<std::size_t>& default_encoder_sizes();
const std::vector<std::size_t>& default_decoder_sizes();

// Per-dimension affine quantization range of the 3-d latent, computed over
// the training corpus. Values outside the range clamp.
struct QuantRange {
  std::array<float, kLatentDim> min{};
  std::array<float, kLatentDim> max{};
};

Feature3Q quantize(const std::array<float, kLatentDim>& z, const QuantRange& r);
std::array<float, kLatentDim> dequantize(const Feature3Q& q, const QuantRange& r);

// Trained codec: encoder+decoder weights plus the latent quantization range.
struct CodecParams {
  mlp::Mlp<float> encoder;
  mlp::Mlp<float> decoder;
  QuantRange qrange;
};

CodecParams make_codec(const std::vector<std::size_t>& encoder_sizes = default_encoder_sizes(),
                       const std::vector<std::size_t>& decoder_sizes = default_decoder_sizes());

// Inference passes (running-statistics normalization). decode re-normalizes
// its output to unit length.
std::array<float, kLatentDim> encode(const CodecParams& p, const Feature512& f);
Feature512 decode(const CodecParams& p, const std::array<float, kLatentDim>& z);

double round_trip_cosine(const CodecParams& p, const Feature512& f);

// Pre-compression validation: features the codec reconstructs poorly
// (round-trip cosine below theta_keep) travel raw instead.
bool validate_compression(const Feature512& f, const CodecParams& p, double theta_keep = 0.7);

// Convenience for senders: latent -> quantized wire feature.
Feature3Q encode_quantized(const CodecParams& p, const Feature512& f);
// Receivers: wire feature -> reconstructed unit feature.
Feature512 decode_quantized(const CodecParams& p, const Feature3Q& q);

// --- training -------------------------------------------------------------

struct FeatureCorpus {
  std::vector<Feature512> vectors;   // unit-normalized
  std::vector<std::uint16_t> labels;  // category labels, parallel to vectors
};

struct TrainingConfig {
  std::size_t epochs = 500;
  std::size_t batch = 256;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  double val_split = 0.1;
  // Adam moments.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainResult {
  CodecParams params;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;    // per epoch (empty when val_split = 0)
};

// Mini-batch training with per-parameter adaptive steps. Deterministic for a
// fixed seed/corpus/config. Throws Diverged on non-finite loss.
TrainResult train_codec(const FeatureCorpus& corpus, const TrainingConfig& cfg,
                        const std::vector<std::size_t>& encoder_sizes = default_encoder_sizes(),
                        const std::vector<std::size_t>& decoder_sizes = default_decoder_sizes());

// --- persistence ----------------------------------------------------------

// Versioned little-endian binary file; see docs/codec_file.md.
void save_codec(const CodecParams& p, const std::string& path);
CodecParams load_codec(const std::string& path);

}  // namespace cograph
