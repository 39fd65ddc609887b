#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "cograph/error.hpp"
#include "cograph/kernels.hpp"

namespace cograph {

inline constexpr std::size_t kFeatureDim = 512;

// CLIP-like semantic embedding. Unit-normalized wherever similarity is used.
struct Feature512 {
  alignas(32) std::array<float, kFeatureDim> v{};

  float* data() { return v.data(); }
  const float* data() const { return v.data(); }

  bool operator==(const Feature512& o) const { return v == o.v; }
};

inline double norm(const Feature512& f) {
  return std::sqrt(static_cast<double>(kern::active().dot(f.data(), f.data(), kFeatureDim)));
}

inline Feature512 normalized(const Feature512& f) {
  double n = norm(f);
  if (n <= 0.0) raise(Errc::zero_vector, "cannot normalize a zero feature");
  Feature512 out = f;
  kern::active().scal(static_cast<float>(1.0 / n), out.data(), kFeatureDim);
  return out;
}

inline double cosine(const Feature512& a, const Feature512& b) {
  const auto& k = kern::active();
  double na = std::sqrt(static_cast<double>(k.dot(a.data(), a.data(), kFeatureDim)));
  double nb = std::sqrt(static_cast<double>(k.dot(b.data(), b.data(), kFeatureDim)));
  if (na <= 0.0 || nb <= 0.0) raise(Errc::zero_vector, "cosine of a zero feature");
  return static_cast<double>(k.dot(a.data(), b.data(), kFeatureDim)) / (na * nb);
}

// Wire form of a full feature: one byte per component, affine over [-1, 1].
// Components of a unit vector always fit; anything else is clamped.
inline std::uint8_t feature_component_to_byte(float x) {
  float t = (x + 1.0f) * 0.5f * 255.0f;
  if (t <= 0.0f) return 0;
  if (t >= 255.0f) return 255;
  return static_cast<std::uint8_t>(std::lround(t));
}

inline float feature_component_from_byte(std::uint8_t q) {
  return -1.0f + static_cast<float>(q) * (2.0f / 255.0f);
}

inline std::array<std::uint8_t, kFeatureDim> feature_to_bytes(const Feature512& f) {
  std::array<std::uint8_t, kFeatureDim> out{};
  for (std::size_t i = 0; i < kFeatureDim; ++i) out[i] = feature_component_to_byte(f.v[i]);
  return out;
}

inline Feature512 feature_from_bytes(const std::array<std::uint8_t, kFeatureDim>& q) {
  Feature512 f;
  for (std::size_t i = 0; i < kFeatureDim; ++i) f.v[i] = feature_component_from_byte(q[i]);
  return f;
}

// Quantized 3-d feature as transmitted: exactly 24 bits.
struct Feature3Q {
  std::array<std::uint8_t, 3> q{};

  bool operator==(const Feature3Q& o) const { return q == o.q; }
};

}  // namespace cograph
