#include "cograph/embedding.hpp"

#include <cmath>

#include "cograph/error.hpp"

namespace cograph {

Feature512 perturb_feature(const Feature512& base, double sigma, Rng& rng) {
  const double per_dim = sigma / std::sqrt(double(kFeatureDim));
  Feature512 out = base;
  for (std::size_t i = 0; i < kFeatureDim; ++i) {
    out.v[i] += static_cast<float>(per_dim * rng.gaussian());
  }
  return normalized(out);
}

Feature512 EmbeddingTable::base_vector(std::uint64_t table_seed, std::string_view name) {
  Rng rng(mix_seed(table_seed, hash64(name)));
  Feature512 f;
  for (std::size_t i = 0; i < kFeatureDim; ++i) f.v[i] = static_cast<float>(rng.gaussian());
  return normalized(f);
}

EmbeddingTable::EmbeddingTable(EmbeddingTableSpec spec) : spec_(std::move(spec)) {
  if (spec_.categories.size() > 0xFFFE) {
    raise(Errc::config, "too many categories for 16-bit labels");
  }
  vectors_.reserve(spec_.categories.size());
  for (std::size_t i = 0; i < spec_.categories.size(); ++i) {
    const std::string& name = spec_.categories[i];
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
      raise(Errc::config, "category names must be non-empty and whitespace-free");
    }
    if (!labels_.emplace(name, std::uint16_t(i + 1)).second) {
      raise(Errc::config, "duplicate category: " + name);
    }
    vectors_.push_back(base_vector(spec_.seed, name));
  }

  // Overwrite coupled categories: v_b = rho * v_a + sqrt(1 - rho^2) * w with
  // w unit and orthogonal to v_a, so cos(v_a, v_b) = rho exactly.
  for (const CouplingSpec& c : spec_.couplings) {
    auto ia = labels_.find(c.a);
    auto ib = labels_.find(c.b);
    if (ia == labels_.end() || ib == labels_.end()) {
      raise(Errc::config, "coupling references unknown category: " + c.a + "/" + c.b);
    }
    if (c.rho <= -1.0 || c.rho >= 1.0) {
      raise(Errc::config, "coupling cosine must be in (-1, 1)");
    }
    const Feature512& va = vectors_[ia->second - 1];
    Feature512& vb = vectors_[ib->second - 1];
    // Orthogonalize b's own direction against a, then recombine.
    double d = cosine(va, vb);
    Feature512 w;
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
      w.v[i] = vb.v[i] - static_cast<float>(d) * va.v[i];
    }
    w = normalized(w);
    const float r = static_cast<float>(c.rho);
    const float s = static_cast<float>(std::sqrt(1.0 - c.rho * c.rho));
    for (std::size_t i = 0; i < kFeatureDim; ++i) {
      vb.v[i] = r * va.v[i] + s * w.v[i];
    }
    vb = normalized(vb);
  }
}

std::uint16_t EmbeddingTable::label_of(const std::string& name) const {
  auto it = labels_.find(name);
  if (it == labels_.end()) raise(Errc::config, "unknown category: " + name);
  return it->second;
}

const std::string& EmbeddingTable::category_of(std::uint16_t label) const {
  if (label == 0 || label > spec_.categories.size()) {
    raise(Errc::config, "label " + std::to_string(label) + " out of range");
  }
  return spec_.categories[label - 1];
}

const Feature512& EmbeddingTable::category_vector(const std::string& name) const {
  return vectors_[label_of(name) - 1];
}

const Feature512& EmbeddingTable::category_vector(std::uint16_t label) const {
  if (label == 0 || label > vectors_.size()) {
    raise(Errc::config, "label " + std::to_string(label) + " out of range");
  }
  return vectors_[label - 1];
}

Feature512 EmbeddingTable::embed_text(const std::string& text) const {
  auto it = labels_.find(text);
  if (it != labels_.end()) return vectors_[it->second - 1];
  return base_vector(spec_.seed, text);
}

Feature512 EmbeddingTable::instance_vector(const std::string& category,
                                           std::uint64_t instance_id, double sigma) const {
  const Feature512& base = category_vector(category);
  Rng rng(mix_seed(mix_seed(spec_.seed, hash64("instance")), instance_id));
  return perturb_feature(base, sigma, rng);
}

}  // namespace cograph
