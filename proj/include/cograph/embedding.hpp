#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cograph/feature.hpp"
#include "cograph/rng.hpp"

namespace cograph {

// A requested cosine similarity between two category vectors.
struct CouplingSpec {
  std::string a;
  std::string b;
  double rho = 0.0;
};

// Deterministic recipe for a table of synthetic category embeddings. Feature
// labels are 1-based positions in `categories` (0 is reserved for background).
struct EmbeddingTableSpec {
  std::uint64_t seed = 0;
  std::vector<std::string> categories;
  std::vector<CouplingSpec> couplings;
};

// Adds a Gaussian perturbation with expected L2 magnitude `sigma` and
// re-normalizes. With sigma interpreted as the total displacement length,
// the per-dimension std is sigma/sqrt(512), so same-category vectors stay
// tightly clustered (cosine ~ 1 - sigma^2/2 for unit bases).
Feature512 perturb_feature(const Feature512& base, double sigma, Rng& rng);

// Unit vectors synthesized per category name from the table seed. Any string
// maps to a deterministic vector (open-vocabulary stand-in); listed categories
// may additionally be coupled to a target cosine, constructed exactly as
// v_b = rho * v_a + sqrt(1 - rho^2) * w with w a unit vector orthogonal to v_a.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(EmbeddingTableSpec spec);

  const EmbeddingTableSpec& spec() const { return spec_; }

  bool has_category(const std::string& name) const { return labels_.count(name) != 0; }
  std::uint16_t label_of(const std::string& name) const;
  const std::string& category_of(std::uint16_t label) const;
  std::size_t category_count() const { return spec_.categories.size(); }

  // Vector for a listed category (coupling-adjusted when applicable).
  const Feature512& category_vector(const std::string& name) const;
  const Feature512& category_vector(std::uint16_t label) const;

  // Vector for arbitrary text: the category vector when listed, otherwise a
  // deterministic hash-seeded unit vector.
  Feature512 embed_text(const std::string& text) const;

  // Stable per-object-instance vector: category vector plus a perturbation
  // seeded by (table seed, instance id), identical across frames and robots.
  Feature512 instance_vector(const std::string& category, std::uint64_t instance_id,
                             double sigma) const;

  // Hash-seeded unit vector, the common construction for uncoupled categories
  // and unknown query words.
  static Feature512 base_vector(std::uint64_t table_seed, std::string_view name);

 private:
  EmbeddingTableSpec spec_;
  std::map<std::string, std::uint16_t> labels_;  // name -> 1-based label
  std::vector<Feature512> vectors_;              // by category position
};

}  // namespace cograph
