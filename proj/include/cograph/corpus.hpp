#pragma once

#include "cograph/codec.hpp"
#include "cograph/embedding.hpp"

namespace cograph {

// The stock 40-category indoor vocabulary used by the bundled scenarios and
// the training corpus, with one deliberate semantic coupling (sofa/cushion at
// cosine 0.8) so retrieval has a hard off-diagonal pair to keep apart.
EmbeddingTableSpec default_embedding_spec(std::uint64_t seed = 2024);

// Unit-vector corpus: per category, `samples_per_category` perturbed copies
// of the category vector (expected displacement `sigma`), labels attached.
FeatureCorpus generate_corpus(const EmbeddingTable& table, std::size_t samples_per_category,
                              double sigma, std::uint64_t seed);

}  // namespace cograph
