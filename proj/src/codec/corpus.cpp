#include "cograph/corpus.hpp"

namespace cograph {

EmbeddingTableSpec default_embedding_spec(std::uint64_t seed) {
  EmbeddingTableSpec spec;
  spec.seed = seed;
  spec.categories = {
      "chair",  "sofa",   "cushion",   "table",  "lamp",    "bed",      "desk",    "monitor",
      "keyboard", "mouse", "shelf",    "cabinet", "door",   "window",   "plant",   "vase",
      "rug",    "mirror", "sink",      "toilet", "bathtub", "towel",    "oven",    "fridge",
      "microwave", "kettle", "cup",    "plate",  "bowl",    "bottle",   "book",    "clock",
      "television", "speaker", "picture", "curtain", "pillow", "blanket", "stool", "bench",
  };
  spec.couplings = {{"sofa", "cushion", 0.8}};
  return spec;
}

FeatureCorpus generate_corpus(const EmbeddingTable& table, std::size_t samples_per_category,
                              double sigma, std::uint64_t seed) {
  if (samples_per_category == 0) raise(Errc::config, "corpus needs at least one sample per category");
  FeatureCorpus corpus;
  corpus.vectors.reserve(table.category_count() * samples_per_category);
  corpus.labels.reserve(corpus.vectors.capacity());

  Rng rng(mix_seed(seed, hash64("corpus")));
  for (std::size_t c = 0; c < table.category_count(); ++c) {
    const auto label = static_cast<std::uint16_t>(c + 1);
    const Feature512& base = table.category_vector(label);
    for (std::size_t s = 0; s < samples_per_category; ++s) {
      corpus.vectors.push_back(perturb_feature(base, sigma, rng));
      corpus.labels.push_back(label);
    }
  }
  return corpus;
}

}  // namespace cograph
