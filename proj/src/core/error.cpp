#include "cograph/error.hpp"

namespace cograph {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::id_space_exhausted: return "id_space_exhausted";
    case Errc::unknown_node: return "unknown_node";
    case Errc::self_loop: return "self_loop";
    case Errc::truncated: return "truncated";
    case Errc::bad_counts: return "bad_counts";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::duplicate_index: return "duplicate_index";
    case Errc::zero_vector: return "zero_vector";
    case Errc::diverged: return "diverged";
    case Errc::no_candidate_node: return "no_candidate_node";
    case Errc::no_pairs: return "no_pairs";
    case Errc::empty_graph: return "empty_graph";
    case Errc::codec_not_found: return "codec_not_found";
    case Errc::config: return "config";
    case Errc::io: return "io";
  }
  return "unknown";
}

}  // namespace cograph
