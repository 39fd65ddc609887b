#pragma once

#include <stdexcept>
#include <string>

namespace cograph {

enum class Errc {
  id_space_exhausted,
  unknown_node,
  self_loop,
  truncated,
  bad_counts,
  dimension_mismatch,
  duplicate_index,
  zero_vector,
  diverged,
  no_candidate_node,
  no_pairs,
  empty_graph,
  codec_not_found,
  config,
  io,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace cograph
