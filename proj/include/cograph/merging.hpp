#pragma once

// Inter-robot map alignment: feature-based place recognition between a local
// graph and a received one, translation estimation under a known rotation,
// and fusion of the two graphs into one.

#include <optional>
#include <string>
#include <vector>

#include "cograph/codec.hpp"
#include "cograph/graph.hpp"
#include "cograph/registry.hpp"

namespace cograph {

struct MergeConfig {
  double theta_sim = 0.95;    // cosine gate for a matching pair
  std::size_t min_pairs = 3;  // place recognition needs at least this many
  double d_merge = 0.5;       // meters; distance gate after transformation
};

// A local/remote node pair whose features agree.
struct MatchPair {
  NodeId local = 0;
  NodeId remote = 0;
  double similarity = 0.0;  // cosine, >= theta_sim by construction
};

// One candidate alignment, generated from a single matching pair.
struct TranslationCandidate {
  Vec3 t;                         // pos_local - R * pos_remote of the source pair
  MatchPair source;
  std::size_t merged_count = 0;   // matching pairs within d_merge under t
  double mean_residual = 0.0;     // mean distance over those pairs, meters
};

struct MergeResult {
  COGraph merged;
  Vec3 t;
  Mat3 rotation;
  std::vector<std::pair<NodeId, NodeId>> fused;  // (local id, remote id), sorted
  std::map<NodeId, NodeId> remote_to_merged;     // every remote id's new home
  bool any_unmatched = false;                    // some remote node was appended
};

// The 512-d feature a received node stands for: its raw payload when one was
// transmitted, otherwise the decoded compressed feature. `codec` may be null
// only when every node carries a raw payload.
Feature512 received_feature(const ReceivedNode& node, const CodecParams* codec);

// All (local, remote) pairs with cosine >= cfg.theta_sim, ordered by
// (local id, remote id). Local nodes without a 512-d feature cannot match.
// Returns nullopt when fewer than cfg.min_pairs pairs exist, in which case
// the received graph should be kept for a later attempt.
std::optional<std::vector<MatchPair>> place_recognition(const COGraph& local,
                                                        const ReceivedGraph& remote,
                                                        const CodecParams* codec,
                                                        const MergeConfig& cfg);

// Every pair's candidate translation t = pos_local - R * pos_remote, scored
// by how many of the pairs land within cfg.d_merge of their local partner
// under that t. Candidates are returned in pair order.
std::vector<TranslationCandidate> score_translation_candidates(
    const std::vector<MatchPair>& pairs, const COGraph& local, const ReceivedGraph& remote,
    const Mat3& rotation, const MergeConfig& cfg);

// The winning candidate: maximum merged_count, ties by smaller mean residual,
// then by smaller (local id, remote id) of the source pair. The winner's t is
// then refined to the mean of pos_local - R * pos_remote over its inlier
// pairs, which averages out per-node position noise; merged_count and
// mean_residual still describe the raw candidate that won the vote.
// Throws NoPairs when `pairs` is empty.
TranslationCandidate estimate_translation(const std::vector<MatchPair>& pairs,
                                          const COGraph& local, const ReceivedGraph& remote,
                                          const Mat3& rotation, const MergeConfig& cfg);

// Builds the union graph. Remote positions are transformed by (R, t); a
// local/remote pair fuses when both the similarity and distance gates pass,
// one-to-one, nearest pair first. A fused node keeps the local id and label,
// averages the two positions, re-normalizes the mean of the two 512-d
// features, and takes the union of the two world-space bounding boxes.
// Unmatched remote nodes are appended under fresh ids; remote edges are
// re-pointed at the fused or fresh ids. Throws IdSpaceExhausted when the
// union would exceed the node-id space.
MergeResult merge_graphs(const COGraph& local, const ReceivedGraph& remote,
                         const CodecParams* codec, const Mat3& rotation, const Vec3& t,
                         const MergeConfig& cfg);

// Euclidean distance between an estimated and a ground-truth translation.
double t_error(const Vec3& estimated, const Vec3& truth);

// Human- and machine-readable record of one merge: chosen t, the full
// candidate score table, the fused pairs, and t_error when ground truth is
// supplied. Returns a JSON object serialized with 2-space indentation.
std::string merge_report_json(const std::vector<TranslationCandidate>& candidates,
                              const MergeResult& result,
                              const std::optional<Vec3>& t_truth);

}  // namespace cograph
