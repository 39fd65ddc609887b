#include "cograph/merging.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace cograph {

namespace {

Vec3 transform(const Mat3& rotation, const Vec3& t, const Vec3& p) {
  return rotation * p + t;
}

Vec3 wire_extents(const WireNode& n) {
  return {bbox_extent_from_byte(n.bbox[0]), bbox_extent_from_byte(n.bbox[1]),
          bbox_extent_from_byte(n.bbox[2])};
}

// World-space half-extent of a rotated axis-aligned box: |R| * h.
Vec3 rotated_extents(const Mat3& rotation, const Vec3& extents) {
  auto row = [&](int i) {
    double acc = 0.0;
    for (int j = 0; j < 3; ++j) acc += std::abs(rotation.m[std::size_t(3 * i + j)]) * extents[j];
    return acc;
  };
  return {row(0), row(1), row(2)};
}

}  // namespace

Feature512 received_feature(const ReceivedNode& node, const CodecParams* codec) {
  if (node.raw_feature) return feature_from_bytes(*node.raw_feature);
  if (!codec)
    raise(Errc::config, "received node carries only a compressed feature and no codec was given");
  return decode(*codec, dequantize(node.wire.feat3, codec->qrange));
}

std::optional<std::vector<MatchPair>> place_recognition(const COGraph& local,
                                                        const ReceivedGraph& remote,
                                                        const CodecParams* codec,
                                                        const MergeConfig& cfg) {
  // Decode each received feature once; the scan below is all-pairs.
  std::vector<std::pair<NodeId, Feature512>> remote_feats;
  remote_feats.reserve(remote.nodes.size());
  for (const auto& [id, node] : remote.nodes) remote_feats.emplace_back(id, received_feature(node, codec));

  std::vector<MatchPair> pairs;
  for (const NodeRecord& n : local.nodes()) {
    if (!n.has_feat512) continue;
    for (const auto& [rid, f] : remote_feats) {
      const double sim = cosine(n.feat512, f);
      if (sim >= cfg.theta_sim) pairs.push_back({n.id, rid, sim});
    }
  }
  if (pairs.size() < cfg.min_pairs) return std::nullopt;
  return pairs;
}

std::vector<TranslationCandidate> score_translation_candidates(
    const std::vector<MatchPair>& pairs, const COGraph& local, const ReceivedGraph& remote,
    const Mat3& rotation, const MergeConfig& cfg) {
  std::vector<TranslationCandidate> candidates;
  candidates.reserve(pairs.size());
  for (const MatchPair& p : pairs) {
    TranslationCandidate c;
    c.source = p;
    c.t = local.node(p.local).pos - rotation * remote.nodes.at(p.remote).pos();
    double residual_sum = 0.0;
    for (const MatchPair& q : pairs) {
      const Vec3 mapped = transform(rotation, c.t, remote.nodes.at(q.remote).pos());
      const double d = distance(local.node(q.local).pos, mapped);
      if (d <= cfg.d_merge) {
        ++c.merged_count;
        residual_sum += d;
      }
    }
    c.mean_residual = c.merged_count ? residual_sum / double(c.merged_count) : 0.0;
    candidates.push_back(c);
  }
  return candidates;
}

TranslationCandidate estimate_translation(const std::vector<MatchPair>& pairs,
                                          const COGraph& local, const ReceivedGraph& remote,
                                          const Mat3& rotation, const MergeConfig& cfg) {
  if (pairs.empty()) raise(Errc::no_pairs, "translation estimation needs at least one pair");
  const auto candidates = score_translation_candidates(pairs, local, remote, rotation, cfg);

  const TranslationCandidate* best = &candidates.front();
  for (const TranslationCandidate& c : candidates) {
    const auto key = std::make_tuple(-double(c.merged_count), c.mean_residual,
                                     c.source.local, c.source.remote);
    const auto best_key = std::make_tuple(-double(best->merged_count), best->mean_residual,
                                          best->source.local, best->source.remote);
    if (key < best_key) best = &c;
  }

  // Average the winner's inlier offsets; with zero-mean position noise this
  // tightens t by roughly the square root of the inlier count.
  TranslationCandidate winner = *best;
  Vec3 sum;
  std::size_t inliers = 0;
  for (const MatchPair& q : pairs) {
    const Vec3 mapped = transform(rotation, winner.t, remote.nodes.at(q.remote).pos());
    if (distance(local.node(q.local).pos, mapped) <= cfg.d_merge) {
      sum += local.node(q.local).pos - rotation * remote.nodes.at(q.remote).pos();
      ++inliers;
    }
  }
  if (inliers) winner.t = sum / double(inliers);
  return winner;
}

MergeResult merge_graphs(const COGraph& local, const ReceivedGraph& remote,
                         const CodecParams* codec, const Mat3& rotation, const Vec3& t,
                         const MergeConfig& cfg) {
  MergeResult result{COGraph(local.robot()), t, rotation, {}, {}, false};

  // The merged graph starts as the local graph; local ids are dense and
  // sequential, so re-adding preserves them.
  for (const NodeRecord& n : local.nodes()) result.merged.add_node(n);
  for (const EdgeRecord& e : local.edges()) result.merged.add_edge(e.a, e.b);

  // Transformed remote view, decoded once.
  struct RemoteView {
    NodeId id;
    Vec3 pos;
    Feature512 feat;
    const ReceivedNode* node;
  };
  std::vector<RemoteView> views;
  views.reserve(remote.nodes.size());
  for (const auto& [id, node] : remote.nodes)
    views.push_back({id, transform(rotation, t, node.pos()), received_feature(node, codec), &node});

  // All pairs passing both gates, fused greedily nearest-first so the
  // assignment is one-to-one and deterministic.
  struct GatedPair {
    double dist;
    NodeId local_id;
    std::size_t view_index;
  };
  std::vector<GatedPair> gated;
  for (const NodeRecord& n : local.nodes()) {
    if (!n.has_feat512) continue;
    for (std::size_t v = 0; v < views.size(); ++v) {
      const double d = distance(n.pos, views[v].pos);
      if (d <= cfg.d_merge && cosine(n.feat512, views[v].feat) >= cfg.theta_sim)
        gated.push_back({d, n.id, v});
    }
  }
  std::sort(gated.begin(), gated.end(), [&](const GatedPair& a, const GatedPair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.local_id != b.local_id) return a.local_id < b.local_id;
    return views[a.view_index].id < views[b.view_index].id;
  });

  std::vector<bool> local_taken(local.node_count(), false);
  std::vector<bool> remote_taken(views.size(), false);
  for (const GatedPair& g : gated) {
    if (local_taken[g.local_id] || remote_taken[g.view_index]) continue;
    local_taken[g.local_id] = true;
    remote_taken[g.view_index] = true;
    const RemoteView& v = views[g.view_index];

    NodeRecord fused = result.merged.node(g.local_id);
    fused.pos = (fused.pos + v.pos) / 2.0;
    Feature512 mean;
    for (std::size_t i = 0; i < kFeatureDim; ++i)
      mean.v[i] = float((double(fused.feat512.v[i]) + double(v.feat.v[i])) / 2.0);
    fused.feat512 = normalized(mean);
    fused.has_feat512 = true;
    if (codec) fused.feat3 = quantize(encode(*codec, fused.feat512), codec->qrange);

    // Union of the two world-space boxes, stored as extents about the fused
    // center (the box record carries size only).
    Aabb box = Aabb::from_center_extents(result.merged.node(g.local_id).pos,
                                         result.merged.node(g.local_id).bbox_extents());
    box.expand(Aabb::from_center_extents(
        v.pos, rotated_extents(rotation, wire_extents(v.node->wire))));
    fused.set_bbox_extents(box.extents());

    result.merged.update_node(g.local_id, fused);
    result.fused.emplace_back(g.local_id, v.id);
    result.remote_to_merged[v.id] = g.local_id;
  }
  std::sort(result.fused.begin(), result.fused.end());

  // Unmatched remote nodes come in under fresh ids, in remote-id order.
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (remote_taken[v]) continue;
    result.any_unmatched = true;
    const RemoteView& view = views[v];
    NodeRecord rec;
    rec.pos = view.pos;
    rec.label = view.node->wire.label;
    rec.feat512 = view.feat;
    rec.has_feat512 = true;
    rec.feat3 = codec ? quantize(encode(*codec, view.feat), codec->qrange) : view.node->wire.feat3;
    rec.set_bbox_extents(rotated_extents(rotation, wire_extents(view.node->wire)));
    result.remote_to_merged[view.id] = result.merged.add_node(rec);
  }

  // One-to-one fusion keeps remote_to_merged injective, so distinct remote
  // endpoints always map to distinct merged ids.
  for (const auto& [a, b] : remote.edges)
    result.merged.add_edge(result.remote_to_merged.at(a), result.remote_to_merged.at(b));
  return result;
}

double t_error(const Vec3& estimated, const Vec3& truth) { return distance(estimated, truth); }

}  // namespace cograph
