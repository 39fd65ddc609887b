#include <map>
#include <set>

#include "cograph/mapping.hpp"

namespace cograph {

void GraphBuilder::apply(const std::vector<NodeCandidate>& clusters,
                         const std::vector<TrackSnapshot>& tracks, const OccupancyGrid& grid) {
  // 1. Associate clusters with existing nodes, one-to-one, nearest first in
  //    cluster order; unmatched clusters become new nodes.
  std::set<NodeId> claimed;
  for (const NodeCandidate& c : clusters) {
    bool found = false;
    NodeId best = 0;
    double best_dist = 0.0;
    for (const NodeRecord& n : g_.nodes()) {
      if (n.label != c.label || claimed.count(n.id)) continue;
      const double d = distance(n.pos, c.center);
      if (d <= cfg_.match_radius && (!found || d < best_dist)) {
        found = true;
        best = n.id;
        best_dist = d;
      }
    }

    if (found) {
      claimed.insert(best);
      NodeRecord rec = g_.node(best);
      bool touched = false;
      if (distance(rec.pos, c.center) >= cfg_.pos_update_eps) {
        rec.pos = c.center;
        touched = true;
      }
      NodeRecord probe = rec;
      probe.set_bbox_extents(c.extents);
      if (probe.bbox != rec.bbox) {
        rec.bbox = probe.bbox;
        touched = true;
      }
      if (touched) g_.update_node(best, rec);
    } else {
      NodeRecord rec;
      rec.label = c.label;
      rec.pos = c.center;
      rec.set_bbox_extents(c.extents);
      claimed.insert(g_.add_node(rec));
    }
  }

  // 2. Count-weighted feature means: each track contributes its accumulated
  //    feature sum to the nearest node of its label.
  struct Acc {
    std::array<double, kFeatureDim> sum{};
    std::size_t count = 0;
  };
  std::map<NodeId, Acc> acc;
  for (const TrackSnapshot& t : tracks) {
    if (t.observations == 0) continue;
    const auto id = find_nearest_labeled_node(t.label, t.centroid, g_.nodes());
    if (!id) continue;  // the track never produced a node candidate yet
    Acc& a = acc[*id];
    for (std::size_t i = 0; i < kFeatureDim; ++i) a.sum[i] += t.feat_sum[i];
    a.count += t.observations;
  }
  for (const auto& [id, a] : acc) {
    Feature512 f;
    for (std::size_t i = 0; i < kFeatureDim; ++i)
      f.v[i] = static_cast<float>(a.sum[i] / static_cast<double>(a.count));
    f = normalized(f);

    NodeRecord rec = g_.node(id);
    if (rec.has_feat512 && rec.feat512 == f) continue;
    rec.feat512 = f;
    rec.has_feat512 = true;
    if (encode_) encode_(rec);
    g_.update_node(id, rec);
  }

  // 3. Append qualifying edges. The gate is tightened by edge_margin so an
  //    edge added now cannot be invalidated by later sub-voxel center drift
  //    (stored edges are append-only).
  MappingConfig edge_cfg = cfg_;
  edge_cfg.d_edge = std::max(0.0, cfg_.d_edge - cfg_.edge_margin);
  for (const auto& [a, b] : generate_edges(g_.nodes(), grid, edge_cfg)) g_.add_edge(a, b);
}

}  // namespace cograph
