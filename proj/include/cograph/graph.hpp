#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "cograph/feature.hpp"
#include "cograph/geom.hpp"

namespace cograph {

using RobotId = std::uint8_t;
using NodeId = std::uint8_t;
using FeatureLabel = std::uint16_t;

inline constexpr std::size_t kMaxNodesPerGraph = 256;  // 8-bit node id space

// Bounding-box extents quantization: 0.1 m per step, saturating at 25.5 m.
inline std::uint8_t bbox_extent_to_byte(double meters) {
  if (meters <= 0.0) return 0;
  double steps = meters * 10.0;
  if (steps >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(steps));
}

inline double bbox_extent_from_byte(std::uint8_t b) { return static_cast<double>(b) * 0.1; }

// One object node. The 512-d feature is local-only state; what travels is
// feat3 (or the raw-feature section when keep_raw is set).
struct NodeRecord {
  RobotId robot = 0;
  NodeId id = 0;
  Vec3 pos;                                 // meters, robot-local frame
  FeatureLabel label = 0;
  std::array<std::uint8_t, 3> bbox{};       // quantized extents
  Feature512 feat512;                       // local only
  bool has_feat512 = false;
  Feature3Q feat3;
  bool keep_raw = false;

  void set_bbox_extents(const Vec3& extents) {
    bbox = {bbox_extent_to_byte(extents.x), bbox_extent_to_byte(extents.y),
            bbox_extent_to_byte(extents.z)};
  }

  Vec3 bbox_extents() const {
    return {bbox_extent_from_byte(bbox[0]), bbox_extent_from_byte(bbox[1]),
            bbox_extent_from_byte(bbox[2])};
  }
};

// Undirected adjacency, stored with a < b.
struct EdgeRecord {
  RobotId robot = 0;
  NodeId a = 0;
  NodeId b = 0;

  bool operator==(const EdgeRecord& o) const {
    return robot == o.robot && a == o.a && b == o.b;
  }
  bool operator<(const EdgeRecord& o) const {
    if (a != o.a) return a < o.a;
    return b < o.b;
  }
};

// A robot's scene graph. Node ids are assigned sequentially; the watermark
// tracks how much of the graph has already been transmitted so deltas carry
// only new (or modified) records.
class COGraph {
 public:
  explicit COGraph(RobotId robot) : robot_(robot) {}

  RobotId robot() const { return robot_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  const std::vector<EdgeRecord>& edges() const { return edges_; }

  const NodeRecord& node(NodeId id) const;

  // Inserts a copy of `node` with the next sequential id (the input id is
  // ignored). Throws IdSpaceExhausted at 256 nodes.
  NodeId add_node(const NodeRecord& node);

  // Stores the canonical undirected edge {a, b}. Idempotent. Throws SelfLoop
  // and UnknownNode.
  EdgeRecord add_edge(NodeId a, NodeId b);

  bool has_edge(NodeId a, NodeId b) const;

  // Replaces a node's contents in place (id and robot are preserved). If the
  // node was already transmitted and its wire payload changed, it is marked
  // dirty and rides the next delta.
  void update_node(NodeId id, const NodeRecord& node);

  // Transmission bookkeeping used by the wire codec.
  struct PendingDelta {
    std::vector<NodeId> node_ids;          // new + dirty, ascending
    std::vector<std::size_t> edge_indices;  // past the edge watermark
  };
  PendingDelta pending_delta() const;
  void commit_delta(const PendingDelta& d);

  std::size_t node_watermark() const { return node_watermark_; }
  std::size_t edge_watermark() const { return edge_watermark_; }

 private:
  RobotId robot_;
  std::vector<NodeRecord> nodes_;
  std::vector<EdgeRecord> edges_;     // insertion order, canonical form
  std::set<std::pair<NodeId, NodeId>> edge_set_;
  std::set<NodeId> dirty_;            // transmitted nodes whose payload changed
  std::size_t node_watermark_ = 0;
  std::size_t edge_watermark_ = 0;
};

}  // namespace cograph
