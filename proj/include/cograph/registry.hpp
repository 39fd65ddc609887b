#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "cograph/wire.hpp"

namespace cograph {

// A node as reconstructed on the receiving side.
struct ReceivedNode {
  WireNode wire;
  std::optional<std::array<std::uint8_t, kFeatureDim>> raw_feature;  // keep_raw payload
  bool raw_mode = false;  // true when the node arrived in raw-512 mode

  Vec3 pos() const { return {wire.pos[0], wire.pos[1], wire.pos[2]}; }
};

// Everything one sender has transmitted so far, keyed by node id. Duplicate
// (robot, id) records overwrite (latest wins). Edges whose endpoints have not
// arrived are parked and applied once they do.
struct ReceivedGraph {
  RobotId robot = 0;
  std::map<NodeId, ReceivedNode> nodes;
  std::set<std::pair<NodeId, NodeId>> edges;
  std::set<std::pair<NodeId, NodeId>> pending_edges;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t edge_count() const { return edges.size(); }
};

// Per-sender registry held by each receiving robot. Registries of different
// senders are independent, so deltas from different robots may be applied
// concurrently; records from one sender must be applied in channel order.
class ReceivedRegistry {
 public:
  // Appends the message's records to the sender's graph.
  void apply_delta(const DeltaMessage& msg, TransmitMode mode = TransmitMode::compressed);

  bool has(RobotId robot) const { return graphs_.count(robot) != 0; }
  const ReceivedGraph& graph(RobotId robot) const;
  const std::map<RobotId, ReceivedGraph>& graphs() const { return graphs_; }

 private:
  std::map<RobotId, ReceivedGraph> graphs_;
};

}  // namespace cograph
