#include "cograph/registry.hpp"

#include <algorithm>

namespace cograph {

const ReceivedGraph& ReceivedRegistry::graph(RobotId robot) const {
  auto it = graphs_.find(robot);
  if (it == graphs_.end()) {
    raise(Errc::unknown_node, "no graph received from robot " + std::to_string(int(robot)));
  }
  return it->second;
}

void ReceivedRegistry::apply_delta(const DeltaMessage& msg, TransmitMode mode) {
  ReceivedGraph& g = graphs_[msg.robot];
  g.robot = msg.robot;

  for (const WireNode& n : msg.nodes) {
    ReceivedNode& slot = g.nodes[n.id];
    slot.wire = n;
    slot.raw_mode = (mode == TransmitMode::raw512);
    if (mode == TransmitMode::raw512) {
      slot.raw_feature = n.feat512_q;
    } else {
      slot.raw_feature.reset();  // replaced below if a raw entry follows
    }
  }
  for (const RawFeatureEntry& e : msg.raw_features) {
    auto it = g.nodes.find(e.id);
    if (it == g.nodes.end()) {
      raise(Errc::unknown_node,
            "raw feature for unreceived node " + std::to_string(int(e.id)));
    }
    it->second.raw_feature = e.feat512_q;
  }

  for (const WireEdge& e : msg.edges) {
    if (e.a == e.b) raise(Errc::self_loop, "edge endpoints identical");
    auto key = std::minmax(e.a, e.b);
    std::pair<NodeId, NodeId> edge{key.first, key.second};
    if (g.nodes.count(edge.first) && g.nodes.count(edge.second)) {
      g.edges.insert(edge);
    } else {
      g.pending_edges.insert(edge);
    }
  }

  // Endpoints for previously parked edges may have arrived with this message.
  for (auto it = g.pending_edges.begin(); it != g.pending_edges.end();) {
    if (g.nodes.count(it->first) && g.nodes.count(it->second)) {
      g.edges.insert(*it);
      it = g.pending_edges.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace cograph
