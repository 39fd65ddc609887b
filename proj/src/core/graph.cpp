#include "cograph/graph.hpp"

#include <algorithm>

#include "cograph/error.hpp"
#include "cograph/wire.hpp"

namespace cograph {

const NodeRecord& COGraph::node(NodeId id) const {
  if (id >= nodes_.size()) raise(Errc::unknown_node, "node id " + std::to_string(id));
  return nodes_[id];
}

NodeId COGraph::add_node(const NodeRecord& node) {
  if (nodes_.size() >= kMaxNodesPerGraph)
    raise(Errc::id_space_exhausted, "graph already holds 256 nodes");
  NodeRecord stored = node;
  stored.robot = robot_;
  stored.id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(stored);
  return stored.id;
}

EdgeRecord COGraph::add_edge(NodeId a, NodeId b) {
  if (a == b) raise(Errc::self_loop, "edge endpoints are both " + std::to_string(a));
  if (a >= nodes_.size() || b >= nodes_.size())
    raise(Errc::unknown_node,
          "edge (" + std::to_string(a) + "," + std::to_string(b) + ") references a missing node");
  if (a > b) std::swap(a, b);
  EdgeRecord e{robot_, a, b};
  if (edge_set_.insert({a, b}).second) edges_.push_back(e);
  return e;
}

bool COGraph::has_edge(NodeId a, NodeId b) const {
  if (a > b) std::swap(a, b);
  return edge_set_.count({a, b}) != 0;
}

namespace {

// Modification is judged at the wire level: a node counts as changed only if
// some transmitted byte would change.
bool wire_equal(const NodeRecord& a, const NodeRecord& b) {
  if (node_wire_payload(a) != node_wire_payload(b)) return false;
  if (a.keep_raw != b.keep_raw) return false;
  if (a.has_feat512 != b.has_feat512) return false;
  if (a.has_feat512 && feature_to_bytes(a.feat512) != feature_to_bytes(b.feat512)) return false;
  return true;
}

}  // namespace

void COGraph::update_node(NodeId id, const NodeRecord& node) {
  if (id >= nodes_.size()) raise(Errc::unknown_node, "node id " + std::to_string(id));
  NodeRecord stored = node;
  stored.robot = robot_;
  stored.id = id;
  bool changed = !wire_equal(nodes_[id], stored);
  nodes_[id] = stored;
  if (changed && id < node_watermark_) dirty_.insert(id);
}

COGraph::PendingDelta COGraph::pending_delta() const {
  PendingDelta d;
  for (NodeId id : dirty_) d.node_ids.push_back(id);
  for (std::size_t i = node_watermark_; i < nodes_.size(); ++i)
    d.node_ids.push_back(static_cast<NodeId>(i));
  std::sort(d.node_ids.begin(), d.node_ids.end());
  for (std::size_t i = edge_watermark_; i < edges_.size(); ++i) d.edge_indices.push_back(i);
  return d;
}

void COGraph::commit_delta(const PendingDelta& d) {
  for (NodeId id : d.node_ids) dirty_.erase(id);
  node_watermark_ = nodes_.size();
  edge_watermark_ = edges_.size();
}

}  // namespace cograph
