#include "cograph/wire.hpp"

#include <limits>

#include "bytes.hpp"

namespace cograph {

namespace {

WireNode to_wire(const NodeRecord& n, TransmitMode mode) {
  WireNode w;
  w.robot = n.robot;
  w.id = n.id;
  w.pos = {static_cast<float>(n.pos.x), static_cast<float>(n.pos.y),
           static_cast<float>(n.pos.z)};
  w.label = n.label;
  w.bbox = n.bbox;
  if (mode == TransmitMode::raw512) {
    w.feat512_q = feature_to_bytes(n.feat512);
  } else {
    w.feat3 = n.feat3;
  }
  return w;
}

void write_node(detail::ByteWriter& w, const WireNode& n, TransmitMode mode) {
  w.u8(n.robot);
  w.u8(n.id);
  for (float c : n.pos) w.f32(c);
  w.u16(n.label);
  w.bytes(n.bbox.data(), 3);
  if (mode == TransmitMode::raw512) {
    w.bytes(n.feat512_q.data(), n.feat512_q.size());
  } else {
    w.bytes(n.feat3.q.data(), 3);
  }
}

WireNode read_node(detail::ByteReader& r, TransmitMode mode) {
  WireNode n;
  n.robot = r.u8();
  n.id = r.u8();
  for (float& c : n.pos) c = r.f32();
  n.label = r.u16();
  r.bytes(n.bbox.data(), 3);
  if (mode == TransmitMode::raw512) {
    r.bytes(n.feat512_q.data(), n.feat512_q.size());
  } else {
    r.bytes(n.feat3.q.data(), 3);
  }
  return n;
}

}  // namespace

std::array<std::uint8_t, kWireNodeBytes> node_wire_payload(const NodeRecord& n) {
  std::vector<std::uint8_t> buf;
  buf.reserve(kWireNodeBytes);
  detail::ByteWriter w{buf};
  write_node(w, to_wire(n, TransmitMode::compressed), TransmitMode::compressed);
  std::array<std::uint8_t, kWireNodeBytes> out{};
  std::copy(buf.begin(), buf.end(), out.begin());
  return out;
}

std::size_t expected_wire_size(std::size_t nodes, std::size_t edges, std::size_t raw_entries,
                               TransmitMode mode) {
  std::size_t node_bytes = mode == TransmitMode::raw512 ? kWireRawNodeBytes : kWireNodeBytes;
  std::size_t raw_bytes = mode == TransmitMode::raw512 ? 0 : raw_entries * kWireRawEntryBytes;
  return kWireHeaderBytes + nodes * node_bytes + edges * kWireEdgeBytes + raw_bytes;
}

std::vector<std::uint8_t> encode_delta(const DeltaMessage& msg, TransmitMode mode) {
  std::vector<std::uint8_t> out;
  out.reserve(expected_wire_size(msg.nodes.size(), msg.edges.size(), msg.raw_features.size(), mode));
  detail::ByteWriter w{out};
  w.u8(msg.robot);
  w.u16(static_cast<std::uint16_t>(msg.nodes.size()));
  w.u16(static_cast<std::uint16_t>(msg.edges.size()));
  for (const WireNode& n : msg.nodes) write_node(w, n, mode);
  for (const WireEdge& e : msg.edges) {
    w.u8(e.robot);
    w.u8(e.a);
    w.u8(e.b);
  }
  if (mode == TransmitMode::compressed) {
    for (const RawFeatureEntry& rf : msg.raw_features) {
      w.u8(rf.id);
      w.bytes(rf.feat512_q.data(), rf.feat512_q.size());
    }
  }
  return out;
}

std::vector<std::uint8_t> serialize_delta(COGraph& graph, TransmitMode mode) {
  COGraph::PendingDelta pending = graph.pending_delta();

  DeltaMessage msg;
  msg.robot = graph.robot();
  for (NodeId id : pending.node_ids) {
    const NodeRecord& n = graph.node(id);
    msg.nodes.push_back(to_wire(n, mode));
    if (mode == TransmitMode::compressed && n.keep_raw && n.has_feat512) {
      msg.raw_features.push_back({id, feature_to_bytes(n.feat512)});
    }
  }
  for (std::size_t idx : pending.edge_indices) {
    const EdgeRecord& e = graph.edges()[idx];
    msg.edges.push_back({e.robot, e.a, e.b});
  }

  std::vector<std::uint8_t> bytes = encode_delta(msg, mode);
  graph.commit_delta(pending);
  return bytes;
}

DeltaMessage deserialize_delta(const std::vector<std::uint8_t>& bytes, TransmitMode mode) {
  if (bytes.size() < kWireHeaderBytes) raise(Errc::truncated, "shorter than the 5-byte header");
  detail::ByteReader r{bytes.data(), bytes.size()};

  DeltaMessage msg;
  msg.robot = r.u8();
  std::uint16_t node_count = r.u16();
  std::uint16_t edge_count = r.u16();

  std::size_t node_bytes = mode == TransmitMode::raw512 ? kWireRawNodeBytes : kWireNodeBytes;
  std::size_t declared = static_cast<std::size_t>(node_count) * node_bytes +
                         static_cast<std::size_t>(edge_count) * kWireEdgeBytes;
  if (declared > r.remaining())
    raise(Errc::bad_counts, "declared records exceed the remaining " +
                                std::to_string(r.remaining()) + " bytes");

  for (std::uint16_t i = 0; i < node_count; ++i) msg.nodes.push_back(read_node(r, mode));
  for (std::uint16_t i = 0; i < edge_count; ++i) {
    WireEdge e;
    e.robot = r.u8();
    e.a = r.u8();
    e.b = r.u8();
    msg.edges.push_back(e);
  }

  if (mode == TransmitMode::compressed) {
    if (r.remaining() % kWireRawEntryBytes != 0)
      raise(Errc::truncated, "raw-feature section is not a whole number of entries");
    while (r.remaining() > 0) {
      RawFeatureEntry rf;
      rf.id = r.u8();
      r.bytes(rf.feat512_q.data(), rf.feat512_q.size());
      msg.raw_features.push_back(rf);
    }
  } else if (r.remaining() != 0) {
    raise(Errc::truncated, "trailing bytes after declared records");
  }
  return msg;
}

}  // namespace cograph
