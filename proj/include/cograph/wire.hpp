#pragma once

// Delta wire codec. Layout (all multi-byte integers little-endian, positions
// 32-bit IEEE-754 little-endian; see docs/wire.md):
//
//   header   5 bytes   robot u8 | node_count u16 | edge_count u16
//   node    22 bytes   robot u8 | id u8 | pos 3xf32 | label u16 | bbox 3xu8 | feat3 3xu8
//   edge     3 bytes   robot u8 | a u8 | b u8
//   raw    513 bytes   id u8 | feat512 512xu8          (keep_raw nodes only)
//
// In raw-512 transmit mode the 3-byte feat3 field is replaced by the
// 512-byte feature, making the node payload 531 bytes, and no raw-feature
// section is emitted. The mode is fixed per channel, out of band.

#include <cstdint>
#include <optional>
#include <vector>

#include "cograph/graph.hpp"

namespace cograph {

enum class TransmitMode : std::uint8_t { compressed, raw512 };

inline constexpr std::size_t kWireHeaderBytes = 5;
inline constexpr std::size_t kWireNodeBytes = 22;       // 176 bits, Table-style layout
inline constexpr std::size_t kWireEdgeBytes = 3;
inline constexpr std::size_t kWireRawEntryBytes = 1 + kFeatureDim;  // 513
inline constexpr std::size_t kWireRawNodeBytes = kWireNodeBytes - 3 + kFeatureDim;  // 531

struct WireNode {
  RobotId robot = 0;
  NodeId id = 0;
  std::array<float, 3> pos{};
  FeatureLabel label = 0;
  std::array<std::uint8_t, 3> bbox{};
  Feature3Q feat3;                                   // compressed mode
  std::array<std::uint8_t, kFeatureDim> feat512_q{};  // raw-512 mode

  bool operator==(const WireNode& o) const = default;
};

struct WireEdge {
  RobotId robot = 0;
  NodeId a = 0;
  NodeId b = 0;

  bool operator==(const WireEdge& o) const = default;
};

struct RawFeatureEntry {
  NodeId id = 0;
  std::array<std::uint8_t, kFeatureDim> feat512_q{};

  bool operator==(const RawFeatureEntry& o) const = default;
};

struct DeltaMessage {
  RobotId robot = 0;
  std::vector<WireNode> nodes;
  std::vector<WireEdge> edges;
  std::vector<RawFeatureEntry> raw_features;  // compressed mode only

  bool operator==(const DeltaMessage& o) const = default;
};

// Exact wire payload of one node in compressed mode. Used both by the
// serializer and by the graph's modification check.
std::array<std::uint8_t, kWireNodeBytes> node_wire_payload(const NodeRecord& n);

// Emits records past the graph's watermark (plus modified ones) and advances
// it. Returns the encoded bytes; an unchanged graph yields just the header.
std::vector<std::uint8_t> serialize_delta(COGraph& graph, TransmitMode mode = TransmitMode::compressed);

// Encodes an explicit message (no watermark logic).
std::vector<std::uint8_t> encode_delta(const DeltaMessage& msg, TransmitMode mode);

// Throws Truncated / BadCounts.
DeltaMessage deserialize_delta(const std::vector<std::uint8_t>& bytes,
                               TransmitMode mode = TransmitMode::compressed);

std::size_t expected_wire_size(std::size_t nodes, std::size_t edges, std::size_t raw_entries,
                               TransmitMode mode);

}  // namespace cograph
