#pragma once

// Deterministic multi-robot scenario engine: synthetic box worlds, ray-cast
// frame rendering, a byte-accounting FIFO channel, and the orchestration of
// mapping, delta transmission, place recognition, and merging.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cograph/codec.hpp"
#include "cograph/embedding.hpp"
#include "cograph/mapping.hpp"
#include "cograph/merging.hpp"
#include "cograph/wire.hpp"

namespace cograph {

// ---------------------------------------------------------------------------
// World

struct WorldObject {
  std::string category;  // must be a listed embedding-table category
  Vec3 center;
  Vec3 extents;  // full widths, all > 0
};

// Axis-aligned wall from (x0,y0) to (x1,y1), extruded to `height` meters and
// `thickness` meters wide. Walls occlude objects and block line of sight.
struct WallSegment {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  double height = 2.5;
  double thickness = 0.1;
};

// Named floor rectangle; documentation for scenario authors, not geometry.
struct Room {
  std::string name;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct WorldSpec {
  std::string name;
  Vec3 bounds_min, bounds_max;
  std::vector<WorldObject> objects;
  std::vector<WallSegment> walls;
  std::vector<Room> rooms;
};

// Enforces the structural invariants: positive extents, objects inside the
// bounds, axis-aligned walls, positive wall sizes. Throws Config.
void validate_world(const WorldSpec& world);

// Rasterizes the walls onto a grid covering the world bounds, expressed in a
// frame shifted by -origin_offset (each robot maps in its own local frame).
// A cell is occupied when it intersects any wall footprint.
OccupancyGrid rasterize_walls(const WorldSpec& world, double resolution,
                              const Vec3& origin_offset);

// ---------------------------------------------------------------------------
// Trajectories and cameras

struct TrajectoryPose {
  Vec3 position;
  double yaw = 0.0;  // radians about world z
};

struct RobotTrajectory {
  std::vector<TrajectoryPose> poses;
  double frame_rate = 10.0;       // informational, Hz
  double pose_noise_sigma = 0.0;  // meters; see inject_pose_noise
};

// Camera-to-world pose of a robot at `p`: the camera looks along world +x
// when yaw = 0 (optical z forward, x right, y down; world x forward, y left,
// z up), rotated about world z by yaw.
Pose camera_pose(const TrajectoryPose& p);

// Adds seeded Gaussian noise (std sigma per axis) to every pose position;
// yaw is untouched. sigma = 0 returns the trajectory unchanged.
RobotTrajectory inject_pose_noise(const RobotTrajectory& trajectory, double sigma,
                                  std::uint64_t seed);

// ---------------------------------------------------------------------------
// Rendering

struct RasterSpec {
  int width = 96;
  int height = 72;
  CameraIntrinsics k{80.0, 80.0, 48.0, 36.0};
};

// Renders one frame per trajectory pose: depth by ray-casting the world's
// object boxes and walls (walls occlude but stay background in the object
// raster), object masks labeled by category, and one stable per-instance
// feature per visible object (category vector + seeded perturbation,
// sigma = 0.02). Frame poses are the true world camera poses.
std::vector<Frame> generate_frames(const WorldSpec& world, const RobotTrajectory& trajectory,
                                   const RasterSpec& raster, const EmbeddingTable& table);

// ---------------------------------------------------------------------------
// Channel

struct MessageLogEntry {
  std::uint64_t frame = 0;  // scheduler tick at send time
  RobotId from = 0, to = 0;
  std::string type;  // "delta"
  std::size_t bytes = 0;
};

struct ChannelStats {
  std::map<RobotId, std::size_t> sent;      // bytes by sender
  std::map<RobotId, std::size_t> received;  // bytes by receiver
  std::vector<MessageLogEntry> log;

  std::size_t total_sent() const;
  std::size_t total_received() const;
};

// Reliable, ordered, lossless FIFO per (sender, receiver) pair that accounts
// for every byte it carries.
class Channel {
 public:
  void send(RobotId from, RobotId to, std::uint64_t frame, const std::string& type,
            std::vector<std::uint8_t> bytes);

  struct Delivery {
    RobotId from = 0;
    std::vector<std::uint8_t> bytes;
  };
  // Next queued message for `to` (senders drained in ascending id order).
  std::optional<Delivery> receive(RobotId to);

  const ChannelStats& stats() const { return stats_; }

 private:
  std::map<std::pair<RobotId, RobotId>, std::deque<std::vector<std::uint8_t>>> queues_;
  ChannelStats stats_;
};

// One CSV row per message: frame,from,to,type,bytes.
std::string channel_log_csv(const ChannelStats& stats);

// ---------------------------------------------------------------------------
// Scenario

struct ScenarioConfig {
  std::string name = "scenario";
  WorldSpec world;
  std::vector<RobotTrajectory> trajectories;  // one per robot; ids are 1-based
  RasterSpec raster;
  MappingConfig mapping;
  MergeConfig merging;
  double theta_keep = 0.7;          // keep-raw validation gate
  std::size_t transmit_every = 10;  // frames between delta transmissions
  double grid_resolution = 0.05;
  std::uint64_t seed = 2024;            // run seed (pose noise)
  std::uint64_t embedding_seed = 2024;  // must match the codec's corpus seed
  TransmitMode mode = TransmitMode::compressed;
  double pose_noise_sigma = 0.0;  // > 0 overrides every trajectory's sigma
  bool threaded_mapping = false;
};

// Structured-text round trip; see docs/scenario_schema.md for the schema.
ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::string& path);

// Throws Config if any invariant fails (also called by run_scenario).
void validate_scenario(const ScenarioConfig& cfg);

struct MergeEvent {
  RobotId receiver = 0, sender = 0;
  Vec3 t_estimated;
  Vec3 t_truth;
  double error = 0.0;  // meters
  std::string report_json;
};

struct ScenarioResult {
  std::vector<COGraph> locals;                    // per robot, local frame
  std::vector<std::optional<MergeResult>> views;  // per robot merged view
  ChannelStats stats;
  std::vector<MergeEvent> merges;  // chronological
  TransmitMode mode = TransmitMode::compressed;

  // Mean t_error over merge events (0 when none happened).
  double mean_t_error() const;
};

// Runs the full pipeline: every robot ingests its frames through mapping in
// its local frame (origin at its first pose), emits wire deltas every
// transmit_every frames (empty deltas suppressed), receivers apply them and
// attempt place recognition + merging after each delivery. Deterministic for
// a fixed config. `codec` is required in compressed mode. Errors from inside
// the loop are re-raised tagged with the robot id and frame index.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const CodecParams* codec);

}  // namespace cograph
