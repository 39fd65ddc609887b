#pragma once

// Turns a stream of (object raster, depth, pose) frames plus an occupancy
// grid into scene-graph nodes and edges: pinhole back-projection, cross-frame
// track fusion, voxel clustering, feature-to-node assignment, and
// line-of-sight edge generation.

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cograph/feature.hpp"
#include "cograph/fo_image.hpp"
#include "cograph/geom.hpp"
#include "cograph/graph.hpp"

namespace cograph {

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;  // focal lengths, pixels
  double cx = 0.0, cy = 0.0;  // principal point, pixels
};

struct DepthImage {
  std::uint32_t width = 0, height = 0;
  std::vector<float> depth;  // meters, row-major; nonpositive/non-finite = invalid

  float at(std::uint32_t x, std::uint32_t y) const { return depth[std::size_t(y) * width + x]; }
};

// All mapping tunables; every value is scenario-overridable.
struct MappingConfig {
  double theta_overlap = 0.25;   // bbox IoU gate for joining a track
  double voxel = 0.05;           // voxel edge length, meters
  double linkage_radius = 0.15;  // cluster connectivity radius, meters
  std::size_t p_min = 20;        // minimum voxels for a node candidate
  double d_edge = 2.0;           // maximum edge length, meters
  double match_radius = 0.3;     // cluster-to-node association radius, meters
  double pos_update_eps = 0.01;  // minimum center motion before a node moves
  double edge_margin = 0.05;     // builder shrinks the edge gate by this much
};

// Per-frame observation: all pixels of one (label, index) object back-projected
// into the world frame, with the object's 2D semantic feature.
struct FOPointCloud {
  FeatureLabel label = 0;
  std::uint8_t index = 0;
  std::vector<Vec3> points;  // world frame, meters
  Feature512 feat2d;
};

// Integer voxel coordinate at MappingConfig::voxel resolution.
struct VoxelKey {
  std::int32_t x = 0, y = 0, z = 0;
  auto operator<=>(const VoxelKey&) const = default;
};

inline VoxelKey voxel_of(const Vec3& p, double voxel) {
  return {static_cast<std::int32_t>(std::floor(p.x / voxel)),
          static_cast<std::int32_t>(std::floor(p.y / voxel)),
          static_cast<std::int32_t>(std::floor(p.z / voxel))};
}

inline Vec3 voxel_center(const VoxelKey& k, double voxel) {
  return {(k.x + 0.5) * voxel, (k.y + 0.5) * voxel, (k.z + 0.5) * voxel};
}

// An object observed across frames. Geometry lives as a voxel set (points are
// the voxel centers, which makes every downstream statistic insertion-order
// independent); the semantic feature is the arithmetic mean of every
// contributing per-frame feature, kept as an exact sum.
struct ObjectTrack {
  FeatureLabel label = 0;
  std::set<VoxelKey> voxels;
  Vec3 center_sum;  // sum of voxel centers, maintained incrementally
  Aabb bounds;      // of voxel centers
  std::array<double, kFeatureDim> feat_sum{};
  std::size_t observations = 0;

  Vec3 centroid() const { return center_sum / static_cast<double>(voxels.size()); }
  Feature512 feature_mean() const;
};

// Back-projects every foreground pixel through the pinhole model
// ((u-cx)z/fx, (v-cy)z/fy, z), applies the camera-to-world pose, and groups
// points by (label, index). Pixels with invalid depth are skipped. `features`
// maps each per-frame object index to its 2D semantic feature; a foreground
// object without an entry is an error.
std::vector<FOPointCloud> back_project(const FOImage& fo, const DepthImage& depth,
                                       const Pose& pose, const CameraIntrinsics& k,
                                       const std::map<std::uint8_t, Feature512>& features);

// Geometric half of track fusion: the cloud joins the same-label track with
// the highest bounding-box IoU >= theta_overlap (boxes inflated by one voxel
// so single-view planar clouds still overlap), else starts a new track.
// Returns the track index. Does not touch feature accumulators.
std::size_t fuse_cloud_geometry(std::vector<ObjectTrack>& tracks, const FOPointCloud& cloud,
                                const MappingConfig& cfg);

// Full track fusion: geometry plus the feature running mean.
void fuse_tracks(std::vector<ObjectTrack>& tracks, const std::vector<FOPointCloud>& clouds,
                 const MappingConfig& cfg);

// A connected component of same-label voxels big enough to become a node.
struct NodeCandidate {
  Vec3 center;   // centroid of component voxel centers
  Vec3 extents;  // axis-aligned extents of component voxel centers
  FeatureLabel label = 0;
  std::size_t voxel_count = 0;
};

// Per label: union of all track voxels, connected components with linkage
// radius cfg.linkage_radius, components with >= cfg.p_min voxels returned,
// sorted by (label, center). Insertion-order invariant by construction.
std::vector<NodeCandidate> cluster_nodes(const std::vector<ObjectTrack>& tracks,
                                         const MappingConfig& cfg);

// Nearest node carrying `label` to `point`; ties by lowest node id. Empty
// when no node has that label.
std::optional<NodeId> find_nearest_labeled_node(FeatureLabel label, const Vec3& point,
                                                const std::vector<NodeRecord>& nodes);

// Nearest same-label node to the track centroid; ties by lowest node id.
// Throws NoCandidateNode when no node carries the track's label.
NodeId assign_feature_to_node(const ObjectTrack& track, const std::vector<NodeRecord>& nodes);

// What the graph-construction stage needs to know about a track: where it is,
// what it is, and its accumulated semantic feature.
struct TrackSnapshot {
  FeatureLabel label = 0;
  Vec3 centroid;
  std::array<double, kFeatureDim> feat_sum{};
  std::size_t observations = 0;
};

// ---------------------------------------------------------------------------
// Occupancy grid

enum class Cell : std::uint8_t { free = 0, occupied = 1, unknown = 2 };

struct OccupancyGrid {
  double resolution = 0.05;  // meters per cell
  double ox = 0.0, oy = 0.0;  // world position of cell (0,0)'s min corner
  std::uint32_t width = 0, height = 0;
  std::vector<Cell> cells;  // row-major; row r spans y in [oy + r*res, oy + (r+1)*res)

  bool inside(std::int64_t x, std::int64_t y) const {
    return x >= 0 && y >= 0 && x < std::int64_t(width) && y < std::int64_t(height);
  }
  Cell at(std::uint32_t x, std::uint32_t y) const { return cells[std::size_t(y) * width + x]; }
  Cell& at(std::uint32_t x, std::uint32_t y) { return cells[std::size_t(y) * width + x]; }

  static OccupancyGrid uniform(std::uint32_t w, std::uint32_t h, double resolution, double ox,
                               double oy, Cell fill = Cell::free);
};

// Walks the 2D cell ray between the (x, y) projections of a and b; true when
// no occupied cell is crossed. Cells outside the grid and unknown cells do
// not block. An empty grid is always clear.
bool line_of_sight(const OccupancyGrid& grid, const Vec3& a, const Vec3& b);

// Text raster format: a header (resolution, origin, size) followed by one
// row per line using '.' free, '#' occupied, '?' unknown.
std::string write_occupancy_grid(const OccupancyGrid& grid);
OccupancyGrid read_occupancy_grid(const std::string& text);
void save_occupancy_grid(const OccupancyGrid& grid, const std::string& path);
OccupancyGrid load_occupancy_grid(const std::string& path);

// Undirected candidate edges: center distance <= cfg.d_edge and line-of-sight
// on the grid. Pairs returned with a < b, sorted.
std::vector<std::pair<NodeId, NodeId>> generate_edges(const std::vector<NodeRecord>& nodes,
                                                      const OccupancyGrid& grid,
                                                      const MappingConfig& cfg);

// ---------------------------------------------------------------------------
// Frame records

struct Frame {
  Pose pose;  // camera-to-world
  CameraIntrinsics k;
  DepthImage depth;
  FOImage fo;
  std::map<std::uint8_t, Feature512> features;  // per-frame object index -> 2D feature
};

std::vector<std::uint8_t> frame_to_bytes(const Frame& f);
Frame frame_from_bytes(const std::vector<std::uint8_t>& bytes);

// ---------------------------------------------------------------------------
// Incremental graph construction

// Reconciles successive cluster/track snapshots into a stable COGraph:
// clusters match existing same-label nodes within match_radius (one-to-one,
// nearest first), node positions move only when the center shifts by at least
// pos_update_eps, features are count-weighted means over the tracks assigned
// to each node, and edges are appended under a slightly tightened distance
// gate (d_edge - edge_margin) so later sub-voxel drift cannot invalidate them.
class GraphBuilder {
 public:
  GraphBuilder(RobotId robot, MappingConfig cfg) : g_(robot), cfg_(cfg) {}

  // Invoked on every node whose 512-d feature changed, before the record is
  // stored; the scenario harness uses it to refresh the compressed feature
  // and the keep-raw flag so wire state is always consistent.
  void set_feature_encoder(std::function<void(NodeRecord&)> fn) { encode_ = std::move(fn); }

  void apply(const std::vector<NodeCandidate>& clusters,
             const std::vector<TrackSnapshot>& tracks, const OccupancyGrid& grid);

  COGraph& graph() { return g_; }
  const COGraph& graph() const { return g_; }

 private:
  COGraph g_;
  MappingConfig cfg_;
  std::function<void(NodeRecord&)> encode_;
};

// ---------------------------------------------------------------------------
// Two-stage frame pipeline

// Stage 1 (geometry): back-projection, geometric track fusion, clustering.
// Stage 2 (semantics): feature fusion, assignment, graph construction.
// The stages communicate through an ordered queue of immutable snapshots, so
// the threaded pipeline is bit-identical to the inline one.
class MappingPipeline {
 public:
  MappingPipeline(RobotId robot, MappingConfig cfg, OccupancyGrid grid, bool threaded);
  ~MappingPipeline();

  MappingPipeline(const MappingPipeline&) = delete;
  MappingPipeline& operator=(const MappingPipeline&) = delete;

  void set_feature_encoder(std::function<void(NodeRecord&)> fn);

  // Runs stage 1 synchronously; stage 2 runs inline or on the worker thread.
  void push_frame(const Frame& frame);

  // Blocks until stage 2 has consumed every queued snapshot.
  void sync();

  // Valid between sync() and the next push_frame().
  COGraph& graph();
  std::vector<ObjectTrack> tracks() const;  // geometry + features recombined

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cograph
