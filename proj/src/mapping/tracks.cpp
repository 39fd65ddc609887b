#include <algorithm>
#include <deque>

#include "cograph/mapping.hpp"

namespace cograph {

Feature512 ObjectTrack::feature_mean() const {
  if (observations == 0) raise(Errc::config, "track has no feature observations");
  Feature512 f;
  for (std::size_t i = 0; i < kFeatureDim; ++i)
    f.v[i] = static_cast<float>(feat_sum[i] / static_cast<double>(observations));
  return f;
}

namespace {

struct VoxelizedCloud {
  std::set<VoxelKey> voxels;
  Aabb bounds;  // of voxel centers
};

VoxelizedCloud voxelize(const FOPointCloud& cloud, double voxel) {
  VoxelizedCloud out;
  for (const Vec3& p : cloud.points) {
    auto [it, fresh] = out.voxels.insert(voxel_of(p, voxel));
    if (fresh) out.bounds.expand(voxel_center(*it, voxel));
  }
  return out;
}

}  // namespace

std::size_t fuse_cloud_geometry(std::vector<ObjectTrack>& tracks, const FOPointCloud& cloud,
                                const MappingConfig& cfg) {
  const VoxelizedCloud vc = voxelize(cloud, cfg.voxel);
  if (vc.voxels.empty()) raise(Errc::config, "cannot fuse an empty point cloud");

  // Single-view clouds are often planar; inflating both boxes by one voxel
  // gives them volume so the IoU gate stays meaningful.
  const Aabb cloud_box = vc.bounds.inflated(cfg.voxel);

  std::size_t best = tracks.size();
  double best_iou = 0.0;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    if (tracks[t].label != cloud.label) continue;
    const double overlap = iou(tracks[t].bounds.inflated(cfg.voxel), cloud_box);
    if (overlap >= cfg.theta_overlap && overlap > best_iou) {
      best = t;
      best_iou = overlap;
    }
  }

  if (best == tracks.size()) {
    ObjectTrack t;
    t.label = cloud.label;
    tracks.push_back(std::move(t));
  }

  ObjectTrack& track = tracks[best];
  for (const VoxelKey& k : vc.voxels) {
    auto [it, fresh] = track.voxels.insert(k);
    if (fresh) {
      const Vec3 c = voxel_center(k, cfg.voxel);
      track.center_sum += c;
      track.bounds.expand(c);
    }
  }
  return best;
}

void fuse_tracks(std::vector<ObjectTrack>& tracks, const std::vector<FOPointCloud>& clouds,
                 const MappingConfig& cfg) {
  for (const FOPointCloud& cloud : clouds) {
    const std::size_t t = fuse_cloud_geometry(tracks, cloud, cfg);
    for (std::size_t i = 0; i < kFeatureDim; ++i)
      tracks[t].feat_sum[i] += static_cast<double>(cloud.feat2d.v[i]);
    tracks[t].observations += 1;
  }
}

std::vector<NodeCandidate> cluster_nodes(const std::vector<ObjectTrack>& tracks,
                                         const MappingConfig& cfg) {
  // Union all voxels per label; two tracks of one label may describe the
  // same physical object seen from different angles.
  std::map<FeatureLabel, std::set<VoxelKey>> by_label;
  for (const ObjectTrack& t : tracks)
    by_label[t.label].insert(t.voxels.begin(), t.voxels.end());

  // Two voxels are linked when their centers are within linkage_radius:
  // integer offsets with dx^2+dy^2+dz^2 <= (linkage_radius/voxel)^2.
  const double cells = cfg.linkage_radius / cfg.voxel;
  const std::int32_t reach = static_cast<std::int32_t>(std::floor(cells + 1e-9));
  const double reach_sq = cells * cells + 1e-9;
  std::vector<VoxelKey> offsets;
  for (std::int32_t dx = -reach; dx <= reach; ++dx)
    for (std::int32_t dy = -reach; dy <= reach; ++dy)
      for (std::int32_t dz = -reach; dz <= reach; ++dz) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        if (double(dx) * dx + double(dy) * dy + double(dz) * dz <= reach_sq)
          offsets.push_back({dx, dy, dz});
      }

  std::vector<NodeCandidate> out;
  for (const auto& [label, voxels] : by_label) {
    std::set<VoxelKey> unvisited = voxels;
    while (!unvisited.empty()) {
      // Flood-fill one component starting from the smallest remaining key.
      std::vector<VoxelKey> component;
      std::deque<VoxelKey> frontier{*unvisited.begin()};
      unvisited.erase(unvisited.begin());
      while (!frontier.empty()) {
        const VoxelKey k = frontier.front();
        frontier.pop_front();
        component.push_back(k);
        for (const VoxelKey& o : offsets) {
          const VoxelKey n{k.x + o.x, k.y + o.y, k.z + o.z};
          auto it = unvisited.find(n);
          if (it != unvisited.end()) {
            unvisited.erase(it);
            frontier.push_back(n);
          }
        }
      }

      if (component.size() < cfg.p_min) continue;
      NodeCandidate c;
      c.label = label;
      c.voxel_count = component.size();
      Aabb box;
      Vec3 sum;
      for (const VoxelKey& k : component) {
        const Vec3 p = voxel_center(k, cfg.voxel);
        sum += p;
        box.expand(p);
      }
      c.center = sum / static_cast<double>(component.size());
      c.extents = box.extents();
      out.push_back(c);
    }
  }

  std::sort(out.begin(), out.end(), [](const NodeCandidate& a, const NodeCandidate& b) {
    if (a.label != b.label) return a.label < b.label;
    if (a.center.x != b.center.x) return a.center.x < b.center.x;
    if (a.center.y != b.center.y) return a.center.y < b.center.y;
    return a.center.z < b.center.z;
  });
  return out;
}

std::optional<NodeId> find_nearest_labeled_node(FeatureLabel label, const Vec3& point,
                                                const std::vector<NodeRecord>& nodes) {
  bool found = false;
  NodeId best_id = 0;
  double best_dist = 0.0;
  for (const NodeRecord& n : nodes) {
    if (n.label != label) continue;
    const double d = distance(n.pos, point);
    if (!found || d < best_dist || (d == best_dist && n.id < best_id)) {
      found = true;
      best_id = n.id;
      best_dist = d;
    }
  }
  if (!found) return std::nullopt;
  return best_id;
}

NodeId assign_feature_to_node(const ObjectTrack& track, const std::vector<NodeRecord>& nodes) {
  const auto id = find_nearest_labeled_node(track.label, track.centroid(), nodes);
  if (!id) raise(Errc::no_candidate_node, "no node carries the track's label");
  return *id;
}

}  // namespace cograph
