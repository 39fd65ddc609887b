#include <cmath>
#include <limits>
#include <vector>

#include "cograph/error.hpp"
#include "cograph/sim.hpp"

namespace cograph {

namespace {

constexpr double kNearClip = 1e-3;
constexpr double kInstanceSigma = 0.02;  // per-object feature perturbation

// Entry distance of the ray o + t*d into an axis-aligned box, or nullopt.
// Rays starting inside the box miss: the camera never renders a box it sits
// in, which keeps degenerate near-zero depths out of the stream.
std::optional<double> ray_box(const Vec3& o, const Vec3& d, const Aabb& box) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    double origin = o[axis], dir = d[axis];
    double lo = box.min[axis], hi = box.max[axis];
    if (dir == 0.0) {
      if (origin < lo || origin > hi) return std::nullopt;
      continue;
    }
    double t1 = (lo - origin) / dir, t2 = (hi - origin) / dir;
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near < kNearClip) return std::nullopt;
  return t_near;
}

}  // namespace

std::vector<Frame> generate_frames(const WorldSpec& world, const RobotTrajectory& trajectory,
                                   const RasterSpec& raster, const EmbeddingTable& table) {
  validate_world(world);
  if (raster.width <= 0 || raster.height <= 0)
    raise(Errc::config, "raster size must be positive");
  if (!(raster.k.fx > 0) || !(raster.k.fy > 0))
    raise(Errc::config, "focal lengths must be positive");

  // World geometry, resolved once: object boxes with their stable labels and
  // per-instance features, and wall boxes that occlude without a label.
  std::vector<Aabb> boxes;
  std::vector<std::uint16_t> labels;
  std::vector<Feature512> features;
  boxes.reserve(world.objects.size());
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    const auto& obj = world.objects[i];
    boxes.push_back(Aabb::from_center_extents(obj.center, obj.extents));
    labels.push_back(table.label_of(obj.category));
    features.push_back(table.instance_vector(obj.category, i, kInstanceSigma));
  }
  std::vector<Aabb> wall_boxes;
  wall_boxes.reserve(world.walls.size());
  for (const auto& wall : world.walls) {
    double half = wall.thickness * 0.5;
    Aabb box;
    box.expand(Vec3{std::min(wall.x0, wall.x1) - half, std::min(wall.y0, wall.y1) - half, 0.0});
    box.expand(
        Vec3{std::max(wall.x0, wall.x1) + half, std::max(wall.y0, wall.y1) + half, wall.height});
    wall_boxes.push_back(box);
  }

  const int w = raster.width, h = raster.height;
  std::vector<Frame> frames;
  frames.reserve(trajectory.poses.size());
  std::vector<int> hit(std::size_t(w) * std::size_t(h));  // object index, -1 none/wall

  for (const auto& tp : trajectory.poses) {
    Pose cam = camera_pose(tp);

    Frame frame;
    frame.pose = cam;
    frame.k = raster.k;
    frame.depth.width = std::uint32_t(w);
    frame.depth.height = std::uint32_t(h);
    frame.depth.depth.assign(std::size_t(w) * std::size_t(h), 0.0f);

    std::fill(hit.begin(), hit.end(), -1);
    std::vector<std::uint8_t> seen(world.objects.size(), 0);

    for (int v = 0; v < h; ++v)
      for (int u = 0; u < w; ++u) {
        Vec3 dir_cam{(double(u) - raster.k.cx) / raster.k.fx,
                     (double(v) - raster.k.cy) / raster.k.fy, 1.0};
        Vec3 dir = cam.rotation * dir_cam;
        // dir_cam.z == 1, so the ray parameter t *is* the camera-frame depth.
        double best = std::numeric_limits<double>::infinity();
        int best_obj = -1;
        for (std::size_t i = 0; i < boxes.size(); ++i)
          if (auto t = ray_box(cam.translation, dir, boxes[i]); t && *t < best) {
            best = *t;
            best_obj = int(i);
          }
        bool wall_in_front = false;
        for (const auto& box : wall_boxes)
          if (auto t = ray_box(cam.translation, dir, box); t && *t < best) {
            best = *t;
            wall_in_front = true;
          }
        if (!std::isfinite(best)) continue;  // open space: invalid depth 0
        std::size_t px = std::size_t(v) * std::size_t(w) + std::size_t(u);
        frame.depth.depth[px] = float(best);
        if (!wall_in_front && best_obj >= 0) {
          hit[px] = best_obj;
          seen[std::size_t(best_obj)] = 1;
        }
      }

    std::vector<SegmentedObject> segs;
    for (std::size_t i = 0; i < world.objects.size(); ++i) {
      if (!seen[i]) continue;
      SegmentedObject seg;
      seg.index = std::uint8_t(i);
      seg.label = labels[i];
      seg.mask.assign(std::size_t(w) * std::size_t(h), 0);
      for (std::size_t px = 0; px < hit.size(); ++px)
        if (hit[px] == int(i)) seg.mask[px] = 1;
      seg.feat2d = features[i];
      segs.push_back(std::move(seg));
      frame.features[std::uint8_t(i)] = features[i];
    }
    frame.fo = build_fo_image(segs, w, h);
    frames.push_back(std::move(frame));
  }
  return frames;
}

}  // namespace cograph
