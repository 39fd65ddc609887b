#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "cograph/error.hpp"
#include "cograph/sim.hpp"

namespace cograph {

namespace {

bool finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

void check_inside_xy(const WorldSpec& world, double x, double y, const std::string& what) {
  if (x < world.bounds_min.x || x > world.bounds_max.x || y < world.bounds_min.y ||
      y > world.bounds_max.y)
    raise(Errc::config, what + " lies outside the world bounds");
}

}  // namespace

void validate_world(const WorldSpec& world) {
  if (!finite(world.bounds_min) || !finite(world.bounds_max))
    raise(Errc::config, "world bounds must be finite");
  if (world.bounds_min.x >= world.bounds_max.x || world.bounds_min.y >= world.bounds_max.y ||
      world.bounds_min.z >= world.bounds_max.z)
    raise(Errc::config, "world bounds must have positive size on every axis");
  if (world.objects.size() > 256)
    raise(Errc::config, "at most 256 objects (instance indices are one byte)");

  for (const auto& obj : world.objects) {
    if (obj.category.empty()) raise(Errc::config, "object without a category");
    if (!finite(obj.center) || !finite(obj.extents))
      raise(Errc::config, "object '" + obj.category + "' has non-finite geometry");
    if (obj.extents.x <= 0 || obj.extents.y <= 0 || obj.extents.z <= 0)
      raise(Errc::config, "object '" + obj.category + "' needs positive extents");
    Aabb box = Aabb::from_center_extents(obj.center, obj.extents);
    if (box.min.x < world.bounds_min.x || box.min.y < world.bounds_min.y ||
        box.min.z < world.bounds_min.z || box.max.x > world.bounds_max.x ||
        box.max.y > world.bounds_max.y || box.max.z > world.bounds_max.z)
      raise(Errc::config, "object '" + obj.category + "' pokes outside the world bounds");
  }

  for (const auto& wall : world.walls) {
    if (!(std::isfinite(wall.x0) && std::isfinite(wall.y0) && std::isfinite(wall.x1) &&
          std::isfinite(wall.y1) && std::isfinite(wall.height) && std::isfinite(wall.thickness)))
      raise(Errc::config, "wall with non-finite geometry");
    if (wall.x0 != wall.x1 && wall.y0 != wall.y1)
      raise(Errc::config, "walls must be axis-aligned");
    if (wall.x0 == wall.x1 && wall.y0 == wall.y1) raise(Errc::config, "wall with zero length");
    if (wall.height <= 0 || wall.thickness <= 0)
      raise(Errc::config, "wall needs positive height and thickness");
    check_inside_xy(world, wall.x0, wall.y0, "wall endpoint");
    check_inside_xy(world, wall.x1, wall.y1, "wall endpoint");
  }
}

OccupancyGrid rasterize_walls(const WorldSpec& world, double resolution,
                              const Vec3& origin_offset) {
  if (!(resolution > 0) || !std::isfinite(resolution))
    raise(Errc::config, "grid resolution must be positive");

  double ox = world.bounds_min.x - origin_offset.x;
  double oy = world.bounds_min.y - origin_offset.y;
  auto span_cells = [&](double lo, double hi) {
    return std::uint32_t(std::max<std::int64_t>(1, std::int64_t(std::ceil((hi - lo) / resolution))));
  };
  std::uint32_t w = span_cells(world.bounds_min.x, world.bounds_max.x);
  std::uint32_t h = span_cells(world.bounds_min.y, world.bounds_max.y);
  OccupancyGrid grid = OccupancyGrid::uniform(w, h, resolution, ox, oy);

  for (const auto& wall : world.walls) {
    // Footprint rectangle of the wall in the shifted frame.
    double half = wall.thickness * 0.5;
    double fx0 = std::min(wall.x0, wall.x1) - half - origin_offset.x;
    double fx1 = std::max(wall.x0, wall.x1) + half - origin_offset.x;
    double fy0 = std::min(wall.y0, wall.y1) - half - origin_offset.y;
    double fy1 = std::max(wall.y0, wall.y1) + half - origin_offset.y;

    auto cell_index = [&](double v, double origin) {
      return std::int64_t(std::floor((v - origin) / resolution));
    };
    std::int64_t ix0 = std::max<std::int64_t>(0, cell_index(fx0, ox));
    std::int64_t ix1 = std::min<std::int64_t>(std::int64_t(w) - 1, cell_index(fx1, ox));
    std::int64_t iy0 = std::max<std::int64_t>(0, cell_index(fy0, oy));
    std::int64_t iy1 = std::min<std::int64_t>(std::int64_t(h) - 1, cell_index(fy1, oy));
    for (std::int64_t iy = iy0; iy <= iy1; ++iy)
      for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
        // Mark only cells whose area genuinely overlaps the footprint.
        double cx0 = ox + double(ix) * resolution, cx1 = cx0 + resolution;
        double cy0 = oy + double(iy) * resolution, cy1 = cy0 + resolution;
        if (cx0 < fx1 && cx1 > fx0 && cy0 < fy1 && cy1 > fy0)
          grid.at(std::uint32_t(ix), std::uint32_t(iy)) = Cell::occupied;
      }
  }
  return grid;
}

Pose camera_pose(const TrajectoryPose& p) {
  // Columns: camera x (image right) -> -world y, camera y (image down) ->
  // -world z, camera z (optical axis) -> +world x; then yaw about world z.
  const Mat3 base{{0, 0, 1, -1, 0, 0, 0, -1, 0}};
  return {Mat3::rot_z(p.yaw) * base, p.position};
}

}  // namespace cograph
