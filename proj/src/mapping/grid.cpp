#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cograph/mapping.hpp"

namespace cograph {

OccupancyGrid OccupancyGrid::uniform(std::uint32_t w, std::uint32_t h, double resolution,
                                     double ox, double oy, Cell fill) {
  if (resolution <= 0.0) raise(Errc::config, "grid resolution must be positive");
  OccupancyGrid g;
  g.resolution = resolution;
  g.ox = ox;
  g.oy = oy;
  g.width = w;
  g.height = h;
  g.cells.assign(std::size_t(w) * h, fill);
  return g;
}

namespace {

bool blocked(const OccupancyGrid& g, std::int64_t x, std::int64_t y) {
  return g.inside(x, y) &&
         g.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)) == Cell::occupied;
}

}  // namespace

bool line_of_sight(const OccupancyGrid& grid, const Vec3& a, const Vec3& b) {
  if (grid.width == 0 || grid.height == 0) return true;

  // Continuous cell coordinates; cell (i,j) spans [i, i+1) x [j, j+1).
  const double gx0 = (a.x - grid.ox) / grid.resolution;
  const double gy0 = (a.y - grid.oy) / grid.resolution;
  const double gx1 = (b.x - grid.ox) / grid.resolution;
  const double gy1 = (b.y - grid.oy) / grid.resolution;

  std::int64_t ix = static_cast<std::int64_t>(std::floor(gx0));
  std::int64_t iy = static_cast<std::int64_t>(std::floor(gy0));
  const std::int64_t ex = static_cast<std::int64_t>(std::floor(gx1));
  const std::int64_t ey = static_cast<std::int64_t>(std::floor(gy1));

  if (blocked(grid, ix, iy)) return false;

  const double dx = gx1 - gx0;
  const double dy = gy1 - gy0;
  const std::int64_t step_x = dx > 0 ? 1 : -1;
  const std::int64_t step_y = dy > 0 ? 1 : -1;
  const double inf = std::numeric_limits<double>::infinity();

  // Parameter t in [0,1] along the segment at which the next vertical /
  // horizontal cell boundary is crossed.
  double t_max_x = inf, t_delta_x = inf;
  if (dx != 0.0) {
    const double boundary = dx > 0 ? double(ix + 1) : double(ix);
    t_max_x = (boundary - gx0) / dx;
    t_delta_x = std::abs(1.0 / dx);
  }
  double t_max_y = inf, t_delta_y = inf;
  if (dy != 0.0) {
    const double boundary = dy > 0 ? double(iy + 1) : double(iy);
    t_max_y = (boundary - gy0) / dy;
    t_delta_y = std::abs(1.0 / dy);
  }

  std::int64_t guard = std::llabs(ex - ix) + std::llabs(ey - iy) + 4;
  while (ix != ex || iy != ey) {
    if (t_max_x < t_max_y) {
      ix += step_x;
      t_max_x += t_delta_x;
    } else if (t_max_y < t_max_x) {
      iy += step_y;
      t_max_y += t_delta_y;
    } else {
      // Exact corner crossing: the segment touches the corner point only, so
      // step diagonally without charging the two corner-adjacent cells.
      ix += step_x;
      iy += step_y;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    }
    if (--guard < 0) {  // numeric wobble; finish at the end cell
      ix = ex;
      iy = ey;
    }
    if (blocked(grid, ix, iy)) return false;
  }
  return true;
}

std::string write_occupancy_grid(const OccupancyGrid& grid) {
  std::string out = "cograph-grid 1\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "resolution %.17g\n", grid.resolution);
  out += buf;
  std::snprintf(buf, sizeof(buf), "origin %.17g %.17g\n", grid.ox, grid.oy);
  out += buf;
  std::snprintf(buf, sizeof(buf), "size %u %u\n", grid.width, grid.height);
  out += buf;
  for (std::uint32_t y = 0; y < grid.height; ++y) {
    for (std::uint32_t x = 0; x < grid.width; ++x) {
      switch (grid.at(x, y)) {
        case Cell::free: out += '.'; break;
        case Cell::occupied: out += '#'; break;
        case Cell::unknown: out += '?'; break;
      }
    }
    out += '\n';
  }
  return out;
}

OccupancyGrid read_occupancy_grid(const std::string& text) {
  std::istringstream in(text);
  std::string line;

  auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) raise(Errc::io, std::string("grid text ends before ") + what);
    return line;
  };

  if (next_line("header") != "cograph-grid 1") raise(Errc::io, "not an occupancy grid");

  OccupancyGrid g;
  {
    std::istringstream ls(next_line("resolution"));
    std::string tag;
    if (!(ls >> tag >> g.resolution) || tag != "resolution" || g.resolution <= 0.0)
      raise(Errc::io, "bad grid resolution line");
  }
  {
    std::istringstream ls(next_line("origin"));
    std::string tag;
    if (!(ls >> tag >> g.ox >> g.oy) || tag != "origin") raise(Errc::io, "bad grid origin line");
  }
  {
    std::istringstream ls(next_line("size"));
    std::string tag;
    if (!(ls >> tag >> g.width >> g.height) || tag != "size")
      raise(Errc::io, "bad grid size line");
  }

  g.cells.reserve(std::size_t(g.width) * g.height);
  for (std::uint32_t y = 0; y < g.height; ++y) {
    next_line("raster rows");
    if (line.size() != g.width) raise(Errc::bad_counts, "grid row width mismatch");
    for (char c : line) {
      switch (c) {
        case '.': g.cells.push_back(Cell::free); break;
        case '#': g.cells.push_back(Cell::occupied); break;
        case '?': g.cells.push_back(Cell::unknown); break;
        default: raise(Errc::io, "unexpected grid cell character");
      }
    }
  }
  return g;
}

void save_occupancy_grid(const OccupancyGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::io, "cannot open " + path + " for writing");
  out << write_occupancy_grid(grid);
  if (!out) raise(Errc::io, "failed writing " + path);
}

OccupancyGrid load_occupancy_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_occupancy_grid(ss.str());
}

std::vector<std::pair<NodeId, NodeId>> generate_edges(const std::vector<NodeRecord>& nodes,
                                                      const OccupancyGrid& grid,
                                                      const MappingConfig& cfg) {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (distance(nodes[i].pos, nodes[j].pos) > cfg.d_edge) continue;
      if (!line_of_sight(grid, nodes[i].pos, nodes[j].pos)) continue;
      const NodeId a = std::min(nodes[i].id, nodes[j].id);
      const NodeId b = std::max(nodes[i].id, nodes[j].id);
      out.emplace_back(a, b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cograph
