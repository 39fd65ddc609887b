#include <cmath>
#include <map>

#include "cograph/mapping.hpp"

namespace cograph {

std::vector<FOPointCloud> back_project(const FOImage& fo, const DepthImage& depth,
                                       const Pose& pose, const CameraIntrinsics& k,
                                       const std::map<std::uint8_t, Feature512>& features) {
  if (fo.width < 0 || std::uint32_t(fo.width) != depth.width ||
      fo.height < 0 || std::uint32_t(fo.height) != depth.height)
    raise(Errc::dimension_mismatch, "object raster and depth raster differ in size");
  if (k.fx <= 0.0 || k.fy <= 0.0) raise(Errc::config, "focal lengths must be positive");

  // Keyed by (index, label): index alone is unique in well-formed rasters,
  // and the pair keeps grouping well-defined even for hand-built ones.
  std::map<std::pair<std::uint8_t, FeatureLabel>, FOPointCloud> buckets;

  for (std::uint32_t v = 0; v < depth.height; ++v) {
    for (std::uint32_t u = 0; u < depth.width; ++u) {
      const FoPixel px = decode_fo_pixel(fo.at(int(u), int(v)));
      if (px.background) continue;
      const float z = depth.at(u, v);
      if (!std::isfinite(z) || z <= 0.0f) continue;

      const double zd = static_cast<double>(z);
      const Vec3 cam{(static_cast<double>(u) - k.cx) * zd / k.fx,
                     (static_cast<double>(v) - k.cy) * zd / k.fy, zd};

      auto [it, fresh] = buckets.try_emplace({px.index, px.label});
      FOPointCloud& c = it->second;
      if (fresh) {
        c.label = px.label;
        c.index = px.index;
        auto f = features.find(px.index);
        if (f == features.end())
          raise(Errc::config, "no 2D feature supplied for object index " +
                                  std::to_string(int(px.index)));
        c.feat2d = f->second;
      }
      c.points.push_back(pose.apply(cam));
    }
  }

  std::vector<FOPointCloud> out;
  out.reserve(buckets.size());
  for (auto& [key, cloud] : buckets) out.push_back(std::move(cloud));
  return out;
}

}  // namespace cograph
