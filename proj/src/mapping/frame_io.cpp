#include <cmath>

#include "cograph/mapping.hpp"
#include "../core/bytes.hpp"

namespace cograph {

namespace {
constexpr char kMagic[8] = {'C', 'O', 'G', 'F', 'R', 'M', '0', '1'};
}

std::vector<std::uint8_t> frame_to_bytes(const Frame& f) {
  std::vector<std::uint8_t> out;
  detail::ByteWriter w{out};

  w.bytes(reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic));
  for (double v : f.pose.rotation.m) w.f64(v);
  w.f64(f.pose.translation.x);
  w.f64(f.pose.translation.y);
  w.f64(f.pose.translation.z);
  w.f64(f.k.fx);
  w.f64(f.k.fy);
  w.f64(f.k.cx);
  w.f64(f.k.cy);

  w.u32(f.depth.width);
  w.u32(f.depth.height);
  if (f.depth.depth.size() != std::size_t(f.depth.width) * f.depth.height)
    raise(Errc::bad_counts, "depth raster size does not match its dimensions");
  for (float z : f.depth.depth) w.f32(z);

  const std::vector<std::uint8_t> fo = fo_image_to_bytes(f.fo);
  w.u32(static_cast<std::uint32_t>(fo.size()));
  w.bytes(fo.data(), fo.size());

  w.u16(static_cast<std::uint16_t>(f.features.size()));
  for (const auto& [index, feat] : f.features) {
    w.u8(index);
    for (float v : feat.v) w.f32(v);
  }
  return out;
}

Frame frame_from_bytes(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r{bytes.data(), bytes.size()};

  char magic[8];
  r.bytes(reinterpret_cast<std::uint8_t*>(magic), sizeof(magic));
  for (int i = 0; i < 8; ++i)
    if (magic[i] != kMagic[i]) raise(Errc::io, "not a frame record");

  Frame f;
  for (double& v : f.pose.rotation.m) v = r.f64();
  f.pose.translation = {r.f64(), r.f64(), r.f64()};
  f.k.fx = r.f64();
  f.k.fy = r.f64();
  f.k.cx = r.f64();
  f.k.cy = r.f64();

  f.depth.width = r.u32();
  f.depth.height = r.u32();
  const std::size_t px = std::size_t(f.depth.width) * f.depth.height;
  f.depth.depth.resize(px);
  for (float& z : f.depth.depth) z = r.f32();

  const std::uint32_t fo_size = r.u32();
  std::vector<std::uint8_t> fo(fo_size);
  r.bytes(fo.data(), fo.size());
  f.fo = fo_image_from_bytes(fo);
  if (f.fo.width < 0 || std::uint32_t(f.fo.width) != f.depth.width ||
      f.fo.height < 0 || std::uint32_t(f.fo.height) != f.depth.height)
    raise(Errc::dimension_mismatch, "frame rasters differ in size");

  const std::uint16_t count = r.u16();
  for (std::uint16_t i = 0; i < count; ++i) {
    const std::uint8_t index = r.u8();
    Feature512 feat;
    for (float& v : feat.v) v = r.f32();
    if (!f.features.emplace(index, feat).second)
      raise(Errc::duplicate_index, "frame feature table repeats an object index");
  }
  if (r.remaining() != 0) raise(Errc::io, "trailing bytes after frame record");
  return f;
}

}  // namespace cograph
