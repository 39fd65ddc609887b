#pragma once

#include <cstdint>
#include <vector>

#include "cograph/error.hpp"
#include "cograph/feature.hpp"

namespace cograph {

// One segmented object from a frame: its mask over the full frame raster,
// a 16-bit label, an 8-bit per-frame index, and its frame-level feature.
struct SegmentedObject {
  std::uint8_t index = 0;
  std::uint16_t label = 0;
  std::vector<std::uint8_t> mask;  // row-major width*height, nonzero = covered
  Feature512 feat2d{};
};

constexpr std::uint32_t kFoBackground = 0x000000;

// 24-bit pixel code: label in the top 16 bits, object index in the low 8.
constexpr std::uint32_t encode_fo_pixel(std::uint16_t label, std::uint8_t index) {
  return (std::uint32_t(label) << 8) | std::uint32_t(index);
}

struct FoPixel {
  bool background = false;
  std::uint16_t label = 0;
  std::uint8_t index = 0;
};

constexpr FoPixel decode_fo_pixel(std::uint32_t code) {
  if (code == kFoBackground) return {true, 0, 0};
  return {false, std::uint16_t(code >> 8), std::uint8_t(code & 0xFF)};
}

// Per-frame raster of 24-bit feature-object codes (stored in uint32 cells,
// top byte always zero).
struct FOImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> pixels;  // row-major, width*height

  std::uint32_t at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
  std::uint32_t& at(int x, int y) { return pixels[std::size_t(y) * width + x]; }

  static FOImage background(int width, int height) {
    FOImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(std::size_t(width) * height, kFoBackground);
    return img;
  }
};

// Rasterizes the objects' masks into one FO image. Overlaps are resolved by
// painting in ascending index order, so the highest index wins a pixel.
FOImage build_fo_image(const std::vector<SegmentedObject>& objects, int width, int height);

// Raw binary blob: u32 width, u32 height (little-endian), then 3 bytes per
// pixel (little-endian 24-bit codes) in row-major order.
std::vector<std::uint8_t> fo_image_to_bytes(const FOImage& img);
FOImage fo_image_from_bytes(const std::vector<std::uint8_t>& bytes);

}  // namespace cograph
