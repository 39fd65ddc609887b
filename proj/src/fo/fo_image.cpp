#include "cograph/fo_image.hpp"

#include <algorithm>
#include <set>

#include "../core/bytes.hpp"

namespace cograph {

FOImage build_fo_image(const std::vector<SegmentedObject>& objects, int width, int height) {
  if (width <= 0 || height <= 0) raise(Errc::config, "FO image dimensions must be positive");
  const std::size_t cells = std::size_t(width) * height;

  std::set<std::uint8_t> seen;
  for (const SegmentedObject& o : objects) {
    if (!seen.insert(o.index).second) {
      raise(Errc::duplicate_index,
            "object index " + std::to_string(int(o.index)) + " used twice in one frame");
    }
    if (o.mask.size() != cells) {
      raise(Errc::dimension_mismatch, "mask size does not match frame dimensions");
    }
  }

  // Paint in ascending index order so the highest index ends up on top of
  // any overlap, independent of the input ordering.
  std::vector<const SegmentedObject*> order;
  order.reserve(objects.size());
  for (const SegmentedObject& o : objects) order.push_back(&o);
  std::sort(order.begin(), order.end(),
            [](const SegmentedObject* a, const SegmentedObject* b) { return a->index < b->index; });

  FOImage img = FOImage::background(width, height);
  for (const SegmentedObject* o : order) {
    const std::uint32_t code = encode_fo_pixel(o->label, o->index);
    for (std::size_t i = 0; i < cells; ++i) {
      if (o->mask[i]) img.pixels[i] = code;
    }
  }
  return img;
}

std::vector<std::uint8_t> fo_image_to_bytes(const FOImage& img) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + img.pixels.size() * 3);
  detail::ByteWriter w{out};
  w.u32(std::uint32_t(img.width));
  w.u32(std::uint32_t(img.height));
  for (std::uint32_t code : img.pixels) {
    w.u8(std::uint8_t(code & 0xFF));
    w.u8(std::uint8_t((code >> 8) & 0xFF));
    w.u8(std::uint8_t((code >> 16) & 0xFF));
  }
  return out;
}

FOImage fo_image_from_bytes(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r{bytes.data(), bytes.size()};
  FOImage img;
  img.width = int(r.u32());
  img.height = int(r.u32());
  if (img.width <= 0 || img.height <= 0) raise(Errc::bad_counts, "invalid FO image dimensions");
  const std::size_t cells = std::size_t(img.width) * img.height;
  if (r.remaining() != cells * 3) raise(Errc::truncated, "FO image pixel data size mismatch");
  img.pixels.resize(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    std::uint32_t b0 = r.u8(), b1 = r.u8(), b2 = r.u8();
    img.pixels[i] = b0 | (b1 << 8) | (b2 << 16);
  }
  return img;
}

}  // namespace cograph
