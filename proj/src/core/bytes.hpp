#pragma once

#include <cstdint>
#include <cstring>
#include <vector>

#include "cograph/error.hpp"

namespace cograph::detail {

struct ByteWriter {
  std::vector<std::uint8_t>& out;

  void u8(std::uint8_t v) { out.push_back(v); }

  void u16(std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  }

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
  }

  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
  }

  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
  }

  void bytes(const std::uint8_t* p, std::size_t n) { out.insert(out.end(), p, p + n); }
};

struct ByteReader {
  const std::uint8_t* p;
  std::size_t size;
  std::size_t pos = 0;

  std::size_t remaining() const { return size - pos; }

  void need(std::size_t n) {
    if (remaining() < n) raise(Errc::truncated, "message ends mid-record");
  }

  std::uint8_t u8() {
    need(1);
    return p[pos++];
  }

  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(p[pos]) |
                      static_cast<std::uint16_t>(static_cast<std::uint16_t>(p[pos + 1]) << 8);
    pos += 2;
    return v;
  }

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }

  float f32() {
    need(4);
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[pos + i]) << (8 * i);
    pos += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  void bytes(std::uint8_t* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, p + pos, n);
    pos += n;
  }
};

}  // namespace cograph::detail
