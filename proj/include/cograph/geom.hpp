#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace cograph {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Row-major 3x3.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }

  static Mat3 rot_z(double yaw) {
    double c = std::cos(yaw), s = std::sin(yaw);
    return {{c, -s, 0, s, c, 0, 0, 0, 1}};
  }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
        r.m[i * 3 + j] = s;
      }
    return r;
  }

  Mat3 transposed() const { return {{m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}}; }

  double det() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }
};

// Deviation of R^T R from identity, max-abs entry.
inline double orthonormality_error(const Mat3& r) {
  Mat3 p = r.transposed() * r;
  double e = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e = std::max(e, std::abs(p.m[i * 3 + j] - (i == j ? 1.0 : 0.0)));
  return e;
}

// Rigid transform, p_out = R * p + t.
struct Pose {
  Mat3 rotation;
  Vec3 translation;

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  Pose inverse() const {
    Mat3 rt = rotation.transposed();
    return {rt, rt * (translation * -1.0)};
  }

  Pose compose(const Pose& o) const {  // this ∘ o
    return {rotation * o.rotation, rotation * o.translation + translation};
  }
};

struct Aabb {
  Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  bool empty() const { return min.x > max.x; }

  void expand(const Vec3& p) {
    min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
    max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
  }

  void expand(const Aabb& o) {
    if (o.empty()) return;
    expand(o.min);
    expand(o.max);
  }

  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 extents() const { return max - min; }

  double volume() const {
    if (empty()) return 0.0;
    Vec3 e = extents();
    return std::max(0.0, e.x) * std::max(0.0, e.y) * std::max(0.0, e.z);
  }

  Aabb inflated(double pad) const {
    if (empty()) return *this;
    Vec3 p{pad, pad, pad};
    return {min - p, max + p};
  }

  static Aabb from_center_extents(const Vec3& c, const Vec3& e) {
    return {c - e * 0.5, c + e * 0.5};
  }
};

// Volume IoU of two boxes. Flat boxes make this 0, callers that face
// single-view (planar) point sets should inflate first.
inline double iou(const Aabb& a, const Aabb& b) {
  if (a.empty() || b.empty()) return 0.0;
  Vec3 lo{std::max(a.min.x, b.min.x), std::max(a.min.y, b.min.y), std::max(a.min.z, b.min.z)};
  Vec3 hi{std::min(a.max.x, b.max.x), std::min(a.max.y, b.max.y), std::min(a.max.z, b.max.z)};
  double inter = std::max(0.0, hi.x - lo.x) * std::max(0.0, hi.y - lo.y) * std::max(0.0, hi.z - lo.z);
  double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

}  // namespace cograph
