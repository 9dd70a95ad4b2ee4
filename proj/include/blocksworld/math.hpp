#pragma once

// Small fixed-size linear algebra used across the library. Units are
// millimetres unless a function states otherwise.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace blocksworld {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

using Point3 = Vec3;

constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
constexpr Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
constexpr Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
constexpr Vec3 operator*(double s, const Vec3& a) { return a * s; }
constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
constexpr Vec3& operator+=(Vec3& a, const Vec3& b) { return a = a + b; }
constexpr Vec3& operator-=(Vec3& a, const Vec3& b) { return a = a - b; }

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Vec3& a, const Vec3& b) { return length(a - b); }

inline Vec3 normalize(const Vec3& a) {
  const double len = length(a);
  if (!(len > 0.0)) throw std::invalid_argument("normalize: zero-length vector");
  return a / len;
}

inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

inline Vec3 component_min(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 component_max(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  static constexpr Mat3 identity() { return {}; }

  // Builds the matrix whose columns are the given vectors.
  static constexpr Mat3 from_columns(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
      r.m[i][0] = c0[i];
      r.m[i][1] = c1[i];
      r.m[i][2] = c2[i];
    }
    return r;
  }

  constexpr Vec3 column(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
  constexpr Vec3 row(int i) const { return {m[i][0], m[i][1], m[i][2]}; }

  constexpr Mat3 transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
    return r;
  }

  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

constexpr Vec3 operator*(const Mat3& a, const Vec3& v) {
  return {dot(a.row(0), v), dot(a.row(1), v), dot(a.row(2), v)};
}

constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a.m[i][k] * b.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

// Rotation by a multiple of 90 degrees about a unit axis-aligned vector.
// Exact (entries in {-1, 0, 1}) so grid-aligned poses stay exact.
inline Mat3 quarter_turn(const Vec3& axis, int quarter_turns) {
  const int q = ((quarter_turns % 4) + 4) % 4;
  const double c = q == 0 ? 1.0 : (q == 2 ? -1.0 : 0.0);
  const double s = q == 1 ? 1.0 : (q == 3 ? -1.0 : 0.0);
  const double x = axis.x, y = axis.y, z = axis.z;
  const double t = 1.0 - c;
  Mat3 r;
  r.m = {{{t * x * x + c, t * x * y - s * z, t * x * z + s * y},
          {t * x * y + s * z, t * y * y + c, t * y * z - s * x},
          {t * x * z - s * y, t * y * z + s * x, t * z * z + c}}};
  return r;
}

// Rigid transform p -> rotation * p + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::identity();
  Vec3 translation{};

  static constexpr RigidTransform identity() { return {}; }
  static constexpr RigidTransform translate(const Vec3& t) { return {Mat3::identity(), t}; }

  constexpr Vec3 apply_point(const Vec3& p) const { return rotation * p + translation; }
  constexpr Vec3 apply_vector(const Vec3& v) const { return rotation * v; }

  // (*this) after (inner): first inner, then this.
  constexpr RigidTransform operator*(const RigidTransform& inner) const {
    return {rotation * inner.rotation, rotation * inner.translation + translation};
  }

  constexpr RigidTransform inverse() const {
    const Mat3 rt = rotation.transposed();
    return {rt, -(rt * translation)};
  }

  // 4x4 homogeneous matrix, row-major.
  std::array<double, 16> to_row_major() const {
    std::array<double, 16> out{};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out[i * 4 + j] = rotation.m[i][j];
      out[i * 4 + 3] = translation[i];
    }
    out[15] = 1.0;
    return out;
  }

  static RigidTransform from_row_major(const std::array<double, 16>& a) {
    if (a[12] != 0.0 || a[13] != 0.0 || a[14] != 0.0 || a[15] != 1.0)
      throw std::invalid_argument("pose: last row must be (0, 0, 0, 1)");
    RigidTransform t;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) t.rotation.m[i][j] = a[i * 4 + j];
      t.translation[i] = a[i * 4 + 3];
    }
    return t;
  }

  friend constexpr bool operator==(const RigidTransform&, const RigidTransform&) = default;
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace blocksworld
