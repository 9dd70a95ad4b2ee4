#pragma once

// View sphere sampling, look-at cameras and octant tiles.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "blocksworld/math.hpp"

namespace blocksworld {

inline constexpr int kDefaultViewCount = 768;
inline constexpr double kGoldenRatio = 1.6180339887498948482;

struct Viewpoint {
  int index = 0;
  Point3 position{};
  double radius = 0.0;
};

// Golden-angle spiral with half-integer height offsets, pole axis +Z:
//   z_i = (1 - 2 (i + 0.5) / n) r,  azimuth_i = 2 pi i (1 - 1 / golden).
inline std::vector<Viewpoint> fibonacci_lattice(int n, double radius) {
  if (n < 1) throw std::invalid_argument("fibonacci_lattice: need at least one point");
  if (!(radius > 0.0)) throw std::invalid_argument("fibonacci_lattice: radius must be positive");
  const double golden_angle = 2.0 * kPi * (1.0 - 1.0 / kGoldenRatio);
  std::vector<Viewpoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double h = 1.0 - 2.0 * (i + 0.5) / n;
    const double ring = std::sqrt(std::max(0.0, 1.0 - h * h));
    const double azimuth = golden_angle * i;
    out.push_back({i, Vec3{ring * std::cos(azimuth), ring * std::sin(azimuth), h} * radius, radius});
  }
  return out;
}

// Camera frame stored as columns (right, up, -forward).
struct CameraPose {
  Point3 position{};
  Mat3 rotation = Mat3::identity();

  Vec3 right() const { return rotation.column(0); }
  Vec3 up() const { return rotation.column(1); }
  Vec3 forward() const { return -rotation.column(2); }

  // World point into camera coordinates (camera looks down -Z).
  Vec3 to_camera(const Point3& p) const { return rotation.transposed() * (p - position); }
};

// right = forward x up_ref, up = right x forward. up_ref is world +Y, or
// world +X when the view direction is parallel to +Y.
inline CameraPose look_at(const Point3& position, const Point3& target = {}) {
  const Vec3 d = target - position;
  if (!(length(d) > 0.0)) throw std::invalid_argument("look_at: position equals target");
  const Vec3 forward = normalize(d);
  Vec3 up_ref{0, 1, 0};
  if (length(cross(forward, up_ref)) < 1e-12) up_ref = {1, 0, 0};
  const Vec3 right = normalize(cross(forward, up_ref));
  const Vec3 up = cross(right, forward);
  return {position, Mat3::from_columns(right, up, -forward)};
}

// Octant tile id 1..8 from the sign code 4[x<0] + 2[y<0] + [z<0]; zero
// coordinates count as positive.
struct OctaTile {
  int id = 1;
  friend bool operator==(const OctaTile&, const OctaTile&) = default;
};

inline OctaTile map_to_tile(const Point3& p) {
  if (p.x == 0.0 && p.y == 0.0 && p.z == 0.0) throw std::invalid_argument("map_to_tile: zero vector");
  const int code = 4 * (p.x < 0) + 2 * (p.y < 0) + (p.z < 0);
  return {code + 1};
}

// Corners (+-X, +-Y, +-Z unit vectors) of the spherical triangle for a tile,
// ordered counter-clockwise seen from outside.
inline std::array<Vec3, 3> tile_corners(OctaTile tile) {
  const int code = tile.id - 1;
  const Vec3 a{(code & 4) ? -1.0 : 1.0, 0, 0};
  const Vec3 b{0, (code & 2) ? -1.0 : 1.0, 0};
  const Vec3 c{0, 0, (code & 1) ? -1.0 : 1.0};
  if (dot(cross(b - a, c - a), a + b + c) > 0) return {a, b, c};
  return {a, c, b};
}

// Camera distance giving `radius_factor` times the object's bounding radius.
inline double view_radius(double bounding_radius, double radius_factor) { return bounding_radius * radius_factor; }

// Vertical field of view (degrees) at which a sphere of `bounding_radius`
// seen from `distance` spans `fill` of the image height.
inline double framing_vfov_degrees(double bounding_radius, double distance, double fill = 0.9) {
  if (!(distance > bounding_radius)) throw std::invalid_argument("framing_vfov: camera inside bounding sphere");
  const double half = std::asin(bounding_radius / distance);
  return 2.0 * std::atan(std::tan(half) / fill) * 180.0 / kPi;
}

inline nlohmann::ordered_json viewpoints_to_json(const std::vector<Viewpoint>& views) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& v : views) {
    nlohmann::ordered_json j;
    j["index"] = v.index;
    j["x"] = v.position.x + 0.0;
    j["y"] = v.position.y + 0.0;
    j["z"] = v.position.z + 0.0;
    j["tile"] = map_to_tile(v.position).id;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace blocksworld
