#pragma once

// Binary object masks from a pinhole camera, their pixel bounding boxes, and
// PGM (P5) storage.
//
// Pixel (x, y) has its centre at ((x + 0.5) / w, (y + 0.5) / h) of the image,
// row 0 at the top. A pixel is set when the primary ray through its centre
// meets the mesh; render_mask evaluates that by projecting each triangle and
// testing the pixel centres it covers.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blocksworld/geometry.hpp"
#include "blocksworld/stl.hpp"
#include "blocksworld/viewsphere.hpp"

namespace blocksworld {

inline constexpr int kDefaultResolution = 512;

class MaskImage {
 public:
  MaskImage(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw std::invalid_argument("MaskImage: dimensions must be positive");
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool on = true) { bits_[index(x, y)] = on ? 1 : 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend bool operator==(const MaskImage&, const MaskImage&) = default;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x); }

  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

struct PixelBox {
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;
  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

struct PinholeProjection {
  int width;
  int height;
  double tan_half_v;
  double tan_half_h;

  PinholeProjection(int w, int h, double vfov_degrees) : width(w), height(h) {
    if (w < 1 || h < 1) throw std::invalid_argument("render: resolution must be at least 1");
    if (!(vfov_degrees > 0.0 && vfov_degrees < 180.0)) throw std::invalid_argument("render: vfov must be in (0, 180)");
    tan_half_v = std::tan(vfov_degrees * kPi / 360.0);
    tan_half_h = tan_half_v * static_cast<double>(w) / static_cast<double>(h);
  }

  // Camera-space direction through the centre of pixel (x, y).
  Vec3 pixel_direction(int x, int y) const {
    const double sx = ((x + 0.5) / width * 2.0 - 1.0) * tan_half_h;
    const double sy = (1.0 - (y + 0.5) / height * 2.0) * tan_half_v;
    return {sx, sy, -1.0};
  }

  // Camera-space point (z < 0) to continuous pixel coordinates.
  std::array<double, 2> to_pixel(const Vec3& p) const {
    const double sx = p.x / -p.z, sy = p.y / -p.z;
    return {(sx / tan_half_h + 1.0) * 0.5 * width, (1.0 - sy / tan_half_v) * 0.5 * height};
  }
};

inline MaskImage render_mask(const TriMesh& mesh, const CameraPose& camera, int width, int height,
                             double vfov_degrees) {
  const PinholeProjection proj(width, height, vfov_degrees);
  MaskImage mask(width, height);
  const double near = 1e-9 * std::max(1.0, length(bounding_box(mesh).extent()));
  using P2 = std::array<double, 2>;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    // Clip against the plane just in front of the camera.
    std::vector<Vec3> poly;
    const std::array<Vec3, 3> tri = {camera.to_camera(mesh.vertex(f, 0)), camera.to_camera(mesh.vertex(f, 1)),
                                     camera.to_camera(mesh.vertex(f, 2))};
    for (int i = 0; i < 3; ++i) {
      const Vec3& a = tri[i];
      const Vec3& b = tri[(i + 1) % 3];
      const bool ina = a.z <= -near, inb = b.z <= -near;
      if (ina) poly.push_back(a);
      if (ina != inb) {
        const double t = (-near - a.z) / (b.z - a.z);
        poly.push_back(a + (b - a) * t);
      }
    }
    if (poly.size() < 3) continue;
    std::vector<P2> px;
    for (const auto& p : poly) px.push_back(proj.to_pixel(p));
    double area2 = 0.0;
    for (std::size_t i = 0; i < px.size(); ++i) {
      const auto& a = px[i];
      const auto& b = px[(i + 1) % px.size()];
      area2 += a[0] * b[1] - a[1] * b[0];
    }
    if (area2 == 0.0) continue;
    const double sign = area2 > 0 ? 1.0 : -1.0;
    double lo_x = px[0][0], hi_x = px[0][0], lo_y = px[0][1], hi_y = px[0][1];
    for (const auto& p : px) {
      lo_x = std::min(lo_x, p[0]);
      hi_x = std::max(hi_x, p[0]);
      lo_y = std::min(lo_y, p[1]);
      hi_y = std::max(hi_y, p[1]);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor(lo_x - 0.5)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(hi_x - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(lo_y - 0.5)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(hi_y - 0.5)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        if (mask.at(x, y)) continue;
        const double cx = x + 0.5, cy = y + 0.5;
        bool inside = true;
        for (std::size_t i = 0; i < px.size() && inside; ++i) {
          const auto& a = px[i];
          const auto& b = px[(i + 1) % px.size()];
          inside = sign * ((b[0] - a[0]) * (cy - a[1]) - (b[1] - a[1]) * (cx - a[0])) >= 0.0;
        }
        if (inside) mask.set(x, y);
      }
  }
  return mask;
}

inline MaskImage render_mask(const TriMesh& mesh, const CameraPose& camera, int resolution, double vfov_degrees) {
  return render_mask(mesh, camera, resolution, resolution, vfov_degrees);
}

inline std::optional<PixelBox> bounding_box(const MaskImage& mask) {
  std::optional<PixelBox> box;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      if (!box) {
        box = PixelBox{x, y, x, y};
        continue;
      }
      box->x_min = std::min(box->x_min, x);
      box->x_max = std::max(box->x_max, x);
      box->y_min = std::min(box->y_min, y);
      box->y_max = std::max(box->y_max, y);
    }
  return box;
}

namespace pgm {

inline std::vector<std::uint8_t> encode(const MaskImage& mask) {
  const std::string header = "P5\n" + std::to_string(mask.width()) + " " + std::to_string(mask.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + mask.bits().size());
  for (auto b : mask.bits()) out.push_back(b ? 255 : 0);
  return out;
}

inline MaskImage decode(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  const auto is_space = [](std::uint8_t c) { return c == ' ' || c == '\n' || c == '\r' || c == '\t'; };
  const auto token = [&]() {
    while (pos < bytes.size() && is_space(bytes[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !is_space(bytes[pos])) ++pos;
    if (start == pos) throw ParseError("PGM: truncated header", pos);
    return std::string(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.begin() + static_cast<std::ptrdiff_t>(pos));
  };
  const auto number = [&](const char* what) {
    const std::size_t at = pos;
    const std::string t = token();
    if (t.empty() || t.size() > 9 || t.find_first_not_of("0123456789") != std::string::npos)
      throw ParseError(std::string("PGM: bad ") + what + " '" + t + "'", at);
    return std::stoi(t);
  };
  if (token() != "P5") throw ParseError("PGM: expected magic P5", 0);
  const int w = number("width");
  const int h = number("height");
  const std::size_t maxval_at = pos;
  if (number("maxval") != 255) throw ParseError("PGM: maxval must be 255", maxval_at);
  if (w < 1 || h < 1) throw ParseError("PGM: dimensions must be positive", maxval_at);
  if (pos >= bytes.size() || !is_space(bytes[pos])) throw ParseError("PGM: missing separator after header", pos);
  ++pos;
  const std::size_t expected = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos != expected)
    throw ParseError("PGM: expected " + std::to_string(expected) + " pixel bytes, found " +
                         std::to_string(bytes.size() - pos),
                     pos);
  MaskImage mask(w, h);
  for (std::size_t i = 0; i < expected; ++i) {
    const std::uint8_t v = bytes[pos + i];
    if (v != 0 && v != 255) throw ParseError("PGM: pixel value " + std::to_string(v) + " is not 0 or 255", pos + i);
    if (v) mask.set(static_cast<int>(i % static_cast<std::size_t>(w)), static_cast<int>(i / static_cast<std::size_t>(w)));
  }
  return mask;
}

}  // namespace pgm

inline void write_mask(const MaskImage& mask, const std::filesystem::path& path) {
  const auto bytes = pgm::encode(mask);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline MaskImage read_mask(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return pgm::decode(bytes);
}

}  // namespace blocksworld
