#pragma once

// Binary STL: 80-byte header, little-endian uint32 triangle count, then per
// triangle 12 float32 (normal, three vertices) and a uint16 attribute of 0.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

#include "blocksworld/geometry.hpp"

namespace blocksworld {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::uint64_t byte_offset)
      : std::runtime_error(what + " (at byte " + std::to_string(byte_offset) + ")"), offset_(byte_offset) {}

  std::uint64_t byte_offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

namespace stl {

inline constexpr std::size_t kHeaderSize = 80;
inline constexpr std::size_t kTriangleSize = 50;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_f32(std::vector<std::uint8_t>& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}
inline float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace detail

inline std::vector<std::uint8_t> encode(const TriMesh& mesh, const std::string& header_text = "blocksworld binary STL") {
  std::vector<std::uint8_t> out(kHeaderSize, 0);
  std::memcpy(out.data(), header_text.data(), std::min(header_text.size(), kHeaderSize));
  out.reserve(kHeaderSize + 4 + kTriangleSize * mesh.face_count());
  detail::put_u32(out, static_cast<std::uint32_t>(mesh.face_count()));
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Vec3& n = mesh.normals()[f];
    detail::put_f32(out, n.x);
    detail::put_f32(out, n.y);
    detail::put_f32(out, n.z);
    for (int c = 0; c < 3; ++c) {
      const Vec3& v = mesh.vertex(f, c);
      detail::put_f32(out, v.x);
      detail::put_f32(out, v.y);
      detail::put_f32(out, v.z);
    }
    out.push_back(0);
    out.push_back(0);
  }
  return out;
}

// Vertices shared bit-exactly after float32 rounding are merged; normals are
// recomputed from the stored vertices.
inline TriMesh decode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderSize + 4) throw ParseError("STL: file shorter than header and count", bytes.size());
  const std::uint32_t count = detail::get_u32(bytes.data() + kHeaderSize);
  const std::uint64_t expected = kHeaderSize + 4 + std::uint64_t{count} * kTriangleSize;
  if (bytes.size() != expected) {
    const std::uint64_t offset = std::min<std::uint64_t>(bytes.size(), expected);
    throw ParseError("STL: triangle count " + std::to_string(count) + " needs " + std::to_string(expected) +
                         " bytes, file has " + std::to_string(bytes.size()),
                     offset);
  }
  MeshBuilder builder;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t base = kHeaderSize + 4 + std::size_t{t} * kTriangleSize;
    Vec3 v[3];
    for (int c = 0; c < 3; ++c) {
      const std::uint8_t* p = bytes.data() + base + 12 + 12 * c;
      v[c] = {detail::get_f32(p), detail::get_f32(p + 4), detail::get_f32(p + 8)};
      if (!is_finite(v[c])) throw ParseError("STL: non-finite vertex in triangle " + std::to_string(t), base + 12 + 12 * c);
    }
    const Vec3 n = cross(v[1] - v[0], v[2] - v[0]);
    if (!(length(n) > 0.0)) throw ParseError("STL: degenerate triangle " + std::to_string(t), base);
    builder.add_triangle(v[0], v[1], v[2], normalize(n));
  }
  return std::move(builder).build();
}

inline void write(const TriMesh& mesh, const std::filesystem::path& path) {
  const auto bytes = encode(mesh);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline TriMesh read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode(bytes);
}

}  // namespace stl

inline void write_stl(const TriMesh& mesh, const std::filesystem::path& path) { stl::write(mesh, path); }
inline TriMesh read_stl(const std::filesystem::path& path) { return stl::read(path); }

}  // namespace blocksworld
