#pragma once

// Indexed triangle meshes, surface measures, longest-edge subdivision and the
// exterior boundary of face-mated block assemblies.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "blocksworld/math.hpp"

namespace blocksworld {

// Thrown when parts handed to union_boundary overlap in volume.
class InvalidAssembly : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Face = std::array<std::uint32_t, 3>;

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * length(cross(b - a, c - a));
}

inline Vec3 triangle_centroid(const Vec3& a, const Vec3& b, const Vec3& c) {
  return (a + b + c) / 3.0;
}

struct Aabb {
  Point3 min{};
  Point3 max{};

  static Aabb empty() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {{inf, inf, inf}, {-inf, -inf, -inf}};
  }

  bool is_empty() const { return min.x > max.x || min.y > max.y || min.z > max.z; }

  void expand(const Vec3& p) {
    min = component_min(min, p);
    max = component_max(max, p);
  }
  void expand(const Aabb& b) {
    min = component_min(min, b.min);
    max = component_max(max, b.max);
  }

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return (min + max) * 0.5; }

  std::array<Vec3, 8> corners() const {
    std::array<Vec3, 8> out;
    for (int i = 0; i < 8; ++i)
      out[i] = {(i & 1) ? max.x : min.x, (i & 2) ? max.y : min.y, (i & 4) ? max.z : min.z};
    return out;
  }

  friend bool operator==(const Aabb&, const Aabb&) = default;
};

// Signed gap between two boxes: positive is the clearance along the most
// separating axis, zero means touching, negative is the smallest overlap depth.
inline double aabb_gap(const Aabb& a, const Aabb& b) {
  double gap = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k)
    gap = std::max(gap, std::max(a.min[k] - b.max[k], b.min[k] - a.max[k]));
  return gap;
}

class TriMesh {
 public:
  TriMesh() = default;

  // Normals are computed from the counter-clockwise winding of each face.
  TriMesh(std::vector<Point3> vertices, std::vector<Face> faces)
      : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    check_vertices();
    normals_.reserve(faces_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      check_indices(f);
      const Vec3 n = cross(vertex(f, 1) - vertex(f, 0), vertex(f, 2) - vertex(f, 0));
      const double len = length(n);
      if (!(len > 0.0))
        throw std::invalid_argument("TriMesh: degenerate face " + std::to_string(f));
      normals_.push_back(n / len);
    }
  }

  // Explicit normals must be unit length within 1e-9.
  TriMesh(std::vector<Point3> vertices, std::vector<Face> faces, std::vector<Vec3> normals)
      : vertices_(std::move(vertices)), faces_(std::move(faces)), normals_(std::move(normals)) {
    check_vertices();
    if (normals_.size() != faces_.size())
      throw std::invalid_argument("TriMesh: need one normal per face");
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      check_indices(f);
      if (std::abs(length(normals_[f]) - 1.0) > 1e-9)
        throw std::invalid_argument("TriMesh: non-unit normal on face " + std::to_string(f));
      if (!(face_area(f) > 0.0))
        throw std::invalid_argument("TriMesh: degenerate face " + std::to_string(f));
    }
  }

  const std::vector<Point3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Vec3>& normals() const { return normals_; }

  std::size_t face_count() const { return faces_.size(); }
  bool empty() const { return faces_.empty(); }

  const Point3& vertex(std::size_t face, int corner) const { return vertices_[faces_[face][corner]]; }

  double face_area(std::size_t f) const { return triangle_area(vertex(f, 0), vertex(f, 1), vertex(f, 2)); }
  Vec3 face_centroid(std::size_t f) const { return triangle_centroid(vertex(f, 0), vertex(f, 1), vertex(f, 2)); }

  TriMesh transformed(const RigidTransform& t) const {
    TriMesh out = *this;
    for (auto& v : out.vertices_) v = t.apply_point(v);
    for (auto& n : out.normals_) n = normalize(t.apply_vector(n));
    return out;
  }

  friend bool operator==(const TriMesh&, const TriMesh&) = default;

 private:
  void check_vertices() const {
    for (const auto& v : vertices_)
      if (!is_finite(v)) throw std::invalid_argument("TriMesh: non-finite vertex");
  }
  void check_indices(std::size_t f) const {
    for (auto idx : faces_[f])
      if (idx >= vertices_.size())
        throw std::invalid_argument("TriMesh: face " + std::to_string(f) + " index out of range");
  }

  std::vector<Point3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> normals_;
};

// Accumulates triangles, merging bit-identical vertices.
class MeshBuilder {
 public:
  std::uint32_t add_vertex(const Point3& p) {
    const Point3 key{p.x + 0.0, p.y + 0.0, p.z + 0.0};  // fold -0 into +0
    auto [it, inserted] = index_.try_emplace({key.x, key.y, key.z}, static_cast<std::uint32_t>(vertices_.size()));
    if (inserted) vertices_.push_back(key);
    return it->second;
  }

  void add_triangle(const Point3& a, const Point3& b, const Point3& c, const Vec3& normal) {
    faces_.push_back({add_vertex(a), add_vertex(b), add_vertex(c)});
    normals_.push_back(normal);
  }

  TriMesh build() && { return TriMesh(std::move(vertices_), std::move(faces_), std::move(normals_)); }

 private:
  std::map<std::array<double, 3>, std::uint32_t> index_;
  std::vector<Point3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> normals_;
};

inline Aabb bounding_box(const TriMesh& mesh) {
  Aabb box = Aabb::empty();
  for (const auto& f : mesh.faces())
    for (auto idx : f) box.expand(mesh.vertices()[idx]);
  return box;
}

inline double surface_area(const TriMesh& mesh) {
  double area = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) area += mesh.face_area(f);
  return area;
}

// Divergence-theorem volume; positive for closed meshes with outward normals.
inline double signed_volume(const TriMesh& mesh) {
  double six_v = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f)
    six_v += dot(mesh.vertex(f, 0), cross(mesh.vertex(f, 1), mesh.vertex(f, 2)));
  return six_v / 6.0;
}

// Area-weighted normal sum. Vanishes for any closed surface, including
// meshes with T-junctions where edge-pairing tests fail.
inline Vec3 vector_area(const TriMesh& mesh) {
  Vec3 sum{};
  for (std::size_t f = 0; f < mesh.face_count(); ++f) sum += mesh.normals()[f] * mesh.face_area(f);
  return sum;
}

inline bool is_closed(const TriMesh& mesh, double relative_tolerance = 1e-6) {
  if (mesh.empty()) return false;
  return length(vector_area(mesh)) <= relative_tolerance * surface_area(mesh);
}

// Generalized winding number: ~1 inside a closed outward mesh, ~0 outside.
inline double winding_number(const TriMesh& mesh, const Point3& p) {
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Vec3 a = mesh.vertex(f, 0) - p;
    const Vec3 b = mesh.vertex(f, 1) - p;
    const Vec3 c = mesh.vertex(f, 2) - p;
    const double la = length(a), lb = length(b), lc = length(c);
    const double num = dot(a, cross(b, c));
    const double den = la * lb * lc + dot(a, b) * lc + dot(a, c) * lb + dot(b, c) * la;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * kPi);
}

inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

inline double distance_to_surface(const TriMesh& mesh, const Point3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < mesh.face_count(); ++f)
    best = std::min(best, distance(p, closest_point_on_triangle(p, mesh.vertex(f, 0), mesh.vertex(f, 1), mesh.vertex(f, 2))));
  return best;
}

// Closed axis-aligned box of the given side lengths centred on the local
// origin, then moved by `pose`.
inline TriMesh cuboid_mesh(const Vec3& dimensions, const RigidTransform& pose = RigidTransform::identity()) {
  if (!(dimensions.x > 0.0 && dimensions.y > 0.0 && dimensions.z > 0.0))
    throw std::invalid_argument("cuboid_mesh: dimensions must be positive");
  const Vec3 h = dimensions * 0.5;
  std::vector<Point3> v;
  v.reserve(8);
  for (int i = 0; i < 8; ++i) v.push_back({(i & 1) ? h.x : -h.x, (i & 2) ? h.y : -h.y, (i & 4) ? h.z : -h.z});
  // Two triangles per face, counter-clockwise seen from outside.
  std::vector<Face> f = {
      {0, 4, 6}, {0, 6, 2},  // -x
      {1, 3, 7}, {1, 7, 5},  // +x
      {0, 1, 5}, {0, 5, 4},  // -y
      {2, 6, 7}, {2, 7, 3},  // +y
      {0, 2, 3}, {0, 3, 1},  // -z
      {4, 5, 7}, {4, 7, 6},  // +z
  };
  for (auto& p : v) p = pose.apply_point(p);
  return TriMesh(std::move(v), std::move(f));
}

struct Subdivision {
  TriMesh mesh;
  std::vector<std::uint32_t> parent;  // input face index of each output face
};

// Splits each face whose longest edge exceeds `max_edge` into k * k similar
// triangles on a barycentric grid, k = ceil(longest / max_edge). The result
// does not depend on the vertex order of a face. Faces already within the
// bound are kept as they are; children inherit the parent normal.
inline Subdivision subdivide_with_parents(const TriMesh& mesh, double max_edge) {
  if (!(max_edge > 0.0)) throw std::invalid_argument("subdivide: max_edge must be positive");
  std::vector<Point3> verts;
  std::vector<Face> faces;
  std::vector<Vec3> normals;
  std::vector<std::uint32_t> parent;
  // Slightly tighter limit so rounding in the interpolated points cannot
  // push a sub-edge past max_edge.
  const double limit = max_edge * (1.0 - 1e-12);
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Point3 a = mesh.vertex(f, 0), b = mesh.vertex(f, 1), c = mesh.vertex(f, 2);
    const double longest = std::max({distance(a, b), distance(b, c), distance(c, a)});
    const auto base = static_cast<std::uint32_t>(verts.size());
    if (longest <= max_edge) {
      verts.insert(verts.end(), {a, b, c});
      faces.push_back({base, base + 1, base + 2});
      normals.push_back(mesh.normals()[f]);
      parent.push_back(static_cast<std::uint32_t>(f));
      continue;
    }
    const auto k = static_cast<std::uint32_t>(std::ceil(longest / limit));
    const double inv = 1.0 / static_cast<double>(k);
    // Row j holds k + 1 - j points p(i, j) = a + (b - a) i / k + (c - a) j / k.
    std::vector<std::uint32_t> row_start(k + 2);
    for (std::uint32_t j = 0; j <= k; ++j) {
      row_start[j] = static_cast<std::uint32_t>(verts.size());
      for (std::uint32_t i = 0; i + j <= k; ++i) {
        const std::uint32_t r = k - i - j;
        verts.push_back((a * static_cast<double>(r) + b * static_cast<double>(i) + c * static_cast<double>(j)) * inv);
      }
    }
    auto at = [&](std::uint32_t i, std::uint32_t j) { return row_start[j] + i; };
    for (std::uint32_t j = 0; j < k; ++j)
      for (std::uint32_t i = 0; i + j < k; ++i) {
        faces.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
        if (i + j + 1 < k) faces.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
      }
    normals.resize(faces.size(), mesh.normals()[f]);
    parent.resize(faces.size(), static_cast<std::uint32_t>(f));
  }
  if (faces.size() == mesh.face_count()) return {mesh, std::move(parent)};
  return {TriMesh(std::move(verts), std::move(faces), std::move(normals)), std::move(parent)};
}

inline TriMesh subdivide(const TriMesh& mesh, double max_edge) {
  return subdivide_with_parents(mesh, max_edge).mesh;
}

namespace detail {

struct Vec2 {
  double x, y;
};

using Polygon2 = std::vector<Vec2>;

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double polygon_area(const Polygon2& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto& a = p[i];
    const auto& b = p[(i + 1) % p.size()];
    s += a.x * b.y - a.y * b.x;
  }
  return 0.5 * s;
}

// Keeps the part of a convex polygon on the side of the directed line a->b
// selected by `keep_left`.
inline Polygon2 clip_halfplane(const Polygon2& poly, const Vec2& a, const Vec2& b, bool keep_left) {
  Polygon2 out;
  const auto side = [&](const Vec2& p) {
    const double s = cross2(a, b, p);
    return keep_left ? s : -s;
  };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    const double sp = side(p), sq = side(q);
    if (sp >= 0) out.push_back(p);
    if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) {
      const double t = sp / (sp - sq);
      Vec2 x{p.x + (q.x - p.x) * t, p.y + (q.y - p.y) * t};
      // Snap onto axis-parallel clip lines so grid coordinates stay exact.
      if (a.x == b.x) x.x = a.x;
      if (a.y == b.y) x.y = a.y;
      out.push_back(x);
    }
  }
  return out;
}

// Convex `poly` minus convex counter-clockwise `hole`, as convex pieces.
inline void subtract_convex(const Polygon2& poly, const Polygon2& hole, double min_area, std::vector<Polygon2>& out) {
  Polygon2 rest = poly;
  for (std::size_t i = 0; i < hole.size() && rest.size() >= 3; ++i) {
    const Vec2& a = hole[i];
    const Vec2& b = hole[(i + 1) % hole.size()];
    Polygon2 outside = clip_halfplane(rest, a, b, false);
    if (outside.size() >= 3 && polygon_area(outside) > min_area) out.push_back(std::move(outside));
    rest = clip_halfplane(rest, a, b, true);
  }
}

inline bool segment_crosses_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c,
                                     const Vec3& n, double tol) {
  const double dp = dot(n, p - a), dq = dot(n, q - a);
  if (!((dp > tol && dq < -tol) || (dp < -tol && dq > tol))) return false;
  const Vec3 x = p + (q - p) * (dp / (dp - dq));
  // Strictly interior, away from the triangle's edges by `tol`.
  const std::array<Vec3, 3> v = {a, b, c};
  for (int e = 0; e < 3; ++e) {
    const Vec3 edge = v[(e + 1) % 3] - v[e];
    const Vec3 inward = normalize(cross(n, edge));
    if (dot(inward, x - v[e]) <= tol) return false;
  }
  return true;
}

// Probes whether part `a` reaches into the interior of part `b`.
inline bool penetrates(const TriMesh& a, const TriMesh& b, double tol) {
  std::vector<Point3> probes;
  Vec3 mean{};
  for (const auto& v : a.vertices()) mean += v;
  if (!a.vertices().empty()) probes.push_back(mean / static_cast<double>(a.vertices().size()));
  for (std::size_t f = 0; f < a.face_count(); ++f) {
    probes.push_back(a.face_centroid(f));
    for (int e = 0; e < 3; ++e) probes.push_back((a.vertex(f, e) + a.vertex(f, (e + 1) % 3)) * 0.5);
  }
  for (const auto& v : a.vertices()) probes.push_back(v);
  for (const auto& p : probes)
    if (winding_number(b, p) > 0.5 && distance_to_surface(b, p) > tol) return true;
  for (std::size_t f = 0; f < a.face_count(); ++f)
    for (int e = 0; e < 3; ++e)
      for (std::size_t g = 0; g < b.face_count(); ++g)
        if (segment_crosses_triangle(a.vertex(f, e), a.vertex(f, (e + 1) % 3), b.vertex(g, 0), b.vertex(g, 1),
                                     b.vertex(g, 2), b.normals()[g], tol))
          return true;
  return false;
}

}  // namespace detail

// Exterior boundary of an assembly of closed parts whose interiors meet only
// on planar contact patches. Regions where a face lies within
// `contact_tolerance` of an opposite-facing face of another part are removed
// from both parts.
inline TriMesh union_boundary(std::span<const TriMesh> parts, double contact_tolerance = 1e-6) {
  if (parts.size() == 1) return parts.front();

  std::vector<Aabb> boxes;
  for (const auto& p : parts) boxes.push_back(bounding_box(p));
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      if (aabb_gap(boxes[i], boxes[j]) >= -contact_tolerance) continue;
      if (detail::penetrates(parts[i], parts[j], contact_tolerance) ||
          detail::penetrates(parts[j], parts[i], contact_tolerance))
        throw InvalidAssembly("union_boundary: parts " + std::to_string(i) + " and " + std::to_string(j) +
                              " interpenetrate");
    }

  MeshBuilder builder;
  const double min_area = contact_tolerance * contact_tolerance;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const TriMesh& part = parts[i];
    for (std::size_t f = 0; f < part.face_count(); ++f) {
      const Vec3 a = part.vertex(f, 0), b = part.vertex(f, 1), c = part.vertex(f, 2);
      const Vec3 n = part.normals()[f];
      Aabb fbox = Aabb::empty();
      fbox.expand(a);
      fbox.expand(b);
      fbox.expand(c);

      // Drop the dominant normal axis; (ax0, ax1) is ordered so that the
      // projection is counter-clockwise about n. Axis-aligned faces project
      // and lift back exactly.
      int k = 0;
      for (int d = 1; d < 3; ++d)
        if (std::abs(n[d]) > std::abs(n[k])) k = d;
      int ax0 = (k + 1) % 3, ax1 = (k + 2) % 3;
      if (n[k] < 0) std::swap(ax0, ax1);
      const auto project = [&](const Vec3& p) { return detail::Vec2{p[ax0], p[ax1]}; };

      std::vector<detail::Polygon2> pieces = {{project(a), project(b), project(c)}};
      bool touched = false;
      for (std::size_t j = 0; j < parts.size() && !pieces.empty(); ++j) {
        if (j == i || aabb_gap(fbox, boxes[j]) > contact_tolerance) continue;
        const TriMesh& other = parts[j];
        for (std::size_t g = 0; g < other.face_count() && !pieces.empty(); ++g) {
          if (dot(n, other.normals()[g]) > -1.0 + 1e-9) continue;
          const Vec3 p0 = other.vertex(g, 0), p1 = other.vertex(g, 1), p2 = other.vertex(g, 2);
          if (std::abs(dot(n, p0 - a)) > contact_tolerance || std::abs(dot(n, p1 - a)) > contact_tolerance ||
              std::abs(dot(n, p2 - a)) > contact_tolerance)
            continue;
          // Opposite orientation: reverse to get a counter-clockwise hole.
          const detail::Polygon2 hole = {project(p0), project(p2), project(p1)};
          std::vector<detail::Polygon2> next;
          for (const auto& piece : pieces) detail::subtract_convex(piece, hole, min_area, next);
          pieces = std::move(next);
          touched = true;
        }
      }

      if (!touched) {
        builder.add_triangle(a, b, c, n);
        continue;
      }
      const auto lift = [&](const detail::Vec2& q) {
        Vec3 p;
        p[ax0] = q.x;
        p[ax1] = q.y;
        p[k] = a[k] - (n[ax0] * (q.x - a[ax0]) + n[ax1] * (q.y - a[ax1])) / n[k];
        return p;
      };
      for (const auto& piece : pieces)
        for (std::size_t j = 1; j + 1 < piece.size(); ++j) {
          const Vec3 p0 = lift(piece[0]), p1 = lift(piece[j]), p2 = lift(piece[j + 1]);
          if (triangle_area(p0, p1, p2) > min_area) builder.add_triangle(p0, p1, p2, n);
        }
    }
  }
  return std::move(builder).build();
}

}  // namespace blocksworld
