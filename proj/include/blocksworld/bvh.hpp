#pragma once

// Bounding-volume hierarchy over a triangle mesh for segment/ray queries.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "blocksworld/geometry.hpp"

namespace blocksworld {

struct RayHit {
  double t = 0.0;
  std::uint32_t face = 0;
};

class Bvh {
 public:
  explicit Bvh(const TriMesh& mesh, std::size_t leaf_size = 4) {
    const std::size_t n = mesh.face_count();
    tris_.reserve(n);
    for (std::size_t f = 0; f < n; ++f) {
      const Vec3 a = mesh.vertex(f, 0);
      tris_.push_back({a, mesh.vertex(f, 1) - a, mesh.vertex(f, 2) - a, static_cast<std::uint32_t>(f)});
    }
    if (n == 0) return;
    std::vector<Aabb> boxes(n);
    std::vector<Vec3> centers(n);
    for (std::size_t f = 0; f < n; ++f) {
      boxes[f] = Aabb::empty();
      for (int c = 0; c < 3; ++c) boxes[f].expand(mesh.vertex(f, c));
      centers[f] = boxes[f].center();
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    nodes_.reserve(2 * n / leaf_size + 1);
    build(order, boxes, centers, 0, n, leaf_size);
    std::vector<Triangle> sorted;
    sorted.reserve(n);
    for (auto idx : order) sorted.push_back(tris_[idx]);
    tris_ = std::move(sorted);
  }

  bool empty() const { return tris_.empty(); }
  const Aabb& bounds() const { return nodes_.front().box; }

  // True if some triangle is hit at a parameter in (t_min, t_max).
  bool any_hit(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const {
    bool found = false;
    traverse(origin, dir, t_min, t_max, [&](const Triangle&, double) {
      found = true;
      return true;
    });
    return found;
  }

  std::optional<RayHit> closest_hit(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const {
    std::optional<RayHit> best;
    double limit = t_max;
    traverse_closest(origin, dir, t_min, limit, best);
    return best;
  }

 private:
  struct Triangle {
    Vec3 a, e1, e2;
    std::uint32_t face;
  };
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: first triangle; inner: right child
    std::uint32_t count = 0;  // 0 for inner nodes
  };

  std::uint32_t build(std::vector<std::uint32_t>& order, const std::vector<Aabb>& boxes,
                      const std::vector<Vec3>& centers, std::size_t begin, std::size_t end, std::size_t leaf_size) {
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    Aabb box = Aabb::empty(), cbox = Aabb::empty();
    for (std::size_t i = begin; i < end; ++i) {
      box.expand(boxes[order[i]]);
      cbox.expand(centers[order[i]]);
    }
    nodes_[index].box = box;
    const Vec3 ext = cbox.extent();
    int axis = 0;
    if (ext.y > ext[axis]) axis = 1;
    if (ext.z > ext[axis]) axis = 2;
    if (end - begin <= leaf_size || ext[axis] <= 0.0) {
      nodes_[index].first = static_cast<std::uint32_t>(begin);
      nodes_[index].count = static_cast<std::uint32_t>(end - begin);
      return index;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                     [&](std::uint32_t l, std::uint32_t r) { return centers[l][axis] < centers[r][axis]; });
    build(order, boxes, centers, begin, mid, leaf_size);
    const std::uint32_t right = build(order, boxes, centers, mid, end, leaf_size);
    nodes_[index].first = right;
    return index;
  }

  static bool slab(const Aabb& b, const Vec3& o, const Vec3& inv, double t0, double t1) {
    for (int k = 0; k < 3; ++k) {
      double lo = (b.min[k] - o[k]) * inv[k];
      double hi = (b.max[k] - o[k]) * inv[k];
      if (lo > hi) std::swap(lo, hi);
      // NaN from 0 * inf means the origin lies on the slab plane; keep going.
      if (lo > t0) t0 = lo;
      if (hi < t1) t1 = hi;
      if (t0 > t1) return false;
    }
    return true;
  }

  // Moller-Trumbore with closed edges.
  static std::optional<double> intersect(const Triangle& tri, const Vec3& o, const Vec3& d) {
    const Vec3 p = cross(d, tri.e2);
    const double det = dot(tri.e1, p);
    if (det == 0.0) return std::nullopt;
    const double inv = 1.0 / det;
    const Vec3 s = o - tri.a;
    const double u = dot(s, p) * inv;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    const Vec3 q = cross(s, tri.e1);
    const double v = dot(d, q) * inv;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    return dot(tri.e2, q) * inv;
  }

  static Vec3 inverse(const Vec3& d) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {d.x != 0.0 ? 1.0 / d.x : inf, d.y != 0.0 ? 1.0 / d.y : inf, d.z != 0.0 ? 1.0 / d.z : inf};
  }

  template <typename Visit>
  void traverse(const Vec3& o, const Vec3& d, double t_min, double t_max, Visit&& visit) const {
    if (tris_.empty()) return;
    const Vec3 inv = inverse(d);
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!slab(node.box, o, inv, t_min, t_max)) continue;
      if (node.count > 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
          const auto t = intersect(tris_[i], o, d);
          if (t && *t > t_min && *t < t_max && visit(tris_[i], *t)) return;
        }
      } else {
        stack[top++] = node.first;
        stack[top++] = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
      }
    }
  }

  void traverse_closest(const Vec3& o, const Vec3& d, double t_min, double& t_max, std::optional<RayHit>& best) const {
    if (tris_.empty()) return;
    const Vec3 inv = inverse(d);
    std::uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
      const Node& node = nodes_[stack[--top]];
      if (!slab(node.box, o, inv, t_min, t_max)) continue;
      if (node.count > 0) {
        for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
          const auto t = intersect(tris_[i], o, d);
          if (t && *t > t_min && *t < t_max) {
            t_max = *t;
            best = RayHit{*t, tris_[i].face};
          }
        }
      } else {
        stack[top++] = node.first;
        stack[top++] = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
      }
    }
  }

  std::vector<Triangle> tris_;
  std::vector<Node> nodes_;
};

}  // namespace blocksworld
