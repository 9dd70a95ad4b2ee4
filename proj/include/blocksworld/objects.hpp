#pragma once

// Blocks-world assembly grammar. One base (120 x 20 x 60 mm, local X x Y x Z)
// carries upright cuboids (20 x 60 x 20 mm, long axis along local Y) in five
// top-face sockets; every cuboid offers eight side anchors for further
// cuboids. Children are end-mated: the child's -Y end face covers the 20 x 20
// anchor square and its long axis follows the anchor's outward normal.
//
// Object frame: Y out of the base top, X towards the end with three sockets,
// origin at the base's centre.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "blocksworld/geometry.hpp"
#include "blocksworld/random.hpp"

namespace blocksworld {

enum class ElementKind { Base, Cuboid };
enum class Family { L1, L2 };

inline constexpr std::uint64_t kReferenceSeed = 0x7E05;

inline constexpr double kBlockUnit = 20.0;
inline constexpr double kCuboidLength = 60.0;
inline constexpr Vec3 kBaseDimensions{120.0, 20.0, 60.0};
inline constexpr Vec3 kCuboidDimensions{20.0, 60.0, 20.0};
inline constexpr int kMaxHeightStages = 4;
inline constexpr double kClearance = 1e-6;

inline Vec3 dimensions_of(ElementKind kind) { return kind == ElementKind::Base ? kBaseDimensions : kCuboidDimensions; }

inline const char* to_string(ElementKind kind) { return kind == ElementKind::Base ? "base" : "cuboid"; }
inline const char* to_string(Family f) { return f == Family::L1 ? "L1" : "L2"; }

class GenerationFailure : public std::runtime_error {
 public:
  GenerationFailure(const std::string& what, std::uint64_t seed)
      : std::runtime_error(what + " (seed " + std::to_string(seed) + ")"), seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// A 20 x 20 mm socket on an element face, in the owner's local frame.
// `reference` is the in-plane direction that a child's local +X takes at
// orientation 0; orientation q turns it by q quarter turns about `normal`.
struct AnchorFrame {
  int id = 0;
  Point3 position{};
  Vec3 normal{};
  Vec3 reference{};
};

inline std::vector<AnchorFrame> base_anchors() {
  const Vec3 up{0, 1, 0}, ref{1, 0, 0};
  const double top = kBaseDimensions.y / 2;
  return {
      {1, {50, top, -20}, up, ref}, {2, {50, top, 0}, up, ref},   {3, {50, top, 20}, up, ref},
      {4, {-50, top, -15}, up, ref}, {5, {-50, top, 15}, up, ref},
  };
}

// Two anchors per long side face, one at each end; none on the end faces.
inline std::vector<AnchorFrame> cuboid_anchors() {
  const std::array<Vec3, 4> sides = {Vec3{1, 0, 0}, Vec3{0, 0, 1}, Vec3{-1, 0, 0}, Vec3{0, 0, -1}};
  const double half_width = kCuboidDimensions.x / 2;
  const double end_offset = (kCuboidLength - kBlockUnit) / 2;
  std::vector<AnchorFrame> out;
  int id = 1;
  for (const auto& n : sides)
    for (double y : {end_offset, -end_offset}) out.push_back({id++, n * half_width + Vec3{0, y, 0}, n, {0, 1, 0}});
  return out;
}

inline const std::vector<AnchorFrame>& anchors_of(ElementKind kind) {
  static const std::vector<AnchorFrame> base = base_anchors();
  static const std::vector<AnchorFrame> cuboid = cuboid_anchors();
  return kind == ElementKind::Base ? base : cuboid;
}

inline std::optional<AnchorFrame> find_anchor(ElementKind kind, int id) {
  const auto& list = anchors_of(kind);
  if (id < 1 || id > static_cast<int>(list.size())) return std::nullopt;
  return list[static_cast<std::size_t>(id - 1)];
}

// Local-to-parent transform of a cuboid mated on `anchor` at `orientation`.
inline RigidTransform mating_transform(const AnchorFrame& anchor, int orientation) {
  const Vec3 x = quarter_turn(anchor.normal, orientation) * anchor.reference;
  const Vec3 y = anchor.normal;
  return {Mat3::from_columns(x, y, cross(x, y)), anchor.position + anchor.normal * (kCuboidLength / 2)};
}

struct AssemblyNode {
  ElementKind kind = ElementKind::Cuboid;
  RigidTransform pose{};
  std::optional<int> parent;
  int parent_anchor = 0;
  int orientation = 0;  // quarter turns about the mating normal

  friend bool operator==(const AssemblyNode&, const AssemblyNode&) = default;
};

struct ObjectSpec {
  std::string id;
  Family family = Family::L1;
  std::string class_label;
  int distractor_group = 0;
  std::vector<AssemblyNode> nodes;

  int cuboid_count() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                          [](const AssemblyNode& n) { return n.kind == ElementKind::Cuboid; }));
  }

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

inline ObjectSpec bare_base(std::string id = "base") {
  ObjectSpec spec;
  spec.id = id;
  spec.class_label = std::move(id);
  spec.nodes.push_back({ElementKind::Base, RigidTransform::identity(), std::nullopt, 0, 0});
  return spec;
}

// Appends a cuboid mated on `anchor_id` of node `parent` and returns its index.
inline int attach(ObjectSpec& spec, int parent, int anchor_id, int orientation) {
  const auto& p = spec.nodes.at(static_cast<std::size_t>(parent));
  const auto anchor = find_anchor(p.kind, anchor_id);
  if (!anchor) throw std::invalid_argument("attach: no anchor " + std::to_string(anchor_id));
  spec.nodes.push_back({ElementKind::Cuboid, p.pose * mating_transform(*anchor, orientation), parent, anchor_id,
                        ((orientation % 4) + 4) % 4});
  return static_cast<int>(spec.nodes.size()) - 1;
}

// Recomputes world poses from the attachment graph (parents precede children).
inline void rebuild_poses(ObjectSpec& spec) {
  for (auto& node : spec.nodes) {
    if (!node.parent) continue;
    const auto& p = spec.nodes.at(static_cast<std::size_t>(*node.parent));
    node.pose = p.pose * mating_transform(*find_anchor(p.kind, node.parent_anchor), node.orientation);
  }
}

inline int complexity(const ObjectSpec& spec) { return spec.cuboid_count() + 1; }

// Cuboid count along the longest base-to-leaf attachment chain.
inline int height_stage(const ObjectSpec& spec) {
  std::vector<int> depth(spec.nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& n = spec.nodes[i];
    if (n.parent && *n.parent >= 0 && static_cast<std::size_t>(*n.parent) < i)
      depth[i] = depth[static_cast<std::size_t>(*n.parent)] + (n.kind == ElementKind::Cuboid ? 1 : 0);
    best = std::max(best, depth[i]);
  }
  return best;
}

inline Aabb element_box(const AssemblyNode& node) {
  const Vec3 h = dimensions_of(node.kind) * 0.5;
  Aabb box = Aabb::empty();
  for (const auto& c : Aabb{-h, h}.corners()) box.expand(node.pose.apply_point(c));
  return box;
}

inline Aabb object_box(const ObjectSpec& spec) {
  Aabb box = Aabb::empty();
  for (const auto& n : spec.nodes) box.expand(element_box(n));
  return box;
}

inline Vec3 long_axis(const AssemblyNode& node) {
  return node.kind == ElementKind::Base ? node.pose.rotation.column(0) : node.pose.rotation.column(1);
}

struct Violation {
  char rule;  // 'a'..'e'
  std::vector<int> nodes;
  std::string message;
};

namespace detail {

inline bool pose_close(const RigidTransform& a, const RigidTransform& b, double tol = 1e-9) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(a.translation[i] - b.translation[i]) > tol) return false;
    for (int j = 0; j < 3; ++j)
      if (std::abs(a.rotation.m[i][j] - b.rotation.m[i][j]) > tol) return false;
  }
  return true;
}

inline bool is_mated(const ObjectSpec& spec, std::size_t i, std::size_t j) {
  const auto& a = spec.nodes[i];
  const auto& b = spec.nodes[j];
  return (a.parent && static_cast<std::size_t>(*a.parent) == j) || (b.parent && static_cast<std::size_t>(*b.parent) == i);
}

}  // namespace detail

// Runs the grammar rules in order: (a) one base, (b) flush mating on an
// anchor, (c) orthogonal consecutive elements, (d) no touching between
// unmated elements, (e) no anchor used twice. Returns every violation found.
inline std::vector<Violation> validate(const ObjectSpec& spec) {
  std::vector<Violation> out;
  const auto count = spec.nodes.size();

  std::vector<int> bases;
  for (std::size_t i = 0; i < count; ++i)
    if (spec.nodes[i].kind == ElementKind::Base) bases.push_back(static_cast<int>(i));
  if (bases.size() != 1) out.push_back({'a', bases, "expected exactly one base, found " + std::to_string(bases.size())});
  for (int b : bases)
    if (spec.nodes[static_cast<std::size_t>(b)].parent) out.push_back({'a', {b}, "base must not have a parent"});

  std::vector<bool> linked(count, false);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& n = spec.nodes[i];
    if (n.kind != ElementKind::Cuboid) continue;
    const int self = static_cast<int>(i);
    if (!n.parent || *n.parent < 0 || static_cast<std::size_t>(*n.parent) >= i) {
      out.push_back({'b', {self}, "cuboid needs an earlier parent element"});
      continue;
    }
    const auto& p = spec.nodes[static_cast<std::size_t>(*n.parent)];
    const auto anchor = find_anchor(p.kind, n.parent_anchor);
    if (!anchor) {
      out.push_back({'b', {self, *n.parent}, "parent has no anchor " + std::to_string(n.parent_anchor)});
      continue;
    }
    bool flush = false;
    for (int q = 0; q < 4 && !flush; ++q) flush = detail::pose_close(n.pose, p.pose * mating_transform(*anchor, q));
    if (!flush) out.push_back({'b', {self, *n.parent}, "cuboid end face is not flush on its anchor square"});
    linked[i] = true;
  }

  for (std::size_t i = 0; i < count; ++i) {
    if (!linked[i]) continue;
    const auto& n = spec.nodes[i];
    const auto& p = spec.nodes[static_cast<std::size_t>(*n.parent)];
    if (std::abs(dot(long_axis(n), long_axis(p))) > 1e-9)
      out.push_back({'c', {static_cast<int>(i), *n.parent}, "consecutive elements are aligned"});
  }

  std::vector<Aabb> boxes;
  for (const auto& n : spec.nodes) boxes.push_back(element_box(n));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = i + 1; j < count; ++j) {
      if (detail::is_mated(spec, i, j)) continue;
      const double gap = aabb_gap(boxes[i], boxes[j]);
      if (gap < kClearance)
        out.push_back({'d', {static_cast<int>(i), static_cast<int>(j)},
                       gap < 0 ? "elements intersect" : "elements touch"});
    }

  std::map<std::pair<int, int>, int> used;
  for (std::size_t i = 0; i < count; ++i) {
    if (!linked[i]) continue;
    const auto& n = spec.nodes[i];
    auto [it, inserted] = used.try_emplace({*n.parent, n.parent_anchor}, static_cast<int>(i));
    if (!inserted)
      out.push_back({'e', {it->second, static_cast<int>(i)}, "anchor " + std::to_string(n.parent_anchor) + " of node " +
                                                                  std::to_string(*n.parent) + " used twice"});
  }
  return out;
}

inline bool is_valid(const ObjectSpec& spec) { return validate(spec).empty(); }

// Element boxes in canonical order; equal signatures mean identical geometry.
inline std::vector<std::array<double, 6>> geometry_signature(const ObjectSpec& spec) {
  std::vector<std::array<double, 6>> sig;
  for (const auto& n : spec.nodes) {
    const Aabb b = element_box(n);
    sig.push_back({b.min.x + 0.0, b.min.y + 0.0, b.min.z + 0.0, b.max.x + 0.0, b.max.y + 0.0, b.max.z + 0.0});
  }
  std::sort(sig.begin(), sig.end());
  return sig;
}

inline TriMesh assemble_mesh(const ObjectSpec& spec, double contact_tolerance = 1e-6) {
  std::vector<TriMesh> parts;
  parts.reserve(spec.nodes.size());
  for (const auto& n : spec.nodes) parts.push_back(cuboid_mesh(dimensions_of(n.kind), n.pose));
  return union_boundary(parts, contact_tolerance);
}

// ---------------------------------------------------------------------------
// Seeded family generation.

struct GrowthOptions {
  int max_height_stage = kMaxHeightStages;
  double floor_y = -kBaseDimensions.y / 2;  // nothing hangs below the base
  std::size_t max_expansions = 200000;
};

namespace detail {

struct Candidate {
  int parent;
  int anchor;
  int orientation;
};

inline std::vector<Candidate> legal_extensions(const ObjectSpec& spec, const GrowthOptions& opt) {
  std::set<std::pair<int, int>> used;
  std::vector<int> depth(spec.nodes.size(), 0);
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& n = spec.nodes[i];
    if (!n.parent) continue;
    used.insert({*n.parent, n.parent_anchor});
    depth[i] = depth[static_cast<std::size_t>(*n.parent)] + 1;
  }
  std::vector<Aabb> boxes;
  for (const auto& n : spec.nodes) boxes.push_back(element_box(n));

  std::vector<Candidate> out;
  for (std::size_t p = 0; p < spec.nodes.size(); ++p) {
    if (depth[p] + 1 > opt.max_height_stage) continue;
    const auto& parent = spec.nodes[p];
    for (const auto& anchor : anchors_of(parent.kind)) {
      if (used.count({static_cast<int>(p), anchor.id})) continue;
      // Orientation does not change the child's own box, only its anchors.
      const AssemblyNode probe{ElementKind::Cuboid, parent.pose * mating_transform(anchor, 0), static_cast<int>(p),
                               anchor.id, 0};
      const Aabb box = element_box(probe);
      if (box.min.y < opt.floor_y - 1e-9) continue;
      bool clear = true;
      for (std::size_t j = 0; j < boxes.size() && clear; ++j)
        if (j != p && aabb_gap(box, boxes[j]) < kClearance) clear = false;
      if (!clear) continue;
      for (int q = 0; q < 4; ++q) out.push_back({static_cast<int>(p), anchor.id, q});
    }
  }
  return out;
}

// Up to `wanted` variants of `spec`, each differing from it in exactly one
// cuboid's orientation, valid, and geometrically distinct from the original
// and from each other. Cuboids are scanned from `start` in index order; for
// each, quarter turns 1, 2, 3 are tried in turn.
inline std::vector<ObjectSpec> orientation_variants(const ObjectSpec& spec, std::size_t wanted, std::size_t start) {
  std::vector<ObjectSpec> out;
  std::vector<int> cuboids;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i)
    if (spec.nodes[i].kind == ElementKind::Cuboid) cuboids.push_back(static_cast<int>(i));
  if (cuboids.empty()) return out;
  std::vector<std::vector<std::array<double, 6>>> seen = {geometry_signature(spec)};
  for (std::size_t k = 0; k < cuboids.size() && out.size() < wanted; ++k) {
    const int idx = cuboids[(start + k) % cuboids.size()];
    for (int turn = 1; turn < 4 && out.size() < wanted; ++turn) {
      ObjectSpec v = spec;
      auto& node = v.nodes[static_cast<std::size_t>(idx)];
      node.orientation = (node.orientation + turn) % 4;
      rebuild_poses(v);
      if (!is_valid(v)) continue;
      auto sig = geometry_signature(v);
      if (std::find(seen.begin(), seen.end(), sig) != seen.end()) continue;
      seen.push_back(std::move(sig));
      out.push_back(std::move(v));
    }
  }
  return out;
}

struct GrowthResult {
  std::vector<ObjectSpec> chain;                 // chain[k] has k cuboids
  std::map<int, std::vector<ObjectSpec>> variants;  // per required cuboid count
};

// Depth-first random growth from the bare base. Every state whose cuboid
// count is a key of `required` must admit that many orientation variants;
// dead ends backtrack.
inline GrowthResult grow(std::uint64_t seed, int final_count, const std::map<int, std::size_t>& required,
                         const GrowthOptions& opt) {
  SplitMix64 rng(seed);
  struct Frame {
    ObjectSpec spec;
    std::vector<Candidate> candidates;
    std::size_t next = 0;
    std::vector<ObjectSpec> variants;
  };
  std::vector<Frame> stack;
  auto make_frame = [&](ObjectSpec spec) {
    Frame f{std::move(spec), {}, 0, {}};
    const int n = f.spec.cuboid_count();
    if (auto it = required.find(n); it != required.end()) {
      const std::size_t cuboids = static_cast<std::size_t>(n);
      f.variants = orientation_variants(f.spec, it->second, static_cast<std::size_t>(rng.below(cuboids)));
      if (f.variants.size() < it->second) return std::optional<Frame>{};
    }
    if (n < final_count) {
      f.candidates = legal_extensions(f.spec, opt);
      rng.shuffle(std::span<Candidate>(f.candidates));
    }
    return std::optional<Frame>{std::move(f)};
  };

  auto root = make_frame(bare_base());
  if (!root) throw GenerationFailure("growth: bare base cannot satisfy requirements", seed);
  stack.push_back(std::move(*root));
  std::size_t expansions = 0;
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.spec.cuboid_count() == final_count) break;
    if (top.next >= top.candidates.size()) {
      stack.pop_back();
      continue;
    }
    if (++expansions > opt.max_expansions) throw GenerationFailure("growth: backtracking budget exhausted", seed);
    const Candidate c = top.candidates[top.next++];
    ObjectSpec child = top.spec;
    attach(child, c.parent, c.anchor, c.orientation);
    if (auto frame = make_frame(std::move(child))) stack.push_back(std::move(*frame));
  }
  if (stack.empty()) throw GenerationFailure("growth: no legal assembly reaches " + std::to_string(final_count) + " cuboids", seed);

  GrowthResult result;
  for (auto& f : stack) {
    const int n = f.spec.cuboid_count();
    if (required.count(n)) result.variants[n] = std::move(f.variants);
    result.chain.push_back(std::move(f.spec));
  }
  return result;
}

inline std::string two_digits(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

inline void label(ObjectSpec& spec, Family family, const std::string& id, int group) {
  spec.id = id;
  spec.family = family;
  spec.class_label = id;
  spec.distractor_group = group;
}

}  // namespace detail

inline constexpr int kL1FirstCuboidCount = 2;
inline constexpr int kL1Levels = 18;

// 18 levels of consecutive complexity (2..19 cuboids), each level k object
// extending level k-1 by one cuboid, plus one distractor per level.
inline std::vector<ObjectSpec> generate_l1(std::uint64_t seed, const GrowthOptions& opt = {}) {
  const int last = kL1FirstCuboidCount + kL1Levels - 1;
  std::map<int, std::size_t> required;
  for (int n = kL1FirstCuboidCount; n <= last; ++n) required[n] = 1;
  auto grown = detail::grow(seed, last, required, opt);
  std::vector<ObjectSpec> out;
  for (int level = 1; level <= kL1Levels; ++level) {
    const int n = kL1FirstCuboidCount + level - 1;
    const std::string stem = "l1_c" + detail::two_digits(n + 1);
    ObjectSpec original = grown.chain[static_cast<std::size_t>(n)];
    ObjectSpec distractor = grown.variants.at(n).front();
    detail::label(original, Family::L1, stem + "_a", level);
    detail::label(distractor, Family::L1, stem + "_b", level);
    out.push_back(std::move(original));
    out.push_back(std::move(distractor));
  }
  return out;
}

struct L2Level {
  const char* name;
  int elements;
};
inline constexpr std::array<L2Level, 3> kL2Levels = {{{"easy", 7}, {"medium", 10}, {"hard", 18}}};

// Three complexity levels (7, 10, 18 elements) with four variants each; the
// variants of a level differ from the first by one cuboid's orientation.
inline std::vector<ObjectSpec> generate_l2(std::uint64_t seed, const GrowthOptions& opt = {}) {
  std::map<int, std::size_t> required;
  for (const auto& lvl : kL2Levels) required[lvl.elements - 1] = 3;
  // Separate stream from L1 so the families are independent draws.
  auto grown = detail::grow(seed ^ 0x4C32000000000000ULL, kL2Levels.back().elements - 1, required, opt);
  std::vector<ObjectSpec> out;
  for (std::size_t g = 0; g < kL2Levels.size(); ++g) {
    const int n = kL2Levels[g].elements - 1;
    std::vector<ObjectSpec> members = {grown.chain[static_cast<std::size_t>(n)]};
    for (auto& v : grown.variants.at(n)) members.push_back(v);
    for (std::size_t k = 0; k < members.size(); ++k) {
      detail::label(members[k], Family::L2, std::string("l2_") + kL2Levels[g].name + "_" + char('a' + k),
                    static_cast<int>(g) + 1);
      out.push_back(std::move(members[k]));
    }
  }
  return out;
}

}  // namespace blocksworld
