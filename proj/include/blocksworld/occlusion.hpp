#pragma once

// Self-occlusion SO = hidden area / total area for a camera position.
//
// The closed input mesh is subdivided once (longest-edge bisection to
// max_edge). A sub-face is visible when it faces the camera and the segment
// from the camera to its centroid meets no surface strictly nearer than the
// centroid. Occluders are tested against the unsubdivided mesh, which bounds
// the same surface with far fewer triangles.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blocksworld/bvh.hpp"
#include "blocksworld/format.hpp"
#include "blocksworld/geometry.hpp"
#include "blocksworld/objects.hpp"
#include "blocksworld/parallel.hpp"
#include "blocksworld/viewsphere.hpp"

namespace blocksworld {

inline constexpr double kDatasetMaxEdge = 2.0;
inline constexpr double kAcceptanceMaxEdge = 1.0;

struct VisibilityOptions {
  double epsilon_scale = 1e-6;            // "strictly nearer" slack, times scene diameter
  std::optional<double> vfov_degrees;     // view-port clip when set
  double aspect = 1.0;                    // width / height
};

struct VisibilityPartition {
  TriMesh visible;
  TriMesh hidden;
  double visible_area = 0.0;
  double hidden_area = 0.0;
};

class OcclusionKernel {
 public:
  OcclusionKernel(const TriMesh& mesh, double max_edge, VisibilityOptions options = {})
      : options_(options), bvh_(mesh) {
    if (mesh.empty() || !(surface_area(mesh) > 0.0)) throw std::invalid_argument("occlusion: zero-area mesh");
    if (!is_closed(mesh)) throw std::invalid_argument("occlusion: mesh is not closed");
    coarse_ = mesh;
    sub_ = subdivide_with_parents(mesh, max_edge);
    const auto& m = sub_.mesh;
    centroids_.reserve(m.face_count());
    areas_.reserve(m.face_count());
    for (std::size_t f = 0; f < m.face_count(); ++f) {
      centroids_.push_back(m.face_centroid(f));
      areas_.push_back(m.face_area(f));
      total_area_ += areas_.back();
    }
    epsilon_ = options_.epsilon_scale * length(bounding_box(mesh).extent());
  }

  const Subdivision& subdivision() const { return sub_; }
  double total_area() const { return total_area_; }

  // Per sub-face visibility flags.
  std::vector<std::uint8_t> classify(const CameraPose& camera) const {
    check_camera(camera);
    const auto& normals = sub_.mesh.normals();
    const Point3 c = camera.position;
    std::optional<double> tan_v, tan_h;
    if (options_.vfov_degrees) {
      tan_v = std::tan(*options_.vfov_degrees * kPi / 360.0);
      tan_h = *tan_v * options_.aspect;
    }
    std::vector<std::uint8_t> visible(centroids_.size(), 0);
    for (std::size_t f = 0; f < centroids_.size(); ++f) {
      const Vec3 to_camera = c - centroids_[f];
      if (!(dot(normals[f], to_camera) > 0.0)) continue;
      const Vec3 local = camera.to_camera(centroids_[f]);
      if (!(local.z < 0.0)) continue;
      if (tan_v && (std::abs(local.y) > -local.z * *tan_v || std::abs(local.x) > -local.z * *tan_h)) continue;
      const Vec3 dir = centroids_[f] - c;
      const double len = length(dir);
      if (bvh_.any_hit(c, dir, 0.0, 1.0 - epsilon_ / len)) continue;
      visible[f] = 1;
    }
    return visible;
  }

  // {visible, hidden} areas.
  std::array<double, 2> areas(const CameraPose& camera) const {
    const auto flags = classify(camera);
    double vis = 0.0, hid = 0.0;
    for (std::size_t f = 0; f < flags.size(); ++f) (flags[f] ? vis : hid) += areas_[f];
    return {vis, hid};
  }

  double self_occlusion(const CameraPose& camera) const {
    const auto [vis, hid] = areas(camera);
    return std::clamp(hid / (vis + hid), 0.0, 1.0);
  }

  VisibilityPartition partition(const CameraPose& camera) const {
    const auto flags = classify(camera);
    MeshBuilder vis, hid;
    VisibilityPartition out;
    const auto& m = sub_.mesh;
    for (std::size_t f = 0; f < flags.size(); ++f) {
      (flags[f] ? vis : hid).add_triangle(m.vertex(f, 0), m.vertex(f, 1), m.vertex(f, 2), m.normals()[f]);
      (flags[f] ? out.visible_area : out.hidden_area) += areas_[f];
    }
    out.visible = std::move(vis).build();
    out.hidden = std::move(hid).build();
    return out;
  }

 private:
  void check_camera(const CameraPose& camera) const {
    if (!is_finite(camera.position)) throw std::invalid_argument("occlusion: non-finite camera position");
    if (winding_number(coarse_, camera.position) > 0.5) throw std::invalid_argument("occlusion: camera inside mesh");
  }

  VisibilityOptions options_;
  Bvh bvh_;
  TriMesh coarse_;
  Subdivision sub_;
  std::vector<Point3> centroids_;
  std::vector<double> areas_;
  double total_area_ = 0.0;
  double epsilon_ = 0.0;
};

inline VisibilityPartition visible_partition(const TriMesh& mesh, const CameraPose& camera, double max_edge,
                                             const VisibilityOptions& options = {}) {
  return OcclusionKernel(mesh, max_edge, options).partition(camera);
}

inline double self_occlusion(const TriMesh& mesh, const CameraPose& camera, double max_edge,
                             const VisibilityOptions& options = {}) {
  return OcclusionKernel(mesh, max_edge, options).self_occlusion(camera);
}

struct OcclusionRecord {
  std::string object_id;
  int view_index = 0;
  double so = 0.0;
  OctaTile tile{};
  Point3 camera_position{};
  int complexity = 0;
};

// Largest vertex distance from the object origin.
inline double bounding_radius(const TriMesh& mesh) {
  double r = 0.0;
  for (const auto& v : mesh.vertices()) r = std::max(r, length(v));
  return r;
}

// Camera positions for one object: the lattice directions scaled to
// radius_factor times the object's bounding radius, or used as given.
inline std::vector<Point3> camera_positions(const std::vector<Viewpoint>& viewpoints, const TriMesh& mesh,
                                            std::optional<double> radius_factor) {
  std::vector<Point3> out;
  const double r = radius_factor ? view_radius(bounding_radius(mesh), *radius_factor) : 0.0;
  for (const auto& v : viewpoints) out.push_back(radius_factor ? normalize(v.position) * r : v.position);
  return out;
}

// One record per (object, view), object-major. Views are evaluated on up to
// `workers` threads; output order does not depend on the worker count.
inline std::vector<OcclusionRecord> occlusion_table(const std::vector<ObjectSpec>& specs,
                                                    const std::vector<Viewpoint>& viewpoints, double max_edge,
                                                    std::optional<double> radius_factor = std::nullopt,
                                                    unsigned workers = default_worker_count()) {
  std::vector<OcclusionRecord> out(specs.size() * viewpoints.size());
  for (std::size_t o = 0; o < specs.size(); ++o) {
    const auto& spec = specs[o];
    if (!is_valid(spec)) throw std::invalid_argument("occlusion_table: invalid spec " + spec.id);
    const TriMesh mesh = assemble_mesh(spec);
    const OcclusionKernel kernel(mesh, max_edge);
    const auto positions = camera_positions(viewpoints, mesh, radius_factor);
    parallel_for(viewpoints.size(), workers, [&](std::size_t v) {
      OcclusionRecord rec;
      rec.object_id = spec.id;
      rec.view_index = viewpoints[v].index;
      rec.camera_position = positions[v];
      rec.tile = map_to_tile(positions[v]);
      rec.complexity = complexity(spec);
      try {
        rec.so = kernel.self_occlusion(look_at(positions[v]));
      } catch (const std::exception& e) {
        throw std::runtime_error("object " + spec.id + ", view " + std::to_string(rec.view_index) + ": " + e.what());
      }
      out[o * viewpoints.size() + v] = std::move(rec);
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summaries.

inline constexpr std::array<const char*, 9> kHistogramBins = {"<50",   "50-55", "55-60", "60-65", "65-70",
                                                              "70-75", "75-80", "80-85", ">85"};

inline std::size_t histogram_bin(double so) {
  const double pct = so * 100.0;
  if (pct < 50.0) return 0;
  if (pct >= 85.0) return kHistogramBins.size() - 1;
  return 1 + static_cast<std::size_t>((pct - 50.0) / 5.0);
}

struct SoStats {
  std::size_t count = 0;
  double sum = 0.0;
  double min = 1.0;
  double max = 0.0;
  std::array<std::size_t, kHistogramBins.size()> histogram{};

  void add(double so) {
    ++count;
    sum += so;
    min = std::min(min, so);
    max = std::max(max, so);
    ++histogram[histogram_bin(so)];
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

struct OcclusionSummary {
  SoStats overall;
  std::map<std::string, SoStats> per_class;
  std::map<int, SoStats> per_level;  // keyed by complexity
  std::map<int, SoStats> per_tile;   // keyed by tile id
};

inline OcclusionSummary summarize(const std::vector<OcclusionRecord>& records) {
  if (records.empty()) throw std::invalid_argument("summarize: no records");
  OcclusionSummary s;
  for (const auto& r : records) {
    s.overall.add(r.so);
    s.per_class[r.object_id].add(r.so);
    s.per_level[r.complexity].add(r.so);
    s.per_tile[r.tile.id].add(r.so);
  }
  return s;
}

inline std::string records_csv(const std::vector<OcclusionRecord>& records) {
  std::string out = "object_id,view_index,tile,so\n";
  for (const auto& r : records)
    out += r.object_id + "," + std::to_string(r.view_index) + "," + std::to_string(r.tile.id) + "," +
           format_double(r.so) + "\n";
  return out;
}

template <typename Key>
std::string stats_csv(const std::string& key_name, const std::map<Key, SoStats>& table) {
  std::string out = key_name + ",count,mean,min,max";
  for (const char* bin : kHistogramBins) out += std::string(",") + bin;
  out += "\n";
  for (const auto& [key, st] : table) {
    if constexpr (std::is_same_v<Key, std::string>)
      out += key;
    else
      out += std::to_string(key);
    out += "," + std::to_string(st.count) + "," + format_double(st.mean()) + "," + format_double(st.min) + "," +
           format_double(st.max);
    for (auto c : st.histogram) out += "," + std::to_string(c);
    out += "\n";
  }
  return out;
}

inline std::string histogram_csv(const SoStats& st) {
  std::string out = "bin,count\n";
  for (std::size_t b = 0; b < kHistogramBins.size(); ++b)
    out += std::string(kHistogramBins[b]) + "," + std::to_string(st.histogram[b]) + "\n";
  return out;
}

inline nlohmann::ordered_json records_to_json(const std::vector<OcclusionRecord>& records) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["object_id"] = r.object_id;
    j["view_index"] = r.view_index;
    j["tile"] = r.tile.id;
    j["so"] = r.so;
    j["camera"] = {r.camera_position.x + 0.0, r.camera_position.y + 0.0, r.camera_position.z + 0.0};
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace blocksworld
