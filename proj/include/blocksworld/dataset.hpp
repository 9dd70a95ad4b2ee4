#pragma once

// Dataset generation, statistics and validation over a directory tree:
//
//   objects/<id>.json        assembly specs
//   meshes/<id>.stl          assembled boundary meshes
//   masks/<id>/<view>.pgm    binary object masks
//   annotations.jsonl        one row per (object, view)
//   occlusion.csv            object_id,view_index,tile,so
//   manifest.json            config echo, version, per-object entries

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "blocksworld/objects.hpp"
#include "blocksworld/objects_json.hpp"
#include "blocksworld/occlusion.hpp"
#include "blocksworld/render.hpp"
#include "blocksworld/stl.hpp"
#include "blocksworld/viewsphere.hpp"

#ifndef BLOCKSWORLD_VERSION
#define BLOCKSWORLD_VERSION "0.0.0"
#endif

namespace blocksworld {

inline constexpr const char* kToolVersion = BLOCKSWORLD_VERSION;

enum class FamilySelection { L1, L2, Both };

inline const char* to_string(FamilySelection f) {
  switch (f) {
    case FamilySelection::L1: return "L1";
    case FamilySelection::L2: return "L2";
    case FamilySelection::Both: return "both";
  }
  return "both";
}

inline FamilySelection parse_family(const std::string& s) {
  if (s == "L1" || s == "l1") return FamilySelection::L1;
  if (s == "L2" || s == "l2") return FamilySelection::L2;
  if (s == "both") return FamilySelection::Both;
  throw std::invalid_argument("unknown family '" + s + "' (expected L1, L2 or both)");
}

struct DatasetConfig {
  std::uint64_t seed = kReferenceSeed;
  FamilySelection family = FamilySelection::Both;
  int views = kDefaultViewCount;
  double radius_factor = 2.0;
  double max_edge = kDatasetMaxEdge;
  int resolution = kDefaultResolution;
  std::filesystem::path out = "dataset";
  unsigned workers = default_worker_count();  // does not affect output

  void check() const {
    if (views < 1) throw std::invalid_argument("views must be at least 1");
    if (!(radius_factor > 1.0)) throw std::invalid_argument("radius_factor must be greater than 1");
    if (!(max_edge > 0.0)) throw std::invalid_argument("max_edge must be positive");
    if (resolution < 1) throw std::invalid_argument("resolution must be at least 1");
  }
};

inline nlohmann::ordered_json config_to_json(const DatasetConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["family"] = to_string(c.family);
  j["views"] = c.views;
  j["radius_factor"] = c.radius_factor;
  j["max_edge"] = c.max_edge;
  j["resolution"] = c.resolution;
  return j;
}

// Flat JSON; missing keys keep their defaults.
inline DatasetConfig config_from_json(const nlohmann::json& j, DatasetConfig base = {}) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") base.seed = value.get<std::uint64_t>();
    else if (key == "family") base.family = parse_family(value.get<std::string>());
    else if (key == "views") base.views = value.get<int>();
    else if (key == "radius_factor") base.radius_factor = value.get<double>();
    else if (key == "max_edge") base.max_edge = value.get<double>();
    else if (key == "resolution") base.resolution = value.get<int>();
    else if (key == "out") base.out = value.get<std::string>();
    else if (key == "workers") base.workers = value.get<unsigned>();
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  return base;
}

inline std::vector<ObjectSpec> family_specs(std::uint64_t seed, FamilySelection family) {
  std::vector<ObjectSpec> out;
  if (family != FamilySelection::L2) out = generate_l1(seed);
  if (family != FamilySelection::L1) {
    auto l2 = generate_l2(seed);
    out.insert(out.end(), l2.begin(), l2.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// File helpers.

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline void make_dirs(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out = split(text, '\n');
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

// ---------------------------------------------------------------------------
// Annotation rows.

inline nlohmann::ordered_json pose_json(const Point3& position, const Mat3& rotation) {
  nlohmann::ordered_json j;
  j["position"] = {position.x + 0.0, position.y + 0.0, position.z + 0.0};
  auto r = nlohmann::ordered_json::array();
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r.push_back(rotation.m[i][k] + 0.0);
  j["rotation"] = std::move(r);
  return j;
}

struct AnnotationRow {
  std::string object_type;
  std::string object_id;
  int view_id = 0;
  std::optional<PixelBox> bbox;
  CameraPose camera;
  Vec3 dimensions{};
  double so = 0.0;
  OctaTile tile{};
  std::string mask;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["object_type"] = object_type;
    j["object_id"] = object_id;
    j["view_id"] = view_id;
    if (bbox)
      j["bbox"] = {bbox->x_min, bbox->y_min, bbox->x_max, bbox->y_max};
    else
      j["bbox"] = nullptr;
    j["object_pose"] = pose_json({}, Mat3::identity());
    j["camera_pose"] = pose_json(camera.position, camera.rotation);
    j["dimensions"] = {dimensions.x + 0.0, dimensions.y + 0.0, dimensions.z + 0.0};
    j["so"] = so;
    j["tile"] = tile.id;
    j["mask"] = mask;
    return j;
  }
};

inline std::string mask_path(const std::string& id, int view) { return "masks/" + id + "/" + std::to_string(view) + ".pgm"; }

// ---------------------------------------------------------------------------
// generate

struct GenerateReport {
  std::size_t objects = 0;
  std::size_t rows = 0;
};

inline GenerateReport cmd_generate(const DatasetConfig& config) {
  config.check();
  namespace fs = std::filesystem;
  const fs::path root = config.out;
  make_dirs(root / "objects");
  make_dirs(root / "meshes");
  make_dirs(root / "masks");

  const auto specs = family_specs(config.seed, config.family);
  const auto lattice = fibonacci_lattice(config.views, 1.0);

  std::string annotations;
  std::string csv = "object_id,view_index,tile,so\n";
  nlohmann::ordered_json manifest;
  manifest["tool"] = "blocksworld";
  manifest["version"] = kToolVersion;
  manifest["config"] = config_to_json(config);
  manifest["row_count"] = specs.size() * static_cast<std::size_t>(config.views);
  auto entries = nlohmann::ordered_json::array();

  std::size_t row = 0;
  for (const auto& spec : specs) {
    const TriMesh mesh = assemble_mesh(spec);
    write_text(root / "objects" / (spec.id + ".json"), serialize(spec));
    write_stl(mesh, root / "meshes" / (spec.id + ".stl"));
    make_dirs(root / "masks" / spec.id);

    const OcclusionKernel kernel(mesh, config.max_edge);
    const double radius = bounding_radius(mesh);
    const double distance = view_radius(radius, config.radius_factor);
    const double vfov = framing_vfov_degrees(radius, distance);
    const Vec3 dims = bounding_box(mesh).extent();
    std::vector<AnnotationRow> rows(lattice.size());
    parallel_for(lattice.size(), config.workers, [&](std::size_t v) {
      AnnotationRow& r = rows[v];
      r.object_type = spec.class_label;
      r.object_id = spec.id;
      r.view_id = lattice[v].index;
      r.camera = look_at(normalize(lattice[v].position) * distance);
      r.dimensions = dims;
      r.tile = map_to_tile(r.camera.position);
      try {
        r.so = kernel.self_occlusion(r.camera);
      } catch (const std::exception& e) {
        throw std::runtime_error("object " + spec.id + ", view " + std::to_string(r.view_id) + ": " + e.what());
      }
      const MaskImage mask = render_mask(mesh, r.camera, config.resolution, vfov);
      r.bbox = bounding_box(mask);
      r.mask = mask_path(spec.id, r.view_id);
      write_mask(mask, root / r.mask);
    });

    for (const auto& r : rows) {
      annotations += r.to_json().dump() + "\n";
      csv += r.object_id + "," + std::to_string(r.view_id) + "," + std::to_string(r.tile.id) + "," + format_double(r.so) + "\n";
    }
    nlohmann::ordered_json entry;
    entry["id"] = spec.id;
    entry["class"] = spec.class_label;
    entry["family"] = to_string(spec.family);
    entry["complexity"] = complexity(spec);
    entry["spec"] = "objects/" + spec.id + ".json";
    entry["mesh"] = "meshes/" + spec.id + ".stl";
    entry["masks"] = "masks/" + spec.id;
    entry["vfov_degrees"] = vfov;
    entry["rows"] = {{"first", row}, {"count", rows.size()}};
    entries.push_back(std::move(entry));
    row += rows.size();
  }
  manifest["objects"] = std::move(entries);

  write_text(root / "annotations.jsonl", annotations);
  write_text(root / "occlusion.csv", csv);
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
  return {specs.size(), row};
}

// ---------------------------------------------------------------------------
// stats

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json read_manifest(const std::filesystem::path& root) {
  const auto path = root / "manifest.json";
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw DatasetError(e.what());
  }
}

// Records from occlusion.csv, with complexity taken from the manifest.
inline std::vector<OcclusionRecord> read_records(const std::filesystem::path& root) {
  const auto manifest = read_manifest(root);
  std::map<std::string, int> level;
  try {
    for (const auto& o : manifest.at("objects")) level[o.at("id").get<std::string>()] = o.at("complexity").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError("manifest.json: " + std::string(e.what()));
  }
  const auto path = root / "occlusion.csv";
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::runtime_error& e) {
    throw DatasetError(e.what());
  }
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != "object_id,view_index,tile,so")
    throw DatasetError(path.string() + ": missing header");
  std::vector<OcclusionRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (f.size() != 4) throw DatasetError(where + ": expected 4 fields");
    OcclusionRecord r;
    r.object_id = f[0];
    try {
      r.view_index = static_cast<int>(parse_integer(f[1]));
      r.tile = {static_cast<int>(parse_integer(f[2]))};
      r.so = parse_double(f[3]);
    } catch (const std::invalid_argument& e) {
      throw DatasetError(where + ": " + e.what());
    }
    auto it = level.find(r.object_id);
    if (it == level.end()) throw DatasetError(where + ": object '" + r.object_id + "' not in manifest");
    r.complexity = it->second;
    out.push_back(std::move(r));
  }
  if (out.empty()) throw DatasetError(path.string() + ": no rows");
  return out;
}

struct StatsReport {
  OcclusionSummary summary;
  std::vector<std::filesystem::path> files;
};

// Writes per_class.csv, per_level.csv, per_tile.csv and histogram.csv into
// `out` (default: <dataset>/stats).
inline StatsReport cmd_stats(const std::filesystem::path& root, std::optional<std::filesystem::path> out = std::nullopt) {
  StatsReport report;
  report.summary = summarize(read_records(root));
  const auto dir = out ? *out : root / "stats";
  make_dirs(dir);
  const auto& s = report.summary;
  const std::vector<std::pair<std::string, std::string>> tables = {
      {"per_class.csv", stats_csv("class", s.per_class)},
      {"per_level.csv", stats_csv("complexity", s.per_level)},
      {"per_tile.csv", stats_csv("tile", s.per_tile)},
      {"histogram.csv", histogram_csv(s.overall)},
  };
  for (const auto& [name, text] : tables) {
    write_text(dir / name, text);
    report.files.push_back(dir / name);
  }
  return report;
}

// ---------------------------------------------------------------------------
// validate

inline std::vector<std::string> cmd_validate(const std::filesystem::path& root) {
  std::vector<std::string> v;
  nlohmann::json manifest;
  try {
    manifest = read_manifest(root);
  } catch (const DatasetError& e) {
    return {e.what()};
  }
  int views = 0, resolution = 0;
  std::uint64_t row_count = 0;
  std::vector<nlohmann::json> objects;
  try {
    views = manifest.at("config").at("views").get<int>();
    resolution = manifest.at("config").at("resolution").get<int>();
    row_count = manifest.at("row_count").get<std::uint64_t>();
    for (const auto& o : manifest.at("objects")) objects.push_back(o);
  } catch (const nlohmann::json::exception& e) {
    return {"manifest.json: " + std::string(e.what())};
  }
  if (row_count != objects.size() * static_cast<std::uint64_t>(views))
    v.push_back("manifest.json: row_count " + std::to_string(row_count) + " != objects x views = " +
                std::to_string(objects.size() * static_cast<std::uint64_t>(views)));

  std::map<std::string, int> object_index;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    const std::string id = o.value("id", "");
    object_index[id] = static_cast<int>(i);
    const auto spec_path = root / o.value("spec", "");
    try {
      const ObjectSpec spec = deserialize_spec(read_text(spec_path));
      if (spec.id != id) v.push_back(spec_path.string() + ": id '" + spec.id + "' does not match manifest '" + id + "'");
      for (const auto& bad : validate(spec)) v.push_back(spec_path.string() + ": rule (" + bad.rule + ") " + bad.message);
    } catch (const std::exception& e) {
      v.push_back(spec_path.string() + ": " + e.what());
    }
    const auto mesh_path = root / o.value("mesh", "");
    try {
      const TriMesh mesh = read_stl(mesh_path);
      if (mesh.empty()) v.push_back(mesh_path.string() + ": no triangles");
      else if (!is_closed(mesh)) v.push_back(mesh_path.string() + ": mesh is not closed");
    } catch (const ParseError& e) {
      v.push_back(mesh_path.string() + ": " + e.what() + " at byte " + std::to_string(e.byte_offset()));
    } catch (const std::exception& e) {
      v.push_back(mesh_path.string() + ": " + e.what());
    }
  }

  // occlusion.csv keyed by (object, view).
  std::map<std::pair<std::string, int>, std::string> csv_so;
  std::size_t csv_rows = 0;
  try {
    const auto lines = lines_of(read_text(root / "occlusion.csv"));
    if (lines.empty() || lines.front() != "object_id,view_index,tile,so") v.push_back("occlusion.csv: missing header");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = split(lines[i], ',');
      if (f.size() != 4) {
        v.push_back("occlusion.csv:" + std::to_string(i + 1) + ": expected 4 fields");
        continue;
      }
      ++csv_rows;
      try {
        csv_so[{f[0], static_cast<int>(parse_integer(f[1]))}] = f[3];
      } catch (const std::invalid_argument& e) {
        v.push_back("occlusion.csv:" + std::to_string(i + 1) + ": " + e.what());
      }
    }
  } catch (const std::runtime_error& e) {
    v.push_back(e.what());
  }
  if (csv_rows != row_count)
    v.push_back("occlusion.csv: " + std::to_string(csv_rows) + " rows, manifest says " + std::to_string(row_count));

  std::size_t rows = 0;
  try {
    const auto lines = lines_of(read_text(root / "annotations.jsonl"));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string where = "annotations.jsonl:" + std::to_string(i + 1);
      ++rows;
      nlohmann::json r;
      try {
        r = nlohmann::json::parse(lines[i]);
        const std::string id = r.at("object_id").get<std::string>();
        const int view = r.at("view_id").get<int>();
        const double so = r.at("so").get<double>();
        if (!object_index.count(id)) v.push_back(where + ": object '" + id + "' not in manifest");
        if (view < 0 || view >= views) v.push_back(where + ": view_id " + std::to_string(view) + " out of range");
        if (!(so >= 0.0 && so <= 1.0)) v.push_back(where + ": so " + format_double(so) + " outside [0, 1]");
        const auto& p = r.at("camera_pose").at("position");
        const Point3 cam{p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
        const int tile = r.at("tile").get<int>();
        if (map_to_tile(cam).id != tile)
          v.push_back(where + ": tile " + std::to_string(tile) + " but camera maps to " + std::to_string(map_to_tile(cam).id));
        const auto it = csv_so.find({id, view});
        if (it == csv_so.end())
          v.push_back(where + ": no occlusion.csv entry");
        else if (parse_double(it->second) != so)
          v.push_back(where + ": so " + format_double(so) + " differs from occlusion.csv " + it->second);
        std::optional<PixelBox> box;
        if (!r.at("bbox").is_null()) {
          const auto& b = r.at("bbox");
          box = PixelBox{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(), b.at(3).get<int>()};
          if (box->x_min < 0 || box->y_min < 0 || box->x_max >= resolution || box->y_max >= resolution ||
              box->x_min > box->x_max || box->y_min > box->y_max)
            v.push_back(where + ": bbox [" + std::to_string(box->x_min) + ", " + std::to_string(box->y_min) + ", " +
                        std::to_string(box->x_max) + ", " + std::to_string(box->y_max) + "] outside a " +
                        std::to_string(resolution) + " x " + std::to_string(resolution) + " image");
        }
        const auto mask_file = root / r.at("mask").get<std::string>();
        try {
          const MaskImage mask = read_mask(mask_file);
          if (mask.width() != resolution || mask.height() != resolution)
            v.push_back(mask_file.string() + ": size differs from configured resolution");
          else if (bounding_box(mask) != box)
            v.push_back(where + ": bbox does not match " + mask_file.string());
        } catch (const std::exception& e) {
          v.push_back(mask_file.string() + ": " + e.what());
        }
      } catch (const std::exception& e) {
        v.push_back(where + ": " + e.what());
      }
    }
  } catch (const std::runtime_error& e) {
    v.push_back(e.what());
  }
  if (rows != row_count)
    v.push_back("annotations.jsonl: " + std::to_string(rows) + " rows, manifest says " + std::to_string(row_count));
  return v;
}

}  // namespace blocksworld
