#pragma once

// ObjectSpec <-> JSON:
//   {id, family, class, distractor_group, n,
//    elements: [{kind, parent, anchor, pose: 16 numbers, row-major 4x4}]}
// Keys are emitted in that order; doubles use shortest round-trip form.

#include <string>

#include "json.hpp"

#include "blocksworld/objects.hpp"

namespace blocksworld {

inline nlohmann::ordered_json to_json(const ObjectSpec& spec) {
  nlohmann::ordered_json j;
  j["id"] = spec.id;
  j["family"] = to_string(spec.family);
  j["class"] = spec.class_label;
  j["distractor_group"] = spec.distractor_group;
  j["n"] = spec.cuboid_count();
  auto elements = nlohmann::ordered_json::array();
  for (const auto& node : spec.nodes) {
    nlohmann::ordered_json e;
    e["kind"] = to_string(node.kind);
    e["parent"] = node.parent ? nlohmann::ordered_json(*node.parent) : nlohmann::ordered_json(nullptr);
    e["anchor"] = node.parent ? nlohmann::ordered_json(node.parent_anchor) : nlohmann::ordered_json(nullptr);
    auto pose = nlohmann::ordered_json::array();
    for (double v : node.pose.to_row_major()) pose.push_back(v + 0.0);
    e["pose"] = std::move(pose);
    elements.push_back(std::move(e));
  }
  j["elements"] = std::move(elements);
  return j;
}

inline std::string serialize(const ObjectSpec& spec) { return to_json(spec).dump(2) + "\n"; }

// Orientation is not stored; it is recovered from the pose when the element
// sits flush on its anchor, else left at 0 (validate() reports the mismatch).
inline ObjectSpec spec_from_json(const nlohmann::json& j) {
  ObjectSpec spec;
  spec.id = j.at("id").get<std::string>();
  const auto family = j.at("family").get<std::string>();
  if (family != "L1" && family != "L2") throw std::invalid_argument("spec: unknown family " + family);
  spec.family = family == "L1" ? Family::L1 : Family::L2;
  spec.class_label = j.at("class").get<std::string>();
  spec.distractor_group = j.at("distractor_group").get<int>();
  for (const auto& e : j.at("elements")) {
    AssemblyNode node;
    const auto kind = e.at("kind").get<std::string>();
    if (kind != "base" && kind != "cuboid") throw std::invalid_argument("spec: unknown element kind " + kind);
    node.kind = kind == "base" ? ElementKind::Base : ElementKind::Cuboid;
    if (!e.at("parent").is_null()) node.parent = e.at("parent").get<int>();
    if (!e.at("anchor").is_null()) node.parent_anchor = e.at("anchor").get<int>();
    const auto values = e.at("pose").get<std::vector<double>>();
    if (values.size() != 16) throw std::invalid_argument("spec: pose needs 16 numbers");
    std::array<double, 16> m{};
    std::copy(values.begin(), values.end(), m.begin());
    node.pose = RigidTransform::from_row_major(m);
    if (node.parent && *node.parent >= 0 && static_cast<std::size_t>(*node.parent) < spec.nodes.size()) {
      const auto& p = spec.nodes[static_cast<std::size_t>(*node.parent)];
      if (const auto anchor = find_anchor(p.kind, node.parent_anchor))
        for (int q = 0; q < 4; ++q)
          if (detail::pose_close(node.pose, p.pose * mating_transform(*anchor, q))) node.orientation = q;
    }
    spec.nodes.push_back(node);
  }
  if (j.at("n").get<int>() != spec.cuboid_count()) throw std::invalid_argument("spec: n does not match element list");
  return spec;
}

inline ObjectSpec deserialize_spec(const std::string& text) { return spec_from_json(nlohmann::json::parse(text)); }

}  // namespace blocksworld
