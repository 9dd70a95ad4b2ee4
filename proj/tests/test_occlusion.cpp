#include <catch_amalgamated.hpp>

#include <array>

#include "blocksworld/objects.hpp"
#include "blocksworld/occlusion.hpp"
#include "oracles.hpp"

using namespace blocksworld;
using Catch::Approx;

namespace {

TriMesh scaled(const TriMesh& m, double s) {
  std::vector<Vec3> v;
  for (const auto& p : m.vertices()) v.push_back(p * s);
  return TriMesh(std::move(v), {m.faces().begin(), m.faces().end()});
}

// Reflection through the plane z = 0, with faces re-wound.
TriMesh mirrored_z(const TriMesh& m) {
  std::vector<Vec3> v;
  for (const auto& p : m.vertices()) v.push_back({p.x, p.y, -p.z});
  std::vector<Face> f;
  for (const auto& face : m.faces()) f.push_back({face[0], face[2], face[1]});
  return TriMesh(std::move(v), std::move(f));
}

TriMesh small_assembly() {
  ObjectSpec spec = bare_base();
  const int a = attach(spec, 0, 1, 0);
  attach(spec, a, 1, 1);
  attach(spec, 0, 5, 0);
  return assemble_mesh(spec);
}

std::vector<Vec3> external_cameras(SplitMix64& rng, const TriMesh& mesh, int count) {
  std::vector<Vec3> out;
  const double r = bounding_radius(mesh);
  for (int i = 0; i < count; ++i)
    out.push_back(oracle::random_direction(rng) * r * (1.2 + static_cast<double>(rng.below(1000)) / 250.0));
  return out;
}

}  // namespace

TEST_CASE("sphere matches the spherical-cap closed form", "[occlusion][oracle]") {
  const double r = 0.5, d = 2.0;
  const TriMesh sphere = oracle::icosphere(4, r);
  const OcclusionKernel kernel(sphere, r / 20);
  const double expected = 1.0 - oracle::sphere_visible_fraction(r, d);
  REQUIRE(expected == Approx(0.625));
  for (const Vec3& axis : {Vec3{0, 0, 1}, Vec3{1, 0, 0}, Vec3{0, -1, 0}})
    CHECK(kernel.self_occlusion(look_at(axis * d)) == Approx(expected).margin(0.01));
}

TEST_CASE("cube face-on shows exactly one face", "[occlusion][oracle]") {
  const TriMesh cube = cuboid_mesh({20, 20, 20});
  const OcclusionKernel kernel(cube, 1.0);
  for (const Vec3& axis : {Vec3{0, 0, 1}, Vec3{-1, 0, 0}, Vec3{0, 1, 0}}) {
    const auto part = kernel.partition(look_at(axis * 60.0));
    CHECK(part.visible_area == Approx(400.0));
    for (const auto& n : part.visible.normals()) CHECK(dot(n, axis) == Approx(1.0));
    CHECK(kernel.self_occlusion(look_at(axis * 60.0)) == Approx(5.0 / 6.0).margin(1e-12));
  }
}

TEST_CASE("centrally symmetric convex bodies hide at least half their area", "[occlusion][property]") {
  // Opposite faces have equal area and an outside camera faces at most one
  // of each pair.
  SplitMix64 rng(11);
  for (int trial = 0; trial < 15; ++trial) {
    const Vec3 dims{1.0 + static_cast<double>(rng.below(200)) / 10.0, 1.0 + static_cast<double>(rng.below(200)) / 10.0,
                    1.0 + static_cast<double>(rng.below(200)) / 10.0};
    const Vec3 y = oracle::random_direction(rng);
    const Vec3 x = normalize(cross(y, oracle::random_direction(rng)));
    const TriMesh box = cuboid_mesh(dims, {Mat3::from_columns(x, y, cross(x, y)), Vec3{}});
    const OcclusionKernel kernel(box, 2.0);
    for (const auto& c : external_cameras(rng, box, 8)) {
      const auto [vis, hid] = kernel.areas(look_at(c));
      CHECK(vis <= hid * (1 + 1e-12));
    }
  }
  const auto records = occlusion_table({bare_base()}, fibonacci_lattice(96, 1.0), 4.0, 2.0);
  for (const auto& r : records) CHECK(r.so >= 0.5 - 1e-12);
}

TEST_CASE("a general convex body can show more than half its area", "[occlusion][property]") {
  // Tall square pyramid seen from above its apex: every lateral face is
  // front-facing, and the lateral area is far larger than the base.
  const TriMesh pyramid({{-1, 0, -1}, {1, 0, -1}, {1, 0, 1}, {-1, 0, 1}, {0, 10, 0}},
                        {{0, 1, 2}, {0, 2, 3}, {4, 1, 0}, {4, 2, 1}, {4, 3, 2}, {4, 0, 3}});
  REQUIRE(is_closed(pyramid));
  REQUIRE(signed_volume(pyramid) > 0);
  const OcclusionKernel kernel(pyramid, 0.5);
  const double so = kernel.self_occlusion(look_at({0, 30, 0.001}));
  CHECK(so == Approx(4.0 / (4.0 + 4.0 * std::sqrt(101.0))).margin(1e-9));
  CHECK(so < 0.5);
}

TEST_CASE("random convex hulls agree with brute-force sampling", "[occlusion][oracle]") {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 4; ++trial) {
    const TriMesh hull = oracle::convex_hull(oracle::random_points(rng, 12, 10.0));
    REQUIRE(is_closed(hull));
    const OcclusionKernel kernel(hull, 0.5);
    for (const auto& c : external_cameras(rng, hull, 3)) {
      const double sampled = oracle::sampled_visible_fraction(hull, c, 20000, rng.next());
      CHECK(1.0 - kernel.self_occlusion(look_at(c)) == Approx(sampled).margin(0.015));
    }
  }
}

TEST_CASE("visible and hidden areas partition the surface", "[occlusion][property]") {
  SplitMix64 rng(5);
  const TriMesh mesh = small_assembly();
  const OcclusionKernel kernel(mesh, 2.0);
  const double total = surface_area(mesh);
  for (const auto& c : external_cameras(rng, mesh, 20)) {
    const auto part = kernel.partition(look_at(c));
    CHECK(std::abs(part.visible_area + part.hidden_area - total) <= 1e-6 * total);
    CHECK(std::abs(surface_area(part.visible) + surface_area(part.hidden) - total) <= 1e-6 * total);
    const double so = kernel.self_occlusion(look_at(c));
    CHECK(so >= 0.0);
    CHECK(so <= 1.0);
  }
}

TEST_CASE("mirror image gives the same SO", "[occlusion][property]") {
  SplitMix64 rng(8);
  const TriMesh mesh = small_assembly();
  const TriMesh mirror = mirrored_z(mesh);
  const OcclusionKernel a(mesh, 2.0), b(mirror, 2.0);
  for (const auto& c : external_cameras(rng, mesh, 12))
    CHECK(std::abs(a.self_occlusion(look_at(c)) - b.self_occlusion(look_at({c.x, c.y, -c.z}))) <= 1e-6);
}

TEST_CASE("SO is scale invariant", "[occlusion][property]") {
  SplitMix64 rng(9);
  const TriMesh mesh = small_assembly();
  const OcclusionKernel base(mesh, 4.0);
  for (double s : {0.5, 2.0, 3.0}) {
    const OcclusionKernel big(scaled(mesh, s), 4.0 * s);
    for (const auto& c : external_cameras(rng, mesh, 6))
      CHECK(std::abs(base.self_occlusion(look_at(c)) - big.self_occlusion(look_at(c * s))) <= 1e-9);
  }
}

TEST_CASE("kernel agrees with brute-force sampling", "[occlusion][oracle]") {
  SplitMix64 rng(21);
  const TriMesh mesh = small_assembly();
  const OcclusionKernel kernel(mesh, 1.0);
  for (const auto& c : external_cameras(rng, mesh, 4)) {
    const double sampled = oracle::sampled_visible_fraction(mesh, c, 20000, rng.next());
    CHECK(1.0 - kernel.self_occlusion(look_at(c)) == Approx(sampled).margin(0.02));
  }
}

TEST_CASE("occlusion errors", "[occlusion]") {
  const TriMesh cube = cuboid_mesh({2, 2, 2});
  const OcclusionKernel kernel(cube, 1.0);
  CHECK_THROWS_AS(kernel.self_occlusion(look_at({0.2, 0.1, 0}, {0, 0, 5})), std::invalid_argument);
  std::vector<Face> open(cube.faces().begin(), cube.faces().end() - 1);
  CHECK_THROWS_AS(OcclusionKernel(TriMesh(cube.vertices(), open), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(OcclusionKernel(TriMesh{}, 1.0), std::invalid_argument);
}

TEST_CASE("occlusion_table", "[occlusion][table]") {
  const auto family = generate_l2(kReferenceSeed);
  const std::vector<ObjectSpec> specs(family.begin(), family.begin() + 2);
  const auto views = fibonacci_lattice(8, 1.0);
  SECTION("object-major order and counts") {
    const auto records = occlusion_table(specs, views, 8.0, 2.0, 3);
    REQUIRE(records.size() == 16);
    for (std::size_t i = 0; i < records.size(); ++i) {
      CHECK(records[i].object_id == specs[i / 8].id);
      CHECK(records[i].view_index == static_cast<int>(i % 8));
      CHECK(records[i].tile == map_to_tile(records[i].camera_position));
    }
    // Worker count does not change the output.
    const auto serial = occlusion_table(specs, views, 8.0, 2.0, 1);
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(records[i].so == serial[i].so);
  }
  SECTION("single record matches self_occlusion") {
    const std::vector<Viewpoint> one = {views[3]};
    const auto records = occlusion_table({specs[0]}, one, 8.0, 2.0);
    REQUIRE(records.size() == 1);
    const TriMesh mesh = assemble_mesh(specs[0]);
    CHECK(records[0].so == self_occlusion(mesh, look_at(records[0].camera_position), 8.0));
    CHECK(length(records[0].camera_position) == Approx(2.0 * bounding_radius(mesh)));
  }
  SECTION("errors carry object and view") {
    const std::vector<Viewpoint> inside = {{0, {1, 0, 0}, 1.0}};
    try {
      occlusion_table({specs[0]}, inside, 8.0, std::nullopt);
      FAIL("expected an error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find(specs[0].id) != std::string::npos);
      CHECK(std::string(e.what()).find("view 0") != std::string::npos);
    }
  }
}

TEST_CASE("summaries", "[occlusion][stats]") {
  SECTION("single record") {
    OcclusionRecord r;
    r.object_id = "x";
    r.so = 0.7;
    r.tile = {3};
    r.complexity = 4;
    const auto s = summarize({r});
    CHECK(s.overall.mean() == Approx(0.7));
    CHECK(s.overall.min == 0.7);
    CHECK(s.overall.max == 0.7);
    CHECK(s.per_tile.at(3).count == 1);
    CHECK(s.per_level.at(4).count == 1);
    CHECK(s.overall.histogram[histogram_bin(0.7)] == 1);
  }
  SECTION("histogram bins") {
    CHECK(histogram_bin(0.0) == 0);
    CHECK(histogram_bin(0.4999) == 0);
    CHECK(histogram_bin(0.5) == 1);
    CHECK(histogram_bin(0.5499) == 1);
    CHECK(histogram_bin(0.84) == 7);
    CHECK(histogram_bin(0.85) == 8);
    CHECK(histogram_bin(1.0) == 8);
  }
  SECTION("empty input") { CHECK_THROWS_AS(summarize({}), std::invalid_argument); }
  SECTION("CSV tables") {
    OcclusionRecord r;
    r.object_id = "obj";
    r.view_index = 2;
    r.so = 0.625;
    r.tile = {5};
    CHECK(records_csv({r}) == "object_id,view_index,tile,so\nobj,2,5,0.625\n");
    const auto s = summarize({r, r});
    const std::string table = stats_csv("tile", s.per_tile);
    CHECK(table.rfind("tile,count,mean,min,max,<50,50-55", 0) == 0);
    CHECK(table.find("\n5,2,0.625,0.625,0.625,0,0,0,2,0,0,0,0,0\n") != std::string::npos);
    CHECK(histogram_csv(s.overall).find("60-65,2\n") != std::string::npos);
  }
}
