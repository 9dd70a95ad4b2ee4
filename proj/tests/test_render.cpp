#include <catch_amalgamated.hpp>

#include <filesystem>

#include "blocksworld/objects.hpp"
#include "blocksworld/occlusion.hpp"
#include "blocksworld/render.hpp"
#include "oracles.hpp"

using namespace blocksworld;
using Catch::Approx;

namespace {

MaskImage flipped_horizontally(const MaskImage& m) {
  MaskImage out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) out.set(m.width() - 1 - x, y, m.at(x, y));
  return out;
}

}  // namespace

TEST_CASE("render_mask basics", "[render]") {
  const CameraPose cam = look_at({0, 0, 50});
  SECTION("empty mesh renders nothing") { CHECK(render_mask(TriMesh{}, cam, 16, 40.0).count() == 0); }
  SECTION("face-on cube is left-right symmetric") {
    const MaskImage m = render_mask(cuboid_mesh({20, 20, 20}), cam, 64, 40.0);
    CHECK(m.count() > 0);
    CHECK(m == flipped_horizontally(m));
  }
  SECTION("invalid resolution or field of view") {
    const TriMesh cube = cuboid_mesh({1, 1, 1});
    CHECK_THROWS_AS(render_mask(cube, cam, 0, 40.0), std::invalid_argument);
    CHECK_THROWS_AS(render_mask(cube, cam, 16, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(render_mask(cube, cam, 16, 180.0), std::invalid_argument);
  }
  SECTION("identical inputs give identical masks") {
    const TriMesh mesh = assemble_mesh(generate_l2(kReferenceSeed)[0]);
    const CameraPose c = look_at(Vec3{1, 2, 3} * 60.0);
    CHECK(render_mask(mesh, c, 96, 60.0) == render_mask(mesh, c, 96, 60.0));
  }
}

TEST_CASE("sphere projects to the analytic disc", "[render][oracle]") {
  const double r = 0.5, d = 2.0;
  const TriMesh sphere = oracle::icosphere(5, r);
  // Angular radius alpha; the disc spans half the image height.
  const double tan_alpha = std::tan(std::asin(r / d));
  const double vfov = 2.0 * std::atan(2.0 * tan_alpha) * 180.0 / kPi;
  const int res = 512;
  const MaskImage m = render_mask(sphere, look_at({0, 0, d}), res, vfov);
  const double ratio = static_cast<double>(m.count()) / (res * res);
  CHECK(ratio == Approx(kPi / 16.0).epsilon(0.02));
}

TEST_CASE("rasterized masks match brute-force ray casting", "[render][oracle]") {
  const auto family = generate_l2(kReferenceSeed);
  const TriMesh mesh = assemble_mesh(family[4]);
  const double radius = bounding_radius(mesh);
  const double vfov = framing_vfov_degrees(radius, 2.0 * radius);
  const int res = 48;
  const PinholeProjection proj(res, res, vfov);
  for (const auto& v : fibonacci_lattice(6, 2.0 * radius)) {
    const CameraPose cam = look_at(v.position);
    const MaskImage m = render_mask(mesh, cam, res, vfov);
    const auto expected = oracle::raycast_mask(mesh, cam, proj);
    std::size_t mismatch = 0;
    for (std::size_t i = 0; i < expected.size(); ++i) mismatch += (expected[i] != m.bits()[i]);
    CHECK(mismatch <= 2);
    CHECK(m.count() > 0);
  }
}

TEST_CASE("larger visible area gives more mask pixels", "[render][property]") {
  const TriMesh cube = cuboid_mesh({20, 20, 20});
  const OcclusionKernel kernel(cube, 1.0);
  const double vfov = framing_vfov_degrees(bounding_radius(cube), 2.0 * bounding_radius(cube));
  const auto px = [&](const Vec3& c) { return render_mask(cube, look_at(c), 128, vfov).count(); };
  const double d = 2.0 * bounding_radius(cube);
  // Axis views see the same area and cover the same pixels.
  const std::size_t face_px = px({0, 0, d});
  for (const Vec3& axis : {Vec3{1, 0, 0}, Vec3{0, 0, -1}, Vec3{-1, 0, 0}}) CHECK(px(axis * d) == face_px);
  // Face-on against edge-on from far away, where perspective is mild.
  const double far = 20.0 * bounding_radius(cube);
  const double far_vfov = framing_vfov_degrees(bounding_radius(cube), far);
  const auto far_px = [&](const Vec3& c) { return render_mask(cube, look_at(c), 128, far_vfov).count(); };
  const Vec3 edge_on = Vec3{1, 0, 1} / std::sqrt(2.0) * far;
  REQUIRE(kernel.areas(look_at({0, 0, far}))[0] < kernel.areas(look_at(edge_on))[0]);
  CHECK(far_px({0, 0, far}) <= far_px(edge_on));
}

TEST_CASE("mask bounding boxes", "[render][bbox]") {
  MaskImage m(10, 12);
  CHECK_FALSE(bounding_box(m).has_value());
  m.set(3, 7);
  CHECK(bounding_box(m) == PixelBox{3, 7, 3, 7});
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 10; ++x) m.set(x, y);
  CHECK(bounding_box(m) == PixelBox{0, 0, 9, 11});

  SECTION("box lies inside the projected object box") {
    const auto family = generate_l1(kReferenceSeed);
    const TriMesh mesh = assemble_mesh(family[20]);
    const double radius = bounding_radius(mesh);
    const double vfov = framing_vfov_degrees(radius, 2.0 * radius);
    const PinholeProjection proj(128, 128, vfov);
    for (const auto& v : fibonacci_lattice(12, 2.0 * radius)) {
      const CameraPose cam = look_at(v.position);
      const auto box = bounding_box(render_mask(mesh, cam, 128, vfov));
      REQUIRE(box.has_value());
      double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
      for (const auto& corner : bounding_box(mesh).corners()) {
        const auto p = proj.to_pixel(cam.to_camera(corner));
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
      }
      CHECK(box->x_min + 0.5 >= lo_x);
      CHECK(box->x_max + 0.5 <= hi_x);
      CHECK(box->y_min + 0.5 >= lo_y);
      CHECK(box->y_max + 0.5 <= hi_y);
      // Framing keeps the object off the image border.
      CHECK(box->x_min > 0);
      CHECK(box->y_min > 0);
      CHECK(box->x_max < 127);
      CHECK(box->y_max < 127);
    }
  }
}

TEST_CASE("PGM encoding", "[render][pgm]") {
  MaskImage m(4, 2);
  m.set(1, 0);
  m.set(3, 1);
  const auto bytes = pgm::encode(m);
  const std::string header = "P5\n4 2\n255\n";
  REQUIRE(bytes.size() == header.size() + 8);
  CHECK(std::string(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(header.size())) == header);
  CHECK(bytes[header.size() + 1] == 255);
  CHECK(bytes[header.size() + 7] == 255);
  CHECK(bytes[header.size()] == 0);
  CHECK(pgm::decode(bytes) == m);

  SECTION("values other than 0 and 255 are rejected") {
    auto bad = bytes;
    bad[header.size() + 2] = 128;
    CHECK_THROWS_AS(pgm::decode(bad), ParseError);
  }
  SECTION("malformed headers are rejected") {
    auto bad = bytes;
    bad[1] = '2';
    CHECK_THROWS_AS(pgm::decode(bad), ParseError);
    auto short_data = bytes;
    short_data.pop_back();
    CHECK_THROWS_AS(pgm::decode(short_data), ParseError);
    const std::string no_max = "P5\n4 2\n";
    CHECK_THROWS_AS(pgm::decode({no_max.begin(), no_max.end()}), ParseError);
  }
  SECTION("random masks round trip through files") {
    SplitMix64 rng(4);
    const auto path = std::filesystem::temp_directory_path() / "blocksworld_mask.pgm";
    for (int trial = 0; trial < 10; ++trial) {
      MaskImage r(1 + static_cast<int>(rng.below(40)), 1 + static_cast<int>(rng.below(40)));
      for (int y = 0; y < r.height(); ++y)
        for (int x = 0; x < r.width(); ++x) r.set(x, y, rng.below(2) == 1);
      write_mask(r, path);
      CHECK(read_mask(path) == r);
    }
    std::filesystem::remove(path);
  }
}
