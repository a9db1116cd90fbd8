#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "gecm/bvh.hpp"
#include "gecm/frame.hpp"
#include "gecm/mesh.hpp"
#include "gecm/pose3d.hpp"
#include "gecm/synthetic.hpp"
#include "oracles.hpp"

using namespace gecm;
namespace fs = std::filesystem;

namespace {

constexpr const char* kCubeObj = R"(# unit cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
)";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gecm_test_geometry";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<unsigned char> stl_bytes(const std::vector<std::array<Vec3, 3>>& tris) {
  std::vector<unsigned char> b(84, 0);
  const auto n = static_cast<std::uint32_t>(tris.size());
  std::memcpy(b.data() + 80, &n, 4);
  for (const auto& t : tris) {
    unsigned char rec[50] = {};
    float f[12] = {};
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) f[3 + 3 * c + k] = static_cast<float>(t[c][k]);
    std::memcpy(rec, f, 48);
    b.insert(b.end(), rec, rec + 50);
  }
  return b;
}

ErrorCode error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

double max_vertex_gap(const TriangleMesh& a, const TriangleMesh& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.vertices.size(); ++i) g = std::max(g, (a.vertices[i] - b.vertices[i]).norm());
  return g;
}

}  // namespace

TEST_CASE("unit cube OBJ") {
  const TriangleMesh m = parse_obj(kCubeObj);
  CHECK(m.face_count() == 12);
  CHECK(m.total_area() == doctest::Approx(6.0).epsilon(1e-12));
  for (const auto& n : m.normals) CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m.normals[0] == Vec3(0, 0, -1));

  const fs::path p = scratch("cube.obj");
  std::ofstream(p) << kCubeObj;
  const TriangleMesh loaded = load_mesh(p);
  CHECK(loaded.face_count() == 12);
  Vec3 mean = Vec3::Zero();
  for (const auto& v : loaded.vertices) mean += v;
  CHECK(mean.norm() < 1e-12);  // recentred
}

TEST_CASE("OBJ polygons, negative indices and errors") {
  const TriangleMesh quad = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/2 3 4\n");
  CHECK(quad.face_count() == 2);
  CHECK(quad.total_area() == doctest::Approx(1.0));
  const TriangleMesh neg = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  CHECK(neg.face_count() == 1);
  CHECK(error_code([] { parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n"); }) == ErrorCode::ParseError);
  CHECK(error_code([] { parse_obj("v 0 0 zero\n"); }) == ErrorCode::ParseError);
  CHECK(error_code([] { parse_obj(""); }) == ErrorCode::EmptyMesh);
  CHECK(error_code([] { parse_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n"); }) == ErrorCode::EmptyMesh);
  try {
    parse_obj("v 0 0 0\nv 1 x 0\n");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("binary STL drops zero-area faces") {
  const auto bytes = stl_bytes({{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)},
                                {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)},
                                {Vec3(0, 0, 1), Vec3(1, 0, 1), Vec3(0, 1, 1)}});
  const TriangleMesh m = parse_stl_binary(bytes);
  CHECK(m.face_count() == 2);
  CHECK(m.dropped_faces == 1);
  CHECK(error_code([] { parse_stl_binary({}); }) == ErrorCode::EmptyMesh);
  std::vector<unsigned char> truncated = bytes;
  truncated.resize(120);
  CHECK(error_code([&] { parse_stl_binary(truncated); }) == ErrorCode::ParseError);

  const fs::path empty = scratch("empty.stl");
  std::ofstream(empty, std::ios::binary).close();
  CHECK(error_code([&] { load_mesh(empty); }) == ErrorCode::EmptyMesh);
  CHECK(error_code([] { load_mesh("/nonexistent/mesh.obj"); }) == ErrorCode::FileNotFound);
}

TEST_CASE("mesh writers round-trip") {
  const TriangleMesh box = make_box(Vec3(-1, -2, -3), Vec3(1, 2, 3), 2);
  const fs::path obj = scratch("box.obj"), stl = scratch("box.stl");
  write_obj(obj, box);
  write_stl_binary(stl, box);
  const TriangleMesh a = load_mesh(obj), b = load_mesh(stl);
  CHECK(a.face_count() == box.face_count());
  CHECK(b.face_count() == box.face_count());
  CHECK(a.total_area() == doctest::Approx(box.total_area()).epsilon(1e-12));
  CHECK(b.total_area() == doctest::Approx(box.total_area()).epsilon(1e-6));
}

TEST_CASE("radar frame closed forms") {
  CHECK(azimuth_rotation(0.0) == Mat3::Identity());
  const Vec3 v = azimuth_rotation(90.0) * Vec3(1, 0, 0);
  CHECK(v == Vec3(0, -1, 0));
  CHECK(look_vector(0.0, 90.0) == Vec3(0, 0, -1));
  CHECK(look_vector(0.0, 0.0) == Vec3(0, 1, 0));
  const RadarFrame f = radar_frame(30.0, 45.0);
  CHECK((f.rotation() * Vec3::UnitY() - f.look).norm() < 1e-15);
  CHECK((f.depression * Vec3::UnitY() - f.sensor_look).norm() < 1e-15);
  CHECK((f.look - look_vector(30.0, 45.0)).norm() < 1e-15);
}

TEST_CASE("rotation suite on random angles") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> az(0.0, 360.0), dep(0.0, 90.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = az(rng), b = dep(rng);
    const Mat3 r = radar_frame(a, b).rotation();
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(r.determinant() - 1.0) < 1e-9);
    const Vec3 k = look_vector(a, b);
    CHECK(std::abs(k.norm() - 1.0) < 1e-12);
    CHECK((k - azimuth_rotation(a) * look_vector(0.0, b)).norm() < 1e-9);
  }
  for (int a = 0; a < 360; ++a)
    for (int b = 0; b <= 90; ++b) REQUIRE(std::abs(look_vector(a, b).norm() - 1.0) < 1e-12);
}

TEST_CASE("transform is an isometry") {
  const TriangleMesh m = make_ellipsoid(Vec3(3, 2, 1), 8, 12);
  const TriangleMesh same = transform(m, radar_frame(0.0, 0.0));
  CHECK(max_vertex_gap(m, same) == 0.0);
  const TriangleMesh r = transform(m, radar_frame(73.0, 31.0));
  for (std::size_t f = 0; f < m.face_count(); ++f) CHECK(std::abs(r.areas[f] - m.areas[f]) < 1e-9);
  const TriangleMesh back = transform(transform(m, azimuth_rotation(40.0)), azimuth_rotation(-40.0));
  CHECK(max_vertex_gap(m, back) < 1e-9);
}

TEST_CASE("BVH on the unit cube") {
  const TriangleMesh cube = recentered(parse_obj(kCubeObj));
  const Bvh bvh(cube);
  const auto hit = bvh.intersect(Vec3::Zero(), Vec3::UnitX());
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cube.normals[hit->face] == Vec3(1, 0, 0));
  CHECK_FALSE(bvh.intersect(Vec3(0, 2, 0), Vec3::UnitX()));
  CHECK_FALSE(bvh.intersect(Vec3(-3, 0.5 + 1e-9, 0), Vec3::UnitX()));
  CHECK(bvh.occluded(Vec3(-3, 0, 0), Vec3::UnitX()));
  CHECK_FALSE(bvh.occluded(Vec3(-3, 0, 0), Vec3::UnitX(), kRayEpsilon, 1.0));
}

TEST_CASE("BVH structure invariants") {
  const TriangleMesh m = make_aircraft();
  const Bvh bvh(m);
  std::vector<int> seen(m.face_count(), 0);
  for (const auto& n : bvh.nodes()) {
    if (n.leaf()) {
      CHECK(n.count <= Bvh::kLeafSize);
      for (std::uint32_t k = n.left; k < n.left + n.count; ++k) {
        const std::uint32_t f = bvh.face_order()[k];
        ++seen[f];
        for (int c = 0; c < 3; ++c) CHECK(n.box.contains(m.vertex(f, c)));
      }
    } else {
      CHECK(n.box.contains(bvh.nodes()[n.left].box));
      CHECK(n.box.contains(bvh.nodes()[n.right].box));
    }
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
}

TEST_CASE("BVH equals brute force on random rays") {
  const TriangleMesh soup = oracle::random_soup(500, 21);
  REQUIRE(soup.face_count() == 500);
  const Bvh bvh(soup);
  std::mt19937 rng(22);
  std::uniform_real_distribution<double> c(-1.5, 1.5);
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 o(c(rng), c(rng), c(rng));
    const Vec3 d = Vec3(c(rng), c(rng), c(rng)).normalized();
    const auto got = bvh.intersect(o, d);
    const auto want = oracle::intersect(soup, o, d);
    REQUIRE(got.has_value() == want.has_value());
    if (!got) continue;
    ++hits;
    CHECK(got->face == want->face);
    CHECK(got->t == want->t);
    CHECK(bvh.occluded(o, d));
  }
  CHECK(hits > 200);
}

TEST_CASE("pose of an ellipsoid") {
  const TriangleMesh e = make_ellipsoid(Vec3(10, 2, 1), 48, 48);
  const Pose3dResult p = extract_pose_3d(e);
  const Vec3 a = p.skeleton.nose, b = p.skeleton.tail;
  const double err = std::min(std::max((a - Vec3(10, 0, 0)).norm(), (b - Vec3(-10, 0, 0)).norm()),
                              std::max((a - Vec3(-10, 0, 0)).norm(), (b - Vec3(10, 0, 0)).norm()));
  CHECK(err <= 0.5);
  const Pose3dResult hinted = extract_pose_3d(e, {}, Vec3(-1, 0, 0));
  CHECK(hinted.skeleton.nose.x() < 0.0);
  CHECK(hinted.fuselage_axis.dot(Vec3(-1, 0, 0)) > 0.99);
}

TEST_CASE("pose of two crossed boxes finds the junction") {
  const TriangleMesh cross = make_box_cross(12.0, 10.0, 1.0);
  const Pose3dResult p = extract_pose_3d(cross);
  CHECK(p.skeleton.wing_root.norm() <= 0.5);
  CHECK(std::abs(p.left_length - p.right_length) <= 1e-6);
}

TEST_CASE("pose of the symmetric aircraft") {
  const TriangleMesh plane = make_aircraft();
  const Pose3dResult p = extract_pose_3d(plane, {}, Vec3(-1, 0, 0));
  CHECK(std::abs(p.left_length - p.right_length) <= 1e-6);
  CHECK(p.skeleton.nose.x() == doctest::Approx(-7.0).epsilon(0.05));
  CHECK(p.skeleton.tail.x() == doctest::Approx(7.0).epsilon(0.05));
  // left is +z x forward: -y for a nose toward -x
  CHECK(p.skeleton.left_tip.y() == doctest::Approx(-5.5).epsilon(0.05));
  CHECK(p.skeleton.right_tip.y() == doctest::Approx(5.5).epsilon(0.05));
  CHECK(std::abs(p.skeleton.wing_root.x()) <= 0.5);
  CHECK(p.lateral_axis.dot(-Vec3::UnitY()) > 0.99);
  for (std::size_t i = 1; i < p.centerline.size(); ++i) CHECK(p.centerline[i].u > p.centerline[i - 1].u);
}

TEST_CASE("pose is scale-equivariant") {
  const TriangleMesh plane = make_aircraft();
  const Pose3dResult base = extract_pose_3d(plane, {}, Vec3(-1, 0, 0));
  for (double s : {0.25, 2.0, 8.0}) {
    TriangleMesh scaled = plane;
    for (auto& v : scaled.vertices) v *= s;
    scaled = make_mesh(scaled.vertices, scaled.faces);
    const Pose3dResult p = extract_pose_3d(scaled, {}, Vec3(-1, 0, 0));
    const auto a = base.skeleton.points(), b = p.skeleton.points();
    for (int k = 0; k < 5; ++k) CHECK((b[k] - s * a[k]).norm() <= 1e-9 * s * 10.0);
  }
}

TEST_CASE("degenerate geometry") {
  const TriangleMesh tri = make_mesh({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {Face(0, 1, 2)});
  CHECK(error_code([&] { extract_pose_3d(tri); }) == ErrorCode::DegenerateGeometry);
  const TriangleMesh flat = make_plate(2.0, 3);
  CHECK_NOTHROW(extract_pose_3d(flat));  // rank 2 is enough for two axes
}

TEST_CASE("polyline projection") {
  const std::vector<Vec3> line{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0)};
  CHECK(project_onto_polyline(line, Vec3(0.5, -2, 0)) == Vec3(0.5, 0, 0));
  CHECK(project_onto_polyline(line, Vec3(3, 0.5, 1)) == Vec3(1, 0.5, 0));
  CHECK(project_onto_polyline(line, Vec3(-1, 0, 0)) == Vec3(0, 0, 0));
}
