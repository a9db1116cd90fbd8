#include <random>

#include "doctest.h"
#include "gecm/frame.hpp"
#include "gecm/raster.hpp"
#include "gecm/scattering.hpp"
#include "gecm/synthetic.hpp"
#include "oracles.hpp"

using namespace gecm;

namespace {

TraceConfig smooth_cfg(double fresnel) {
  TraceConfig c;
  c.roughness_m = 0.0;
  c.fresnel_power = fresnel;
  c.rays_per_side = 16;
  return c;
}

RayPath unit_path(int bounces, double length_in, double length_out) {
  RayPath p;
  p.faces.assign(bounces, 0);
  p.energies.assign(bounces + 1, 1.0);
  p.align_weight = 1.0;
  p.length_in = length_in;
  p.length_out = length_out;
  return p;
}

// Straight re-implementation of the tracer over brute-force intersection.
std::vector<RayPath> brute_trace(const TriangleMesh& m, const Vec3& look, double lambda, const TraceConfig& cfg) {
  const LaunchPlane lp = make_launch_plane(m, look, cfg);
  std::vector<RayPath> out;
  for (int j = 0; j < lp.rays_per_side; ++j)
    for (int i = 0; i < lp.rays_per_side; ++i) {
      Vec3 o = lp.ray_origin(i, j), d = lp.look;
      RayPath path;
      path.ray = static_cast<std::uint32_t>(j * lp.rays_per_side + i);
      path.energies = {1.0};
      for (int b = 0; b < cfg.max_bounces; ++b) {
        const auto hit = oracle::intersect(m, o, d);
        if (!hit) break;
        Vec3 n = m.normals[hit->face];
        if (n.dot(d) > 0.0) n = -n;
        const double c = std::min(1.0, -n.dot(d));
        const double e = path.energies.back() * bounce_reflectance(c, lambda, cfg);
        if (e < cfg.energy_floor) break;
        const Vec3 x = o + hit->t * d;
        const Vec3 r = (d - 2.0 * d.dot(n) * n).normalized();
        path.faces.push_back(hit->face);
        path.energies.push_back(e);
        path.length_in += hit->t;
        path.length_out = (x - lp.origin).dot(lp.look);
        path.terminal = x;
        const double a = r.dot(-lp.look);
        bool blocked = false;
        for (std::size_t f = 0; f < m.face_count() && !blocked; ++f)
          blocked = gecm::intersect_triangle(x, -lp.look, m.vertex(f, 0), m.vertex(f, 1), m.vertex(f, 2)).has_value();
        path.align_weight = a > 0.0 && !blocked ? std::pow(a, cfg.align_exponent) : 0.0;
        out.push_back(path);
        o = x;
        d = r;
      }
    }
  return out;
}

}  // namespace

TEST_CASE("plate facing the sensor") {
  const TriangleMesh plate = make_plate(2.0, 2);
  const Vec3 look(0, 0, -1);
  TraceConfig cfg = smooth_cfg(1.0);
  auto paths = trace(plate, look, 0.03, cfg);
  REQUIRE(paths.size() > 100);
  for (const auto& p : paths) {
    CHECK(p.bounces() == 1);
    CHECK(p.energies[0] == 1.0);
    CHECK(p.energy() == 1.0);
    CHECK(p.align_weight == 1.0);
    CHECK(p.final_direction == Vec3(0, 0, 1));
  }
  cfg.fresnel_power = 0.8;
  paths = trace(plate, look, 0.03, cfg);
  for (const auto& p : paths) CHECK(p.energy() == 0.8);
  // a plate facing away reflects from its back side too (two-sided facets)
  CHECK(trace(plate, Vec3(0, 0, 1), 0.03, cfg).size() == paths.size());
}

TEST_CASE("bounce reflectance limits") {
  TraceConfig cfg;
  CHECK(bounce_reflectance(0.0, 0.03, cfg) == cfg.fresnel_power * cfg.cosine_floor);
  CHECK(bounce_reflectance(1e-9, 0.03, cfg) == doctest::Approx(cfg.fresnel_power * cfg.cosine_floor).epsilon(1e-12));
  const double r1 = bounce_reflectance(1.0, 0.03, cfg);
  CHECK(r1 == doctest::Approx(0.8 * std::exp(-std::pow(4.0 * M_PI / 20.0, 2))).epsilon(1e-15));
  cfg.roughness_m = 0.0;
  CHECK(bounce_reflectance(1.0, 0.03, cfg) == 0.8);
  CHECK(bounce_reflectance(0.5, 0.03, cfg) == 0.4);
}

TEST_CASE("dihedral retro-reflects along two bounces") {
  const TriangleMesh d = make_dihedral(4.0, 4);
  const Vec3 look = radar_frame(0.0, 30.0).sensor_look;
  TraceConfig cfg;
  cfg.rays_per_side = 32;
  const auto paths = trace(d, look, 0.03, cfg);
  int retro = 0;
  for (const auto& p : paths)
    if (p.bounces() == 2 && p.align_weight > 0.9) ++retro;
  CHECK(retro >= 1);
}

TEST_CASE("tracer agrees with a brute-force tracer") {
  const TriangleMesh scene = make_dihedral_with_fuselage(4.0, 3);
  TraceConfig cfg;
  cfg.rays_per_side = 20;
  for (double dep : {30.0, 55.0}) {
    const Vec3 look = radar_frame(0.0, dep).sensor_look;
    const auto got = trace(scene, look, 0.03, cfg);
    const auto want = brute_trace(scene, look, 0.03, cfg);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].ray == want[i].ray);
      CHECK(got[i].faces == want[i].faces);
      CHECK(got[i].energies == want[i].energies);
      CHECK(got[i].length_in == want[i].length_in);
      CHECK(got[i].length_out == want[i].length_out);
      CHECK(got[i].align_weight == want[i].align_weight);
    }
  }
}

TEST_CASE("energy never increases and bounce counts respect the limit") {
  const TriangleMesh plane = make_aircraft();
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> az(0, 360), dep(10, 80);
  TraceConfig cfg;
  cfg.rays_per_side = 48;
  for (int t = 0; t < 4; ++t) {
    const RadarFrame f = radar_frame(az(rng), dep(rng));
    const TriangleMesh scene = transform(plane, f.azimuth);
    const auto paths = trace(scene, f.sensor_look, 0.03, cfg);
    REQUIRE_FALSE(paths.empty());
    for (const auto& p : paths) {
      REQUIRE(p.energies.front() == 1.0);
      REQUIRE(p.bounces() <= cfg.max_bounces);
      REQUIRE(p.energies.size() == p.faces.size() + 1);
      for (std::size_t k = 1; k < p.energies.size(); ++k) REQUIRE(p.energies[k] <= p.energies[k - 1]);
      REQUIRE(p.energy() >= cfg.energy_floor);
      REQUIRE(p.align_weight >= 0.0);
      REQUIRE(p.align_weight <= 1.0);
      REQUIRE(p.length_in > 0.0);
      REQUIRE(p.length_out > 0.0);
    }
  }
}

TEST_CASE("trace output does not depend on the thread count") {
  const TriangleMesh scene = transform(make_aircraft(), azimuth_rotation(35.0));
  const Vec3 look = radar_frame(35.0, 40.0).sensor_look;
  TraceConfig cfg;
  cfg.rays_per_side = 64;
  const auto a = trace(scene, look, 0.03, cfg);
  cfg.threads = 4;
  const auto b = trace(scene, look, 0.03, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].faces == b[i].faces);
    REQUIRE(a[i].energies == b[i].energies);
    REQUIRE(a[i].terminal == b[i].terminal);
    REQUIRE(a[i].align_weight == b[i].align_weight);
  }
}

TEST_CASE("launch plane covers the scene") {
  const TriangleMesh scene = make_aircraft();
  for (double dep : {5.0, 45.0, 90.0}) {
    const Vec3 look = radar_frame(20.0, dep).look;
    const LaunchPlane lp = make_launch_plane(scene, look, TraceConfig{});
    CHECK(std::abs(lp.axis_a.dot(look)) < 1e-12);
    CHECK(std::abs(lp.axis_b.dot(look)) < 1e-12);
    for (const auto& v : scene.vertices) {
      const Vec3 r = v - lp.origin;
      CHECK(r.dot(look) > 0.0);
      CHECK(r.dot(lp.axis_a) >= lp.a_min);
      CHECK(r.dot(lp.axis_a) <= lp.a_max);
      CHECK(r.dot(lp.axis_b) >= lp.b_min);
      CHECK(r.dot(lp.axis_b) <= lp.b_max);
    }
  }
}

TEST_CASE("facet visibility") {
  const TriangleMesh box = make_box(Vec3(-1, -1, -1), Vec3(1, 1, 1), 1);
  const Bvh bvh(box);
  const auto vis = facet_visibility(box, bvh, Vec3(0, 0, -1));
  for (std::size_t f = 0; f < box.face_count(); ++f) {
    if (box.normals[f].z() > 0.5) CHECK(vis[f] == 1.0);
    else CHECK(vis[f] == 0.0);
  }
  const TriangleMesh stack = merge(make_plate(2.0, 1), transform(make_plate(1.0, 1), Mat3::Identity()));
  TriangleMesh lowered = make_plate(1.0, 1);
  for (auto& v : lowered.vertices) v.z() -= 1.0;
  const TriangleMesh two = merge(make_plate(2.0, 1), make_mesh(lowered.vertices, lowered.faces));
  const auto v2 = facet_visibility(two, Bvh(two), Vec3(0, 0, -1));
  CHECK(v2[0] == 1.0);
  CHECK(v2[two.face_count() - 1] == 0.0);
  CHECK(stack.face_count() == 4);
}

TEST_CASE("saliency closed forms") {
  TraceConfig cfg;
  CHECK(saliency(unit_path(1, 0.25, 0.75), cfg) == 1.0);
  const double w = saliency(unit_path(1, 3.0, 4.0), cfg);
  CHECK(saliency(unit_path(1, 6.0, 8.0), cfg) == w / 4.0);
  cfg.multibounce_gain = 0.3;
  CHECK(saliency(unit_path(2, 0.5, 0.5), cfg) / saliency(unit_path(1, 0.5, 0.5), cfg) == 1.3);
  try {
    saliency(unit_path(1, 0.0, 0.0), cfg);
    FAIL("expected ZeroPathLength");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroPathLength);
  }
}

TEST_CASE("aggregate closed forms") {
  const std::vector<Vec2> one{{0.2, 0.2}, {0.6, 1.0}, {1.5, 1.9}};
  const std::vector<double> w{1.0, 2.0, 1.0};
  const BinGrid g = aggregate(one, w, 2.0);
  REQUIRE(g.bins.size() == 1);
  CHECK(g.bins[0].weight == 4.0);
  CHECK(g.bins[0].score == 2.0);
  CHECK(g.bins[0].centroid.isApprox(Vec2((0.2 + 1.2 + 1.5) / 4, (0.2 + 2.0 + 1.9) / 4), 1e-15));
  CHECK(g.bins[0].terminals == 3);

  const std::vector<Vec2> two{{0.5, 0.5}, {10.5, 0.5}};
  const std::vector<double> w2{1.0, 0.1};
  const BinGrid g2 = aggregate(two, w2, 2.0);
  REQUIRE(g2.bins.size() == 2);
  CHECK(g2.bins[1].weight == 0.1);
  CHECK(g2.bins[1].score == 1677722.0 / 16777216.0);
  CHECK(g2.decibels(g2.bins[0]) == 0.0);
  CHECK(g2.decibels(g2.bins[1]) == doctest::Approx(10.0 * std::log10(1677722.0 / 16777216.0)).epsilon(1e-15));
  CHECK(g2.decibels(g2.bins[1]) == doctest::Approx(-10.0).epsilon(1e-6));

  const std::vector<double> faint{1.0, 1e-9};
  const BinGrid g3 = aggregate(two, faint, 2.0);
  REQUIRE(g3.bins.size() == 2);
  CHECK(g3.bins[1].score == 0.0);
  CHECK(g3.bins[1].centroid == Vec2(10.5, 0.5));
  CHECK(std::isinf(g3.decibels(g3.bins[1])));

  const std::vector<double> zero{0.0, 0.0};
  CHECK(aggregate(two, zero, 2.0).bins.empty());
}

TEST_CASE("aggregation of a duplicated list doubles every bin") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> c(-20, 20);
  std::uniform_int_distribution<int> k(1, 64);
  std::vector<Vec2> q;
  std::vector<double> dyadic, real;
  for (int i = 0; i < 500; ++i) {
    q.emplace_back(c(rng), c(rng));
    dyadic.push_back(k(rng) / 64.0);
    real.push_back(std::exp(c(rng) / 4.0));
  }
  auto doubled = [](auto v) {
    auto out = v;
    out.insert(out.end(), v.begin(), v.end());
    return out;
  };
  const auto q2 = doubled(q);
  const BinGrid a = aggregate(q, dyadic, 2.0), b = aggregate(q2, doubled(dyadic), 2.0);
  REQUIRE(a.bins.size() == b.bins.size());
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    CHECK(b.bins[i].weight == 2.0 * a.bins[i].weight);
    CHECK(b.decibels(b.bins[i]) == a.decibels(a.bins[i]));
  }
  const BinGrid ra = aggregate(q, real, 2.0), rb = aggregate(q2, doubled(real), 2.0);
  for (std::size_t i = 0; i < ra.bins.size(); ++i) {
    CHECK(rb.bins[i].weight == doctest::Approx(2.0 * ra.bins[i].weight).epsilon(1e-14));
    CHECK(rb.bins[i].score == 2.0 * ra.bins[i].score);
    CHECK(rb.decibels(rb.bins[i]) == ra.decibels(ra.bins[i]));
  }
  for (const auto& bin : ra.bins) {
    const Vec2 lo = bin.key.cast<double>() * 2.0;
    CHECK(bin.weight > 0.0);
    CHECK((bin.centroid.array() >= lo.array()).all());
    CHECK((bin.centroid.array() <= lo.array() + 2.0).all());
  }
}

TEST_CASE("scores, centroids and selection ignore a common saliency scale") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> c(0.0, 40.0), e(-3.0, 0.0);
  std::uniform_int_distribution<int> tie(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 50 + 40 * trial;
    std::vector<Vec2> q(n);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
      q[i] = Vec2(c(rng), c(rng));
      w[i] = trial % 2 ? 0.1 * tie(rng) : std::pow(10.0, e(rng));
    }
    const BinGrid base = aggregate(q, w, 2.0);
    const auto base_sel = select_scatterers(base, -20.0, 4.0, 20);
    for (double k : {1e-6, 0.37, 3.0, 1e6}) {
      std::vector<double> wk(w);
      for (auto& x : wk) x *= k;
      const BinGrid g = aggregate(q, wk, 2.0);
      REQUIRE(g.bins.size() == base.bins.size());
      for (std::size_t i = 0; i < g.bins.size(); ++i) {
        CHECK(g.bins[i].score == base.bins[i].score);
        CHECK(g.bins[i].centroid == base.bins[i].centroid);
        CHECK(g.decibels(g.bins[i]) == base.decibels(base.bins[i]));
      }
      const auto sel = select_scatterers(g, -20.0, 4.0, 20);
      REQUIRE(sel.size() == base_sel.size());
      for (std::size_t i = 0; i < sel.size(); ++i) CHECK(sel[i].bin == base_sel[i].bin);
    }
  }
}

TEST_CASE("select_scatterers closed forms") {
  const std::vector<Vec2> one{{3.0, 3.0}};
  const std::vector<double> w{5.0};
  const auto s = select_scatterers(aggregate(one, w, 2.0), -20.0, 4.0, 20);
  REQUIRE(s.size() == 1);
  CHECK(s[0].decibels == 0.0);

  const std::vector<Vec2> two{{0.5, 0.5}, {20.5, 0.5}};
  const std::vector<double> w2{1.0, 0.1};
  const auto t = select_scatterers(aggregate(two, w2, 2.0), -3.0, 4.0, 20);
  REQUIRE(t.size() == 1);
  CHECK(t[0].position == Vec2(0.5, 0.5));
  CHECK(select_scatterers(BinGrid{}, -20.0, 4.0, 20).empty());
}

TEST_CASE("select_scatterers equals the threshold+NMS+sort oracle") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_real_distribution<double> c(0.0, 60.0), e(-4.0, 0.0);
    std::uniform_int_distribution<int> nb(1, 500), tie(1, 4);
    const int n = trial == 0 ? 200 : nb(rng);
    std::vector<Vec2> q(n);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
      q[i] = Vec2(c(rng), c(rng));
      w[i] = trial % 4 == 0 ? tie(rng) : std::pow(10.0, e(rng));
    }
    const BinGrid g = aggregate(q, w, 1.0);
    REQUIRE(g.bins.size() <= 500);
    const double tau = trial % 3 == 0 ? -20.0 : -10.0;
    const double r = 1.0 + trial % 5;
    const int k = trial % 2 ? 20 : 1000;
    const auto got = select_scatterers(g, tau, r, k);
    const auto want = oracle::select(g, tau, r, k);
    REQUIRE(got.size() == want.size());
    REQUIRE(static_cast<int>(got.size()) <= k);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].bin == want[i]);
      CHECK(got[i].decibels >= tau);
      for (std::size_t j = i + 1; j < got.size(); ++j) CHECK((got[i].position - got[j].position).norm() >= r);
    }
  }
}

TEST_CASE("doubling ray density moves Top-K centroids by at most one bin") {
  const TriangleMesh scene = recentered(make_dihedral(2.0, 8));
  const double dep = 30.0;
  const Vec3 look = radar_frame(0.0, dep).sensor_look;
  const Projector proj(dep, 1.0 / 0.3, Vec2::Zero(), 256, 256);
  TraceConfig cfg;
  const double bin = 2.0;
  auto top = [&](int rays) {
    cfg.rays_per_side = rays;
    const BinGrid g = aggregate(trace(scene, look, 0.03, cfg), proj, cfg, bin);
    return select_scatterers(g, -20.0, 4.0, 20);
  };
  for (int rays : {64, 128, 256}) {
    const auto a = top(rays), b = top(2 * rays);
    REQUIRE_FALSE(a.empty());
    auto covered = [&](const auto& from, const auto& to) {
      for (const auto& s : from) {
        double best = 1e9;
        for (const auto& t : to) best = std::min(best, (s.position - t.position).template lpNorm<Eigen::Infinity>());
        if (best > bin) return false;
      }
      return true;
    };
    CHECK(covered(a, b));
    CHECK(covered(b, a));
  }
}
