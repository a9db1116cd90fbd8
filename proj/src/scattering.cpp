#include "gecm/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <thread>

#include "gecm/cluster.hpp"

namespace gecm {

double bounce_reflectance(double cos_theta, double wavelength_m, const TraceConfig& cfg) {
  const double sigma = cfg.roughness_for(wavelength_m);
  const double phase = 4.0 * std::numbers::pi * sigma * cos_theta / wavelength_m;
  return cfg.fresnel_power * std::exp(-phase * phase) * std::max(cos_theta, cfg.cosine_floor);
}

Vec3 LaunchPlane::ray_origin(int i, int j) const {
  const double a = a_min + (i + 0.5) * (a_max - a_min) / rays_per_side;
  const double b = b_min + (j + 0.5) * (b_max - b_min) / rays_per_side;
  return origin + a * axis_a + b * axis_b;
}

LaunchPlane make_launch_plane(const TriangleMesh& mesh, const Vec3& look, const TraceConfig& cfg) {
  Eigen::AlignedBox3d box;
  for (const auto& v : mesh.vertices) box.extend(v);
  LaunchPlane lp;
  lp.look = look.normalized();
  Vec3 a = lp.look.cross(Vec3::UnitZ());
  if (a.norm() < 1e-9) a = Vec3::UnitX();
  lp.axis_a = a.normalized();
  lp.axis_b = lp.axis_a.cross(lp.look).normalized();

  const Vec3 center = box.center();
  const double radius = 0.5 * box.diagonal().norm();
  lp.origin = center - (1.01 * radius + 1e-3) * lp.look;

  double amin = 0, amax = 0, bmin = 0, bmax = 0;
  for (int c = 0; c < 8; ++c) {
    const Vec3 d = box.corner(static_cast<Eigen::AlignedBox3d::CornerType>(c)) - center;
    const double pa = d.dot(lp.axis_a), pb = d.dot(lp.axis_b);
    amin = std::min(amin, pa);
    amax = std::max(amax, pa);
    bmin = std::min(bmin, pb);
    bmax = std::max(bmax, pb);
  }
  const double ma = cfg.launch_margin * (amax - amin), mb = cfg.launch_margin * (bmax - bmin);
  lp.a_min = amin - ma;
  lp.a_max = amax + ma;
  lp.b_min = bmin - mb;
  lp.b_max = bmax + mb;
  lp.rays_per_side = cfg.rays_per_side;
  return lp;
}

namespace {

void trace_ray(const TriangleMesh& mesh, const Bvh& bvh, const LaunchPlane& lp, double wavelength,
               const TraceConfig& cfg, int i, int j, std::vector<RayPath>& out) {
  Vec3 origin = lp.ray_origin(i, j);
  Vec3 dir = lp.look;
  const Vec3 back = -lp.look;
  RayPath path;
  path.ray = static_cast<std::uint32_t>(j * lp.rays_per_side + i);
  path.energies.push_back(1.0);
  for (int bounce = 0; bounce < cfg.max_bounces; ++bounce) {
    const auto hit = bvh.intersect(origin, dir);
    if (!hit) return;
    Vec3 n = mesh.normals[hit->face];
    if (n.dot(dir) > 0.0) n = -n;
    const double cos_theta = std::min(1.0, -n.dot(dir));
    const double energy = path.energies.back() * bounce_reflectance(cos_theta, wavelength, cfg);
    if (energy < cfg.energy_floor) return;

    const Vec3 reflected = (dir - 2.0 * dir.dot(n) * n).normalized();
    path.faces.push_back(hit->face);
    path.energies.push_back(energy);
    path.length_in += hit->t;
    path.terminal = hit->point;
    path.final_direction = reflected;
    path.length_out = lp.distance_to(hit->point);

    const double align = reflected.dot(back);
    path.align_weight = 0.0;
    if (align > 0.0 && !bvh.occluded(hit->point, back)) path.align_weight = std::pow(align, cfg.align_exponent);
    out.push_back(path);

    origin = hit->point;
    dir = reflected;
  }
}

}  // namespace

std::vector<RayPath> trace(const TriangleMesh& mesh, const Bvh& bvh, const Vec3& look, double wavelength_m,
                           const TraceConfig& cfg) {
  validate(cfg);
  const LaunchPlane lp = make_launch_plane(mesh, look, cfg);
  const int n = lp.rays_per_side;
  std::vector<std::vector<RayPath>> rows(static_cast<std::size_t>(n));
  auto work = [&](int first, int stride) {
    for (int j = first; j < n; j += stride)
      for (int i = 0; i < n; ++i) trace_ray(mesh, bvh, lp, wavelength_m, cfg, i, j, rows[j]);
  };
  const int threads = std::min(cfg.threads, n);
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  std::vector<RayPath> paths;
  for (auto& row : rows) std::move(row.begin(), row.end(), std::back_inserter(paths));
  return paths;
}

std::vector<RayPath> trace(const TriangleMesh& mesh, const Vec3& look, double wavelength_m, const TraceConfig& cfg) {
  const Bvh bvh(mesh);
  return trace(mesh, bvh, look, wavelength_m, cfg);
}

std::vector<double> facet_visibility(const TriangleMesh& mesh, const Bvh& bvh, const Vec3& look) {
  std::vector<double> vis(mesh.face_count(), 0.0);
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const double facing = mesh.normals[f].dot(-look);
    if (facing <= 0.0) continue;
    if (!bvh.occluded(mesh.centroids[f], -look)) vis[f] = facing;
  }
  return vis;
}

double saliency(const RayPath& path, const TraceConfig& cfg) {
  const double length = path.length_in + path.length_out;
  if (!(length > 0.0)) throw Error(ErrorCode::ZeroPathLength, "path has zero propagation length");
  const double gain = 1.0 + cfg.multibounce_gain * (path.bounces() - 1);
  return path.energy() * path.align_weight * gain / (length * length);
}

double BinGrid::max_weight() const {
  double m = 0.0;
  for (const auto& b : bins) m = std::max(m, b.weight);
  return m;
}

double BinGrid::max_score() const {
  double m = 0.0;
  for (const auto& b : bins) m = std::max(m, b.score);
  return m;
}

double BinGrid::decibels(const Bin& bin) const { return 10.0 * std::log10(bin.score / max_score()); }

BinGrid aggregate(std::span<const Vec2> terminals, std::span<const double> saliencies, double bin_size) {
  struct Acc {
    double weight = 0.0, score = 0.0;
    Vec2 moment = Vec2::Zero(), raw_moment = Vec2::Zero();
    std::size_t count = 0;
  };
  double top = 0.0;
  for (double w : saliencies) top = std::max(top, w);
  std::map<std::pair<int, int>, Acc> acc;  // (ky, kx)
  for (std::size_t i = 0; i < terminals.size(); ++i) {
    const Vec2& q = terminals[i];
    const double w = saliencies[i];
    const double s = top > 0.0 ? std::nearbyint(w / top / kScoreQuantum) * kScoreQuantum : 0.0;
    const int kx = static_cast<int>(std::floor(q.x() / bin_size));
    const int ky = static_cast<int>(std::floor(q.y() / bin_size));
    Acc& a = acc[{ky, kx}];
    a.weight += w;
    a.score += s;
    a.moment += s * q;
    a.raw_moment += w * q;
    ++a.count;
  }
  BinGrid grid;
  grid.bin_size = bin_size;
  for (const auto& [key, a] : acc) {
    if (!(a.weight > 0.0)) continue;
    Bin b;
    b.key = Eigen::Vector2i(key.second, key.first);
    b.weight = a.weight;
    b.score = a.score;
    b.centroid = a.score > 0.0 ? Vec2(a.moment / a.score) : Vec2(a.raw_moment / a.weight);
    // keep the centroid inside its bin despite rounding
    const Vec2 lo = b.key.cast<double>() * bin_size;
    b.centroid = b.centroid.cwiseMax(lo).cwiseMin(lo + Vec2::Constant(bin_size));
    b.terminals = a.count;
    grid.bins.push_back(b);
  }
  return grid;
}

std::vector<SelectedScatterer> select_scatterers(const BinGrid& grid, double threshold_db, double nms_radius,
                                                 int max_count) {
  std::vector<std::size_t> passing;
  for (std::size_t k = 0; k < grid.bins.size(); ++k)
    if (grid.decibels(grid.bins[k]) >= threshold_db) passing.push_back(k);

  std::vector<Vec2> pos;
  std::vector<double> score;
  for (std::size_t k : passing) {
    pos.push_back(grid.bins[k].centroid);
    score.push_back(grid.bins[k].score);
  }
  std::vector<SelectedScatterer> out;
  for (std::size_t i : nms(pos, score, nms_radius, static_cast<std::size_t>(std::max(0, max_count)))) {
    const Bin& b = grid.bins[passing[i]];
    out.push_back({b.centroid, b.weight, b.score, grid.decibels(b), passing[i]});
  }
  return out;
}

}  // namespace gecm
