#include "gecm/pose3d.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gecm {

std::vector<Vec3> surface_points(const TriangleMesh& mesh, int target) {
  std::vector<Vec3> pts = mesh.vertices;
  const double cell_area = mesh.total_area() / std::max(1, target);
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Vec3& a = mesh.vertex(f, 0);
    const Vec3 e1 = mesh.vertex(f, 1) - a;
    const Vec3 e2 = mesh.vertex(f, 2) - a;
    const int level = std::max(1, static_cast<int>(std::lround(std::sqrt(mesh.areas[f] / cell_area))));
    const double inv = 1.0 / level;
    for (int i = 0; i < level; ++i)
      for (int j = 0; i + j < level; ++j) {
        pts.push_back(a + (i + 1.0 / 3.0) * inv * e1 + (j + 1.0 / 3.0) * inv * e2);
        if (i + j + 1 < level) pts.push_back(a + (i + 2.0 / 3.0) * inv * e1 + (j + 2.0 / 3.0) * inv * e2);
      }
  }
  return pts;
}

Vec3 project_onto_polyline(const std::vector<Vec3>& vertices, const Vec3& p) {
  if (vertices.size() == 1) return vertices.front();
  Vec3 best = vertices.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < vertices.size(); ++i) {
    const Vec3 seg = vertices[i + 1] - vertices[i];
    const double len2 = seg.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - vertices[i]).dot(seg) / len2, 0.0, 1.0) : 0.0;
    const Vec3 q = vertices[i] + t * seg;
    const double d = (q - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

namespace {

double median_of(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Tip {
  Vec3 point = Vec3::Zero();
  double length = 0.0;
};

// Mean of the points whose lateral offset from the joint is within `tolerance`
// of the extreme support on the side given by `sign`.
Tip find_tip(const std::vector<std::vector<std::size_t>>& slices, const std::vector<Vec3>& pts, int center, int window,
             const Vec3& joint, const Vec3& lateral, double sign, double tolerance) {
  const int lo = std::max(0, center - window);
  const int hi = std::min(static_cast<int>(slices.size()) - 1, center + window);
  double extreme = 0.0;
  for (int k = lo; k <= hi; ++k)
    for (std::size_t i : slices[k]) extreme = std::max(extreme, sign * (pts[i] - joint).dot(lateral));
  Tip tip{joint, 0.0};
  if (extreme <= 0.0) return tip;
  Vec3 sum = Vec3::Zero();
  double count = 0.0;
  for (int k = lo; k <= hi; ++k)
    for (std::size_t i : slices[k]) {
      if (sign * (pts[i] - joint).dot(lateral) >= (1.0 - tolerance) * extreme) {
        sum += pts[i];
        count += 1.0;
      }
    }
  tip.point = sum / count;
  tip.length = sign * (tip.point - joint).dot(lateral);
  return tip;
}

}  // namespace

Pose3dResult extract_pose_3d(const TriangleMesh& mesh, const Pose3dConfig& cfg, std::optional<Vec3> nose_hint) {
  if (mesh.vertices.size() < 4) throw Error(ErrorCode::DegenerateGeometry, "need at least 4 vertices");
  const std::vector<Vec3> pts = surface_points(mesh, cfg.surface_samples);

  Vec3 mean = Vec3::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(pts.size());

  const Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  const Vec3 evals = solver.eigenvalues();
  if (!(evals(2) > 0.0) || evals(1) <= 1e-12 * evals(2))
    throw Error(ErrorCode::DegenerateGeometry, "vertex covariance is rank-deficient");
  Vec3 axis = solver.eigenvectors().col(2).normalized();
  Vec3 lateral = solver.eigenvectors().col(1).normalized();

  double m3 = 0.0, m3_scale = 0.0;
  for (const auto& p : pts) {
    const double a = (p - mean).dot(axis);
    m3 += a * a * a;
    m3_scale += std::abs(a * a * a);
  }
  if (std::abs(m3) > 1e-9 * m3_scale) {
    if (m3 < 0.0) axis = -axis;
  } else if (axis.x() < 0.0) {
    axis = -axis;
  }

  // Slice along the fuselage axis.
  const int nslices = std::max(2, cfg.slices);
  std::vector<double> u(pts.size());
  double umin = std::numeric_limits<double>::infinity(), umax = -umin;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    u[i] = (pts[i] - mean).dot(axis);
    umin = std::min(umin, u[i]);
    umax = std::max(umax, u[i]);
  }
  const double width = (umax - umin) / nslices;
  std::vector<std::vector<std::size_t>> slices(static_cast<std::size_t>(nslices));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const int k = std::clamp(static_cast<int>(std::floor((u[i] - umin) / width)), 0, nslices - 1);
    slices[k].push_back(i);
  }

  Pose3dResult res;
  std::vector<double> span_sum(static_cast<std::size_t>(nslices), 0.0);
  std::vector<double> xs, ys, zs;
  for (int k = 0; k < nslices; ++k) {
    if (slices[k].empty()) continue;
    xs.clear();
    ys.clear();
    zs.clear();
    for (std::size_t i : slices[k]) {
      xs.push_back(pts[i].x());
      ys.push_back(pts[i].y());
      zs.push_back(pts[i].z());
    }
    CenterlineSample s;
    s.slice = k;
    s.u = umin + (k + 0.5) * width;
    s.median = Vec3(median_of(xs), median_of(ys), median_of(zs));
    for (std::size_t i : slices[k]) {
      const double off = (pts[i] - s.median).dot(lateral);
      s.span_left = std::max(s.span_left, off);
      s.span_right = std::max(s.span_right, -off);
    }
    span_sum[k] = s.span_left + s.span_right;
    res.centerline.push_back(s);
  }

  // Wing root: slice of maximal lateral support, constrained to the centerline.
  // A chord spanning several slices gives a plateau; its middle is used.
  std::size_t widest = 0;
  for (std::size_t i = 0; i < res.centerline.size(); ++i)
    if (span_sum[res.centerline[i].slice] > span_sum[res.centerline[widest].slice]) widest = i;
  const double plateau = (1.0 - cfg.tip_tolerance) * span_sum[res.centerline[widest].slice];
  std::size_t first_wide = widest, last_wide = widest;
  while (first_wide > 0 && res.centerline[first_wide - 1].slice == res.centerline[first_wide].slice - 1 &&
         span_sum[res.centerline[first_wide - 1].slice] >= plateau)
    --first_wide;
  while (last_wide + 1 < res.centerline.size() &&
         res.centerline[last_wide + 1].slice == res.centerline[last_wide].slice + 1 &&
         span_sum[res.centerline[last_wide + 1].slice] >= plateau)
    ++last_wide;
  Vec3 root_guess = Vec3::Zero();
  for (std::size_t i = first_wide; i <= last_wide; ++i) root_guess += res.centerline[i].median;
  root_guess /= static_cast<double>(last_wide - first_wide + 1);
  res.wing_slice = (res.centerline[first_wide].slice + res.centerline[last_wide].slice) / 2;
  std::vector<Vec3> polyline;
  for (const auto& s : res.centerline) polyline.push_back(s.median);
  const Vec3 joint = project_onto_polyline(polyline, root_guess);

  // Nose/tail orientation.
  const Vec3& first = res.centerline.front().median;
  const Vec3& last = res.centerline.back().median;
  bool nose_is_last = true;
  if (nose_hint) {
    nose_is_last = (last - joint).dot(*nose_hint) >= (first - joint).dot(*nose_hint);
  } else {
    double mass_low = 0.0, mass_high = 0.0;
    for (int k = 0; k < nslices; ++k) {
      if (k < res.wing_slice - cfg.tip_window) mass_low += span_sum[k];
      if (k > res.wing_slice + cfg.tip_window) mass_high += span_sum[k];
    }
    nose_is_last = mass_high <= mass_low;
  }
  res.skeleton.nose = nose_is_last ? last : first;
  res.skeleton.tail = nose_is_last ? first : last;
  res.skeleton.wing_root = joint;
  res.fuselage_axis = nose_is_last ? axis : Vec3(-axis);

  // Left is +z x forward; fall back to the PCA lateral axis for vertical fuselages.
  Vec3 left_dir = Vec3::UnitZ().cross(res.skeleton.nose - res.skeleton.tail);
  if (left_dir.norm() > 1e-9 * (res.skeleton.nose - res.skeleton.tail).norm() && lateral.dot(left_dir) < 0.0) {
    lateral = -lateral;
    for (auto& s : res.centerline) std::swap(s.span_left, s.span_right);
  }
  res.lateral_axis = lateral;

  Tip left = find_tip(slices, pts, res.wing_slice, cfg.tip_window, joint, lateral, 1.0, cfg.tip_tolerance);
  Tip right = find_tip(slices, pts, res.wing_slice, cfg.tip_window, joint, lateral, -1.0, cfg.tip_tolerance);
  const double longest = std::max(left.length, right.length);
  if (std::abs(left.length - right.length) > cfg.balance_threshold * longest) {
    res.rebalanced = true;
    Tip& shorter = left.length < right.length ? left : right;
    const double sign = left.length < right.length ? 1.0 : -1.0;
    Tip wide = find_tip(slices, pts, res.wing_slice, cfg.tip_wide_window, joint, lateral, sign, cfg.tip_tolerance);
    if (wide.length > shorter.length) shorter = wide;
  }
  res.skeleton.left_tip = left.point;
  res.skeleton.right_tip = right.point;
  res.left_length = left.length;
  res.right_length = right.length;
  return res;
}

}  // namespace gecm
