#include "gecm/bvh.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace gecm {

std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& v0, const Vec3& v1,
                                         const Vec3& v2, double t_min, double t_max) {
  const Vec3 e1 = v1 - v0;
  const Vec3 e2 = v2 - v0;
  const Vec3 p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) <= 1e-15 * e1.norm() * e2.norm() * dir.norm()) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - v0;
  const double u = s.dot(p) * inv;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = dir.dot(q) * inv;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(q) * inv;
  if (!(t > t_min && t < t_max)) return std::nullopt;
  return t;
}

Bvh::Bvh(const TriangleMesh& mesh) {
  const auto n = static_cast<std::uint32_t>(mesh.face_count());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  v0_.resize(n);
  v1_.resize(n);
  v2_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    v0_[i] = mesh.vertex(i, 0);
    v1_[i] = mesh.vertex(i, 1);
    v2_[i] = mesh.vertex(i, 2);
  }
  nodes_.reserve(2 * (n / kLeafSize + 1));
  build(0, n, mesh.centroids);
}

std::uint32_t Bvh::build(std::uint32_t begin, std::uint32_t end, const std::vector<Vec3>& centroids) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box, centroid_box;
  for (std::uint32_t k = begin; k < end; ++k) {
    const std::uint32_t f = order_[k];
    box.extend(v0_[f]).extend(v1_[f]).extend(v2_[f]);
    centroid_box.extend(centroids[f]);
  }
  nodes_[index].box = box;

  if (end - begin <= kLeafSize) {
    nodes_[index].left = begin;
    nodes_[index].count = end - begin;
    return index;
  }

  int axis = 0;
  centroid_box.sizes().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = centroids[a][axis], cb = centroids[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const std::uint32_t left = build(begin, mid, centroids);
  const std::uint32_t right = build(mid, end, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

namespace {

// Slab test; returns the entry distance or +inf on a miss.
inline double box_entry(const Eigen::AlignedBox3d& box, const Vec3& origin, const Vec3& inv_dir, double t_min,
                        double t_max) {
  double lo = t_min, hi = t_max;
  for (int k = 0; k < 3; ++k) {
    double t0 = (box.min()[k] - origin[k]) * inv_dir[k];
    double t1 = (box.max()[k] - origin[k]) * inv_dir[k];
    if (t0 > t1) std::swap(t0, t1);
    // NaN from 0 * inf (origin on a slab plane with a parallel ray) must not reject the box.
    if (t0 == t0) lo = std::max(lo, t0);
    if (t1 == t1) hi = std::min(hi, t1);
    if (lo > hi) return std::numeric_limits<double>::infinity();
  }
  return lo;
}

}  // namespace

std::optional<Hit> Bvh::intersect(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const {
  if (nodes_.empty()) return std::nullopt;
  const Vec3 inv_dir = dir.cwiseInverse();
  std::optional<Hit> best;
  double best_t = t_max;
  std::uint32_t best_face = 0;

  std::array<std::uint32_t, 128> stack;
  int top = 0;
  if (box_entry(nodes_[0].box, origin, inv_dir, t_min, best_t) == std::numeric_limits<double>::infinity())
    return std::nullopt;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.leaf()) {
      for (std::uint32_t k = node.left; k < node.left + node.count; ++k) {
        const std::uint32_t f = order_[k];
        // t_max is inclusive here so that equal-t hits can prefer the lower face id
        const auto t = intersect_triangle(origin, dir, v0_[f], v1_[f], v2_[f], t_min,
                                          std::nextafter(best_t, std::numeric_limits<double>::infinity()));
        if (!t) continue;
        if (!best || *t < best_t || (*t == best_t && f < best_face)) {
          best_t = *t;
          best_face = f;
          best = Hit{f, *t, Vec3::Zero()};
        }
      }
      continue;
    }
    const double bound = std::nextafter(best_t, std::numeric_limits<double>::infinity());
    const double tl = box_entry(nodes_[node.left].box, origin, inv_dir, t_min, bound);
    const double tr = box_entry(nodes_[node.right].box, origin, inv_dir, t_min, bound);
    constexpr double kMiss = std::numeric_limits<double>::infinity();
    // push the farther child first so the nearer one is popped next
    if (tl <= tr) {
      if (tr != kMiss) stack[top++] = node.right;
      if (tl != kMiss) stack[top++] = node.left;
    } else {
      if (tl != kMiss) stack[top++] = node.left;
      if (tr != kMiss) stack[top++] = node.right;
    }
  }
  if (best) best->point = origin + best->t * dir;
  return best;
}

bool Bvh::occluded(const Vec3& origin, const Vec3& dir, double t_min, double t_max) const {
  if (nodes_.empty()) return false;
  const Vec3 inv_dir = dir.cwiseInverse();
  constexpr double kMiss = std::numeric_limits<double>::infinity();
  std::array<std::uint32_t, 128> stack;
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (box_entry(node.box, origin, inv_dir, t_min, t_max) == kMiss) continue;
    if (node.leaf()) {
      for (std::uint32_t k = node.left; k < node.left + node.count; ++k) {
        const std::uint32_t f = order_[k];
        if (intersect_triangle(origin, dir, v0_[f], v1_[f], v2_[f], t_min, t_max)) return true;
      }
      continue;
    }
    stack[top++] = node.right;
    stack[top++] = node.left;
  }
  return false;
}

}  // namespace gecm
