#include "gecm/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

namespace gecm {

namespace {

// Uniform grid with cell size eps; neighbours of a point live in the 5x5 block of cells
// (one extra ring absorbs rounding in the cell keys).
class GridIndex {
 public:
  GridIndex(std::span<const Vec2> pts, double cell) : pts_(pts), cell_(cell) {
    for (std::size_t i = 0; i < pts.size(); ++i) cells_[key(pts[i])].push_back(i);
  }

  std::vector<std::size_t> within(std::size_t i, double eps) const {
    std::vector<std::size_t> out;
    const auto [cx, cy] = key(pts_[i]);
    const double eps2 = eps * eps;
    for (long dy = -2; dy <= 2; ++dy)
      for (long dx = -2; dx <= 2; ++dx) {
        auto it = cells_.find({cx + dx, cy + dy});
        if (it == cells_.end()) continue;
        for (std::size_t j : it->second)
          if ((pts_[j] - pts_[i]).squaredNorm() <= eps2) out.push_back(j);
      }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::pair<long, long> key(const Vec2& p) const {
    return {static_cast<long>(std::floor(p.x() / cell_)), static_cast<long>(std::floor(p.y() / cell_))};
  }

  std::span<const Vec2> pts_;
  double cell_;
  std::map<std::pair<long, long>, std::vector<std::size_t>> cells_;
};

}  // namespace

std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_points) {
  const std::size_t n = points.size();
  std::vector<int> labels(n, kNoise);
  if (n == 0) return labels;

  const GridIndex index(points, eps > 0.0 ? eps : 1.0);
  std::vector<std::vector<std::size_t>> neighbours(n);
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    neighbours[i] = index.within(i, eps);
    core[i] = static_cast<int>(neighbours[i].size()) >= min_points;
  }

  int next = 0;
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || labels[i] != kNoise) continue;
    labels[i] = next;
    frontier.assign(1, i);
    while (!frontier.empty()) {
      const std::size_t p = frontier.back();
      frontier.pop_back();
      for (std::size_t q : neighbours[p]) {
        if (core[q] && labels[q] == kNoise) {
          labels[q] = next;
          frontier.push_back(q);
        }
      }
    }
    ++next;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t q : neighbours[i]) {
      if (!core[q]) continue;
      const double d = (points[q] - points[i]).squaredNorm();
      if (d < best) {
        best = d;
        labels[i] = labels[q];
      }
    }
  }
  return labels;
}

std::vector<std::size_t> nms(std::span<const Vec2> points, std::span<const double> scores, double radius,
                             std::size_t max_keep) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const double r2 = radius * radius;
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    if (kept.size() >= max_keep) break;
    const bool clear = std::all_of(kept.begin(), kept.end(),
                                   [&](std::size_t k) { return (points[k] - points[i]).squaredNorm() >= r2; });
    if (clear) kept.push_back(i);
  }
  return kept;
}

}  // namespace gecm
