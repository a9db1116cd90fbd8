#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "gecm/core.hpp"

namespace gecm {

inline constexpr int kNoise = -1;

/// Density-based clustering. A point is core when at least `min_points`
/// points (itself included) lie within distance `eps`. Clusters are the
/// eps-connected components of core points, numbered by their lowest-index
/// core point. Border points join the cluster of their nearest core
/// neighbour (lower index on ties); everything else is kNoise.
std::vector<int> dbscan(std::span<const Vec2> points, double eps, int min_points);

/// Greedy non-maximum suppression. Visits points by descending score (ties:
/// lower index first) and keeps a point when every already-kept point is at
/// least `radius` away. Returns kept indices in visit order, at most `max_keep`.
std::vector<std::size_t> nms(std::span<const Vec2> points, std::span<const double> scores, double radius,
                             std::size_t max_keep = std::numeric_limits<std::size_t>::max());

}  // namespace gecm
