#pragma once

#include <Eigen/Geometry>

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "gecm/core.hpp"
#include "gecm/mesh.hpp"

namespace gecm {

struct Hit {
  std::uint32_t face = 0;
  double t = 0.0;
  Vec3 point = Vec3::Zero();
};

inline constexpr double kRayEpsilon = 1e-6;

/// Two-sided Moller-Trumbore test; returns t when the hit lies in (t_min, t_max).
std::optional<double> intersect_triangle(const Vec3& origin, const Vec3& dir, const Vec3& v0, const Vec3& v1,
                                         const Vec3& v2, double t_min = kRayEpsilon,
                                         double t_max = std::numeric_limits<double>::infinity());

/// Axis-aligned bounding-volume hierarchy over the faces of a mesh, leaves of
/// at most four faces. Immutable after construction; queries are thread-safe.
class Bvh {
 public:
  struct Node {
    Eigen::AlignedBox3d box;
    std::uint32_t left = 0;   // inner: first child index; leaf: first entry in face_order()
    std::uint32_t right = 0;  // inner: second child index
    std::uint32_t count = 0;  // faces in a leaf, 0 for inner nodes
    bool leaf() const { return count > 0; }
  };

  static constexpr std::uint32_t kLeafSize = 4;

  explicit Bvh(const TriangleMesh& mesh);

  /// Nearest hit with t in (t_min, t_max); equal t resolves to the lower face id.
  std::optional<Hit> intersect(const Vec3& origin, const Vec3& dir, double t_min = kRayEpsilon,
                               double t_max = std::numeric_limits<double>::infinity()) const;

  /// True when any face is hit with t in (t_min, t_max).
  bool occluded(const Vec3& origin, const Vec3& dir, double t_min = kRayEpsilon,
                double t_max = std::numeric_limits<double>::infinity()) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& face_order() const { return order_; }
  const Eigen::AlignedBox3d& bounds() const { return nodes_.front().box; }

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, const std::vector<Vec3>& centroids);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<Vec3> v0_, v1_, v2_;  // triangle corners by face id
};

}  // namespace gecm
