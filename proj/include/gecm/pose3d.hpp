#pragma once

#include <optional>
#include <vector>

#include "gecm/config.hpp"
#include "gecm/core.hpp"
#include "gecm/mesh.hpp"

namespace gecm {

/// One slice of the fuselage centerline.
struct CenterlineSample {
  int slice = 0;
  double u = 0.0;          // slice centre along the fuselage axis
  Vec3 median = Vec3::Zero();
  double span_left = 0.0;   // lateral support on the +lateral side of the median
  double span_right = 0.0;  // lateral support on the -lateral side
};

struct Pose3dResult {
  PoseSkeleton3D skeleton;
  Vec3 fuselage_axis = Vec3::UnitX();  // unit, points from tail to nose
  Vec3 lateral_axis = Vec3::UnitY();   // unit, points to the left wing (+z up)
  std::vector<CenterlineSample> centerline;
  int wing_slice = 0;
  double left_length = 0.0;
  double right_length = 0.0;
  bool rebalanced = false;
};

/// Samples the surface deterministically: all vertices plus the centroids of a
/// uniform subdivision of each face, roughly `target` points in total.
std::vector<Vec3> surface_points(const TriangleMesh& mesh, int target);

/// Nearest point on the polyline through `vertices`.
Vec3 project_onto_polyline(const std::vector<Vec3>& vertices, const Vec3& p);

/// Five-point skeleton of an aircraft-like mesh (+z up): PCA fuselage and
/// lateral axes, slice-median centerline, wing root at the slice of maximal
/// lateral support, balanced wing tips, nose/tail at the centerline ends.
/// With `nose_hint` the nose is the end lying along the hint; otherwise the end
/// with less lateral span mass. Throws Error{DegenerateGeometry}.
Pose3dResult extract_pose_3d(const TriangleMesh& mesh, const Pose3dConfig& cfg = {},
                             std::optional<Vec3> nose_hint = std::nullopt);

}  // namespace gecm
