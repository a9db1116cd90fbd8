#pragma once

#include "gecm/core.hpp"
#include "gecm/mesh.hpp"

namespace gecm {

/// Azimuth rotation in row form [[c, s, 0], [-s, c, 0], [0, 0, 1]]
/// (0 deg points West, clockwise increase).
Mat3 azimuth_rotation(double azimuth_deg);

/// Rotation about +x by the depression angle, [[1, 0, 0], [0, c, s], [0, -s, c]];
/// maps the horizontal reference look +y onto the depressed look (0, cos b, -sin b).
Mat3 depression_rotation(double depression_deg);

/// Incident unit look vector (sin a cos b, cos a cos b, -sin b).
Vec3 look_vector(double azimuth_deg, double depression_deg);

/// Viewing geometry of one (azimuth, depression) pair.
///
/// rotation() = R_az R_dep and look = R_az R_dep (+y) are the frame-level
/// quantities. The rendering pipeline rotates the mesh by the azimuth part
/// only and traces along sensor_look = R_dep (+y), the look direction that
/// the slant-plane projection assumes; see README "Radar frame conventions".
struct RadarFrame {
  double azimuth_deg = 0.0;
  double depression_deg = 0.0;
  Mat3 azimuth = Mat3::Identity();
  Mat3 depression = Mat3::Identity();
  Vec3 look = Vec3::UnitY();
  Vec3 sensor_look = Vec3::UnitY();

  Mat3 rotation() const { return azimuth * depression; }
};

RadarFrame radar_frame(double azimuth_deg, double depression_deg);
RadarFrame radar_frame(const ImagingParams& params);

/// Applies v' = R v to every vertex (no translation) and rebuilds face caches.
TriangleMesh transform(const TriangleMesh& mesh, const Mat3& rotation);
inline TriangleMesh transform(const TriangleMesh& mesh, const RadarFrame& frame) {
  return transform(mesh, frame.rotation());
}

}  // namespace gecm
