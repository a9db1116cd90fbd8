#include "gecm/frame.hpp"

namespace gecm {

Mat3 azimuth_rotation(double azimuth_deg) {
  const auto [s, c] = sincos_deg(azimuth_deg);
  Mat3 r;
  r << c, s, 0.0,
      -s, c, 0.0,
      0.0, 0.0, 1.0;
  return r;
}

Mat3 depression_rotation(double depression_deg) {
  const auto [s, c] = sincos_deg(depression_deg);
  Mat3 r;
  r << 1.0, 0.0, 0.0,
      0.0, c, s,
      0.0, -s, c;
  return r;
}

Vec3 look_vector(double azimuth_deg, double depression_deg) {
  const auto a = sincos_deg(azimuth_deg);
  const auto b = sincos_deg(depression_deg);
  return {a.sin * b.cos, a.cos * b.cos, -b.sin};
}

RadarFrame radar_frame(double azimuth_deg, double depression_deg) {
  RadarFrame f;
  f.azimuth_deg = azimuth_deg;
  f.depression_deg = depression_deg;
  f.azimuth = azimuth_rotation(azimuth_deg);
  f.depression = depression_rotation(depression_deg);
  f.look = look_vector(azimuth_deg, depression_deg);
  f.sensor_look = look_vector(0.0, depression_deg);
  return f;
}

RadarFrame radar_frame(const ImagingParams& params) { return radar_frame(params.azimuth_deg, params.depression_deg); }

TriangleMesh transform(const TriangleMesh& mesh, const Mat3& rotation) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = rotation * v;
  for (std::size_t i = 0; i < out.faces.size(); ++i) {
    const Vec3& a = out.vertex(i, 0);
    const Vec3& b = out.vertex(i, 1);
    const Vec3& c = out.vertex(i, 2);
    const Vec3 cross = (b - a).cross(c - a);
    out.centroids[i] = (a + b + c) / 3.0;
    out.normals[i] = cross.normalized();
    out.areas[i] = 0.5 * cross.norm();
  }
  return out;
}

}  // namespace gecm
