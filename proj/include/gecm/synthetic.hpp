#pragma once

#include "gecm/core.hpp"
#include "gecm/image.hpp"
#include "gecm/mesh.hpp"
#include "gecm/raster.hpp"

namespace gecm {

/// Mirror-symmetric (about y = 0) aircraft in the body frame: nose toward -x,
/// wings along +-y, up +z. Lengths in metres.
struct AircraftSpec {
  double fuselage_length = 14.0;
  double fuselage_radius = 0.7;
  double nose_length = 2.5;
  double tail_length = 3.5;
  double tail_radius_ratio = 0.35;
  double wingspan = 11.0;
  double wing_chord = 1.8;
  double wing_thickness = 0.2;
  double wing_station = 0.0;  // x of the wing chord centre
  double wing_height = -0.25;  // z of the wing mid-plane
  double tailplane_span = 4.0;
  double tailplane_chord = 1.0;
  double fin_height = 1.8;
  double fin_chord = 1.2;
  int radial_segments = 40;
  int length_segments = 60;
  int panel_divisions = 48;  // spanwise divisions of the main wing
};

TriangleMesh make_aircraft(const AircraftSpec& spec = {});

/// Axis-aligned box with each face split into a grid.
TriangleMesh make_box(const Vec3& min, const Vec3& max, int divisions = 1);
/// Square plate in z = 0 centred at the origin, normal +z.
TriangleMesh make_plate(double size, int divisions = 1);
/// Ground plate (z = 0, y in [0, size]) joined at y = size by a wall facing -y;
/// a retro-reflecting corner for looks in the y-z plane. Not recentred.
TriangleMesh make_dihedral(double size, int divisions = 1);
/// Dihedral with a cylinder lying on the ground plate along x.
TriangleMesh make_dihedral_with_fuselage(double size, int divisions = 4);
TriangleMesh make_ellipsoid(const Vec3& radii, int rings = 16, int segments = 32);
/// Two crossed boxes: a long one along x and a shorter one along y.
TriangleMesh make_box_cross(double length, double span, double width, int divisions = 4);

/// Appends `b` to `a`.
TriangleMesh merge(const TriangleMesh& a, const TriangleMesh& b);

/// Filled silhouette of the projected triangles: pixels whose centre falls in
/// a projected face get `value`, others 0.
GrayImage paint_silhouette(const TriangleMesh& scene, const Projector& projector, double value);

}  // namespace gecm
