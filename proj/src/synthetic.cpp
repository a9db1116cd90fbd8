#include "gecm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gecm {

namespace {

struct Builder {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  int add(const Vec3& v) {
    vertices.push_back(v);
    return static_cast<int>(vertices.size()) - 1;
  }
  void tri(int a, int b, int c) { faces.emplace_back(a, b, c); }
  // Quad a-b-c-d in counter-clockwise order seen from the outside. The
  // diagonal is picked from its direction with y mirrored into the y >= 0
  // half, so shapes symmetric about y = 0 get mirror-symmetric triangulations.
  void quad(int a, int b, int c, int d) {
    const Vec3 centre = 0.25 * (vertices[a] + vertices[b] + vertices[c] + vertices[d]);
    const double sy = centre.y() < 0.0 ? -1.0 : 1.0;
    auto key = [&](int p, int q) {
      const Vec3 e = vertices[q] - vertices[p];
      const double y = sy * e.y();
      return e.x() * y + e.x() * e.z() + y * e.z();
    };
    if (key(a, c) >= key(b, d)) {
      tri(a, b, c);
      tri(a, c, d);
    } else {
      tri(a, b, d);
      tri(b, c, d);
    }
  }
  // Grid over origin + s*du + t*dv, s, t in [0, 1]; normal along du x dv.
  void panel(const Vec3& origin, const Vec3& du, const Vec3& dv, int nu, int nv) {
    const int base = static_cast<int>(vertices.size());
    for (int j = 0; j <= nv; ++j)
      for (int i = 0; i <= nu; ++i) add(origin + (double(i) / nu) * du + (double(j) / nv) * dv);
    for (int j = 0; j < nv; ++j)
      for (int i = 0; i < nu; ++i) {
        const int a = base + j * (nu + 1) + i;
        quad(a, a + 1, a + nu + 2, a + nu + 1);
      }
  }
  void box(const Vec3& lo, const Vec3& hi, int nx, int ny, int nz) {
    const Vec3 d = hi - lo;
    const Vec3 ex(d.x(), 0, 0), ey(0, d.y(), 0), ez(0, 0, d.z());
    panel(lo, ey, ex, ny, nx);             // bottom, -z
    panel(lo + ez, ex, ey, nx, ny);        // top, +z
    panel(lo, ex, ez, nx, nz);             // -y
    panel(lo + ey, ez, ex, nz, nx);        // +y
    panel(lo, ez, ey, nz, ny);             // -x
    panel(lo + ex, ey, ez, ny, nz);        // +x
  }
  TriangleMesh build() { return make_mesh(std::move(vertices), std::move(faces)); }
};

int divisions_for(double length, double step) { return std::max(1, static_cast<int>(std::ceil(length / step))); }

}  // namespace

TriangleMesh merge(const TriangleMesh& a, const TriangleMesh& b) {
  std::vector<Vec3> v = a.vertices;
  std::vector<Face> f = a.faces;
  const int offset = static_cast<int>(v.size());
  v.insert(v.end(), b.vertices.begin(), b.vertices.end());
  for (const auto& face : b.faces) f.push_back(face + Face::Constant(offset));
  return make_mesh(std::move(v), std::move(f));
}

TriangleMesh make_box(const Vec3& min, const Vec3& max, int divisions) {
  Builder b;
  b.box(min, max, divisions, divisions, divisions);
  return b.build();
}

TriangleMesh make_plate(double size, int divisions) {
  Builder b;
  const double h = 0.5 * size;
  b.panel(Vec3(-h, -h, 0), Vec3(size, 0, 0), Vec3(0, size, 0), divisions, divisions);
  return b.build();
}

TriangleMesh make_dihedral(double size, int divisions) {
  Builder b;
  const double h = 0.5 * size;
  b.panel(Vec3(-h, 0, 0), Vec3(size, 0, 0), Vec3(0, size, 0), divisions, divisions);     // ground, +z
  b.panel(Vec3(-h, size, 0), Vec3(size, 0, 0), Vec3(0, 0, size), divisions, divisions);  // wall, -y
  return b.build();
}

TriangleMesh make_dihedral_with_fuselage(double size, int divisions) {
  Builder b;
  const double h = 0.5 * size;
  b.panel(Vec3(-h, 0, 0), Vec3(size, 0, 0), Vec3(0, size, 0), divisions, divisions);
  b.panel(Vec3(-h, size, 0), Vec3(size, 0, 0), Vec3(0, 0, size), divisions, divisions);
  // cylinder along x resting on the ground plate
  const double r = 0.08 * size;
  const double yc = 0.4 * size;
  const int seg = 24, len = 16;
  for (int k = 0; k <= len; ++k) {
    const double x = -0.4 * size + 0.8 * size * k / len;
    for (int s = 0; s < seg; ++s) {
      const double t = 2.0 * std::numbers::pi * s / seg;
      b.add(Vec3(x, yc + r * std::cos(t), r + r * std::sin(t)));
    }
  }
  for (int k = 0; k < len; ++k)
    for (int s = 0; s < seg; ++s) {
      const int a = k * seg + s, c = k * seg + (s + 1) % seg;
      const int base = 2 * (divisions + 1) * (divisions + 1);
      b.quad(base + a, base + a + seg, base + c + seg, base + c);
    }
  return b.build();
}

TriangleMesh make_ellipsoid(const Vec3& radii, int rings, int segments) {
  Builder b;
  const int top = b.add(Vec3(0, 0, radii.z()));
  for (int i = 1; i < rings; ++i) {
    const double phi = std::numbers::pi * i / rings;
    for (int s = 0; s < segments; ++s) {
      const double t = 2.0 * std::numbers::pi * s / segments;
      b.add(Vec3(radii.x() * std::sin(phi) * std::cos(t), radii.y() * std::sin(phi) * std::sin(t),
                 radii.z() * std::cos(phi)));
    }
  }
  const int bottom = b.add(Vec3(0, 0, -radii.z()));
  auto at = [&](int ring, int s) { return 1 + (ring - 1) * segments + (s % segments); };
  for (int s = 0; s < segments; ++s) b.tri(top, at(1, s), at(1, s + 1));
  for (int i = 1; i + 1 < rings; ++i)
    for (int s = 0; s < segments; ++s) b.quad(at(i, s), at(i + 1, s), at(i + 1, s + 1), at(i, s + 1));
  for (int s = 0; s < segments; ++s) b.tri(bottom, at(rings - 1, s + 1), at(rings - 1, s));
  return b.build();
}

TriangleMesh make_box_cross(double length, double span, double width, int divisions) {
  Builder b;
  const double w = 0.5 * width;
  b.box(Vec3(-0.5 * length, -w, -w), Vec3(0.5 * length, w, w), divisions * 4, divisions, divisions);
  b.box(Vec3(-w, -0.5 * span, -0.5 * w), Vec3(w, 0.5 * span, 0.5 * w), divisions, divisions * 4, divisions);
  return b.build();
}

TriangleMesh make_aircraft(const AircraftSpec& a) {
  Builder b;
  const double half = 0.5 * a.fuselage_length;
  const int rs = std::max(3, a.radial_segments);
  const int ls = std::max(2, a.length_segments);

  auto radius_at = [&](double x) {
    const double from_nose = x + half;
    const double to_tail = half - x;
    if (from_nose < a.nose_length) {
      const double t = from_nose / a.nose_length;
      return a.fuselage_radius * std::sqrt(std::max(0.0, t * (2.0 - t)));
    }
    if (to_tail < a.tail_length) {
      const double t = to_tail / a.tail_length;
      return a.fuselage_radius * (a.tail_radius_ratio + (1.0 - a.tail_radius_ratio) * t);
    }
    return a.fuselage_radius;
  };

  // fuselage rings; the first station is the nose apex
  const int nose = b.add(Vec3(-half, 0, 0));
  for (int k = 1; k <= ls; ++k) {
    const double x = -half + a.fuselage_length * k / ls;
    const double r = radius_at(x);
    for (int s = 0; s < rs; ++s) {
      const double t = 2.0 * std::numbers::pi * s / rs;
      b.add(Vec3(x, r * std::cos(t), r * std::sin(t)));
    }
  }
  auto ring = [&](int k, int s) { return 1 + (k - 1) * rs + (s % rs); };
  for (int s = 0; s < rs; ++s) b.tri(nose, ring(1, s + 1), ring(1, s));
  for (int k = 1; k < ls; ++k)
    for (int s = 0; s < rs; ++s) b.quad(ring(k, s), ring(k, s + 1), ring(k + 1, s + 1), ring(k + 1, s));
  const int tail_centre = b.add(Vec3(half, 0, 0));
  for (int s = 0; s < rs; ++s) b.tri(tail_centre, ring(ls, s), ring(ls, s + 1));

  // main wing
  const int ny = std::max(2, a.panel_divisions + a.panel_divisions % 2);
  const int nx = divisions_for(a.wing_chord, a.wingspan / ny);
  b.box(Vec3(a.wing_station - 0.5 * a.wing_chord, -0.5 * a.wingspan, a.wing_height - 0.5 * a.wing_thickness),
        Vec3(a.wing_station + 0.5 * a.wing_chord, 0.5 * a.wingspan, a.wing_height + 0.5 * a.wing_thickness), nx, ny,
        1);

  // tailplane and fin
  const double tx = half - 0.5 * a.tailplane_chord - 0.1;
  int tny = std::max(2, ny * static_cast<int>(std::lround(a.tailplane_span)) /
                             std::max(1, static_cast<int>(std::lround(a.wingspan))));
  tny += tny % 2;  // no cell centred on the symmetry plane
  b.box(Vec3(tx - 0.5 * a.tailplane_chord, -0.5 * a.tailplane_span, -0.05),
        Vec3(tx + 0.5 * a.tailplane_chord, 0.5 * a.tailplane_span, 0.05),
        divisions_for(a.tailplane_chord, a.tailplane_span / tny), tny, 1);
  const double fx = half - 0.5 * a.fin_chord - 0.1;
  b.box(Vec3(fx - 0.5 * a.fin_chord, -0.05, 0.0), Vec3(fx + 0.5 * a.fin_chord, 0.05, a.fuselage_radius + a.fin_height),
        divisions_for(a.fin_chord, 0.25), 2, divisions_for(a.fin_height, 0.25));
  return b.build();
}

GrayImage paint_silhouette(const TriangleMesh& scene, const Projector& projector, double value) {
  GrayImage img = GrayImage::Zero(projector.height(), projector.width());
  auto edge = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
  };
  for (std::size_t f = 0; f < scene.face_count(); ++f) {
    const Vec2 a = projector.to_canvas(projector.project(scene.vertex(f, 0)));
    const Vec2 b = projector.to_canvas(projector.project(scene.vertex(f, 1)));
    const Vec2 c = projector.to_canvas(projector.project(scene.vertex(f, 2)));
    const double area = edge(a, b, c);
    if (area == 0.0) continue;
    const Vec2 lo = a.cwiseMin(b).cwiseMin(c), hi = a.cwiseMax(b).cwiseMax(c);
    const int x0 = std::max(0, static_cast<int>(std::floor(lo.x() - 0.5)));
    const int x1 = std::min(projector.width() - 1, static_cast<int>(std::ceil(hi.x())));
    const int y0 = std::max(0, static_cast<int>(std::floor(lo.y() - 0.5)));
    const int y1 = std::min(projector.height() - 1, static_cast<int>(std::ceil(hi.y())));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const Vec2 p(x + 0.5, y + 0.5);
        const double w0 = edge(b, c, p), w1 = edge(c, a, p), w2 = edge(a, b, p);
        const bool inside = area > 0 ? (w0 >= 0 && w1 >= 0 && w2 >= 0) : (w0 <= 0 && w1 <= 0 && w2 <= 0);
        if (inside) img(y, x) = value;
      }
  }
  return img;
}

}  // namespace gecm
