#pragma once

#include <cstdint>
#include <vector>

#include "gecm/config.hpp"
#include "gecm/core.hpp"
#include "gecm/mesh.hpp"

namespace gecm {

/// 8-bit RGB raster, row-major, interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  Rgb at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {data[i], data[i + 1], data[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = c.r;
    data[i + 1] = c.g;
    data[i + 2] = c.b;
  }
  bool operator==(const RgbImage&) const = default;
};

struct Pixel {
  int x = 0;
  int y = 0;
  bool clipped = false;
};

/// Orthographic slant-plane projection followed by canvas rasterization.
///
/// project():   u = x' s, v = (y' cos b - z' sin b) s, with s = 1/gamma unless
///              the footprint has to be shrunk to fit the canvas margin.
/// rasterize(): column floor(W/2 + u - u_c), row floor(H/2 - (v - v_c)),
///              clamped to the canvas; (u_c, v_c) is the footprint centre.
class Projector {
 public:
  Projector() = default;

  /// Fits the footprint of the mesh vertices to the canvas.
  static Projector fit(const TriangleMesh& mesh, double depression_deg, double resolution_m_per_px,
                       const RasterConfig& cfg);
  /// Explicit form; `center` is the footprint centre in image-plane units.
  Projector(double depression_deg, double scale, Vec2 center, int width, int height);

  Vec2 project(const Vec3& p) const;
  Pixel rasterize(const Vec2& q) const;
  Pixel operator()(const Vec3& p) const { return rasterize(project(p)); }
  /// Continuous canvas position (x right, y down) of an image-plane point.
  Vec2 to_canvas(const Vec2& q) const;

  double depression_deg() const { return depression_deg_; }
  double scale() const { return scale_; }
  double nominal_scale() const { return nominal_scale_; }
  bool shrunk() const { return scale_ < nominal_scale_; }
  const Vec2& center() const { return center_; }
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  double depression_deg_ = 0.0;
  double cos_b_ = 1.0;
  double sin_b_ = 0.0;
  double scale_ = 1.0;
  double nominal_scale_ = 1.0;
  Vec2 center_ = Vec2::Zero();
  int width_ = 0;
  int height_ = 0;
};

/// log(1 + kappa r) / log(1 + kappa) for r = w / w_max in [0, 1].
double scatterer_intensity(double relative_weight, double kappa);
std::uint8_t scatterer_gray(double relative_weight, double kappa);

/// Integer Bresenham line, each step stamped as a width x width block.
void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color, int width);
/// Midpoint-circle filled disc.
void fill_disc(RgbImage& img, int cx, int cy, int radius, Rgb color);

/// Nearest integer to a continuous canvas coordinate, halves rounded up.
int round_px(double v);

/// Black canvas; fuselage nose-tail, wings root-tips, wing-root connector,
/// nose/tail markers, then scatterer discs (gray by Eq. 24 on the stored
/// relative intensity). Throws Error{EmptySkeleton} when the keypoints are
/// non-finite or all coincide, Error{OutOfRange} for a non-positive canvas.
RgbImage render_gecm(const PoseSkeleton2D& skeleton, const ScattererSet& scatterers, int width, int height,
                     const Palette& pal = palette(), double kappa = 100.0);
inline RgbImage render_gecm(const Gecm& g, const Palette& pal = palette(), double kappa = 100.0) {
  return render_gecm(g.skeleton, g.scatterers, g.canvas_width, g.canvas_height, pal, kappa);
}

}  // namespace gecm
