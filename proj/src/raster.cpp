#include "gecm/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gecm {

Projector::Projector(double depression_deg, double scale, Vec2 center, int width, int height)
    : depression_deg_(depression_deg), scale_(scale), nominal_scale_(scale), center_(center), width_(width),
      height_(height) {
  const SinCos sc = sincos_deg(depression_deg);
  cos_b_ = sc.cos;
  sin_b_ = sc.sin;
}

Projector Projector::fit(const TriangleMesh& mesh, double depression_deg, double resolution_m_per_px,
                         const RasterConfig& cfg) {
  if (!(resolution_m_per_px > 0.0)) throw Error(ErrorCode::OutOfRange, "resolution must be positive", "resolution_m_per_px");
  if (cfg.canvas_width <= 0 || cfg.canvas_height <= 0)
    throw Error(ErrorCode::OutOfRange, "canvas dimensions must be positive", "canvas");
  Projector p(depression_deg, 1.0, Vec2::Zero(), cfg.canvas_width, cfg.canvas_height);
  Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
  Vec2 hi = -lo;
  for (const auto& v : mesh.vertices) {
    const Vec2 q = p.project(v);
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  if (mesh.vertices.empty()) lo = hi = Vec2::Zero();
  const Vec2 extent = hi - lo;  // metres in the image plane
  const double nominal = 1.0 / resolution_m_per_px;
  const double usable_w = (1.0 - 2.0 * cfg.margin) * cfg.canvas_width;
  const double usable_h = (1.0 - 2.0 * cfg.margin) * cfg.canvas_height;
  double scale = nominal;
  if (extent.x() * scale > usable_w) scale = usable_w / extent.x();
  if (extent.y() * scale > usable_h) scale = usable_h / extent.y();
  p.scale_ = scale;
  p.nominal_scale_ = nominal;
  p.center_ = 0.5 * (lo + hi) * scale;
  return p;
}

Vec2 Projector::project(const Vec3& p) const {
  return Vec2(p.x(), p.y() * cos_b_ - p.z() * sin_b_) * scale_;
}

Vec2 Projector::to_canvas(const Vec2& q) const {
  return Vec2(0.5 * width_ + (q.x() - center_.x()), 0.5 * height_ - (q.y() - center_.y()));
}

Pixel Projector::rasterize(const Vec2& q) const {
  const Vec2 c = to_canvas(q);
  const double fx = std::floor(c.x()), fy = std::floor(c.y());
  Pixel px;
  px.clipped = !(fx >= 0.0 && fx <= width_ - 1 && fy >= 0.0 && fy <= height_ - 1);
  px.x = static_cast<int>(std::clamp(std::isfinite(fx) ? fx : 0.0, 0.0, width_ - 1.0));
  px.y = static_cast<int>(std::clamp(std::isfinite(fy) ? fy : 0.0, 0.0, height_ - 1.0));
  return px;
}

double scatterer_intensity(double relative_weight, double kappa) {
  const double r = std::clamp(relative_weight, 0.0, 1.0);
  if (r >= 1.0) return 1.0;
  return std::log1p(kappa * r) / std::log1p(kappa);
}

std::uint8_t scatterer_gray(double relative_weight, double kappa) {
  return static_cast<std::uint8_t>(std::lround(255.0 * scatterer_intensity(relative_weight, kappa)));
}

namespace {

void stamp(RgbImage& img, int x, int y, int width, Rgb color) {
  for (int dy = 0; dy < width; ++dy)
    for (int dx = 0; dx < width; ++dx)
      if (img.contains(x + dx, y + dy)) img.set(x + dx, y + dy, color);
}

void hline(RgbImage& img, int x0, int x1, int y, Rgb color) {
  if (y < 0 || y >= img.height) return;
  for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x) img.set(x, y, color);
}

}  // namespace

void draw_line(RgbImage& img, int x0, int y0, int x1, int y1, Rgb color, int width) {
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    stamp(img, x0, y0, width, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void fill_disc(RgbImage& img, int cx, int cy, int radius, Rgb color) {
  if (radius <= 0) {
    if (img.contains(cx, cy)) img.set(cx, cy, color);
    return;
  }
  int x = radius, y = 0, err = 1 - radius;
  while (x >= y) {
    hline(img, cx - x, cx + x, cy + y, color);
    hline(img, cx - x, cx + x, cy - y, color);
    hline(img, cx - y, cx + y, cy + x, color);
    hline(img, cx - y, cx + y, cy - x, color);
    ++y;
    if (err < 0) {
      err += 2 * y + 1;
    } else {
      --x;
      err += 2 * (y - x) + 1;
    }
  }
}

int round_px(double v) { return static_cast<int>(std::floor(v + 0.5)); }

RgbImage render_gecm(const PoseSkeleton2D& skeleton, const ScattererSet& scatterers, int width, int height,
                     const Palette& pal, double kappa) {
  if (width <= 0 || height <= 0) throw Error(ErrorCode::OutOfRange, "canvas dimensions must be positive", "canvas");
  const auto pts = skeleton.points();
  for (const auto& p : pts)
    if (!p.allFinite()) throw Error(ErrorCode::EmptySkeleton, "skeleton has non-finite keypoints");

  std::array<Eigen::Vector2i, 5> px;
  for (std::size_t i = 0; i < pts.size(); ++i) px[i] = Eigen::Vector2i(round_px(pts[i].x()), round_px(pts[i].y()));
  if (std::all_of(px.begin(), px.end(), [&](const Eigen::Vector2i& p) { return p == px[0]; }))
    throw Error(ErrorCode::EmptySkeleton, "all skeleton keypoints coincide");
  const auto& [nose, tail, root, left, right] = px;

  RgbImage img(width, height);
  const int lw = pal.line_width_px;
  draw_line(img, nose.x(), nose.y(), tail.x(), tail.y(), pal.fuselage, lw);
  draw_line(img, root.x(), root.y(), left.x(), left.y(), pal.left_wing, lw);
  draw_line(img, root.x(), root.y(), right.x(), right.y(), pal.right_wing, lw);

  // connector: wing root to its foot on the nose-tail line
  const Vec2 axis = skeleton.nose - skeleton.tail;
  Vec2 foot = skeleton.wing_root;
  if (axis.squaredNorm() > 0.0) {
    const double t = std::clamp((skeleton.wing_root - skeleton.tail).dot(axis) / axis.squaredNorm(), 0.0, 1.0);
    foot = skeleton.tail + t * axis;
  }
  draw_line(img, root.x(), root.y(), round_px(foot.x()), round_px(foot.y()), pal.wing_root_connector, lw);
  fill_disc(img, root.x(), root.y(), pal.marker_radius_px, pal.wing_root_connector);

  fill_disc(img, nose.x(), nose.y(), pal.marker_radius_px, pal.nose_marker);
  fill_disc(img, tail.x(), tail.y(), pal.marker_radius_px, pal.tail_marker);

  for (const auto& s : scatterers) {
    if (!s.position.allFinite()) continue;
    const std::uint8_t g = scatterer_gray(s.intensity, kappa);
    fill_disc(img, round_px(s.position.x()), round_px(s.position.y()), pal.scatterer_radius_px, Rgb{g, g, g});
  }
  return img;
}

}  // namespace gecm
