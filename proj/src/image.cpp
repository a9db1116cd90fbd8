#include "gecm/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gecm {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;

  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  GrayImage tmp(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * img(y, std::clamp(x + i, 0, w - 1));
      tmp(y, x) = acc;
    }
  }
  GrayImage out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp(std::clamp(y + i, 0, h - 1), x);
      out(y, x) = acc;
    }
  }
  return out;
}

GrayImage grey_dilate3x3(const GrayImage& img) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  GrayImage out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double m = img(y, x);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w) m = std::max(m, img(yy, xx));
        }
      out(y, x) = m;
    }
  }
  return out;
}

ByteImage to_bytes(const GrayImage& unit_img) {
  return unit_img.unaryExpr([](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::floor(v * 255.0 + 0.5), 0.0, 255.0));
  });
}

ByteImage clahe(const ByteImage& img, const ClaheOptions& opt) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  const int ty = std::max(1, std::min(opt.tiles_y, h));
  const int tx = std::max(1, std::min(opt.tiles_x, w));

  auto y_edge = [&](int i) { return static_cast<int>(static_cast<long>(i) * h / ty); };
  auto x_edge = [&](int j) { return static_cast<int>(static_cast<long>(j) * w / tx); };

  std::vector<std::array<std::uint8_t, 256>> luts(static_cast<std::size_t>(tx * ty));
  for (int i = 0; i < ty; ++i) {
    for (int j = 0; j < tx; ++j) {
      const int y0 = y_edge(i), y1 = y_edge(i + 1), x0 = x_edge(j), x1 = x_edge(j + 1);
      const long area = static_cast<long>(y1 - y0) * (x1 - x0);
      std::array<long, 256> hist{};
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) ++hist[img(y, x)];

      const long clip = std::max<long>(1, static_cast<long>(opt.clip_limit * area / 256.0));
      long excess = 0;
      for (long& c : hist) {
        if (c > clip) {
          excess += c - clip;
          c = clip;
        }
      }
      const long per_bin = excess / 256;
      const long residual = excess - per_bin * 256;
      for (long& c : hist) c += per_bin;
      if (residual > 0) {
        const long step = std::max<long>(1, 256 / residual);
        for (long k = 0, given = 0; k < 256 && given < residual; k += step, ++given) ++hist[k];
      }

      auto& lut = luts[static_cast<std::size_t>(i * tx + j)];
      long cdf = 0;
      for (int k = 0; k < 256; ++k) {
        cdf += hist[k];
        const double v = std::floor(static_cast<double>(cdf) * 255.0 / static_cast<double>(area) + 0.5);
        lut[k] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
  }

  // Bilinear blend of the four nearest tile mappings, anchored at tile centres.
  auto center_y = [&](int i) { return 0.5 * (y_edge(i) + y_edge(i + 1)) - 0.5; };
  auto center_x = [&](int j) { return 0.5 * (x_edge(j) + x_edge(j + 1)) - 0.5; };
  auto locate = [](double pos, int n, auto center, int& a, int& b, double& t) {
    if (pos <= center(0)) {
      a = b = 0;
      t = 0.0;
      return;
    }
    if (pos >= center(n - 1)) {
      a = b = n - 1;
      t = 0.0;
      return;
    }
    a = 0;
    while (a + 1 < n && center(a + 1) <= pos) ++a;
    b = a + 1;
    t = (pos - center(a)) / (center(b) - center(a));
  };

  ByteImage out(h, w);
  for (int y = 0; y < h; ++y) {
    int i0, i1;
    double fy;
    locate(static_cast<double>(y), ty, center_y, i0, i1, fy);
    for (int x = 0; x < w; ++x) {
      int j0, j1;
      double fx;
      locate(static_cast<double>(x), tx, center_x, j0, j1, fx);
      const int v = img(y, x);
      const double top = (1.0 - fx) * luts[i0 * tx + j0][v] + fx * luts[i0 * tx + j1][v];
      const double bot = (1.0 - fx) * luts[i1 * tx + j0][v] + fx * luts[i1 * tx + j1][v];
      out(y, x) = static_cast<std::uint8_t>(std::clamp(std::floor((1.0 - fy) * top + fy * bot + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

Histogram256 histogram(const ByteImage& img) {
  Histogram256 hist{};
  for (Eigen::Index k = 0; k < img.size(); ++k) ++hist[img.data()[k]];
  return hist;
}

namespace {

using u128 = unsigned __int128;

// num * den as a 192-bit value split into (high 128 bits, low 64 bits).
std::pair<u128, std::uint64_t> widen_mul(u128 num, std::uint64_t den) {
  const u128 lo = static_cast<u128>(static_cast<std::uint64_t>(num)) * den;
  const u128 hi = static_cast<u128>(static_cast<std::uint64_t>(num >> 64)) * den + (lo >> 64);
  return {hi, static_cast<std::uint64_t>(lo)};
}

}  // namespace

std::optional<int> otsu_threshold(const Histogram256& hist) {
  // Between-class variance up to a constant factor, (S w0 - N s0)^2 / (w0 (N - w0)),
  // compared exactly as integer fractions so that ties resolve to the lowest t.
  std::uint64_t n = 0, total_moment = 0;
  for (int i = 0; i < 256; ++i) {
    n += hist[i];
    total_moment += static_cast<std::uint64_t>(i) * hist[i];
  }
  std::optional<int> best;
  u128 best_num = 0;
  std::uint64_t best_den = 1;
  std::uint64_t w0 = 0, s0 = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    s0 += static_cast<std::uint64_t>(t) * hist[t];
    if (w0 == 0 || w0 == n) continue;
    const u128 a = static_cast<u128>(total_moment) * w0, b = static_cast<u128>(n) * s0;
    const u128 diff = a > b ? a - b : b - a;
    const u128 num = diff * diff;
    const std::uint64_t den = w0 * (n - w0);
    if (!best || widen_mul(num, best_den) > widen_mul(best_num, den)) {
      best = t;
      best_num = num;
      best_den = den;
    }
  }
  return best;
}

StructuringElement cross3() { return {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}; }

StructuringElement disc(int radius) {
  StructuringElement se;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius + radius) se.emplace_back(dx, dy);
  return se;
}

namespace {

template <bool kDilate>
BinaryMask morph(const BinaryMask& mask, const StructuringElement& se) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());
  BinaryMask out = BinaryMask::Zero(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool v = !kDilate;
      for (const auto& o : se) {
        const int yy = y + o.y(), xx = x + o.x();
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
        if constexpr (kDilate) {
          if (mask(yy, xx)) {
            v = true;
            break;
          }
        } else {
          if (!mask(yy, xx)) {
            v = false;
            break;
          }
        }
      }
      out(y, x) = v ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) { return morph<false>(mask, se); }
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) { return morph<true>(mask, se); }
BinaryMask open(const BinaryMask& mask, const StructuringElement& se) { return dilate(erode(mask, se), se); }

Components connected_components(const BinaryMask& mask) {
  const int h = static_cast<int>(mask.rows());
  const int w = static_cast<int>(mask.cols());
  Components result;
  result.labels = LabelImage::Zero(h, w);
  std::vector<Eigen::Vector2i> stack;
  int next = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x) || result.labels(y, x) != 0) continue;
      Component c;
      c.label = ++next;
      Vec2 sum = Vec2::Zero();
      stack.assign(1, {x, y});
      result.labels(y, x) = c.label;
      while (!stack.empty()) {
        const Eigen::Vector2i p = stack.back();
        stack.pop_back();
        ++c.area;
        sum += p.cast<double>();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = p.x() + dx, yy = p.y() + dy;
            if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
            if (mask(yy, xx) && result.labels(yy, xx) == 0) {
              result.labels(yy, xx) = c.label;
              stack.emplace_back(xx, yy);
            }
          }
      }
      c.centroid = sum / static_cast<double>(c.area);
      result.components.push_back(c);
    }
  }
  return result;
}

}  // namespace gecm
