#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gecm/core.hpp"

namespace gecm {

/// Row-major raster; rows index y, columns index x.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GrayImage = Image<double>;
using ByteImage = Image<std::uint8_t>;
using BinaryMask = Image<std::uint8_t>;  // 0 or 1
using LabelImage = Image<int>;

/// Quantile with linear interpolation between order statistics
/// (h = (n-1)p, Q = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h])).
double quantile_sorted(std::span<const double> sorted, double p);
double quantile(std::vector<double> values, double p);

/// Separable Gaussian, kernel radius ceil(3 sigma), replicated border.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// 3x3 grey-level dilation (max filter); out-of-image neighbours are ignored.
GrayImage grey_dilate3x3(const GrayImage& img);

/// Quantizes [0,1] data to 8 bits with round-half-up.
ByteImage to_bytes(const GrayImage& unit_img);

struct ClaheOptions {
  int tiles_x = 8;
  int tiles_y = 8;
  double clip_limit = 2.0;
};

/// Contrast-limited adaptive histogram equalization over 256 bins with
/// bilinear interpolation between tile mappings.
ByteImage clahe(const ByteImage& img, const ClaheOptions& opt = {});

using Histogram256 = std::array<std::uint64_t, 256>;
Histogram256 histogram(const ByteImage& img);

/// Otsu threshold t maximizing between-class variance; foreground is value > t.
/// Empty when the histogram has a single occupied level.
std::optional<int> otsu_threshold(const Histogram256& hist);

/// Offsets (dx, dy) of a structuring element.
using StructuringElement = std::vector<Eigen::Vector2i>;
StructuringElement cross3();
/// All offsets with dx^2 + dy^2 <= radius^2 + radius (5x5 disc for radius 2).
StructuringElement disc(int radius);

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);
BinaryMask open(const BinaryMask& mask, const StructuringElement& se);

struct Component {
  int label = 0;
  long area = 0;
  Vec2 centroid = Vec2::Zero();  // (x, y)
};

struct Components {
  LabelImage labels;  // 0 = background, components numbered from 1 in raster order
  std::vector<Component> components;
};

/// 8-connected component labelling.
Components connected_components(const BinaryMask& mask);

}  // namespace gecm
