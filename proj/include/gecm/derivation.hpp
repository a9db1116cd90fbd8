#pragma once

#include <optional>
#include <vector>

#include "gecm/config.hpp"
#include "gecm/core.hpp"
#include "gecm/image.hpp"

namespace gecm {

/// Optional log(1+I) compression followed by min-max scaling to [0,1]
/// with a 1e-8 guard in the denominator. Throws Error{EmptyImage}.
GrayImage normalize(const GrayImage& img, bool high_dynamic_range);

/// CLAHE, Otsu, 3x3-cross opening, 8-connected labelling, then the component
/// maximizing area - center_penalty * |centroid - image centre|, dilated by a
/// radius-2 disc. Throws Error{NoForeground}.
BinaryMask extract_mask(const GrayImage& normalized, const DerivationConfig& cfg = {});

struct PoseEstimate {
  PoseSkeleton2D skeleton;
  Vec2 nose_direction = Vec2::Zero();
  Vec2 lateral_direction = Vec2::Zero();
  double front_extent = 0.0;
  double back_extent = 0.0;
  double left_length = 0.0;
  double right_length = 0.0;
  bool used_pca = false;
  bool collinear = false;  // zero lateral spread, wing tips collapsed onto the root
};

/// Five-point skeleton from a target mask. With an azimuth the nose points
/// along (-cos a, -sin a) in image coordinates (x right, y down); without one
/// the PCA major axis is used, signed so the third central moment of the
/// projections is positive. Keypoints are clipped to the image unless `clip`
/// is false. Throws Error{DegenerateMask} below cfg.min_foreground pixels.
PoseEstimate estimate_pose(const BinaryMask& mask, std::optional<double> azimuth_deg,
                           const DerivationConfig& cfg = {}, bool clip = true);

struct ScattererCandidate {
  Vec2 position = Vec2::Zero();
  double score = 0.0;
};

struct ScattererCandidates {
  std::vector<ScattererCandidate> items;  // NMS-selected, by descending score
  double threshold = 0.0;
  bool used_fallback = false;
};

/// Mask-gated local maxima of the Gaussian-smoothed image above the 90th
/// percentile of the in-mask response, falling back to the global 97th
/// percentile without gating when nothing qualifies.
ScattererCandidates detect_scatterers(const GrayImage& normalized, const BinaryMask& mask,
                                      const DerivationConfig& cfg = {});

/// DBSCAN consolidation into intensity-weighted centres, plus up to
/// cfg.noise_keep strongest noise points, final NMS and a cap of
/// cfg.max_scatterers. Intensities are divided by the strongest kept score.
ScattererSet cluster_scatterers(const ScattererCandidates& candidates, const DerivationConfig& cfg = {});

struct Derivation {
  Gecm gecm;
  BinaryMask mask;
  PoseEstimate pose;
  ScattererCandidates candidates;
  std::vector<double> raw_scores;  // cluster scores before normalization, aligned with gecm.scatterers
};

Derivation derive(const GrayImage& img, const ImagingParams& params, const DerivationConfig& cfg = {});

inline Gecm derive_gecm(const GrayImage& img, const ImagingParams& params, const DerivationConfig& cfg = {}) {
  return derive(img, params, cfg).gecm;
}

}  // namespace gecm
