#pragma once

#include <string>
#include <vector>

#include "gecm/config.hpp"
#include "gecm/core.hpp"
#include "gecm/derivation.hpp"
#include "gecm/frame.hpp"
#include "gecm/mesh.hpp"
#include "gecm/pose3d.hpp"
#include "gecm/raster.hpp"
#include "gecm/scattering.hpp"
#include "json.hpp"

namespace gecm {

struct RenderResult {
  Gecm gecm;
  RgbImage raster;
  nlohmann::ordered_json sidecar;

  RadarFrame frame;
  Projector projector;
  Pose3dResult pose;
  std::array<bool, 5> keypoint_clipped{};
  std::vector<SelectedScatterer> selected;
  std::size_t path_count = 0;
  std::size_t bin_count = 0;
  std::size_t above_threshold = 0;
};

/// Mesh body frame: nose toward -x, wings along +-y, up +z.
///
/// The mesh is rotated by the azimuth rotation, the pose skeleton is
/// extracted in that frame and projected then rasterized, the tracer runs
/// along the depressed sensor look, and the selected bin centroids are
/// rasterized directly from their image-plane coordinates.
RenderResult render_from_mesh(const TriangleMesh& mesh, const ImagingParams& params, const Config& cfg = {});

/// The mesh rotated into the frame the pipeline traces in, and its projector.
TriangleMesh scene_for(const TriangleMesh& mesh, const RadarFrame& frame);

nlohmann::ordered_json params_to_json(const ImagingParams& params);

/// Sidecar for a derived GECM: params, effective config, keypoints,
/// scatterers (pixel position, raw score, dB, stored and rendered intensity).
nlohmann::ordered_json derived_sidecar(const Derivation& d, const ImagingParams& params, const Config& cfg);

/// 10 log10(w / w_max), -inf for w = 0 written as null.
nlohmann::ordered_json decibel_json(double weight, double max_weight);

}  // namespace gecm
