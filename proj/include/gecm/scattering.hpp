#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gecm/bvh.hpp"
#include "gecm/config.hpp"
#include "gecm/core.hpp"
#include "gecm/mesh.hpp"

namespace gecm {

/// One prefix of a traced ray: the first `bounces` facet hits.
struct RayPath {
  std::uint32_t ray = 0;
  std::vector<std::uint32_t> faces;
  std::vector<double> energies;  // E_0 = 1 .. E_m
  double length_in = 0.0;        // launch plane to terminal along the path
  double length_out = 0.0;       // terminal back to the launch plane along -look
  double align_weight = 0.0;     // max(0, r_final . -look)^p, zero when the return is occluded
  Vec3 terminal = Vec3::Zero();
  Vec3 final_direction = Vec3::Zero();

  int bounces() const { return static_cast<int>(faces.size()); }
  double energy() const { return energies.back(); }
};

/// Per-bounce energy factor Gamma * exp(-(4 pi sigma cos / lambda)^2) * max(cos, c_min).
double bounce_reflectance(double cos_theta, double wavelength_m, const TraceConfig& cfg);

/// Orthographic launch grid perpendicular to `look`, covering the mesh's
/// bounding box plus cfg.launch_margin on each side.
struct LaunchPlane {
  Vec3 origin = Vec3::Zero();  // plane point behind the scene along -look
  Vec3 look = Vec3::UnitY();
  Vec3 axis_a = Vec3::UnitX();
  Vec3 axis_b = Vec3::UnitZ();
  double a_min = 0.0, a_max = 0.0, b_min = 0.0, b_max = 0.0;
  int rays_per_side = 0;

  Vec3 ray_origin(int i, int j) const;
  double distance_to(const Vec3& p) const { return (p - origin).dot(look); }
};

LaunchPlane make_launch_plane(const TriangleMesh& mesh, const Vec3& look, const TraceConfig& cfg);

/// Multi-bounce specular tracing of an orthographic bundle along `look`
/// (unit). Paths whose energy drops below cfg.energy_floor are pruned. The
/// output order (ray index, then bounce count) is independent of cfg.threads.
std::vector<RayPath> trace(const TriangleMesh& mesh, const Bvh& bvh, const Vec3& look, double wavelength_m,
                           const TraceConfig& cfg);
std::vector<RayPath> trace(const TriangleMesh& mesh, const Vec3& look, double wavelength_m, const TraceConfig& cfg);

/// max(0, n . -look) times an unoccluded-toward-sensor indicator, per face.
std::vector<double> facet_visibility(const TriangleMesh& mesh, const Bvh& bvh, const Vec3& look);

/// E_m w_align (1 + mu (m - 1)) / (L_in + L_out)^2. Throws Error{ZeroPathLength}.
double saliency(const RayPath& path, const TraceConfig& cfg);

/// Path saliencies are divided by the largest one and rounded to multiples
/// of this quantum before they are scored, so bin scores are exact sums
/// and identical for any common scale of the input saliencies.
inline constexpr double kScoreQuantum = 0x1p-24;

struct Bin {
  Eigen::Vector2i key = Eigen::Vector2i::Zero();  // (floor(u / size), floor(v / size))
  double weight = 0.0;  // raw saliency sum
  double score = 0.0;   // quantized relative saliency sum, in units of the strongest path
  Vec2 centroid = Vec2::Zero();  // score-weighted; weight-weighted when the score is 0
  std::size_t terminals = 0;
};

/// Image-plane bins with positive accumulated saliency, ordered by (key.y, key.x).
struct BinGrid {
  double bin_size = 1.0;
  std::vector<Bin> bins;

  double max_weight() const;
  double max_score() const;
  /// 10 log10(score / max score); -inf for a zero score.
  double decibels(const Bin& bin) const;
};

/// Deposits each terminal's saliency into its bin and tracks the centroid.
BinGrid aggregate(std::span<const Vec2> terminals, std::span<const double> saliencies, double bin_size);

template <typename Projector>
BinGrid aggregate(const std::vector<RayPath>& paths, const Projector& projector, const TraceConfig& cfg,
                  double bin_size) {
  std::vector<Vec2> q;
  std::vector<double> w;
  q.reserve(paths.size());
  w.reserve(paths.size());
  for (const auto& p : paths) {
    q.push_back(projector.project(p.terminal));
    w.push_back(saliency(p, cfg));
  }
  return aggregate(q, w, bin_size);
}

struct SelectedScatterer {
  Vec2 position = Vec2::Zero();  // bin centroid, continuous image-plane units
  double weight = 0.0;
  double score = 0.0;
  double decibels = 0.0;
  std::size_t bin = 0;  // index into BinGrid::bins
};

/// Bins at or above threshold_db, NMS on centroids (descending score, lower
/// bin index on ties), first max_count survivors.
std::vector<SelectedScatterer> select_scatterers(const BinGrid& grid, double threshold_db, double nms_radius,
                                                 int max_count);

}  // namespace gecm
