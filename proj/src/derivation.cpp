#include "gecm/derivation.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gecm/cluster.hpp"

namespace gecm {

GrayImage normalize(const GrayImage& img, bool high_dynamic_range) {
  if (img.size() == 0) throw Error(ErrorCode::EmptyImage, "image has no pixels");
  GrayImage work = high_dynamic_range ? GrayImage(img.log1p()) : img;
  const double lo = work.minCoeff();
  const double hi = work.maxCoeff();
  constexpr double kGuard = 1e-8;
  return (work - lo) / (hi - lo + kGuard);
}

BinaryMask extract_mask(const GrayImage& normalized, const DerivationConfig& cfg) {
  const ByteImage enhanced = clahe(to_bytes(normalized), cfg.clahe);
  const auto threshold = otsu_threshold(histogram(enhanced));
  if (!threshold) throw Error(ErrorCode::NoForeground, "image has a single intensity level");

  const BinaryMask raw = (enhanced > static_cast<std::uint8_t>(*threshold)).cast<std::uint8_t>();
  const Components cc = connected_components(open(raw, cross3()));
  if (cc.components.empty()) throw Error(ErrorCode::NoForeground, "no foreground component survives opening");

  const Vec2 center((normalized.cols() - 1) / 2.0, (normalized.rows() - 1) / 2.0);
  const Component* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& c : cc.components) {
    const double score = static_cast<double>(c.area) - cfg.center_penalty * (c.centroid - center).norm();
    if (score > best_score) {
      best_score = score;
      best = &c;
    }
  }
  const BinaryMask chosen = (cc.labels == best->label).cast<std::uint8_t>();
  return dilate(chosen, disc(2));
}

namespace {

std::vector<Vec2> foreground_pixels(const BinaryMask& mask) {
  std::vector<Vec2> pts;
  for (Eigen::Index y = 0; y < mask.rows(); ++y)
    for (Eigen::Index x = 0; x < mask.cols(); ++x)
      if (mask(y, x)) pts.emplace_back(static_cast<double>(x), static_cast<double>(y));
  return pts;
}

Vec2 pca_major_axis(const std::vector<Vec2>& pts, const Vec2& centroid) {
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Vec2 d = p - centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(cov);
  Vec2 axis = solver.eigenvectors().col(1).normalized();

  double m3 = 0.0, scale = 0.0;
  for (const auto& p : pts) {
    const double a = (p - centroid).dot(axis);
    m3 += a * a * a;
    scale += std::abs(a * a * a);
  }
  const bool tie = std::abs(m3) <= 1e-9 * scale;
  if (!tie && m3 < 0.0) axis = -axis;
  if (tie && (axis.x() < 0.0 || (axis.x() == 0.0 && axis.y() < 0.0))) axis = -axis;
  return axis;
}

Vec2 clip_to(const Vec2& p, Eigen::Index w, Eigen::Index h) {
  return {std::clamp(p.x(), 0.0, static_cast<double>(w - 1)), std::clamp(p.y(), 0.0, static_cast<double>(h - 1))};
}

}  // namespace

PoseEstimate estimate_pose(const BinaryMask& mask, std::optional<double> azimuth_deg, const DerivationConfig& cfg,
                           bool clip) {
  const std::vector<Vec2> pts = foreground_pixels(mask);
  if (static_cast<int>(pts.size()) < cfg.min_foreground)
    throw Error(ErrorCode::DegenerateMask,
                "mask has " + std::to_string(pts.size()) + " pixels, need " + std::to_string(cfg.min_foreground));

  PoseEstimate est;
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  if (azimuth_deg) {
    const auto sc = sincos_deg(*azimuth_deg);
    est.nose_direction = Vec2(-sc.cos, -sc.sin);
  } else {
    est.nose_direction = pca_major_axis(pts, centroid);
    est.used_pca = true;
  }
  const Vec2& dn = est.nose_direction;
  est.lateral_direction = Vec2(dn.y(), -dn.x());
  const Vec2& dl = est.lateral_direction;

  std::vector<double> along(pts.size()), across(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    along[i] = (pts[i] - centroid).dot(dn);
    across[i] = (pts[i] - centroid).dot(dl);
  }
  est.front_extent = quantile(along, 0.99);
  est.back_extent = -quantile(along, 0.01);

  std::vector<double> left, right;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(along[i] > -0.2 * est.back_extent && along[i] < 0.3 * est.front_extent)) continue;
    if (across[i] > 0.0) left.push_back(across[i]);
    if (across[i] < 0.0) right.push_back(-across[i]);
  }
  est.left_length = left.empty() ? 0.0 : quantile(std::move(left), 0.98);
  est.right_length = right.empty() ? 0.0 : quantile(std::move(right), 0.98);

  const double mean_across = std::accumulate(across.begin(), across.end(), 0.0) / static_cast<double>(across.size());
  double var_across = 0.0;
  for (double s : across) var_across += (s - mean_across) * (s - mean_across);
  est.collinear = var_across <= 1e-12 * static_cast<double>(across.size());
  if (est.collinear) est.left_length = est.right_length = 0.0;

  auto& sk = est.skeleton;
  sk.nose = centroid + est.front_extent * dn;
  sk.tail = centroid - est.back_extent * dn;
  sk.wing_root = centroid;
  sk.left_tip = centroid + est.left_length * dl;
  sk.right_tip = centroid - est.right_length * dl;
  if (clip) {
    for (Vec2* p : {&sk.nose, &sk.tail, &sk.wing_root, &sk.left_tip, &sk.right_tip})
      *p = clip_to(*p, mask.cols(), mask.rows());
  }
  return est;
}

ScattererCandidates detect_scatterers(const GrayImage& normalized, const BinaryMask& mask,
                                      const DerivationConfig& cfg) {
  const GrayImage smooth = gaussian_blur(normalized, cfg.gaussian_sigma);
  const GrayImage peak = grey_dilate3x3(smooth);
  const Eigen::Index h = smooth.rows(), w = smooth.cols();

  std::vector<double> inside;
  for (Eigen::Index k = 0; k < smooth.size(); ++k)
    if (mask.data()[k]) inside.push_back(smooth.data()[k]);

  auto collect = [&](double tau, bool gated) {
    std::vector<ScattererCandidate> found;
    for (Eigen::Index y = 0; y < h; ++y)
      for (Eigen::Index x = 0; x < w; ++x) {
        const double v = smooth(y, x);
        if (gated && !mask(y, x)) continue;
        if (v >= peak(y, x) - cfg.peak_tolerance && v > tau)
          found.push_back({Vec2(static_cast<double>(x), static_cast<double>(y)), v});
      }
    return found;
  };

  ScattererCandidates out;
  std::vector<ScattererCandidate> found;
  if (!inside.empty()) {
    out.threshold = quantile(std::move(inside), 0.90);
    found = collect(out.threshold, true);
  }
  if (found.empty()) {
    out.used_fallback = true;
    out.threshold = quantile(std::vector<double>(smooth.data(), smooth.data() + smooth.size()), 0.97);
    found = collect(out.threshold, false);
  }

  std::vector<Vec2> pos(found.size());
  std::vector<double> score(found.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    pos[i] = found[i].position;
    score[i] = found[i].score;
  }
  for (std::size_t i : nms(pos, score, cfg.detection_nms_radius)) out.items.push_back(found[i]);
  return out;
}

namespace {

struct Weighted {
  Vec2 position;
  double score;
};

std::vector<Weighted> consolidate(const ScattererCandidates& cands, const DerivationConfig& cfg) {
  constexpr double kWeightGuard = 1e-6;
  const auto& items = cands.items;
  std::vector<Vec2> pos(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) pos[i] = items[i].position;
  const std::vector<int> labels = dbscan(pos, cfg.dbscan_eps, cfg.dbscan_min_points);
  const int clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

  std::vector<Weighted> out;
  if (clusters == 0) {
    for (const auto& c : items) out.push_back({c.position, c.score});
    return out;
  }
  for (int k = 0; k < clusters; ++k) {
    Vec2 sum = Vec2::Zero();
    double wsum = 0.0, smax = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < items.size(); ++j) {
      if (labels[j] != k) continue;
      const double wj = items[j].score + kWeightGuard;
      sum += wj * items[j].position;
      wsum += wj;
      smax = std::max(smax, items[j].score);
    }
    out.push_back({sum / wsum, smax});
  }
  std::vector<std::size_t> noise;
  for (std::size_t j = 0; j < items.size(); ++j)
    if (labels[j] == kNoise) noise.push_back(j);
  std::stable_sort(noise.begin(), noise.end(),
                   [&](std::size_t a, std::size_t b) { return items[a].score > items[b].score; });
  const std::size_t keep = std::min(noise.size(), static_cast<std::size_t>(std::max(0, cfg.noise_keep)));
  for (std::size_t i = 0; i < keep; ++i) out.push_back({items[noise[i]].position, items[noise[i]].score});
  return out;
}

std::pair<ScattererSet, std::vector<double>> cluster_with_scores(const ScattererCandidates& cands,
                                                                 const DerivationConfig& cfg) {
  const std::vector<Weighted> merged = consolidate(cands, cfg);
  std::vector<Vec2> pos(merged.size());
  std::vector<double> score(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    pos[i] = merged[i].position;
    score[i] = merged[i].score;
  }
  const auto kept = nms(pos, score, cfg.nms_radius, static_cast<std::size_t>(std::max(0, cfg.max_scatterers)));
  double top = 0.0;
  for (std::size_t i : kept) top = std::max(top, score[i]);

  ScattererSet set;
  std::vector<double> raw;
  for (std::size_t i : kept) {
    set.push_back({pos[i], top > 0.0 ? std::clamp(score[i] / top, 0.0, 1.0) : 0.0});
    raw.push_back(score[i]);
  }
  return {std::move(set), std::move(raw)};
}

}  // namespace

ScattererSet cluster_scatterers(const ScattererCandidates& candidates, const DerivationConfig& cfg) {
  return cluster_with_scores(candidates, cfg).first;
}

Derivation derive(const GrayImage& img, const ImagingParams& params, const DerivationConfig& cfg) {
  Derivation d;
  const GrayImage norm = normalize(img, cfg.log_compression);
  d.mask = extract_mask(norm, cfg);
  d.pose = estimate_pose(d.mask, params.azimuth_deg, cfg);
  d.candidates = detect_scatterers(norm, d.mask, cfg);
  auto [set, raw] = cluster_with_scores(d.candidates, cfg);

  d.gecm.skeleton = d.pose.skeleton;
  d.gecm.scatterers = std::move(set);
  d.raw_scores = std::move(raw);
  d.gecm.canvas_height = static_cast<int>(img.rows());
  d.gecm.canvas_width = static_cast<int>(img.cols());
  d.gecm.provenance = Provenance::DerivedFromImage;
  return d;
}

}  // namespace gecm
