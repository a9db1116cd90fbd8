#include "gecm/pipeline.hpp"

#include <cmath>

namespace gecm {

using nlohmann::ordered_json;

TriangleMesh scene_for(const TriangleMesh& mesh, const RadarFrame& frame) { return transform(mesh, frame.azimuth); }

ordered_json params_to_json(const ImagingParams& p) {
  ordered_json j;
  j["azimuth_deg"] = p.azimuth_deg;
  j["depression_deg"] = p.depression_deg;
  j["wavelength_m"] = p.wavelength_m;
  j["polarization"] = std::string(to_string(p.polarization));
  j["resolution_m_per_px"] = p.resolution_m_per_px;
  j["band_label"] = p.band_label ? ordered_json(*p.band_label) : ordered_json(nullptr);
  j["class_label"] = p.class_label ? ordered_json(*p.class_label) : ordered_json(nullptr);
  return j;
}

ordered_json decibel_json(double weight, double max_weight) {
  if (!(weight > 0.0) || !(max_weight > 0.0)) return nullptr;
  return 10.0 * std::log10(weight / max_weight);
}

namespace {

ordered_json point_json(const Vec2& p) { return ordered_json::array({p.x(), p.y()}); }

ordered_json header(Provenance prov, const ImagingParams& params, const Config& cfg, int width, int height) {
  ordered_json j;
  j["tool"] = "gecm";
  j["version"] = std::string(kVersion);
  j["provenance"] = std::string(to_string(prov));
  j["params"] = params_to_json(params);
  j["text_condition"] = format_text_condition(params);
  j["canvas"] = {{"width", width}, {"height", height}};
  j["config"] = to_json(cfg);
  return j;
}

}  // namespace

RenderResult render_from_mesh(const TriangleMesh& mesh, const ImagingParams& raw_params, const Config& cfg) {
  const ImagingParams params = validate_params(raw_params);
  RenderResult out;
  out.frame = radar_frame(params);
  const TriangleMesh scene = scene_for(mesh, out.frame);

  std::optional<Vec3> hint;
  if (cfg.pose3d.orient_by_azimuth) hint = out.frame.azimuth * Vec3(-1.0, 0.0, 0.0);
  out.pose = extract_pose_3d(scene, cfg.pose3d, hint);

  out.projector = Projector::fit(scene, params.depression_deg, params.resolution_m_per_px, cfg.raster);
  const auto keypoints = out.pose.skeleton.points();
  std::array<Vec2, 5> px;
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    const Pixel p = out.projector(keypoints[i]);
    px[i] = Vec2(p.x, p.y);
    out.keypoint_clipped[i] = p.clipped;
  }
  out.gecm.skeleton = {px[0], px[1], px[2], px[3], px[4]};

  const Bvh bvh(scene);
  const std::vector<RayPath> paths = trace(scene, bvh, out.frame.sensor_look, params.wavelength_m, cfg.trace);
  const BinGrid grid = aggregate(paths, out.projector, cfg.trace, cfg.selection.bin_size);
  out.path_count = paths.size();
  out.bin_count = grid.bins.size();
  for (const auto& b : grid.bins)
    if (grid.decibels(b) >= cfg.selection.threshold_db) ++out.above_threshold;
  out.selected = select_scatterers(grid, cfg.selection.threshold_db, cfg.selection.nms_radius,
                                   cfg.selection.max_scatterers);

  const double s_max = grid.max_score();
  std::vector<Pixel> scatter_px;
  for (const auto& s : out.selected) {
    const Pixel p = out.projector.rasterize(s.position);
    scatter_px.push_back(p);
    out.gecm.scatterers.push_back({Vec2(p.x, p.y), s.score / s_max});
  }
  out.gecm.canvas_width = cfg.raster.canvas_width;
  out.gecm.canvas_height = cfg.raster.canvas_height;
  out.gecm.provenance = Provenance::RenderedFromMesh;
  out.raster = render_gecm(out.gecm, palette(), cfg.raster.kappa);

  ordered_json j = header(Provenance::RenderedFromMesh, params, cfg, out.gecm.canvas_width, out.gecm.canvas_height);
  j["projection"] = {{"model", "orthographic slant plane"},
                     {"scale_px_per_m", out.projector.scale()},
                     {"nominal_scale_px_per_m", out.projector.nominal_scale()},
                     {"shrunk_to_fit", out.projector.shrunk()},
                     {"footprint_center", point_json(out.projector.center())},
                     {"sensor_look", ordered_json::array({out.frame.sensor_look.x(), out.frame.sensor_look.y(),
                                                          out.frame.sensor_look.z()})}};
  ordered_json kp = ordered_json::object();
  for (std::size_t i = 0; i < px.size(); ++i)
    kp[std::string(kKeypointNames[i])] = {{"pixel", point_json(px[i])}, {"clipped", out.keypoint_clipped[i]}};
  j["keypoints"] = kp;
  ordered_json sc = ordered_json::array();
  for (std::size_t i = 0; i < out.selected.size(); ++i) {
    const auto& s = out.selected[i];
    const double r = out.gecm.scatterers[i].intensity;
    sc.push_back({{"pixel", point_json(out.gecm.scatterers[i].position)},
                  {"image_plane", point_json(s.position)},
                  {"clipped", scatter_px[i].clipped},
                  {"weight", s.weight},
                  {"score", s.score},
                  {"db", s.decibels},
                  {"intensity", r},
                  {"rendered_intensity", scatterer_intensity(r, cfg.raster.kappa)},
                  {"gray", scatterer_gray(r, cfg.raster.kappa)}});
  }
  j["scatterers"] = sc;
  j["stats"] = {{"faces", scene.face_count()},
                {"paths", out.path_count},
                {"bins", out.bin_count},
                {"above_threshold", out.above_threshold},
                {"selected", out.selected.size()},
                {"pose_rebalanced", out.pose.rebalanced}};
  out.sidecar = std::move(j);
  return out;
}

ordered_json derived_sidecar(const Derivation& d, const ImagingParams& params, const Config& cfg) {
  ordered_json j = header(Provenance::DerivedFromImage, params, cfg, d.gecm.canvas_width, d.gecm.canvas_height);
  ordered_json kp = ordered_json::object();
  const auto pts = d.gecm.skeleton.points();
  for (std::size_t i = 0; i < pts.size(); ++i)
    kp[std::string(kKeypointNames[i])] = {
        {"pixel", ordered_json::array({round_px(pts[i].x()), round_px(pts[i].y())})},
        {"position", point_json(pts[i])}};
  j["keypoints"] = kp;
  double top = 0.0;
  for (double s : d.raw_scores) top = std::max(top, s);
  ordered_json sc = ordered_json::array();
  for (std::size_t i = 0; i < d.gecm.scatterers.size(); ++i) {
    const auto& s = d.gecm.scatterers[i];
    sc.push_back({{"pixel", ordered_json::array({round_px(s.position.x()), round_px(s.position.y())})},
                  {"position", point_json(s.position)},
                  {"weight", d.raw_scores[i]},
                  {"db", decibel_json(d.raw_scores[i], top)},
                  {"intensity", s.intensity},
                  {"rendered_intensity", scatterer_intensity(s.intensity, cfg.raster.kappa)},
                  {"gray", scatterer_gray(s.intensity, cfg.raster.kappa)}});
  }
  j["scatterers"] = sc;
  j["stats"] = {{"mask_pixels", static_cast<long long>(d.mask.cast<long long>().sum())},
                {"candidates", d.candidates.items.size()},
                {"threshold", d.candidates.threshold},
                {"used_fallback", d.candidates.used_fallback},
                {"used_pca", d.pose.used_pca},
                {"collinear", d.pose.collinear},
                {"selected", d.gecm.scatterers.size()}};
  return j;
}

}  // namespace gecm
