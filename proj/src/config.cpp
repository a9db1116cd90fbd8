#include "gecm/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace gecm {

void validate(const TraceConfig& cfg) {
  auto fail = [](const char* field, const char* bound) {
    throw Error(ErrorCode::OutOfRange, std::string(field) + " must be " + bound, field);
  };
  if (cfg.max_bounces < 1) fail("trace.max_bounces", ">= 1");
  if (!(cfg.fresnel_power > 0.0 && cfg.fresnel_power <= 1.0)) fail("trace.fresnel_power", "in (0, 1]");
  if (!(cfg.cosine_floor > 0.0 && cfg.cosine_floor < 0.5)) fail("trace.cosine_floor", "in (0, 0.5)");
  if (!(cfg.multibounce_gain >= 0.0)) fail("trace.multibounce_gain", ">= 0");
  if (cfg.roughness_m && !(*cfg.roughness_m >= 0.0)) fail("trace.roughness_m", ">= 0");
  if (cfg.rays_per_side < 1) fail("trace.rays_per_side", ">= 1");
  if (cfg.threads < 1) fail("trace.threads", ">= 1");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  try {
    std::size_t used = 0;
    const double d = std::stod(s, &used);
    if (used == s.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, "value '" + s + "' for " + std::string(key) + " is not a number",
              std::string(key));
}

int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw Error(ErrorCode::ParseError, "value '" + std::string(v) + "' for " + std::string(key) + " is not an integer",
                std::string(key));
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::ParseError, "value '" + std::string(v) + "' for " + std::string(key) + " is not a boolean",
              std::string(key));
}

using Setter = std::function<void(Config&, std::string_view, std::string_view)>;

template <typename T>
Setter dbl(T Config::*section, double T::*field) {
  return [=](Config& c, std::string_view k, std::string_view v) { (c.*section).*field = to_double(k, v); };
}
template <typename T>
Setter integer(T Config::*section, int T::*field) {
  return [=](Config& c, std::string_view k, std::string_view v) { (c.*section).*field = to_int(k, v); };
}
template <typename T>
Setter boolean(T Config::*section, bool T::*field) {
  return [=](Config& c, std::string_view k, std::string_view v) { (c.*section).*field = to_bool(k, v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  using C = Config;
  static const std::map<std::string, Setter, std::less<>> table = {
      {"derivation.log_compression", boolean(&C::derivation, &DerivationConfig::log_compression)},
      {"derivation.center_penalty", dbl(&C::derivation, &DerivationConfig::center_penalty)},
      {"derivation.clahe_tiles_x",
       [](C& c, std::string_view k, std::string_view v) { c.derivation.clahe.tiles_x = to_int(k, v); }},
      {"derivation.clahe_tiles_y",
       [](C& c, std::string_view k, std::string_view v) { c.derivation.clahe.tiles_y = to_int(k, v); }},
      {"derivation.clahe_clip_limit",
       [](C& c, std::string_view k, std::string_view v) { c.derivation.clahe.clip_limit = to_double(k, v); }},
      {"derivation.gaussian_sigma", dbl(&C::derivation, &DerivationConfig::gaussian_sigma)},
      {"derivation.peak_tolerance", dbl(&C::derivation, &DerivationConfig::peak_tolerance)},
      {"derivation.detection_nms_radius", dbl(&C::derivation, &DerivationConfig::detection_nms_radius)},
      {"derivation.nms_radius", dbl(&C::derivation, &DerivationConfig::nms_radius)},
      {"derivation.dbscan_eps", dbl(&C::derivation, &DerivationConfig::dbscan_eps)},
      {"derivation.dbscan_min_points", integer(&C::derivation, &DerivationConfig::dbscan_min_points)},
      {"derivation.max_scatterers", integer(&C::derivation, &DerivationConfig::max_scatterers)},
      {"derivation.noise_keep", integer(&C::derivation, &DerivationConfig::noise_keep)},
      {"derivation.min_foreground", integer(&C::derivation, &DerivationConfig::min_foreground)},
      {"trace.max_bounces", integer(&C::trace, &TraceConfig::max_bounces)},
      {"trace.roughness_m",
       [](C& c, std::string_view k, std::string_view v) { c.trace.roughness_m = to_double(k, v); }},
      {"trace.fresnel_power", dbl(&C::trace, &TraceConfig::fresnel_power)},
      {"trace.cosine_floor", dbl(&C::trace, &TraceConfig::cosine_floor)},
      {"trace.multibounce_gain", dbl(&C::trace, &TraceConfig::multibounce_gain)},
      {"trace.align_exponent", dbl(&C::trace, &TraceConfig::align_exponent)},
      {"trace.rays_per_side", integer(&C::trace, &TraceConfig::rays_per_side)},
      {"trace.launch_margin", dbl(&C::trace, &TraceConfig::launch_margin)},
      {"trace.energy_floor", dbl(&C::trace, &TraceConfig::energy_floor)},
      {"trace.threads", integer(&C::trace, &TraceConfig::threads)},
      {"selection.threshold_db", dbl(&C::selection, &SelectionConfig::threshold_db)},
      {"selection.nms_radius", dbl(&C::selection, &SelectionConfig::nms_radius)},
      {"selection.max_scatterers", integer(&C::selection, &SelectionConfig::max_scatterers)},
      {"selection.bin_size", dbl(&C::selection, &SelectionConfig::bin_size)},
      {"raster.canvas_width", integer(&C::raster, &RasterConfig::canvas_width)},
      {"raster.canvas_height", integer(&C::raster, &RasterConfig::canvas_height)},
      {"raster.margin", dbl(&C::raster, &RasterConfig::margin)},
      {"raster.kappa", dbl(&C::raster, &RasterConfig::kappa)},
      {"pose3d.slices", integer(&C::pose3d, &Pose3dConfig::slices)},
      {"pose3d.tip_window", integer(&C::pose3d, &Pose3dConfig::tip_window)},
      {"pose3d.tip_wide_window", integer(&C::pose3d, &Pose3dConfig::tip_wide_window)},
      {"pose3d.balance_threshold", dbl(&C::pose3d, &Pose3dConfig::balance_threshold)},
      {"pose3d.tip_tolerance", dbl(&C::pose3d, &Pose3dConfig::tip_tolerance)},
      {"pose3d.orient_by_azimuth", boolean(&C::pose3d, &Pose3dConfig::orient_by_azimuth)},
      {"pose3d.surface_samples", integer(&C::pose3d, &Pose3dConfig::surface_samples)},
      {"defaults.depression_deg", dbl(&C::defaults, &ParamDefaults::depression_deg)},
      {"defaults.wavelength_m", dbl(&C::defaults, &ParamDefaults::wavelength_m)},
      {"defaults.polarization",
       [](C& c, std::string_view, std::string_view v) { c.defaults.polarization = std::string(v); }},
      {"defaults.resolution_m_per_px", dbl(&C::defaults, &ParamDefaults::resolution_m_per_px)},
  };
  return table;
}

}  // namespace

void set_config_value(Config& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw Error(ErrorCode::ParseError, "unknown config key '" + std::string(key) + "'", std::string(key));
  it->second(cfg, key, value);
}

Config parse_config(std::string_view text) {
  Config cfg;
  std::istringstream in{std::string(text)};
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw Error(ErrorCode::ParseError, "bad section header on line " + std::to_string(lineno));
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "expected key = value on line " + std::to_string(lineno));
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    set_config_value(cfg, key, trim(std::string_view(t).substr(eq + 1)));
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open config " + path.string(), "config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

nlohmann::ordered_json to_json(const Config& c) {
  nlohmann::ordered_json j;
  const auto& d = c.derivation;
  j["derivation"] = {{"log_compression", d.log_compression},
                     {"center_penalty", d.center_penalty},
                     {"clahe_tiles_x", d.clahe.tiles_x},
                     {"clahe_tiles_y", d.clahe.tiles_y},
                     {"clahe_clip_limit", d.clahe.clip_limit},
                     {"gaussian_sigma", d.gaussian_sigma},
                     {"peak_tolerance", d.peak_tolerance},
                     {"detection_nms_radius", d.detection_nms_radius},
                     {"nms_radius", d.nms_radius},
                     {"dbscan_eps", d.dbscan_eps},
                     {"dbscan_min_points", d.dbscan_min_points},
                     {"max_scatterers", d.max_scatterers},
                     {"noise_keep", d.noise_keep},
                     {"min_foreground", d.min_foreground}};
  const auto& t = c.trace;
  j["trace"] = {{"max_bounces", t.max_bounces},
                {"roughness_m", t.roughness_m ? nlohmann::ordered_json(*t.roughness_m) : nlohmann::ordered_json("wavelength/20")},
                {"fresnel_power", t.fresnel_power},
                {"cosine_floor", t.cosine_floor},
                {"multibounce_gain", t.multibounce_gain},
                {"align_exponent", t.align_exponent},
                {"rays_per_side", t.rays_per_side},
                {"launch_margin", t.launch_margin},
                {"energy_floor", t.energy_floor}};
  const auto& s = c.selection;
  j["selection"] = {{"threshold_db", s.threshold_db},
                    {"nms_radius", s.nms_radius},
                    {"max_scatterers", s.max_scatterers},
                    {"bin_size", s.bin_size}};
  const auto& r = c.raster;
  j["raster"] = {{"canvas_width", r.canvas_width},
                 {"canvas_height", r.canvas_height},
                 {"margin", r.margin},
                 {"kappa", r.kappa}};
  const auto& p = c.pose3d;
  j["pose3d"] = {{"slices", p.slices},
                 {"tip_window", p.tip_window},
                 {"tip_wide_window", p.tip_wide_window},
                 {"balance_threshold", p.balance_threshold},
                 {"tip_tolerance", p.tip_tolerance},
                 {"orient_by_azimuth", p.orient_by_azimuth},
                 {"surface_samples", p.surface_samples}};
  const auto& df = c.defaults;
  j["defaults"] = {{"depression_deg", df.depression_deg},
                   {"wavelength_m", df.wavelength_m},
                   {"polarization", df.polarization},
                   {"resolution_m_per_px", df.resolution_m_per_px}};
  return j;
}

}  // namespace gecm
