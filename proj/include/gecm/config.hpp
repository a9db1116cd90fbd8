#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "gecm/core.hpp"
#include "gecm/image.hpp"
#include "json.hpp"

namespace gecm {

/// Knobs of the image-to-GECM derivation.
struct DerivationConfig {
  bool log_compression = false;
  double center_penalty = 5.0;  // lambda: area units per pixel of centroid offset
  ClaheOptions clahe{};
  double gaussian_sigma = 1.5;
  double peak_tolerance = 1e-3;  // delta in the local-maximum test
  double detection_nms_radius = 2.0;
  double nms_radius = 4.0;  // final NMS
  double dbscan_eps = 3.0;
  int dbscan_min_points = 2;
  int max_scatterers = 20;
  int noise_keep = 3;
  int min_foreground = 10;
};

/// Multi-bounce tracing and path scoring.
struct TraceConfig {
  int max_bounces = 3;
  std::optional<double> roughness_m;  // unset: wavelength / 20
  double fresnel_power = 0.8;
  double cosine_floor = 0.05;
  double multibounce_gain = 0.3;
  double align_exponent = 8.0;
  int rays_per_side = 256;
  double launch_margin = 0.05;
  double energy_floor = 1e-6;
  int threads = 1;

  double roughness_for(double wavelength_m) const { return roughness_m.value_or(wavelength_m / 20.0); }
};

/// Throws Error{OutOfRange} when a TraceConfig field leaves its domain.
void validate(const TraceConfig& cfg);

struct SelectionConfig {
  double threshold_db = -20.0;
  double nms_radius = 4.0;
  int max_scatterers = 20;
  double bin_size = 2.0;
};

struct RasterConfig {
  int canvas_width = 256;
  int canvas_height = 256;
  double margin = 0.10;
  double kappa = 100.0;
};

struct Pose3dConfig {
  int slices = 64;
  int tip_window = 2;
  int tip_wide_window = 4;
  double balance_threshold = 0.25;
  double tip_tolerance = 0.02;  // fraction of the extreme support used for tip averaging
  bool orient_by_azimuth = true;
  int surface_samples = 20000;
};

/// Parameter values used when a manifest row or CLI call leaves them out.
struct ParamDefaults {
  double depression_deg = 30.0;
  double wavelength_m = 0.03;
  std::string polarization = "HH";
  double resolution_m_per_px = 0.3;
};

struct Config {
  DerivationConfig derivation;
  TraceConfig trace;
  SelectionConfig selection;
  RasterConfig raster;
  Pose3dConfig pose3d;
  ParamDefaults defaults;
};

/// Sets one dotted key such as "trace.max_bounces". Throws Error{ParseError}
/// for unknown keys or unparsable values.
void set_config_value(Config& cfg, std::string_view key, std::string_view value);

/// Reads a key=value document. Lines may be blank or start with '#';
/// "[section]" headers prefix later keys with "section.".
Config load_config(const std::filesystem::path& path);
Config parse_config(std::string_view text);

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnvVar = "GECM_CONFIG";

nlohmann::ordered_json to_json(const Config& cfg);

}  // namespace gecm
