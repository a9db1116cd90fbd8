#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gecm/config.hpp"
#include "gecm/core.hpp"
#include "json.hpp"

namespace gecm {

/// One manifest row; numeric fields stay textual until validation so that a
/// bad value fails its row rather than the whole manifest.
struct ManifestRow {
  std::size_t line = 0;
  std::string image_path;
  std::optional<std::string> class_label;
  std::optional<std::string> azimuth_deg;
  std::optional<std::string> depression_deg;
  std::optional<std::string> polarization;
  std::optional<std::string> band_label;
  std::optional<std::string> resolution_m_per_px;
  std::optional<std::string> wavelength_m;
};

/// CSV with a header row (image_path and azimuth_deg required) or JSON-lines,
/// chosen by extension (.csv, .jsonl/.ndjson). Throws Error{ManifestParseError}.
std::vector<ManifestRow> load_manifest(const std::filesystem::path& path);
std::vector<ManifestRow> parse_manifest_csv(std::string_view text);
std::vector<ManifestRow> parse_manifest_jsonl(std::string_view text);

/// Splits one CSV record; double quotes delimit fields and "" escapes a quote.
std::vector<std::string> split_csv_line(std::string_view line);

/// Row fields plus defaults -> validated params. Throws Error.
ImagingParams row_params(const ManifestRow& row, const ParamDefaults& defaults);

struct GridSpec {
  double azimuth_start = 0.0;
  double azimuth_stop = 350.0;  // inclusive
  double azimuth_step = 10.0;
  std::vector<double> depressions{20, 30, 40, 50, 60, 70};
  std::vector<std::string> polarizations{"HH"};
  double wavelength_m = 0.03;
  double resolution_m_per_px = 0.3;
  std::optional<std::string> band_label;
  std::optional<std::string> class_label;
};

struct GridCell {
  ImagingParams params;
  std::string stem;  // az{AAA}_dep{DD}_{POL}
};

/// Expands and validates a grid. Throws Error{InvalidGrid} for a non-positive
/// step, empty lists or two cells sharing a file name, and the params errors
/// for out-of-domain cells, all before anything is rendered.
std::vector<GridCell> expand_grid(const GridSpec& spec);
std::string cell_stem(double azimuth_deg, double depression_deg, Polarization pol);

struct BatchReport {
  nlohmann::ordered_json json;  // summary.json / index.json content
  std::size_t ok = 0;
  std::size_t failed = 0;
  bool success() const { return failed == 0; }
};

/// One GECM raster and sidecar per manifest row into out_dir plus summary.json.
/// Row failures are recorded and do not stop the batch.
BatchReport run_derive(const std::filesystem::path& manifest, const std::filesystem::path& out_dir,
                       const Config& cfg, int workers = 1);

/// Renders one mesh; writes `out_png` and its .json sidecar, returns the sidecar path.
std::filesystem::path run_render(const std::filesystem::path& mesh, const ImagingParams& params,
                                 const std::filesystem::path& out_png, const Config& cfg,
                                 const std::optional<std::filesystem::path>& paths_jsonl = std::nullopt);

/// Every grid cell into out_dir plus index.json. Output bytes do not depend on `workers`.
BatchReport run_grid(const std::filesystem::path& mesh, const GridSpec& spec, const std::filesystem::path& out_dir,
                     const Config& cfg, int workers = 1);

/// Human-readable sidecar summary.
std::string describe_sidecar(const nlohmann::ordered_json& sidecar);

/// Config from an explicit path, else $GECM_CONFIG, else defaults; then
/// key=value overrides in order.
Config resolve_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides);

nlohmann::ordered_json error_json(const Error& e);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

}  // namespace gecm
