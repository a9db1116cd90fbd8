#include "gecm/cli_io.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "gecm/derivation.hpp"
#include "gecm/pipeline.hpp"
#include "gecm/png_io.hpp"
#include "gecm/scattering.hpp"

namespace gecm {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& path, ErrorCode missing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(missing, "cannot open " + path.string(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    out.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

double parse_number(const std::string& text, std::string_view field) {
  const std::string_view t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw Error(ErrorCode::ParseError, "field " + std::string(field) + " is not a number: '" + text + "'",
                std::string(field));
  return v;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

ordered_json report_header(std::string_view command) {
  ordered_json j;
  j["tool"] = "gecm";
  j["version"] = std::string(kVersion);
  j["command"] = std::string(command);
  return j;
}

struct Outcome {
  bool ok = false;
  ordered_json error;
};

template <typename Fn>
Outcome guarded(Fn&& fn) {
  Outcome o;
  try {
    fn();
    o.ok = true;
  } catch (const Error& e) {
    o.error = error_json(e);
  } catch (const std::exception& e) {
    o.error = {{"code", "InternalError"}, {"message", e.what()}};
  }
  return o;
}

}  // namespace

ordered_json error_json(const Error& e) {
  ordered_json j{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (!e.field().empty()) j["field"] = e.field();
  return j;
}

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string(), path.string());
  out << j.dump(2) << '\n';
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw Error(ErrorCode::ManifestParseError, "unterminated quoted field");
  for (auto& f : fields) f = std::string(trim(f));
  return fields;
}

namespace {

const std::vector<std::string_view> kColumns = {"image_path",   "class_label", "azimuth_deg",
                                                "depression_deg", "polarization", "band_label",
                                                "resolution_m_per_px", "wavelength_m"};

void assign(ManifestRow& row, std::string_view key, std::string value) {
  if (key == "image_path") row.image_path = std::move(value);
  else if (key == "class_label") row.class_label = std::move(value);
  else if (key == "azimuth_deg") row.azimuth_deg = std::move(value);
  else if (key == "depression_deg") row.depression_deg = std::move(value);
  else if (key == "polarization") row.polarization = std::move(value);
  else if (key == "band_label") row.band_label = std::move(value);
  else if (key == "resolution_m_per_px") row.resolution_m_per_px = std::move(value);
  else if (key == "wavelength_m") row.wavelength_m = std::move(value);
}

void check_row(const ManifestRow& row) {
  const std::string where = "line " + std::to_string(row.line);
  if (row.image_path.empty()) throw Error(ErrorCode::ManifestParseError, where + ": empty image_path", "image_path");
  if (!row.azimuth_deg) throw Error(ErrorCode::ManifestParseError, where + ": missing azimuth_deg", "azimuth_deg");
}

}  // namespace

std::vector<ManifestRow> parse_manifest_csv(std::string_view text) {
  const auto lines = lines_of(text);
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw Error(ErrorCode::ManifestParseError, "manifest has no header");
  const std::vector<std::string> header = split_csv_line(lines[i]);
  std::set<std::string> seen;
  for (const auto& h : header) {
    if (std::find(kColumns.begin(), kColumns.end(), h) == kColumns.end())
      throw Error(ErrorCode::ManifestParseError, "unknown manifest column '" + h + "'", h);
    if (!seen.insert(h).second) throw Error(ErrorCode::ManifestParseError, "duplicate column '" + h + "'", h);
  }
  for (std::string_view required : {"image_path", "azimuth_deg"})
    if (!seen.count(std::string(required)))
      throw Error(ErrorCode::ManifestParseError, "missing required column " + std::string(required),
                  std::string(required));

  std::vector<ManifestRow> rows;
  for (++i; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(lines[i]);
    if (fields.size() != header.size())
      throw Error(ErrorCode::ManifestParseError, "line " + std::to_string(i + 1) + ": expected " +
                                                     std::to_string(header.size()) + " fields, got " +
                                                     std::to_string(fields.size()));
    ManifestRow row;
    row.line = i + 1;
    for (std::size_t k = 0; k < header.size(); ++k)
      if (!fields[k].empty() || header[k] == "image_path") assign(row, header[k], fields[k]);
    check_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ManifestRow> parse_manifest_jsonl(std::string_view text) {
  std::vector<ManifestRow> rows;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::string where = "line " + std::to_string(i + 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ManifestParseError, where + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ManifestParseError, where + ": expected a JSON object");
    ManifestRow row;
    row.line = i + 1;
    for (const auto& [key, value] : j.items()) {
      if (std::find(kColumns.begin(), kColumns.end(), key) == kColumns.end())
        throw Error(ErrorCode::ManifestParseError, where + ": unknown key '" + key + "'", key);
      if (value.is_null()) continue;
      if (value.is_string()) {
        assign(row, key, value.get<std::string>());
      } else if (value.is_number()) {
        assign(row, key, value.dump());
      } else {
        throw Error(ErrorCode::ManifestParseError, where + ": key '" + key + "' must be a string or number", key);
      }
    }
    check_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ManifestRow> load_manifest(const fs::path& path) {
  const std::string text = read_text(path, ErrorCode::FileNotFound);
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".csv") return parse_manifest_csv(text);
  if (ext == ".jsonl" || ext == ".ndjson") return parse_manifest_jsonl(text);
  throw Error(ErrorCode::ManifestParseError, "manifest extension must be .csv, .jsonl or .ndjson", path.string());
}

ImagingParams row_params(const ManifestRow& row, const ParamDefaults& defaults) {
  ParamRecord r;
  r.azimuth_deg = parse_number(row.azimuth_deg.value_or(""), "azimuth_deg");
  r.depression_deg = row.depression_deg ? parse_number(*row.depression_deg, "depression_deg") : defaults.depression_deg;
  r.wavelength_m = row.wavelength_m ? parse_number(*row.wavelength_m, "wavelength_m") : defaults.wavelength_m;
  r.resolution_m_per_px =
      row.resolution_m_per_px ? parse_number(*row.resolution_m_per_px, "resolution_m_per_px") : defaults.resolution_m_per_px;
  r.polarization = row.polarization.value_or(defaults.polarization);
  r.class_label = row.class_label;
  r.band_label = row.band_label;
  return validate_params(r);
}

std::string cell_stem(double azimuth_deg, double depression_deg, Polarization pol) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "az%03ld_dep%02ld_%s", std::lround(azimuth_deg), std::lround(depression_deg),
                std::string(to_string(pol)).c_str());
  return buf;
}

std::vector<GridCell> expand_grid(const GridSpec& spec) {
  if (!(spec.azimuth_step > 0.0) || !std::isfinite(spec.azimuth_step))
    throw Error(ErrorCode::InvalidGrid, "azimuth step must be positive", "azimuth_step");
  if (!(spec.azimuth_stop >= spec.azimuth_start))
    throw Error(ErrorCode::InvalidGrid, "azimuth stop precedes start", "azimuth_stop");
  if (spec.depressions.empty()) throw Error(ErrorCode::InvalidGrid, "no depression angles", "depressions");
  if (spec.polarizations.empty()) throw Error(ErrorCode::InvalidGrid, "no polarizations", "polarizations");
  const double span = (spec.azimuth_stop - spec.azimuth_start) / spec.azimuth_step;
  if (span > 1e6) throw Error(ErrorCode::InvalidGrid, "too many azimuth samples", "azimuth_step");
  const auto n_az = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;

  std::vector<GridCell> cells;
  std::map<std::string, std::size_t> names;
  for (std::size_t i = 0; i < n_az; ++i) {
    const double az = spec.azimuth_start + static_cast<double>(i) * spec.azimuth_step;
    for (double dep : spec.depressions)
      for (const auto& pol : spec.polarizations) {
        ParamRecord r;
        r.azimuth_deg = az;
        r.depression_deg = dep;
        r.wavelength_m = spec.wavelength_m;
        r.resolution_m_per_px = spec.resolution_m_per_px;
        r.polarization = pol;
        r.band_label = spec.band_label;
        r.class_label = spec.class_label;
        GridCell cell{validate_params(r), {}};
        cell.stem = cell_stem(cell.params.azimuth_deg, cell.params.depression_deg, cell.params.polarization);
        if (!names.emplace(cell.stem, cells.size()).second)
          throw Error(ErrorCode::InvalidGrid, "two grid cells map to " + cell.stem, "azimuth_step");
        cells.push_back(std::move(cell));
      }
  }
  return cells;
}

BatchReport run_derive(const fs::path& manifest, const fs::path& out_dir, const Config& cfg, int workers) {
  const std::vector<ManifestRow> rows = load_manifest(manifest);
  fs::create_directories(out_dir);
  const fs::path base = manifest.parent_path();

  std::vector<ordered_json> entries(rows.size());
  std::vector<char> ok(rows.size(), 0);
  parallel_for(rows.size(), workers, [&](std::size_t i) {
    const ManifestRow& row = rows[i];
    char stem[32];
    std::snprintf(stem, sizeof stem, "row%04zu", i);
    ordered_json e{{"row", i}, {"line", row.line}, {"image_path", row.image_path}};
    const Outcome o = guarded([&] {
      const ImagingParams params = row_params(row, cfg.defaults);
      const fs::path image = fs::path(row.image_path).is_absolute() ? fs::path(row.image_path) : base / row.image_path;
      if (!fs::exists(image)) throw Error(ErrorCode::FileNotFound, "image not found: " + image.string(), "image_path");
      const GrayImage img = read_png_gray(image);
      const Derivation d = derive(img, params, cfg.derivation);
      ordered_json side = derived_sidecar(d, params, cfg);
      side["source"] = row.image_path;
      write_png(out_dir / (std::string(stem) + ".png"), render_gecm(d.gecm, palette(), cfg.raster.kappa));
      write_json(out_dir / (std::string(stem) + ".json"), side);
    });
    if (o.ok) {
      e["status"] = "ok";
      e["raster"] = std::string(stem) + ".png";
      e["sidecar"] = std::string(stem) + ".json";
    } else {
      e["status"] = "error";
      e["error"] = o.error;
    }
    ok[i] = o.ok;
    entries[i] = std::move(e);
  });

  BatchReport rep;
  rep.json = report_header("derive");
  rep.json["manifest"] = manifest.filename().string();
  rep.json["rows"] = ordered_json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rep.json["rows"].push_back(entries[i]);
    ok[i] ? ++rep.ok : ++rep.failed;
  }
  rep.json["counts"] = {{"total", rows.size()}, {"ok", rep.ok}, {"error", rep.failed}};
  write_json(out_dir / "summary.json", rep.json);
  return rep;
}

namespace {

void write_paths_jsonl(const fs::path& path, const std::vector<RayPath>& paths, const TraceConfig& cfg) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string(), path.string());
  for (const auto& p : paths) {
    nlohmann::ordered_json j{{"ray", p.ray},
                             {"bounces", p.bounces()},
                             {"faces", p.faces},
                             {"energies", p.energies},
                             {"length_in", p.length_in},
                             {"length_out", p.length_out},
                             {"align_weight", p.align_weight},
                             {"terminal", {p.terminal.x(), p.terminal.y(), p.terminal.z()}},
                             {"saliency", saliency(p, cfg)}};
    out << j.dump() << '\n';
  }
}

}  // namespace

fs::path run_render(const fs::path& mesh_path, const ImagingParams& params, const fs::path& out_png,
                    const Config& cfg, const std::optional<fs::path>& paths_jsonl) {
  const TriangleMesh mesh = load_mesh(mesh_path);
  const RenderResult r = render_from_mesh(mesh, params, cfg);
  ordered_json side = r.sidecar;
  side["source"] = mesh_path.filename().string();
  if (out_png.has_parent_path()) fs::create_directories(out_png.parent_path());
  fs::path sidecar = out_png;
  sidecar.replace_extension(".json");
  write_png(out_png, r.raster);
  write_json(sidecar, side);
  if (paths_jsonl) {
    const TriangleMesh scene = scene_for(mesh, r.frame);
    write_paths_jsonl(*paths_jsonl, trace(scene, r.frame.sensor_look, params.wavelength_m, cfg.trace), cfg.trace);
  }
  return sidecar;
}

BatchReport run_grid(const fs::path& mesh_path, const GridSpec& spec, const fs::path& out_dir, const Config& cfg,
                     int workers) {
  const std::vector<GridCell> cells = expand_grid(spec);
  const TriangleMesh mesh = load_mesh(mesh_path);
  fs::create_directories(out_dir);

  Config cell_cfg = cfg;
  cell_cfg.trace.threads = 1;
  std::vector<Outcome> outcomes(cells.size());
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    outcomes[i] = guarded([&] {
      const RenderResult r = render_from_mesh(mesh, cells[i].params, cell_cfg);
      ordered_json side = r.sidecar;
      side["source"] = mesh_path.filename().string();
      write_png(out_dir / (cells[i].stem + ".png"), r.raster);
      write_json(out_dir / (cells[i].stem + ".json"), side);
    });
  });

  BatchReport rep;
  rep.json = report_header("grid");
  rep.json["mesh"] = mesh_path.filename().string();
  ordered_json deps = ordered_json::array(), pols = ordered_json::array();
  for (double d : spec.depressions) deps.push_back(d);
  for (const auto& p : spec.polarizations) pols.push_back(p);
  rep.json["grid"] = {{"azimuth_start", spec.azimuth_start},
                      {"azimuth_stop", spec.azimuth_stop},
                      {"azimuth_step", spec.azimuth_step},
                      {"depressions", deps},
                      {"polarizations", pols},
                      {"wavelength_m", spec.wavelength_m},
                      {"resolution_m_per_px", spec.resolution_m_per_px}};
  rep.json["cells"] = ordered_json::array();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    ordered_json e{{"azimuth_deg", c.params.azimuth_deg},
                   {"depression_deg", c.params.depression_deg},
                   {"polarization", std::string(to_string(c.params.polarization))}};
    if (outcomes[i].ok) {
      e["status"] = "ok";
      e["raster"] = c.stem + ".png";
      e["sidecar"] = c.stem + ".json";
      ++rep.ok;
    } else {
      e["status"] = "error";
      e["error"] = outcomes[i].error;
      ++rep.failed;
    }
    rep.json["cells"].push_back(std::move(e));
  }
  rep.json["counts"] = {{"total", cells.size()}, {"ok", rep.ok}, {"error", rep.failed}};
  write_json(out_dir / "index.json", rep.json);
  return rep;
}

std::string describe_sidecar(const ordered_json& s) {
  std::ostringstream out;
  char buf[160];
  out << "provenance:     " << s.value("provenance", "?") << "  (" << s.value("tool", "?") << " "
      << s.value("version", "?") << ")\n";
  if (s.contains("source")) out << "source:         " << s["source"].get<std::string>() << "\n";
  if (s.contains("text_condition")) out << "condition:      " << s["text_condition"].get<std::string>() << "\n";
  if (s.contains("canvas"))
    out << "canvas:         " << s["canvas"].value("width", 0) << " x " << s["canvas"].value("height", 0) << "\n";
  if (s.contains("projection")) {
    const auto& p = s["projection"];
    std::snprintf(buf, sizeof buf, "projection:     %.4f px/m%s\n", p.value("scale_px_per_m", 0.0),
                  p.value("shrunk_to_fit", false) ? " (shrunk to fit)" : "");
    out << buf;
  }
  out << "keypoints:\n";
  if (s.contains("keypoints"))
    for (const auto& [name, kp] : s["keypoints"].items()) {
      const auto& px = kp["pixel"];
      std::snprintf(buf, sizeof buf, "  %-10s  (%4g, %4g)%s\n", name.c_str(), px[0].get<double>(),
                    px[1].get<double>(), kp.value("clipped", false) ? "  clipped" : "");
      out << buf;
    }
  const auto n = s.contains("scatterers") ? s["scatterers"].size() : 0;
  out << "scatterers:     " << n << "\n";
  if (n > 0) out << "      x      y    intensity      dB   gray\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& sc = s["scatterers"][i];
    const double db = sc["db"].is_number() ? sc["db"].get<double>() : -INFINITY;
    std::snprintf(buf, sizeof buf, "  %5g  %5g   %10.4f  %6.2f   %4d\n", sc["pixel"][0].get<double>(),
                  sc["pixel"][1].get<double>(), sc.value("intensity", 0.0), db, sc.value("gray", 0));
    out << buf;
  }
  if (s.contains("stats")) out << "stats:          " << s["stats"].dump() << "\n";
  return out.str();
}

Config resolve_config(const std::optional<fs::path>& path, const std::vector<std::string>& overrides) {
  Config cfg;
  if (path) {
    cfg = load_config(*path);
  } else if (const char* env = std::getenv(kConfigEnvVar); env && *env) {
    cfg = load_config(env);
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "override must be key=value: " + kv, kv);
    set_config_value(cfg, trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
  }
  return cfg;
}

}  // namespace gecm
