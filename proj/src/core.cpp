#include "gecm/core.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace gecm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnknownPolarization: return "UnknownPolarization";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::NoForeground: return "NoForeground";
    case ErrorCode::DegenerateMask: return "DegenerateMask";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::ZeroPathLength: return "ZeroPathLength";
    case ErrorCode::EmptySkeleton: return "EmptySkeleton";
    case ErrorCode::ManifestParseError: return "ManifestParseError";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, std::string field)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      field_(std::move(field)) {}

std::string_view to_string(Polarization p) {
  switch (p) {
    case Polarization::HH: return "HH";
    case Polarization::HV: return "HV";
    case Polarization::VH: return "VH";
    case Polarization::VV: return "VV";
  }
  return "HH";
}

Polarization parse_polarization(std::string_view token) {
  if (token == "HH") return Polarization::HH;
  if (token == "HV") return Polarization::HV;
  if (token == "VH") return Polarization::VH;
  if (token == "VV") return Polarization::VV;
  throw Error(ErrorCode::UnknownPolarization, "unknown polarization '" + std::string(token) + "'",
              "polarization");
}

std::string_view to_string(Provenance p) {
  return p == Provenance::DerivedFromImage ? "DerivedFromImage" : "RenderedFromMesh";
}

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  // fmod of a tiny negative value can round back up to 360
  if (w >= 360.0) w = 0.0;
  return w;
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

SinCos sincos_deg(double deg) {
  const double w = wrap_degrees(deg);
  if (w == 0.0) return {0.0, 1.0};
  if (w == 90.0) return {1.0, 0.0};
  if (w == 180.0) return {0.0, -1.0};
  if (w == 270.0) return {-1.0, 0.0};
  const double r = deg_to_rad(w);
  return {std::sin(r), std::cos(r)};
}

namespace {

void require(bool ok, const char* field, const std::string& bound) {
  if (!ok) throw Error(ErrorCode::OutOfRange, std::string(field) + " must be " + bound, field);
}

}  // namespace

ImagingParams validate_params(const ParamRecord& raw) {
  require(std::isfinite(raw.azimuth_deg), "azimuth_deg", "finite");
  require(std::isfinite(raw.depression_deg) && raw.depression_deg > 0.0 && raw.depression_deg <= 90.0,
          "depression_deg", "in (0, 90]");
  require(std::isfinite(raw.wavelength_m) && raw.wavelength_m > 0.0, "wavelength_m", "> 0");
  require(std::isfinite(raw.resolution_m_per_px) && raw.resolution_m_per_px > 0.0,
          "resolution_m_per_px", "> 0");

  ImagingParams p;
  p.azimuth_deg = wrap_degrees(raw.azimuth_deg);
  p.depression_deg = raw.depression_deg;
  p.wavelength_m = raw.wavelength_m;
  p.polarization = parse_polarization(raw.polarization);
  p.resolution_m_per_px = raw.resolution_m_per_px;
  p.band_label = raw.band_label;
  p.class_label = raw.class_label;
  return p;
}

ImagingParams validate_params(const ImagingParams& params) { return validate_params(to_record(params)); }

ParamRecord to_record(const ImagingParams& params) {
  ParamRecord r;
  r.azimuth_deg = params.azimuth_deg;
  r.depression_deg = params.depression_deg;
  r.wavelength_m = params.wavelength_m;
  r.polarization = std::string(to_string(params.polarization));
  r.resolution_m_per_px = params.resolution_m_per_px;
  r.band_label = params.band_label;
  r.class_label = params.class_label;
  return r;
}

std::string format_text_condition(const ImagingParams& p) {
  char buf[64];
  std::string out;
  if (p.class_label) out += "class=" + *p.class_label + "; ";
  std::snprintf(buf, sizeof buf, "azimuth=%.1fdeg; ", p.azimuth_deg);
  out += buf;
  std::snprintf(buf, sizeof buf, "depression=%.1fdeg; ", p.depression_deg);
  out += buf;
  out += "polarization=" + std::string(to_string(p.polarization)) + "; ";
  if (p.band_label) out += "band=" + *p.band_label + "; ";
  std::snprintf(buf, sizeof buf, "resolution=%.3fm", p.resolution_m_per_px);
  out += buf;
  return out;
}

const Palette& palette() { return kPalette; }

}  // namespace gecm
