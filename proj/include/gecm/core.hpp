#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gecm {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class ErrorCode {
  OutOfRange,
  UnknownPolarization,
  EmptyImage,
  NoForeground,
  DegenerateMask,
  ParseError,
  EmptyMesh,
  FileNotFound,
  DegenerateGeometry,
  ZeroPathLength,
  EmptySkeleton,
  ManifestParseError,
  InvalidGrid,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Error carrying a machine-readable code and, where relevant, the offending field.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string field = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::string field_;
};

enum class Polarization { HH, HV, VH, VV };

std::string_view to_string(Polarization p);
Polarization parse_polarization(std::string_view token);

/// Unvalidated parameter record, as read from a manifest, CLI flags or a binding.
struct ParamRecord {
  double azimuth_deg = 0.0;
  double depression_deg = 30.0;
  double wavelength_m = 0.03;
  std::string polarization = "HH";
  double resolution_m_per_px = 0.3;
  std::optional<std::string> band_label;
  std::optional<std::string> class_label;
};

/// Imaging parameters of one viewpoint. Construct through validate_params().
struct ImagingParams {
  double azimuth_deg = 0.0;      // [0, 360)
  double depression_deg = 30.0;  // (0, 90]
  double wavelength_m = 0.03;
  Polarization polarization = Polarization::HH;
  double resolution_m_per_px = 0.3;
  std::optional<std::string> band_label;
  std::optional<std::string> class_label;

  bool operator==(const ImagingParams&) const = default;
};

/// Wraps azimuth into [0, 360) and checks every numeric domain.
/// Throws Error{OutOfRange} naming the field, or Error{UnknownPolarization}.
ImagingParams validate_params(const ParamRecord& raw);
ImagingParams validate_params(const ImagingParams& params);

ParamRecord to_record(const ImagingParams& params);

/// Plain-text condition, e.g.
/// "class=King Air 350i; azimuth=15.0deg; depression=30.0deg; polarization=HH; resolution=0.300m".
std::string format_text_condition(const ImagingParams& params);

/// Wraps an angle in degrees into [0, 360).
double wrap_degrees(double deg);

/// sin/cos of an angle in degrees; exact at multiples of 90 degrees.
struct SinCos {
  double sin;
  double cos;
};
SinCos sincos_deg(double deg);

double deg_to_rad(double deg);

template <typename Scalar>
struct PoseSkeleton2DT {
  using Point = Eigen::Matrix<Scalar, 2, 1>;
  Point nose = Point::Zero();
  Point tail = Point::Zero();
  Point wing_root = Point::Zero();
  Point left_tip = Point::Zero();
  Point right_tip = Point::Zero();

  std::array<Point, 5> points() const { return {nose, tail, wing_root, left_tip, right_tip}; }
  bool operator==(const PoseSkeleton2DT&) const = default;
};

using PoseSkeleton2D = PoseSkeleton2DT<double>;

struct PoseSkeleton3D {
  Vec3 nose = Vec3::Zero();
  Vec3 tail = Vec3::Zero();
  Vec3 wing_root = Vec3::Zero();
  Vec3 left_tip = Vec3::Zero();
  Vec3 right_tip = Vec3::Zero();

  std::array<Vec3, 5> points() const { return {nose, tail, wing_root, left_tip, right_tip}; }
};

inline constexpr std::array<std::string_view, 5> kKeypointNames = {"nose", "tail", "wing_root",
                                                                    "left_tip", "right_tip"};

struct Scatterer {
  Vec2 position = Vec2::Zero();
  double intensity = 0.0;  // [0, 1]
  bool operator==(const Scatterer&) const = default;
};

using ScattererSet = std::vector<Scatterer>;

enum class Provenance { DerivedFromImage, RenderedFromMesh };
std::string_view to_string(Provenance p);

struct Gecm {
  PoseSkeleton2D skeleton;
  ScattererSet scatterers;
  int canvas_height = 0;
  int canvas_width = 0;
  Provenance provenance = Provenance::DerivedFromImage;

  bool operator==(const Gecm&) const = default;
};

struct Rgb {
  std::uint8_t r, g, b;
  constexpr bool operator==(const Rgb&) const = default;
};

/// Fixed drawing style shared by both GECM sources.
struct Palette {
  Rgb fuselage;
  Rgb left_wing;
  Rgb right_wing;
  Rgb nose_marker;
  Rgb tail_marker;
  Rgb wing_root_connector;
  int line_width_px;
  int marker_radius_px;
  int scatterer_radius_px;
};

inline constexpr Palette kPalette{
    .fuselage = {0, 255, 255},
    .left_wing = {0, 255, 0},
    .right_wing = {255, 105, 180},
    .nose_marker = {255, 0, 0},
    .tail_marker = {0, 0, 255},
    .wing_root_connector = {255, 255, 0},
    .line_width_px = 2,
    .marker_radius_px = 3,
    .scatterer_radius_px = 2,
};

/// The palette both pipelines draw with.
const Palette& palette();

inline constexpr std::string_view kVersion = "0.3.0";

}  // namespace gecm
