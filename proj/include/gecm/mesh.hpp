#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "gecm/core.hpp"

namespace gecm {

using Face = Eigen::Vector3i;

/// Triangle mesh with per-face centroid, unit normal and area caches.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Vec3> centroids;
  std::vector<Vec3> normals;
  std::vector<double> areas;
  std::size_t dropped_faces = 0;  // degenerate faces removed at construction

  std::size_t face_count() const { return faces.size(); }
  double total_area() const;
  const Vec3& vertex(std::size_t face, int corner) const { return vertices[static_cast<std::size_t>(faces[face][corner])]; }
};

inline constexpr double kMinFaceArea = 1e-12;

/// Builds caches and drops faces with area <= kMinFaceArea.
/// Throws Error{ParseError} on out-of-range indices and Error{EmptyMesh} when no face survives.
TriangleMesh make_mesh(std::vector<Vec3> vertices, std::vector<Face> faces);

/// Translates vertices so their mean is the origin.
TriangleMesh recentered(TriangleMesh mesh);

/// ASCII OBJ (v and f records; polygons fan-triangulated; 1-based or negative
/// indices) or binary STL, chosen by extension and, failing that, by content.
/// The result is recentred. Throws FileNotFound, ParseError or EmptyMesh.
TriangleMesh load_mesh(const std::filesystem::path& path);

TriangleMesh parse_obj(std::string_view text);
TriangleMesh parse_stl_binary(std::span<const unsigned char> bytes);

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh);
void write_stl_binary(const std::filesystem::path& path, const TriangleMesh& mesh);

}  // namespace gecm
