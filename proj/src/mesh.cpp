#include "gecm/mesh.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

namespace gecm {

double TriangleMesh::total_area() const { return std::accumulate(areas.begin(), areas.end(), 0.0); }

TriangleMesh make_mesh(std::vector<Vec3> vertices, std::vector<Face> faces) {
  TriangleMesh mesh;
  mesh.vertices = std::move(vertices);
  const int nv = static_cast<int>(mesh.vertices.size());
  for (const Face& f : faces) {
    for (int c = 0; c < 3; ++c)
      if (f[c] < 0 || f[c] >= nv)
        throw Error(ErrorCode::ParseError, "face index " + std::to_string(f[c]) + " out of range");
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const Vec3 cross = (b - a).cross(c - a);
    const double area = 0.5 * cross.norm();
    if (!(area > kMinFaceArea)) {
      ++mesh.dropped_faces;
      continue;
    }
    mesh.faces.push_back(f);
    mesh.centroids.push_back((a + b + c) / 3.0);
    mesh.normals.push_back(cross / cross.norm());
    mesh.areas.push_back(area);
  }
  if (mesh.faces.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no non-degenerate faces");
  return mesh;
}

TriangleMesh recentered(TriangleMesh mesh) {
  Vec3 mean = Vec3::Zero();
  for (const auto& v : mesh.vertices) mean += v;
  mean /= static_cast<double>(mesh.vertices.size());
  for (auto& v : mesh.vertices) v -= mean;
  for (auto& c : mesh.centroids) c -= mean;
  return mesh;
}

TriangleMesh parse_obj(std::string_view text) {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag.front() == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) fail("malformed vertex");
      vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        int i = 0;
        try {
          std::size_t used = 0;
          i = std::stoi(head, &used);
          if (used != head.size()) fail("malformed face index '" + tok + "'");
        } catch (const std::logic_error&) {
          fail("malformed face index '" + tok + "'");
        }
        if (i == 0) fail("face index 0 is invalid");
        const int resolved = i > 0 ? i - 1 : static_cast<int>(vertices.size()) + i;
        if (resolved < 0 || resolved >= static_cast<int>(vertices.size())) fail("face index out of range");
        idx.push_back(resolved);
      }
      if (idx.size() < 3) fail("face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) faces.emplace_back(idx[0], idx[k], idx[k + 1]);
    }
  }
  if (faces.empty()) throw Error(ErrorCode::EmptyMesh, "OBJ has no faces");
  return make_mesh(std::move(vertices), std::move(faces));
}

TriangleMesh parse_stl_binary(std::span<const unsigned char> bytes) {
  if (bytes.empty()) throw Error(ErrorCode::EmptyMesh, "STL is empty");
  if (bytes.size() < 84) throw Error(ErrorCode::ParseError, "offset 0: STL shorter than its 84-byte header");
  std::uint32_t count = 0;
  for (int k = 0; k < 4; ++k) count |= static_cast<std::uint32_t>(bytes[80 + k]) << (8 * k);
  if (bytes.size() < 84 + 50ull * count)
    throw Error(ErrorCode::ParseError, "offset 84: STL declares " + std::to_string(count) + " triangles but is truncated");
  if (count == 0) throw Error(ErrorCode::EmptyMesh, "STL has no triangles");

  auto read_f32 = [&](std::size_t off) {
    std::uint32_t u = 0;
    for (int k = 0; k < 4; ++k) u |= static_cast<std::uint32_t>(bytes[off + k]) << (8 * k);
    float f;
    std::memcpy(&f, &u, sizeof f);
    return static_cast<double>(f);
  };
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  vertices.reserve(3ull * count);
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t base = 84 + 50ull * t + 12;  // skip the stored normal
    for (int c = 0; c < 3; ++c) {
      const std::size_t off = base + 12ull * c;
      vertices.emplace_back(read_f32(off), read_f32(off + 4), read_f32(off + 8));
    }
    const int i = static_cast<int>(3 * t);
    faces.emplace_back(i, i + 1, i + 2);
  }
  return make_mesh(std::move(vertices), std::move(faces));
}

TriangleMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open mesh " + path.string(), "mesh");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.empty()) throw Error(ErrorCode::EmptyMesh, "mesh file " + path.string() + " is empty");

  std::string ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  bool stl = ext == ".stl";
  if (ext != ".stl" && ext != ".obj" && bytes.size() >= 84) {
    std::uint32_t count = 0;
    for (int k = 0; k < 4; ++k) count |= static_cast<std::uint32_t>(bytes[80 + k]) << (8 * k);
    stl = bytes.size() == 84 + 50ull * count;
  }
  if (stl) return recentered(parse_stl_binary(bytes));
  return recentered(parse_obj(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size())));
}

void write_obj(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

void write_stl_binary(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  char header[80] = {};
  std::memcpy(header, "gecm binary stl", 15);
  out.write(header, 80);
  auto put_u32 = [&](std::uint32_t u) {
    for (int k = 0; k < 4; ++k) out.put(static_cast<char>((u >> (8 * k)) & 0xff));
  };
  auto put_f32 = [&](double d) {
    const float f = static_cast<float>(d);
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof u);
    put_u32(u);
  };
  put_u32(static_cast<std::uint32_t>(mesh.faces.size()));
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    for (int k = 0; k < 3; ++k) put_f32(mesh.normals[i][k]);
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) put_f32(mesh.vertex(i, c)[k]);
    out.put(0);
    out.put(0);
  }
}

}  // namespace gecm
