#include "qd/geom/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "qd/error.hpp"

namespace qd {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

// Next line that is neither empty nor a '#' comment.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace

std::string format_double(double v, int significant_digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
  return buf;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_out(path);
  const Vec3& vp = cloud.viewpoint;
  out << "ply\nformat ascii 1.0\n";
  out << "comment viewpoint " << format_double(vp.x()) << ' ' << format_double(vp.y()) << ' '
      << format_double(vp.z()) << '\n';
  out << "element vertex " << cloud.size() << '\n';
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_normals()) out << "property double nx\nproperty double ny\nproperty double nz\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << format_double(p.z());
    if (cloud.has_normals()) {
      const Vec3& n = (*cloud.normals)[i];
      out << ' ' << format_double(n.x()) << ' ' << format_double(n.y()) << ' ' << format_double(n.z());
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) throw FormatError("not a PLY file: " + path.string());

  PointCloud cloud;
  std::size_t vertex_count = 0;
  bool in_vertex = false, seen_vertex = false;
  std::vector<std::string> props;
  // Elements declared before `vertex` must be skipped line-by-line.
  std::size_t lines_before_vertex = 0;
  std::size_t current_count = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "ascii") throw FormatError("only ASCII PLY is supported");
    } else if (kw == "comment") {
      std::string tag;
      ls >> tag;
      if (tag == "viewpoint") {
        Vec3 vp;
        if (!(ls >> vp.x() >> vp.y() >> vp.z())) throw FormatError("bad viewpoint comment");
        cloud.viewpoint = vp;
      }
    } else if (kw == "element") {
      std::string name;
      ls >> name >> current_count;
      if (!seen_vertex && in_vertex == false && name != "vertex") lines_before_vertex += current_count;
      in_vertex = name == "vertex";
      if (in_vertex) {
        seen_vertex = true;
        vertex_count = current_count;
      }
    } else if (kw == "property") {
      if (in_vertex) {
        std::string type, name;
        ls >> type;
        if (type == "list") throw FormatError("list property on vertex element");
        ls >> name;
        props.push_back(name);
      }
    } else if (kw == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done || !seen_vertex) throw FormatError("PLY header incomplete: " + path.string());

  auto find = [&](const char* n) -> int {
    auto it = std::find(props.begin(), props.end(), n);
    return it == props.end() ? -1 : static_cast<int>(it - props.begin());
  };
  int ix = find("x"), iy = find("y"), iz = find("z");
  int inx = find("nx"), iny = find("ny"), inz = find("nz");
  if (ix < 0 || iy < 0 || iz < 0) throw FormatError("PLY vertex lacks x/y/z");
  bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;

  for (std::size_t i = 0; i < lines_before_vertex; ++i)
    if (!std::getline(in, line)) throw FormatError("PLY truncated");

  cloud.points.reserve(vertex_count);
  std::vector<Vec3> normals;
  std::vector<double> vals(props.size());
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line)) throw FormatError("PLY truncated: " + path.string());
    std::istringstream ls(line);
    for (double& v : vals)
      if (!(ls >> v)) throw FormatError("PLY vertex row too short");
    cloud.points.emplace_back(vals[ix], vals[iy], vals[iz]);
    if (has_normals) normals.emplace_back(vals[inx], vals[iny], vals[inz]);
  }
  if (has_normals) cloud.normals = std::move(normals);
  return cloud;
}

namespace {

void add_polygon(TriangleMesh& mesh, const std::vector<long>& idx) {
  for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
    for (long v : {idx[0], idx[k], idx[k + 1]})
      if (v < 0 || static_cast<std::size_t>(v) >= mesh.vertices.size())
        throw FormatError("face index out of range");
    mesh.triangles.push_back({static_cast<std::uint32_t>(idx[0]), static_cast<std::uint32_t>(idx[k]),
                              static_cast<std::uint32_t>(idx[k + 1])});
  }
}

}  // namespace

TriangleMesh read_off(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!next_content_line(in, line)) throw FormatError("empty OFF file");
  std::istringstream head(line);
  std::string magic;
  head >> magic;
  if (magic.substr(0, 3) != "OFF") throw FormatError("missing OFF magic");
  std::size_t nv = 0, nf = 0;
  if (!(head >> nv >> nf)) {
    if (!next_content_line(in, line)) throw FormatError("OFF counts missing");
    std::istringstream cs(line);
    if (!(cs >> nv >> nf)) throw FormatError("OFF counts malformed");
  }
  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_content_line(in, line)) throw FormatError("OFF truncated in vertices");
    std::istringstream vs(line);
    Vec3 v;
    if (!(vs >> v.x() >> v.y() >> v.z())) throw FormatError("OFF vertex malformed");
    mesh.vertices.push_back(v);
  }
  for (std::size_t i = 0; i < nf; ++i) {
    if (!next_content_line(in, line)) throw FormatError("OFF truncated in faces");
    std::istringstream fs(line);
    std::size_t n = 0;
    if (!(fs >> n) || n < 3) throw FormatError("OFF face malformed");
    std::vector<long> idx(n);
    for (long& v : idx)
      if (!(fs >> v)) throw FormatError("OFF face malformed");
    add_polygon(mesh, idx);
  }
  return mesh;
}

TriangleMesh read_obj(const std::filesystem::path& path) {
  auto in = open_in(path);
  TriangleMesh mesh;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) throw FormatError("OBJ vertex malformed");
      mesh.vertices.push_back(v);
    } else if (kw == "f") {
      std::vector<long> idx;
      std::string tok;
      while (ls >> tok) {
        long v = std::stol(tok.substr(0, tok.find('/')));
        // OBJ indices are 1-based; negatives are relative to the end.
        idx.push_back(v > 0 ? v - 1 : static_cast<long>(mesh.vertices.size()) + v);
      }
      if (idx.size() < 3) throw FormatError("OBJ face with fewer than 3 vertices");
      add_polygon(mesh, idx);
    }
  }
  return mesh;
}

void write_off(const std::filesystem::path& path, const TriangleMesh& mesh) {
  auto out = open_out(path);
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
  for (const Vec3& v : mesh.vertices)
    out << format_double(v.x()) << ' ' << format_double(v.y()) << ' ' << format_double(v.z()) << '\n';
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

TriangleMesh read_mesh(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return read_off(path);
  if (ext == ".obj") return read_obj(path);
  throw FormatError("unsupported mesh format: " + path.string());
}

}  // namespace qd
