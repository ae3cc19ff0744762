#pragma once

// Plain-text geometry I/O: XYZ (d columns of floats), OBJ (vertices and
// triangle faces) and ascii PLY (points, optional faces, optional
// per-point uchar color). Writers print 9 significant digits so
// write/read round-trips are lossless at that precision.

#include <array>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "elemstruct/geometry.hpp"

namespace es {

namespace io_detail {

inline std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  return out;
}

}  // namespace io_detail

inline PointCloud load_xyz(const std::string& path) {
  auto in = io_detail::open_input(path);
  std::vector<double> coords;
  int dim = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof())
      throw DataError(path + ":" + std::to_string(line_no) + ": unparsable value");
    if (row.empty()) continue;
    if (dim == 0) dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != dim)
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " columns, got " + std::to_string(row.size()));
    coords.insert(coords.end(), row.begin(), row.end());
  }
  if (coords.empty()) throw DataError(path + ": empty point cloud");
  PointCloud cloud;
  cloud.dim = dim;
  cloud.coords = std::move(coords);
  return cloud;
}

inline void save_xyz(const std::string& path, const PointCloud& cloud) {
  auto out = io_detail::open_output(path);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int j = 0; j < cloud.dim; ++j) {
      if (j) out << ' ';
      out << io_detail::fmt9(cloud.at(i, j));
    }
    out << '\n';
  }
}

inline TriangleMesh load_obj(const std::string& path) {
  auto in = io_detail::open_input(path);
  TriangleMesh mesh;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::array<double, 3> v{};
      if (!(ls >> v[0] >> v[1] >> v[2]))
        throw DataError(path + ":" + std::to_string(line_no) + ": bad vertex line");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // face tokens may carry /vt/vn parts
        idx.push_back(std::stoi(tok.substr(0, tok.find('/'))));
      }
      if (idx.size() < 3)
        throw DataError(path + ":" + std::to_string(line_no) + ": face with <3 vertices");
      // fan-triangulate polygons
      for (std::size_t k = 2; k < idx.size(); ++k)
        mesh.faces.push_back({idx[0] - 1, idx[k - 1] - 1, idx[k] - 1});
    }
  }
  if (mesh.vertices.empty()) throw DataError(path + ": no vertices");
  return mesh;
}

inline void save_obj(const std::string& path, const TriangleMesh& mesh) {
  auto out = io_detail::open_output(path);
  for (const auto& v : mesh.vertices)
    out << "v " << io_detail::fmt9(v[0]) << ' ' << io_detail::fmt9(v[1]) << ' '
        << io_detail::fmt9(v[2]) << '\n';
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

struct PlyData {
  PointCloud points;  // d=3
  std::vector<std::array<int, 3>> faces;
  std::vector<std::array<unsigned char, 3>> colors;  // empty or one per point
};

inline void save_ply(const std::string& path, const PlyData& data) {
  const std::size_t n = data.points.size();
  auto out = io_detail::open_output(path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << n << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  const bool with_color = !data.colors.empty();
  if (with_color)
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << data.faces.size() << "\n";
  out << "property list uchar int vertex_indices\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << io_detail::fmt9(data.points.at(i, 0)) << ' ' << io_detail::fmt9(data.points.at(i, 1))
        << ' ' << io_detail::fmt9(data.points.at(i, 2));
    if (with_color)
      out << ' ' << static_cast<int>(data.colors[i][0]) << ' '
          << static_cast<int>(data.colors[i][1]) << ' ' << static_cast<int>(data.colors[i][2]);
    out << '\n';
  }
  for (const auto& f : data.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline PlyData load_ply(const std::string& path) {
  auto in = io_detail::open_input(path);
  std::string line;
  std::size_t n_vertices = 0, n_faces = 0;
  int vertex_props = 0;
  bool has_color = false;
  bool in_vertex_element = false;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw DataError(path + ": not a ply file");
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string kind;
      ls >> kind;
      if (kind != "ascii") throw DataError(path + ": only ascii ply supported");
    } else if (tag == "element") {
      std::string name;
      std::size_t count;
      ls >> name >> count;
      in_vertex_element = name == "vertex";
      if (name == "vertex") n_vertices = count;
      if (name == "face") n_faces = count;
    } else if (tag == "property" && in_vertex_element) {
      ++vertex_props;
      std::string type, name;
      ls >> type >> name;
      if (name == "red") has_color = true;
    } else if (tag == "end_header") {
      break;
    }
  }
  PlyData data;
  data.points = PointCloud(3, n_vertices);
  for (std::size_t i = 0; i < n_vertices; ++i) {
    if (!std::getline(in, line)) throw DataError(path + ": truncated vertex list");
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.size() < 3) throw DataError(path + ": bad vertex row " + std::to_string(i));
    for (int j = 0; j < 3; ++j) data.points.at(i, j) = row[j];
    if (has_color && row.size() >= 6)
      data.colors.push_back({static_cast<unsigned char>(row[3]),
                             static_cast<unsigned char>(row[4]),
                             static_cast<unsigned char>(row[5])});
  }
  for (std::size_t f = 0; f < n_faces; ++f) {
    if (!std::getline(in, line)) throw DataError(path + ": truncated face list");
    std::istringstream ls(line);
    int count;
    ls >> count;
    std::vector<int> idx(count);
    for (int& v : idx) ls >> v;
    for (std::size_t k = 2; k < idx.size(); ++k)
      data.faces.push_back({idx[0], idx[k - 1], idx[k]});
  }
  return data;
}

}  // namespace es
