#pragma once

#include <cmath>
#include <string>

#include "elemstruct/common.hpp"
#include "elemstruct/geometry.hpp"

namespace es {

enum class SquareSampling { kRandom, kGrid };

// Unit [0,1]^2 patch sampling. Grid mode emits the full lattice including
// the boundary, row-major with x varying fastest, matching the vertex
// order of grid_mesh_2d.
inline PointCloud sample_unit_square(std::size_t n, SquareSampling mode, std::uint64_t seed) {
  if (n < 1) throw DataError("sample_unit_square: need n >= 1");
  PointCloud cloud(2, n);
  if (mode == SquareSampling::kGrid) {
    const auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    if (r * r != n)
      throw DataError("sample_unit_square: grid mode needs a perfect square, got " +
                      std::to_string(n));
    for (std::size_t iy = 0; iy < r; ++iy)
      for (std::size_t ix = 0; ix < r; ++ix) {
        const std::size_t i = iy * r + ix;
        cloud.at(i, 0) = r == 1 ? 0.0 : static_cast<double>(ix) / static_cast<double>(r - 1);
        cloud.at(i, 1) = r == 1 ? 0.0 : static_cast<double>(iy) / static_cast<double>(r - 1);
      }
  } else {
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      cloud.at(i, 0) = rng.uniform();
      cloud.at(i, 1) = rng.uniform();
    }
  }
  return cloud;
}

// Area-proportional surface sampling with uniform barycentric coordinates.
inline PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n,
                                      std::uint64_t seed) {
  mesh.validate();
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    total += mesh.face_area(f);
    cumulative[f] = total;
  }
  Rng rng(seed);
  PointCloud cloud(3, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const std::size_t f =
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
    const auto& face = mesh.faces[std::min(f, mesh.faces.size() - 1)];
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const auto& a = mesh.vertices[face[0]];
    const auto& b = mesh.vertices[face[1]];
    const auto& c = mesh.vertices[face[2]];
    for (int j = 0; j < 3; ++j)
      cloud.at(i, j) = a[j] + u * (b[j] - a[j]) + v * (c[j] - a[j]);
  }
  return cloud;
}

// r x r vertex lattice over [0,1]^2 with 2(r-1)^2 triangles. Vertex order
// matches sample_unit_square grid mode, so deformed grid vertices plus
// this connectivity give an output mesh.
inline TriangleMesh grid_mesh_2d(int r) {
  if (r < 2) throw DataError("grid_mesh_2d: resolution must be >= 2, got " + std::to_string(r));
  TriangleMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(r) * r);
  for (int iy = 0; iy < r; ++iy)
    for (int ix = 0; ix < r; ++ix)
      mesh.vertices.push_back({static_cast<double>(ix) / (r - 1),
                               static_cast<double>(iy) / (r - 1), 0.0});
  for (int iy = 0; iy + 1 < r; ++iy)
    for (int ix = 0; ix + 1 < r; ++ix) {
      const int v00 = iy * r + ix, v10 = iy * r + ix + 1;
      const int v01 = (iy + 1) * r + ix, v11 = (iy + 1) * r + ix + 1;
      mesh.faces.push_back({v00, v10, v11});
      mesh.faces.push_back({v00, v11, v01});
    }
  return mesh;
}

}  // namespace es
