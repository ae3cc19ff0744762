#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "elemstruct/common.hpp"

namespace es {

// N x d row-major point set. `ordered` marks clouds whose indices carry
// correspondence meaning.
struct PointCloud {
  std::vector<double> coords;
  int dim = 3;
  bool ordered = false;

  PointCloud() = default;
  PointCloud(int d, std::size_t n) : coords(n * static_cast<std::size_t>(d), 0.0), dim(d) {}

  std::size_t size() const { return dim ? coords.size() / static_cast<std::size_t>(dim) : 0; }

  double* point(std::size_t i) { return coords.data() + i * static_cast<std::size_t>(dim); }
  const double* point(std::size_t i) const {
    return coords.data() + i * static_cast<std::size_t>(dim);
  }

  double& at(std::size_t i, int j) { return coords[i * static_cast<std::size_t>(dim) + j]; }
  double at(std::size_t i, int j) const { return coords[i * static_cast<std::size_t>(dim) + j]; }

  bool all_finite() const {
    for (double v : coords)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void validate(const char* what) const {
    if (size() < 1) throw DataError(std::string(what) + ": empty point cloud");
    if (!all_finite()) throw DataError(std::string(what) + ": non-finite coordinates");
  }
};

inline double squared_distance(const double* a, const double* b, int d) {
  double acc = 0.0;
  for (int j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    acc += diff * diff;
  }
  return acc;
}

struct TriangleMesh {
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::array<int, 3>> faces;

  double face_area(std::size_t f) const {
    const auto& a = vertices[faces[f][0]];
    const auto& b = vertices[faces[f][1]];
    const auto& c = vertices[faces[f][2]];
    double ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
    double vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    double cx = uy * vz - uz * vy;
    double cy = uz * vx - ux * vz;
    double cz = ux * vy - uy * vx;
    return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
  }

  double total_area() const {
    double acc = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) acc += face_area(f);
    return acc;
  }

  void validate() const {
    const int v = static_cast<int>(vertices.size());
    for (const auto& f : faces)
      for (int idx : f)
        if (idx < 0 || idx >= v) throw DataError("mesh: face index out of range");
    if (total_area() <= 0.0) throw DataError("mesh: zero total surface area");
  }
};

}  // namespace es
