#pragma once

// Evaluation: Chamfer metrics (reported x1e3 as is conventional for these
// benchmarks), the closest-point correspondence pipeline and mesh export
// of reconstructions.

#include "elemstruct/metrics.hpp"
#include "elemstruct/model.hpp"

namespace es {

struct ChamferReport {
  std::vector<std::pair<std::string, double>> per_shape;  // raw values
  double mean_raw = 0.0;

  double mean_reported() const { return mean_raw * 1e3; }
};

template <class T, class Records>
ChamferReport eval_chamfer_records(ReconstructionModel<T>& model, const Records& records) {
  ChamferReport report;
  if (records.empty()) throw DataError("eval_chamfer: empty test set");
  for (const auto& rec : records) {
    PointCloud recon = model.reconstruct(rec.cloud);
    const double raw = chamfer_symmetric(recon, rec.cloud);
    report.per_shape.emplace_back(rec.id, raw);
    report.mean_raw += raw;
  }
  report.mean_raw /= static_cast<double>(report.per_shape.size());
  return report;
}

// Dense correspondence between two shapes through the shared structure:
// each vertex of `a` picks its nearest reconstruction-A point, and the
// same structure index on reconstruction B is its match.
struct CorrespondenceMap {
  std::vector<int> structure_indices;  // per source vertex, in [0, K*N)
  PointCloud targets;                  // mapped 3D locations (d=3)
};

template <class T>
CorrespondenceMap match(ReconstructionModel<T>& model, const PointCloud& shape_a,
                        const PointCloud& shape_b, bool snap_to_target_vertices = true) {
  if (model.config().k != 1)
    throw DataError("match: correspondence requires a single-structure model (K=1)");
  if (shape_a.dim != 3 || shape_b.dim != 3) throw DimensionError("match: shapes must be 3D");
  PointCloud recon_a = model.reconstruct(shape_a);
  PointCloud recon_b = model.reconstruct(shape_b);
  NearestNeighborIndex index_a(recon_a);
  std::unique_ptr<NearestNeighborIndex> index_b;
  if (snap_to_target_vertices) index_b = std::make_unique<NearestNeighborIndex>(shape_b);
  CorrespondenceMap map;
  map.structure_indices.resize(shape_a.size());
  map.targets = PointCloud(3, shape_a.size());
#pragma omp parallel for schedule(static) if (shape_a.size() > 256)
  for (std::ptrdiff_t v = 0; v < static_cast<std::ptrdiff_t>(shape_a.size()); ++v) {
    const std::size_t i = index_a.nearest(shape_a.point(v), 3).index;
    map.structure_indices[v] = static_cast<int>(i);
    const double* target = recon_b.point(i);
    if (index_b) target = shape_b.point(index_b->nearest(target, 3).index);
    for (int j = 0; j < 3; ++j) map.targets.at(v, j) = target[j];
  }
  return map;
}

// Mean correspondence error against ground truth: shapes of one ordered
// group correspond index-to-index.
template <class T>
double eval_correspondence_pair(ReconstructionModel<T>& model, const PointCloud& a,
                                const PointCloud& b, bool snap = true) {
  if (!a.ordered || !b.ordered || a.size() != b.size())
    throw DataError("eval_correspondence: ground truth requires ordered clouds of equal size");
  auto map = match(model, a, b, snap);
  return correspondence_error(map.targets, b);
}

// Warp the regular grid through structure k and the adjustment for
// `target`. Only defined for 2D deformation structures.
template <class T>
std::vector<TriangleMesh> reconstruct_mesh(ReconstructionModel<T>& model,
                                           const PointCloud& target, int grid_resolution) {
  const auto& cfg = model.config();
  if (cfg.structure_kind != StructureKind::kDeformation)
    throw DataError(
        "reconstruct_mesh: translation modules give only a finite set of points; mesh export "
        "needs deformation modules");
  if (model.initial().dim_in != 2)
    throw DataError("reconstruct_mesh: needs 2D initial structures");
  TriangleMesh grid = grid_mesh_2d(grid_resolution);
  PointCloud grid_points =
      sample_unit_square(static_cast<std::size_t>(grid_resolution) * grid_resolution,
                         SquareSampling::kGrid, 0);
  auto feature = model.encode_eval(target);
  auto grid_tensor = ReconstructionModel<T>::cloud_tensor(grid_points);
  std::vector<TriangleMesh> meshes;
  for (int k = 0; k < cfg.k; ++k) {
    auto structure_points = model.structure(k).forward(grid_tensor);
    auto warped = model.adjust_eval(k, structure_points, feature);
    TriangleMesh mesh;
    mesh.faces = grid.faces;
    for (int v = 0; v < warped->dim(0); ++v)
      mesh.vertices.push_back({static_cast<double>(warped->values[v * 3 + 0]),
                               static_cast<double>(warped->values[v * 3 + 1]),
                               static_cast<double>(warped->values[v * 3 + 2])});
    meshes.push_back(std::move(mesh));
  }
  return meshes;
}

}  // namespace es
