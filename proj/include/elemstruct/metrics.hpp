#pragma once

// Point-cloud losses and metrics on plain double clouds. The directed
// Chamfer terms accumulate per-point distances in sorted order, so the
// result is exactly invariant to row permutations of either cloud.

#include <algorithm>
#include <cmath>
#include <vector>

#include "elemstruct/kdtree.hpp"

namespace es {

namespace detail {

inline double sorted_sum(std::vector<double>& vals) {
  std::sort(vals.begin(), vals.end());
  double acc = 0.0;
  for (double v : vals) acc += v;
  return acc;
}

// mean over `from` of squared distance to the nearest point of `index`
inline double directed_chamfer(const PointCloud& from, const NearestNeighborIndex& index) {
  std::vector<double> dists(from.size());
#pragma omp parallel for schedule(static) if (from.size() > 512)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(from.size()); ++i)
    dists[i] = index.nearest(from.point(i), from.dim).squared_distance;
  return sorted_sum(dists) / static_cast<double>(from.size());
}

}  // namespace detail

// Symmetric Chamfer distance: both directed mean nearest-neighbor squared
// distances. Each directed sum is divided by its own cloud's size.
inline double chamfer_symmetric(const PointCloud& a, const PointCloud& b) {
  a.validate("chamfer_symmetric");
  b.validate("chamfer_symmetric");
  if (a.dim != b.dim)
    throw DimensionError("chamfer_symmetric: dim " + std::to_string(a.dim) + " vs " +
                         std::to_string(b.dim));
  NearestNeighborIndex ia(a), ib(b);
  return detail::directed_chamfer(a, ib) + detail::directed_chamfer(b, ia);
}

// Double-loop reference used by the oracle tests.
inline double chamfer_symmetric_brute(const PointCloud& a, const PointCloud& b) {
  a.validate("chamfer_symmetric_brute");
  b.validate("chamfer_symmetric_brute");
  if (a.dim != b.dim) throw DimensionError("chamfer_symmetric_brute: dimension mismatch");
  double term_a = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    term_a += brute_force_nearest(b, a.point(i)).squared_distance;
  double term_b = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j)
    term_b += brute_force_nearest(a, b.point(j)).squared_distance;
  return term_a / static_cast<double>(a.size()) + term_b / static_cast<double>(b.size());
}

// Eq.-style supervised loss: mean over index-matched pairs of squared
// distance. Both clouds must be ordered and of equal length.
inline double supervised_l2(const PointCloud& output, const PointCloud& target) {
  if (output.size() != target.size())
    throw DimensionError("supervised_l2: length mismatch " + std::to_string(output.size()) +
                         " vs " + std::to_string(target.size()));
  if (output.dim != target.dim) throw DimensionError("supervised_l2: dimension mismatch");
  std::vector<double> dists(output.size());
  for (std::size_t i = 0; i < output.size(); ++i)
    dists[i] = squared_distance(output.point(i), target.point(i), output.dim);
  return detail::sorted_sum(dists) / static_cast<double>(output.size());
}

// Mean Euclidean (not squared) distance over index-matched pairs.
inline double correspondence_error(const PointCloud& predicted, const PointCloud& ground_truth) {
  if (predicted.size() != ground_truth.size())
    throw DimensionError("correspondence_error: length mismatch " +
                         std::to_string(predicted.size()) + " vs " +
                         std::to_string(ground_truth.size()));
  if (predicted.dim != ground_truth.dim)
    throw DimensionError("correspondence_error: dimension mismatch");
  std::vector<double> dists(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i)
    dists[i] = std::sqrt(squared_distance(predicted.point(i), ground_truth.point(i), predicted.dim));
  return detail::sorted_sum(dists) / static_cast<double>(predicted.size());
}

}  // namespace es
