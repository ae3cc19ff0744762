#pragma once

// Exact nearest-neighbor index: balanced kd-tree, median split on the
// widest axis, leaf size 16. Clouds below 256 points use a flat scan
// (measured crossover). Distance ties resolve to the lowest point index,
// matching the brute-force reference exactly. Immutable after build;
// concurrent queries are safe.

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "elemstruct/geometry.hpp"

namespace es {

class NearestNeighborIndex {
 public:
  static constexpr int kLeafSize = 16;
  static constexpr std::size_t kBruteForceBelow = 256;

  explicit NearestNeighborIndex(const PointCloud& cloud) : cloud_(&cloud) {
    cloud.validate("NearestNeighborIndex");
    const std::size_t n = cloud.size();
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), 0);
    if (n >= kBruteForceBelow) {
      nodes_.reserve(2 * n / kLeafSize + 2);
      build(0, n);
    }
  }

  struct Result {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  Result nearest(const double* query, int query_dim) const {
    if (query_dim != cloud_->dim)
      throw DimensionError("nearest: query dim " + std::to_string(query_dim) +
                           " vs index dim " + std::to_string(cloud_->dim));
    Result best;
    best.squared_distance = std::numeric_limits<double>::infinity();
    best.index = cloud_->size();
    if (nodes_.empty()) {
      scan(query, 0, cloud_->size(), best);
    } else {
      search(0, query, best);
    }
    return best;
  }

  const PointCloud& cloud() const { return *cloud_; }

 private:
  struct Node {
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    std::size_t begin = 0, end = 0;  // leaf range into perm_
    int left = -1, right = -1;
  };

  void scan(const double* query, std::size_t begin, std::size_t end, Result& best) const {
    const int d = cloud_->dim;
    for (std::size_t s = begin; s < end; ++s) {
      const std::size_t i = perm_[s];
      const double d2 = squared_distance(query, cloud_->point(i), d);
      if (d2 < best.squared_distance ||
          (d2 == best.squared_distance && i < best.index)) {
        best.squared_distance = d2;
        best.index = i;
      }
    }
  }

  int build(std::size_t begin, std::size_t end) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
      nodes_[node_id].begin = begin;
      nodes_[node_id].end = end;
      // keep leaf indices sorted so the scan prefers low indices on ties
      std::sort(perm_.begin() + begin, perm_.begin() + end);
      return node_id;
    }
    const int d = cloud_->dim;
    int axis = 0;
    double widest = -1.0;
    for (int j = 0; j < d; ++j) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::size_t s = begin; s < end; ++s) {
        const double v = cloud_->at(perm_[s], j);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = j;
      }
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                       const double va = cloud_->at(a, axis), vb = cloud_->at(b, axis);
                       return va < vb || (va == vb && a < b);
                     });
    nodes_[node_id].axis = axis;
    nodes_[node_id].split = cloud_->at(perm_[mid], axis);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[node_id].left = left;
    nodes_[node_id].right = right;
    return node_id;
  }

  void search(int node_id, const double* query, Result& best) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
      scan(query, node.begin, node.end, best);
      return;
    }
    const double delta = query[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    search(near, query, best);
    if (delta * delta <= best.squared_distance) search(far, query, best);
  }

  const PointCloud* cloud_;
  std::vector<std::size_t> perm_;
  std::vector<Node> nodes_;
};

// Reference scan used by the tests and as the tie-breaking ground truth.
inline NearestNeighborIndex::Result brute_force_nearest(const PointCloud& cloud,
                                                        const double* query) {
  NearestNeighborIndex::Result best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  best.index = cloud.size();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d2 = squared_distance(query, cloud.point(i), cloud.dim);
    if (d2 < best.squared_distance) {
      best.squared_distance = d2;
      best.index = i;
    }
  }
  return best;
}

}  // namespace es
