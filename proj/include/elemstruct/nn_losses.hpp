#pragma once

// Differentiable point-cloud losses on tensors. Values agree with the
// metrics on plain clouds; gradients treat nearest-neighbor matches as
// locally constant.

#include "elemstruct/metrics.hpp"
#include "elemstruct/tensor.hpp"

namespace es::ops {

namespace detail {

template <class T>
PointCloud tensor_to_cloud(const Tensor<T>& t) {
  if (t.shape.size() != 2) throw DimensionError("loss: expected [N x D] tensor");
  PointCloud cloud(t.dim(1), static_cast<std::size_t>(t.dim(0)));
  for (std::size_t i = 0; i < t.values.size(); ++i) cloud.coords[i] = static_cast<double>(t.values[i]);
  return cloud;
}

}  // namespace detail

// Symmetric Chamfer between tensor clouds a [N x D] and b [M x D].
template <class T>
TensorPtr<T> chamfer_loss(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  auto ca = detail::tensor_to_cloud(*a);
  auto cb = detail::tensor_to_cloud(*b);
  if (ca.size() == 0 || cb.size() == 0) throw DataError("chamfer_loss: empty point cloud");
  // non-finite values here mean the forward pass diverged, not bad input
  if (!ca.all_finite() || !cb.all_finite())
    throw NumericalError("chamfer_loss: non-finite coordinates");
  if (ca.dim != cb.dim) throw DimensionError("chamfer_loss: dimension mismatch");
  const std::size_t na = ca.size(), nb = cb.size();
  NearestNeighborIndex ia(ca), ib(cb);
  auto match_ab = std::make_shared<std::vector<std::size_t>>(na);
  auto match_ba = std::make_shared<std::vector<std::size_t>>(nb);
  std::vector<double> da(na), db(nb);
#pragma omp parallel for schedule(static) if (na > 512)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(na); ++i) {
    auto r = ib.nearest(ca.point(i), ca.dim);
    (*match_ab)[i] = r.index;
    da[i] = r.squared_distance;
  }
#pragma omp parallel for schedule(static) if (nb > 512)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(nb); ++j) {
    auto r = ia.nearest(cb.point(j), cb.dim);
    (*match_ba)[j] = r.index;
    db[j] = r.squared_distance;
  }
  const double value = es::detail::sorted_sum(da) / static_cast<double>(na) +
                       es::detail::sorted_sum(db) / static_cast<double>(nb);
  auto out = Tensor<T>::zeros({1}, a->requires_grad || b->requires_grad);
  out->values[0] = static_cast<T>(value);
  if (out->requires_grad) {
    out->parents = {a, b};
    const int d = ca.dim;
    out->backprop = [a, b, match_ab, match_ba, na, nb, d](Tensor<T>& self) {
      const T g = self.grad[0];
      const T wa = g * T(2) / static_cast<T>(na);
      const T wb = g * T(2) / static_cast<T>(nb);
      if (a->requires_grad) a->ensure_grad();
      if (b->requires_grad) b->ensure_grad();
      for (std::size_t i = 0; i < na; ++i) {
        const std::size_t m = (*match_ab)[i];
        for (int j = 0; j < d; ++j) {
          const T diff = a->values[i * d + j] - b->values[m * d + j];
          if (a->requires_grad) a->grad[i * d + j] += wa * diff;
          if (b->requires_grad) b->grad[m * d + j] -= wa * diff;
        }
      }
      for (std::size_t i = 0; i < nb; ++i) {
        const std::size_t m = (*match_ba)[i];
        for (int j = 0; j < d; ++j) {
          const T diff = b->values[i * d + j] - a->values[m * d + j];
          if (b->requires_grad) b->grad[i * d + j] += wb * diff;
          if (a->requires_grad) a->grad[m * d + j] -= wb * diff;
        }
      }
    };
  }
  return out;
}

// Mean squared distance over index-matched rows of two [N x D] tensors.
template <class T>
TensorPtr<T> l2_match_loss(const TensorPtr<T>& output, const TensorPtr<T>& target) {
  if (output->shape != target->shape)
    throw DimensionError("l2_match_loss: shape mismatch " + shape_str(output->shape) + " vs " +
                         shape_str(target->shape));
  if (output->shape.size() != 2) throw DimensionError("l2_match_loss: expected [N x D]");
  const std::size_t n = static_cast<std::size_t>(output->dim(0));
  const int d = output->dim(1);
  if (n == 0) throw DataError("l2_match_loss: empty clouds");
  std::vector<double> dists(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
      const double diff = static_cast<double>(output->values[i * d + j]) -
                          static_cast<double>(target->values[i * d + j]);
      acc += diff * diff;
    }
    dists[i] = acc;
  }
  auto out = Tensor<T>::zeros({1}, output->requires_grad || target->requires_grad);
  out->values[0] = static_cast<T>(es::detail::sorted_sum(dists) / static_cast<double>(n));
  if (out->requires_grad) {
    out->parents = {output, target};
    out->backprop = [output, target, n, d](Tensor<T>& self) {
      const T w = self.grad[0] * T(2) / static_cast<T>(n);
      if (output->requires_grad) output->ensure_grad();
      if (target->requires_grad) target->ensure_grad();
      for (std::size_t i = 0; i < n * static_cast<std::size_t>(d); ++i) {
        const T diff = output->values[i] - target->values[i];
        if (output->requires_grad) output->grad[i] += w * diff;
        if (target->requires_grad) target->grad[i] -= w * diff;
      }
    };
  }
  return out;
}

}  // namespace es::ops
