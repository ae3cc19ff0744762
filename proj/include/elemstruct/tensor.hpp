#pragma once

// Minimal reverse-mode tensor engine: dense tensors with a dynamic tape.
// Only the operations needed by the networks here are provided.
// Templated on the scalar type: float for training, double for
// gradient verification.

#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "elemstruct/common.hpp"
#include "elemstruct/kernels.hpp"

namespace es {

template <class T>
class Tensor;

template <class T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

template <class T>
class Tensor {
 public:
  std::vector<int> shape;
  std::vector<T> values;
  std::vector<T> grad;  // allocated on demand, same size as values
  bool requires_grad = false;

  // Tape links. backprop pushes this node's grad into its parents' grads.
  std::vector<TensorPtr<T>> parents;
  std::function<void(Tensor<T>&)> backprop;

  Tensor() = default;
  Tensor(std::vector<int> s, bool req) : shape(std::move(s)), requires_grad(req) {
    values.assign(numel(), T(0));
  }

  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }

  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), T(0));
  }

  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
  }

  static TensorPtr<T> zeros(std::vector<int> shape, bool requires_grad = false) {
    return std::make_shared<Tensor<T>>(std::move(shape), requires_grad);
  }

  static TensorPtr<T> from_values(std::vector<int> shape, std::vector<T> vals,
                                  bool requires_grad = false) {
    auto t = std::make_shared<Tensor<T>>(std::move(shape), requires_grad);
    if (vals.size() != t->numel())
      throw DimensionError("tensor value count " + std::to_string(vals.size()) +
                           " does not match shape " + shape_str(t->shape));
    t->values = std::move(vals);
    return t;
  }

  T scalar() const {
    if (numel() != 1) throw DimensionError("scalar() on tensor of shape " + shape_str(shape));
    return values[0];
  }
};

// Reverse-mode sweep from a scalar loss node.
template <class T>
void backward(const TensorPtr<T>& loss) {
  if (loss->numel() != 1)
    throw DimensionError("backward requires a scalar loss, got " + shape_str(loss->shape));
  // Post-order DFS for a topological ordering.
  std::vector<TensorPtr<T>> order;
  std::unordered_set<const Tensor<T>*> seen;
  std::vector<std::pair<TensorPtr<T>, std::size_t>> stack;
  stack.emplace_back(loss, 0);
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      auto child = node->parents[idx++];
      if (child->requires_grad && seen.insert(child.get()).second)
        stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss->ensure_grad();
  loss->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& node = *it;
    if (node->backprop) node->backprop(*node);
  }
}

namespace ops {

template <class T>
TensorPtr<T> constant(std::vector<int> shape, std::vector<T> vals) {
  return Tensor<T>::from_values(std::move(shape), std::move(vals), false);
}

// input [B x I] * weight [I x O] + bias [O] -> [B x O]
template <class T>
TensorPtr<T> linear(const TensorPtr<T>& x, const TensorPtr<T>& w, const TensorPtr<T>& b) {
  if (x->shape.size() != 2 || w->shape.size() != 2 || x->dim(1) != w->dim(0))
    throw DimensionError("linear: input " + shape_str(x->shape) + " incompatible with weight " +
                         shape_str(w->shape));
  if (b->shape.size() != 1 || b->dim(0) != w->dim(1))
    throw DimensionError("linear: bias " + shape_str(b->shape) + " incompatible with weight " +
                         shape_str(w->shape));
  const int m = x->dim(0), k = x->dim(1), n = w->dim(1);
  auto out = Tensor<T>::zeros({m, n}, x->requires_grad || w->requires_grad || b->requires_grad);
  kernels::matmul(x->values.data(), w->values.data(), out->values.data(), m, k, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out->values[static_cast<std::size_t>(i) * n + j] += b->values[j];
  if (out->requires_grad) {
    out->parents = {x, w, b};
    out->backprop = [x, w, b, m, k, n](Tensor<T>& self) {
      if (x->requires_grad) {
        x->ensure_grad();
        std::vector<T> tmp(static_cast<std::size_t>(m) * k);
        kernels::matmul_bt(self.grad.data(), w->values.data(), tmp.data(), m, n, k);
        for (std::size_t i = 0; i < tmp.size(); ++i) x->grad[i] += tmp[i];
      }
      if (w->requires_grad) {
        w->ensure_grad();
        kernels::matmul_at_accum(x->values.data(), self.grad.data(), w->grad.data(), m, k, n);
      }
      if (b->requires_grad) {
        b->ensure_grad();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) b->grad[j] += self.grad[static_cast<std::size_t>(i) * n + j];
      }
    };
  }
  return out;
}

template <class T>
TensorPtr<T> relu(const TensorPtr<T>& x) {
  auto out = Tensor<T>::zeros(x->shape, x->requires_grad);
  kernels::relu(x->values.data(), out->values.data(), x->values.size());
  if (out->requires_grad) {
    out->parents = {x};
    out->backprop = [x](Tensor<T>& self) {
      x->ensure_grad();
      // subgradient at 0 is 0
      for (std::size_t i = 0; i < x->values.size(); ++i)
        if (x->values[i] > T(0)) x->grad[i] += self.grad[i];
    };
  }
  return out;
}

template <class T>
TensorPtr<T> tanh_op(const TensorPtr<T>& x) {
  auto out = Tensor<T>::zeros(x->shape, x->requires_grad);
  kernels::tanh_eval(x->values.data(), out->values.data(), x->values.size());
  if (out->requires_grad) {
    out->parents = {x};
    out->backprop = [x](Tensor<T>& self) {
      x->ensure_grad();
      for (std::size_t i = 0; i < x->values.size(); ++i)
        x->grad[i] += self.grad[i] * (T(1) - self.values[i] * self.values[i]);
    };
  }
  return out;
}

template <class T>
TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  if (a->shape != b->shape)
    throw DimensionError("add: shape mismatch " + shape_str(a->shape) + " vs " +
                         shape_str(b->shape));
  auto out = Tensor<T>::zeros(a->shape, a->requires_grad || b->requires_grad);
  for (std::size_t i = 0; i < a->values.size(); ++i) out->values[i] = a->values[i] + b->values[i];
  if (out->requires_grad) {
    out->parents = {a, b};
    out->backprop = [a, b](Tensor<T>& self) {
      for (auto& p : {a, b})
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < p->values.size(); ++i) p->grad[i] += self.grad[i];
        }
    };
  }
  return out;
}

template <class T>
TensorPtr<T> scale(const TensorPtr<T>& x, T s) {
  auto out = Tensor<T>::zeros(x->shape, x->requires_grad);
  for (std::size_t i = 0; i < x->values.size(); ++i) out->values[i] = x->values[i] * s;
  if (out->requires_grad) {
    out->parents = {x};
    out->backprop = [x, s](Tensor<T>& self) {
      x->ensure_grad();
      for (std::size_t i = 0; i < x->values.size(); ++i) x->grad[i] += self.grad[i] * s;
    };
  }
  return out;
}

// Channelwise max over rows: [N x C] -> [C]. Ties route gradient to the
// lowest row index.
template <class T>
TensorPtr<T> max_rows(const TensorPtr<T>& x, std::vector<int>* argmax_out = nullptr) {
  if (x->shape.size() != 2 || x->dim(0) < 1)
    throw DimensionError("max_rows: need non-empty [N x C] input, got " + shape_str(x->shape));
  const int n = x->dim(0), c = x->dim(1);
  auto out = Tensor<T>::zeros({c}, x->requires_grad);
  auto argmax = std::make_shared<std::vector<int>>(c, 0);
  for (int j = 0; j < c; ++j) out->values[j] = x->values[j];
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < c; ++j) {
      T v = x->values[static_cast<std::size_t>(i) * c + j];
      if (v > out->values[j]) {
        out->values[j] = v;
        (*argmax)[j] = i;
      }
    }
  if (argmax_out) *argmax_out = *argmax;
  if (out->requires_grad) {
    out->parents = {x};
    out->backprop = [x, argmax, c](Tensor<T>& self) {
      x->ensure_grad();
      for (int j = 0; j < c; ++j)
        x->grad[static_cast<std::size_t>((*argmax)[j]) * c + j] += self.grad[j];
    };
  }
  return out;
}

// Rows of `points` [N x D] each concatenated with `feat` [F] -> [N x (D+F)].
template <class T>
TensorPtr<T> concat_feature_rows(const TensorPtr<T>& points, const TensorPtr<T>& feat) {
  if (points->shape.size() != 2 || feat->shape.size() != 1)
    throw DimensionError("concat_feature_rows: want [N x D] points and [F] feature, got " +
                         shape_str(points->shape) + " and " + shape_str(feat->shape));
  const int n = points->dim(0), d = points->dim(1), f = feat->dim(0);
  auto out = Tensor<T>::zeros({n, d + f}, points->requires_grad || feat->requires_grad);
  for (int i = 0; i < n; ++i) {
    T* row = out->values.data() + static_cast<std::size_t>(i) * (d + f);
    const T* prow = points->values.data() + static_cast<std::size_t>(i) * d;
    std::copy(prow, prow + d, row);
    std::copy(feat->values.begin(), feat->values.end(), row + d);
  }
  if (out->requires_grad) {
    out->parents = {points, feat};
    out->backprop = [points, feat, n, d, f](Tensor<T>& self) {
      if (points->requires_grad) {
        points->ensure_grad();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < d; ++j)
            points->grad[static_cast<std::size_t>(i) * d + j] +=
                self.grad[static_cast<std::size_t>(i) * (d + f) + j];
      }
      if (feat->requires_grad) {
        feat->ensure_grad();
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < f; ++j)
            feat->grad[j] += self.grad[static_cast<std::size_t>(i) * (d + f) + d + j];
      }
    };
  }
  return out;
}

// Zero-pad columns: [N x D] -> [N x DOUT], extra coordinates zero.
template <class T>
TensorPtr<T> pad_cols(const TensorPtr<T>& x, int dout) {
  if (x->shape.size() != 2 || dout < x->dim(1))
    throw DimensionError("pad_cols: cannot pad " + shape_str(x->shape) + " to " +
                         std::to_string(dout) + " columns");
  const int n = x->dim(0), d = x->dim(1);
  if (d == dout) return x;
  auto out = Tensor<T>::zeros({n, dout}, x->requires_grad);
  for (int i = 0; i < n; ++i)
    std::copy(x->values.begin() + static_cast<std::size_t>(i) * d,
              x->values.begin() + static_cast<std::size_t>(i) * d + d,
              out->values.begin() + static_cast<std::size_t>(i) * dout);
  if (out->requires_grad) {
    out->parents = {x};
    out->backprop = [x, n, d, dout](Tensor<T>& self) {
      x->ensure_grad();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
          x->grad[static_cast<std::size_t>(i) * d + j] +=
              self.grad[static_cast<std::size_t>(i) * dout + j];
    };
  }
  return out;
}

// Apply the affine map packed in `params` (row-major A [3 x D] then b [3])
// to every row of `points` [N x D] -> [N x 3].
template <class T>
TensorPtr<T> affine_rows(const TensorPtr<T>& points, const TensorPtr<T>& params) {
  if (points->shape.size() != 2)
    throw DimensionError("affine_rows: points must be [N x D], got " + shape_str(points->shape));
  const int n = points->dim(0), d = points->dim(1);
  if (static_cast<int>(params->numel()) != 3 * (d + 1))
    throw DimensionError("affine_rows: need " + std::to_string(3 * (d + 1)) +
                         " parameters for D=" + std::to_string(d) + ", got " +
                         shape_str(params->shape));
  auto out = Tensor<T>::zeros({n, 3}, points->requires_grad || params->requires_grad);
  const T* A = params->values.data();
  const T* b = params->values.data() + 3 * d;
  for (int i = 0; i < n; ++i) {
    const T* p = points->values.data() + static_cast<std::size_t>(i) * d;
    T* o = out->values.data() + static_cast<std::size_t>(i) * 3;
    for (int r = 0; r < 3; ++r) {
      T acc = b[r];
      for (int j = 0; j < d; ++j) acc += A[r * d + j] * p[j];
      o[r] = acc;
    }
  }
  if (out->requires_grad) {
    out->parents = {points, params};
    out->backprop = [points, params, n, d](Tensor<T>& self) {
      const T* A = params->values.data();
      if (params->requires_grad) {
        params->ensure_grad();
        T* dA = params->grad.data();
        T* db = params->grad.data() + 3 * d;
        for (int i = 0; i < n; ++i) {
          const T* p = points->values.data() + static_cast<std::size_t>(i) * d;
          const T* g = self.grad.data() + static_cast<std::size_t>(i) * 3;
          for (int r = 0; r < 3; ++r) {
            for (int j = 0; j < d; ++j) dA[r * d + j] += g[r] * p[j];
            db[r] += g[r];
          }
        }
      }
      if (points->requires_grad) {
        points->ensure_grad();
        for (int i = 0; i < n; ++i) {
          T* dp = points->grad.data() + static_cast<std::size_t>(i) * d;
          const T* g = self.grad.data() + static_cast<std::size_t>(i) * 3;
          for (int r = 0; r < 3; ++r)
            for (int j = 0; j < d; ++j) dp[j] += g[r] * A[r * d + j];
        }
      }
    };
  }
  return out;
}

template <class T>
TensorPtr<T> reshape(const TensorPtr<T>& x, std::vector<int> shape) {
  auto out = Tensor<T>::zeros(shape, x->requires_grad);
  if (out->numel() != x->numel())
    throw DimensionError("reshape: " + shape_str(x->shape) + " -> " + shape_str(shape));
  out->values = x->values;
  if (out->requires_grad) {
    out->parents = {x};
    out->backprop = [x](Tensor<T>& self) {
      x->ensure_grad();
      for (std::size_t i = 0; i < x->values.size(); ++i) x->grad[i] += self.grad[i];
    };
  }
  return out;
}

// Row i of a [N x C] tensor as a [C] vector.
template <class T>
TensorPtr<T> slice_row(const TensorPtr<T>& x, int row) {
  if (x->shape.size() != 2 || row < 0 || row >= x->dim(0))
    throw DimensionError("slice_row: row " + std::to_string(row) + " of " + shape_str(x->shape));
  const int c = x->dim(1);
  auto out = Tensor<T>::zeros({c}, x->requires_grad);
  std::copy(x->values.begin() + static_cast<std::size_t>(row) * c,
            x->values.begin() + static_cast<std::size_t>(row) * c + c, out->values.begin());
  if (out->requires_grad) {
    out->parents = {x};
    out->backprop = [x, row, c](Tensor<T>& self) {
      x->ensure_grad();
      for (int j = 0; j < c; ++j) x->grad[static_cast<std::size_t>(row) * c + j] += self.grad[j];
    };
  }
  return out;
}

// Rows [row0, row0 + nrows) of a [N x C] tensor as a [nrows x C] tensor.
template <class T>
TensorPtr<T> slice_rows(const TensorPtr<T>& x, int row0, int nrows) {
  if (x->shape.size() != 2 || row0 < 0 || nrows < 1 || row0 + nrows > x->dim(0))
    throw DimensionError("slice_rows: rows [" + std::to_string(row0) + ", " +
                         std::to_string(row0 + nrows) + ") of " + shape_str(x->shape));
  const int c = x->dim(1);
  auto out = Tensor<T>::zeros({nrows, c}, x->requires_grad);
  const std::size_t off = static_cast<std::size_t>(row0) * c;
  std::copy(x->values.begin() + off, x->values.begin() + off + out->values.size(),
            out->values.begin());
  if (out->requires_grad) {
    out->parents = {x};
    out->backprop = [x, off](Tensor<T>& self) {
      x->ensure_grad();
      for (std::size_t i = 0; i < self.values.size(); ++i) x->grad[off + i] += self.grad[i];
    };
  }
  return out;
}

template <class T>
TensorPtr<T> sum_squares(const TensorPtr<T>& x) {
  auto out = Tensor<T>::zeros({1}, x->requires_grad);
  T acc = 0;
  for (T v : x->values) acc += v * v;
  out->values[0] = acc;
  if (out->requires_grad) {
    out->parents = {x};
    out->backprop = [x](Tensor<T>& self) {
      x->ensure_grad();
      for (std::size_t i = 0; i < x->values.size(); ++i)
        x->grad[i] += T(2) * x->values[i] * self.grad[0];
    };
  }
  return out;
}

// Vertically stack [Ni x C] tensors -> [sum(Ni) x C].
template <class T>
TensorPtr<T> concat_rows(const std::vector<TensorPtr<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: empty input list");
  const int c = parts[0]->dim(1);
  int total = 0;
  bool req = false;
  for (auto& p : parts) {
    if (p->shape.size() != 2 || p->dim(1) != c)
      throw DimensionError("concat_rows: column mismatch, " + shape_str(p->shape));
    total += p->dim(0);
    req = req || p->requires_grad;
  }
  auto out = Tensor<T>::zeros({total, c}, req);
  std::size_t off = 0;
  for (auto& p : parts) {
    std::copy(p->values.begin(), p->values.end(), out->values.begin() + off);
    off += p->values.size();
  }
  if (req) {
    out->parents = parts;
    out->backprop = [parts](Tensor<T>& self) {
      std::size_t off = 0;
      for (auto& p : parts) {
        if (p->requires_grad) {
          p->ensure_grad();
          for (std::size_t i = 0; i < p->values.size(); ++i) p->grad[i] += self.grad[off + i];
        }
        off += p->values.size();
      }
    };
  }
  return out;
}

}  // namespace ops
}  // namespace es
