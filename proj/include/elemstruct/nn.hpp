#pragma once

// Layer-level building blocks on top of the tensor engine: parameter
// registry, initialized linear layers and batch normalization.

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "elemstruct/tensor.hpp"

namespace es {

template <class T>
struct ParamStore {
  std::vector<std::pair<std::string, TensorPtr<T>>> items;

  void add(const std::string& name, const TensorPtr<T>& t) {
    t->requires_grad = true;
    items.emplace_back(name, t);
  }

  TensorPtr<T> find(const std::string& name) const {
    for (auto& [n, t] : items)
      if (n == name) return t;
    return nullptr;
  }

  void zero_grad() {
    for (auto& [n, t] : items) {
      t->ensure_grad();
      t->zero_grad();
    }
  }

  std::size_t total_count() const {
    std::size_t n = 0;
    for (auto& [name, t] : items) n += t->numel();
    return n;
  }

  std::size_t count_prefix(const std::string& prefix) const {
    std::size_t n = 0;
    for (auto& [name, t] : items)
      if (name.rfind(prefix, 0) == 0) n += t->numel();
    return n;
  }
};

// weights uniform in +-sqrt(1/fan_in), biases zero
template <class T>
struct LinearLayer {
  TensorPtr<T> weight;  // [in x out]
  TensorPtr<T> bias;    // [out]

  LinearLayer() = default;
  LinearLayer(int in, int out, Rng& rng) {
    weight = Tensor<T>::zeros({in, out});
    bias = Tensor<T>::zeros({out});
    double bound = std::sqrt(1.0 / in);
    for (auto& v : weight->values) v = static_cast<T>(rng.uniform(-bound, bound));
  }

  void register_params(ParamStore<T>& store, const std::string& prefix) {
    store.add(prefix + ".weight", weight);
    store.add(prefix + ".bias", bias);
  }

  TensorPtr<T> operator()(const TensorPtr<T>& x) const { return ops::linear(x, weight, bias); }

  std::size_t param_count() const { return weight->numel() + bias->numel(); }
};

template <class T>
struct BatchNorm1d {
  TensorPtr<T> gamma;  // [C]
  TensorPtr<T> beta;   // [C]
  std::shared_ptr<std::vector<T>> running_mean;
  std::shared_ptr<std::vector<T>> running_var;
  T eps = static_cast<T>(1e-5);
  T momentum = static_cast<T>(0.1);

  BatchNorm1d() = default;
  explicit BatchNorm1d(int channels) {
    gamma = Tensor<T>::zeros({channels});
    std::fill(gamma->values.begin(), gamma->values.end(), T(1));
    beta = Tensor<T>::zeros({channels});
    running_mean = std::make_shared<std::vector<T>>(channels, T(0));
    running_var = std::make_shared<std::vector<T>>(channels, T(1));
  }

  void register_params(ParamStore<T>& store, const std::string& prefix) {
    store.add(prefix + ".gamma", gamma);
    store.add(prefix + ".beta", beta);
  }

  TensorPtr<T> operator()(const TensorPtr<T>& x, bool train) {
    if (x->shape.size() != 2 || x->dim(1) != gamma->dim(0))
      throw DimensionError("batchnorm: input " + shape_str(x->shape) + " vs " +
                           std::to_string(gamma->dim(0)) + " channels");
    const int bsz = x->dim(0), c = x->dim(1);
    if (train && bsz < 2)
      throw DimensionError("batchnorm: train mode needs batch size >= 2, got " +
                           std::to_string(bsz));
    auto out = Tensor<T>::zeros({bsz, c}, x->requires_grad || gamma->requires_grad ||
                                              beta->requires_grad);
    auto mean = std::make_shared<std::vector<T>>(c, T(0));
    auto inv_std = std::make_shared<std::vector<T>>(c, T(0));
    if (train) {
      std::vector<T> var(c, T(0));
      for (int i = 0; i < bsz; ++i)
        for (int j = 0; j < c; ++j) (*mean)[j] += x->values[static_cast<std::size_t>(i) * c + j];
      for (int j = 0; j < c; ++j) (*mean)[j] /= T(bsz);
      for (int i = 0; i < bsz; ++i)
        for (int j = 0; j < c; ++j) {
          T d = x->values[static_cast<std::size_t>(i) * c + j] - (*mean)[j];
          var[j] += d * d;
        }
      for (int j = 0; j < c; ++j) var[j] /= T(bsz);
      for (int j = 0; j < c; ++j) {
        (*inv_std)[j] = T(1) / std::sqrt(var[j] + eps);
        (*running_mean)[j] = (T(1) - momentum) * (*running_mean)[j] + momentum * (*mean)[j];
        // unbiased variance for running statistics
        (*running_var)[j] =
            (T(1) - momentum) * (*running_var)[j] + momentum * var[j] * T(bsz) / T(bsz - 1);
      }
    } else {
      for (int j = 0; j < c; ++j) {
        (*mean)[j] = (*running_mean)[j];
        (*inv_std)[j] = T(1) / std::sqrt((*running_var)[j] + eps);
      }
    }
    for (int i = 0; i < bsz; ++i)
      for (int j = 0; j < c; ++j) {
        std::size_t idx = static_cast<std::size_t>(i) * c + j;
        out->values[idx] =
            gamma->values[j] * (x->values[idx] - (*mean)[j]) * (*inv_std)[j] + beta->values[j];
      }
    if (out->requires_grad) {
      auto g = gamma;
      auto bt = beta;
      out->parents = {x, g, bt};
      out->backprop = [x, g, bt, mean, inv_std, train, bsz, c](Tensor<T>& self) {
        std::vector<T> xhat(static_cast<std::size_t>(bsz) * c);
        for (int i = 0; i < bsz; ++i)
          for (int j = 0; j < c; ++j) {
            std::size_t idx = static_cast<std::size_t>(i) * c + j;
            xhat[idx] = (x->values[idx] - (*mean)[j]) * (*inv_std)[j];
          }
        if (g->requires_grad) {
          g->ensure_grad();
          for (int i = 0; i < bsz; ++i)
            for (int j = 0; j < c; ++j)
              g->grad[j] += self.grad[static_cast<std::size_t>(i) * c + j] *
                            xhat[static_cast<std::size_t>(i) * c + j];
        }
        if (bt->requires_grad) {
          bt->ensure_grad();
          for (int i = 0; i < bsz; ++i)
            for (int j = 0; j < c; ++j)
              bt->grad[j] += self.grad[static_cast<std::size_t>(i) * c + j];
        }
        if (!x->requires_grad) return;
        x->ensure_grad();
        if (!train) {
          for (int i = 0; i < bsz; ++i)
            for (int j = 0; j < c; ++j) {
              std::size_t idx = static_cast<std::size_t>(i) * c + j;
              x->grad[idx] += self.grad[idx] * g->values[j] * (*inv_std)[j];
            }
          return;
        }
        // backward through the batch statistics
        for (int j = 0; j < c; ++j) {
          T sum_dy = 0, sum_dy_xhat = 0;
          for (int i = 0; i < bsz; ++i) {
            std::size_t idx = static_cast<std::size_t>(i) * c + j;
            T dxh = self.grad[idx] * g->values[j];
            sum_dy += dxh;
            sum_dy_xhat += dxh * xhat[idx];
          }
          for (int i = 0; i < bsz; ++i) {
            std::size_t idx = static_cast<std::size_t>(i) * c + j;
            T dxh = self.grad[idx] * g->values[j];
            x->grad[idx] +=
                (*inv_std)[j] * (dxh - sum_dy / T(bsz) - xhat[idx] * sum_dy_xhat / T(bsz));
          }
        }
      };
    }
    return out;
  }

  std::size_t param_count() const { return gamma->numel() + beta->numel(); }
};

}  // namespace es
