#pragma once

// Shape-conditioned adjustment modules p_k. Linear adjustment predicts a
// per-shape affine map from the shape feature through a hypernetwork; MLP
// adjustment evaluates a pointwise network on [structure point, feature].
// Both end in tanh, so outputs live in (-1,1)^3.

#include "elemstruct/config.hpp"
#include "elemstruct/nn.hpp"

namespace es {

template <class T>
class LinearAdjustment {
 public:
  LinearAdjustment() = default;

  LinearAdjustment(int feature_size, int d_e, const std::vector<int>& hidden, Rng& rng)
      : d_e_(d_e) {
    int in = feature_size;
    for (int width : hidden) {
      layers_.emplace_back(in, width, rng);
      norms_.emplace_back(width);
      in = width;
    }
    layers_.emplace_back(in, 3 * (d_e + 1), rng);  // A row-major then b
  }

  void register_params(ParamStore<T>& store, const std::string& prefix) {
    for (std::size_t i = 0; i < layers_.size(); ++i)
      layers_[i].register_params(store, prefix + ".h" + std::to_string(i));
    for (std::size_t i = 0; i < norms_.size(); ++i)
      norms_[i].register_params(store, prefix + ".bn" + std::to_string(i));
  }

  // features: [B x F] -> per-shape affine parameters [B x 3(d_e+1)],
  // each entry in (-1,1).
  TensorPtr<T> predict(const TensorPtr<T>& features, bool train) {
    auto x = features;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
      x = layers_[i](x);
      x = norms_[i](x, train);
      x = ops::relu(x);
    }
    return ops::tanh_op(layers_.back()(x));
  }

  // Apply one shape's predicted affine map to the structure points.
  TensorPtr<T> apply(const TensorPtr<T>& structure_points, const TensorPtr<T>& params) const {
    if (structure_points->dim(1) != d_e_)
      throw DimensionError("linear_adjust: structure dim " +
                           std::to_string(structure_points->dim(1)) + " vs module d_e " +
                           std::to_string(d_e_));
    return ops::affine_rows(structure_points, params);
  }

  template <class Sink>
  void collect_running(Sink& sink, const std::string& prefix) {
    for (std::size_t i = 0; i < norms_.size(); ++i) {
      sink.emplace_back(prefix + ".bn" + std::to_string(i) + ".mean", norms_[i].running_mean);
      sink.emplace_back(prefix + ".bn" + std::to_string(i) + ".var", norms_[i].running_var);
    }
  }

  int dim() const { return d_e_; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (auto& l : layers_) n += l.param_count();
    for (auto& b : norms_) n += b.param_count();
    return n;
  }

 private:
  int d_e_ = 3;
  std::vector<LinearLayer<T>> layers_;
  std::vector<BatchNorm1d<T>> norms_;
};

template <class T>
class MlpAdjustment {
 public:
  MlpAdjustment() = default;

  MlpAdjustment(int feature_size, int d_e, const std::vector<int>& hidden, Rng& rng)
      : d_e_(d_e), feature_size_(feature_size) {
    int in = d_e + feature_size;
    for (int width : hidden) {
      layers_.emplace_back(in, width, rng);
      norms_.emplace_back(width);
      in = width;
    }
    layers_.emplace_back(in, 3, rng);
  }

  void register_params(ParamStore<T>& store, const std::string& prefix) {
    for (std::size_t i = 0; i < layers_.size(); ++i)
      layers_[i].register_params(store, prefix + ".h" + std::to_string(i));
    for (std::size_t i = 0; i < norms_.size(); ++i)
      norms_[i].register_params(store, prefix + ".bn" + std::to_string(i));
  }

  // structure_points [N x d_e], feature [F] -> [N x 3]
  TensorPtr<T> operator()(const TensorPtr<T>& structure_points, const TensorPtr<T>& feature,
                          bool train) {
    if (structure_points->dim(1) != d_e_)
      throw DimensionError("mlp_adjust: structure dim " +
                           std::to_string(structure_points->dim(1)) + " vs module d_e " +
                           std::to_string(d_e_));
    if (feature->dim(0) != feature_size_)
      throw DimensionError("mlp_adjust: feature length " + std::to_string(feature->dim(0)) +
                           " vs expected " + std::to_string(feature_size_));
    return forward_rows(ops::concat_feature_rows(structure_points, feature), train);
  }

  // Evaluate the pointwise network on prebuilt [M x (d_e+F)] rows. The
  // feature columns are constant within one shape, so batchnorm in
  // training mode must see rows from the whole shape batch at once; a
  // per-shape pass would subtract the feature contribution exactly and
  // cut the encoder out of the gradient path.
  TensorPtr<T> forward_rows(const TensorPtr<T>& rows, bool train) {
    if (rows->dim(1) != d_e_ + feature_size_)
      throw DimensionError("mlp_adjust: row width " + std::to_string(rows->dim(1)) +
                           " vs expected " + std::to_string(d_e_ + feature_size_));
    auto x = rows;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
      x = layers_[i](x);
      x = norms_[i](x, train);
      x = ops::relu(x);
    }
    return ops::tanh_op(layers_.back()(x));
  }

  template <class Sink>
  void collect_running(Sink& sink, const std::string& prefix) {
    for (std::size_t i = 0; i < norms_.size(); ++i) {
      sink.emplace_back(prefix + ".bn" + std::to_string(i) + ".mean", norms_[i].running_mean);
      sink.emplace_back(prefix + ".bn" + std::to_string(i) + ".var", norms_[i].running_var);
    }
  }

  int dim() const { return d_e_; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (auto& l : layers_) n += l.param_count();
    for (auto& b : norms_) n += b.param_count();
    return n;
  }

 private:
  int d_e_ = 3;
  int feature_size_ = 0;
  std::vector<LinearLayer<T>> layers_;
  std::vector<BatchNorm1d<T>> norms_;
};

}  // namespace es
