#pragma once

// Point-set encoder: per-point MLP (ReLU, batchnorm while training),
// channelwise max over points, then a linear layer to the global shape
// feature. Eval mode uses running statistics, so the feature is exactly
// permutation and duplication invariant.

#include "elemstruct/config.hpp"
#include "elemstruct/geometry.hpp"
#include "elemstruct/nn.hpp"

namespace es {

template <class T>
class ShapeEncoder {
 public:
  ShapeEncoder() = default;

  ShapeEncoder(const std::vector<int>& hidden, int feature_size, Rng& rng)
      : feature_size_(feature_size) {
    int in = 3;
    for (int width : hidden) {
      layers_.emplace_back(in, width, rng);
      norms_.emplace_back(width);
      in = width;
    }
    final_ = LinearLayer<T>(in, feature_size, rng);
  }

  void register_params(ParamStore<T>& store, const std::string& prefix) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      layers_[i].register_params(store, prefix + ".mlp" + std::to_string(i));
      norms_[i].register_params(store, prefix + ".bn" + std::to_string(i));
    }
    final_.register_params(store, prefix + ".out");
  }

  // points: [N x 3] tensor -> feature [F]
  TensorPtr<T> operator()(const TensorPtr<T>& points, bool train) {
    return encode_batch({points}, train)[0];
  }

  // Encode a batch of clouds jointly: batchnorm statistics are computed
  // over the concatenated points of all shapes, not per shape. Per-shape
  // normalization would erase each shape's channel mean and variance —
  // exactly the statistics that identify the shape — so a training batch
  // must pass through the normalizers as one block.
  std::vector<TensorPtr<T>> encode_batch(const std::vector<TensorPtr<T>>& clouds, bool train) {
    if (clouds.empty()) throw DataError("encode: empty batch");
    int total = 0;
    for (const auto& points : clouds) {
      if (points->shape.size() != 2 || points->dim(1) != 3)
        throw DimensionError("encode: expected [N x 3] input, got " + shape_str(points->shape));
      if (points->dim(0) < 1) throw DataError("encode: empty point cloud");
      total += points->dim(0);
    }
    if (train && total < 2)
      throw DataError("encode: training mode needs at least 2 points (batchnorm)");
    auto x = clouds.size() == 1 ? clouds[0] : ops::concat_rows(clouds);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      x = layers_[i](x);
      x = norms_[i](x, train);
      x = ops::relu(x);
    }
    std::vector<TensorPtr<T>> features;
    int row = 0;
    for (const auto& points : clouds) {
      const int n = points->dim(0);
      auto segment = clouds.size() == 1 ? x : ops::slice_rows(x, row, n);
      auto pooled = ops::reshape(ops::max_rows(segment), {1, x->dim(1)});
      features.push_back(ops::reshape(final_(pooled), {feature_size_}));
      row += n;
    }
    return features;
  }

  int feature_size() const { return feature_size_; }

  template <class Sink>
  void collect_running(Sink& sink, const std::string& prefix) {
    for (std::size_t i = 0; i < norms_.size(); ++i) {
      sink.emplace_back(prefix + ".bn" + std::to_string(i) + ".mean", norms_[i].running_mean);
      sink.emplace_back(prefix + ".bn" + std::to_string(i) + ".var", norms_[i].running_var);
    }
  }

  std::size_t param_count() const {
    std::size_t n = final_.param_count();
    for (auto& l : layers_) n += l.param_count();
    for (auto& b : norms_) n += b.param_count();
    return n;
  }

 private:
  std::vector<LinearLayer<T>> layers_;
  std::vector<BatchNorm1d<T>> norms_;
  LinearLayer<T> final_;
  int feature_size_ = 0;
};

}  // namespace es
