#pragma once

// The full reconstruction model: encoder f, K elementary-structure
// modules psi_k and K adjustment modules p_k. The output for a target Z
// is the union over k of p_k(psi_k(S_k), f(Z)); row k*N+i of the output
// comes from structure k, structure point i.

#include <memory>

#include "elemstruct/adjustment.hpp"
#include "elemstruct/encoder.hpp"
#include "elemstruct/nn_losses.hpp"
#include "elemstruct/structures.hpp"

namespace es {

struct ParamCounts {
  std::size_t encoder = 0;
  std::size_t structures = 0;
  std::size_t adjustments = 0;
  std::size_t total() const { return encoder + structures + adjustments; }
};

template <class T>
class ReconstructionModel {
 public:
  ReconstructionModel(ModelConfig cfg, InitialStructure initial)
      : cfg_(std::move(cfg)), initial_(std::move(initial)) {
    cfg_.validate();
    if (cfg_.freeze_structures && cfg_.structure_kind == StructureKind::kDeformation)
      throw DataError("freeze_structures is only meaningful with translation modules");
    Rng rng(cfg_.init_seed * 0x9e3779b97f4a7c15ull + 17);
    encoder_ = ShapeEncoder<T>(cfg_.encoder_hidden, cfg_.feature_size, rng);
    const int n = cfg_.points_per_structure;
    for (int k = 0; k < cfg_.k; ++k) {
      Rng sample_rng = rng.fork(1000 + k);
      if (cfg_.structure_kind == StructureKind::kTranslation) {
        PointCloud base = initial_.base_points(static_cast<std::size_t>(n), sample_rng.next_u64());
        structures_.push_back(StructureModule<T>::translation(base, cfg_.structure_dim));
        samples_.push_back(structures_.back().base());
      } else {
        structures_.push_back(StructureModule<T>::deformation(
            initial_.dim_in, cfg_.structure_dim, cfg_.deform_hidden, rng));
        samples_.push_back(initial_.base_points(static_cast<std::size_t>(n), sample_rng.next_u64()));
      }
      if (cfg_.adjustment_kind == AdjustmentKind::kLinear)
        linear_adj_.emplace_back(cfg_.feature_size, cfg_.structure_dim, cfg_.hyper_hidden, rng);
      else
        mlp_adj_.emplace_back(cfg_.feature_size, cfg_.structure_dim, cfg_.adjustment_hidden, rng);
    }
    encoder_.register_params(params_, "encoder");
    for (int k = 0; k < cfg_.k; ++k) {
      if (!cfg_.freeze_structures)
        structures_[k].register_params(params_, "structure" + std::to_string(k));
      if (cfg_.adjustment_kind == AdjustmentKind::kLinear)
        linear_adj_[k].register_params(params_, "adjust" + std::to_string(k));
      else
        mlp_adj_[k].register_params(params_, "adjust" + std::to_string(k));
    }
  }

  const ModelConfig& config() const { return cfg_; }
  const InitialStructure& initial() const { return initial_; }
  ParamStore<T>& params() { return params_; }
  StructureModule<T>& structure(int k) { return structures_[k]; }
  const PointCloud& current_samples(int k) const { return samples_[k]; }

  // Draw fresh initial samples S_k for deformation modules. One call per
  // training step; all shapes of the step share the samples.
  void resample(std::uint64_t seed) {
    if (cfg_.structure_kind != StructureKind::kDeformation) return;
    if (!initial_.supports_resampling()) return;
    Rng rng(seed);
    for (int k = 0; k < cfg_.k; ++k)
      samples_[k] = initial_.sample(static_cast<std::size_t>(cfg_.points_per_structure),
                                    rng.next_u64());
  }

  struct ForwardResult {
    std::vector<TensorPtr<T>> outputs;          // per shape [K*N x 3]
    TensorPtr<T> features;                      // [B x F]
    std::vector<TensorPtr<T>> structure_points; // per k, [N x d_e]
  };

  ForwardResult forward_batch(const std::vector<const PointCloud*>& targets, bool train) {
    if (targets.empty()) throw DataError("forward: empty batch");
    const int bsz = static_cast<int>(targets.size());
    std::vector<TensorPtr<T>> clouds;
    for (const PointCloud* z : targets) {
      if (z->dim != 3) throw DimensionError("forward: target must be 3D, got d=" +
                                            std::to_string(z->dim));
      z->validate("forward target");
      clouds.push_back(cloud_tensor(*z));
    }
    // The whole batch goes through each batchnorm as one block; see the
    // notes in encoder.hpp and adjustment.hpp.
    auto feats = encoder_.encode_batch(clouds, train);
    ForwardResult result;
    if (bsz == 1) {
      result.features = ops::reshape(feats[0], {1, cfg_.feature_size});
    } else {
      std::vector<TensorPtr<T>> feature_rows;
      for (auto& f : feats) feature_rows.push_back(ops::reshape(f, {1, cfg_.feature_size}));
      result.features = ops::concat_rows(feature_rows);
    }
    for (int k = 0; k < cfg_.k; ++k)
      result.structure_points.push_back(structures_[k].forward(cloud_tensor(samples_[k])));
    std::vector<std::vector<TensorPtr<T>>> parts(bsz);  // per shape, per k
    for (int k = 0; k < cfg_.k; ++k) {
      if (cfg_.adjustment_kind == AdjustmentKind::kLinear) {
        auto affine_params = linear_adj_[k].predict(result.features, train);
        for (int s = 0; s < bsz; ++s)
          parts[s].push_back(linear_adj_[k].apply(result.structure_points[k],
                                                  ops::slice_row(affine_params, s)));
      } else {
        const int n = result.structure_points[k]->dim(0);
        std::vector<TensorPtr<T>> rows;
        for (int s = 0; s < bsz; ++s)
          rows.push_back(ops::concat_feature_rows(result.structure_points[k], feats[s]));
        auto out = mlp_adj_[k].forward_rows(bsz == 1 ? rows[0] : ops::concat_rows(rows), train);
        for (int s = 0; s < bsz; ++s)
          parts[s].push_back(bsz == 1 ? out : ops::slice_rows(out, s * n, n));
      }
    }
    for (int s = 0; s < bsz; ++s)
      result.outputs.push_back(cfg_.k == 1 ? parts[s][0] : ops::concat_rows(parts[s]));
    return result;
  }

  // Eval-mode reconstruction of one target as a plain cloud. Row k*N+i
  // carries provenance (structure k, point i).
  PointCloud reconstruct(const PointCloud& target) {
    auto result = forward_batch({&target}, false);
    return tensor_cloud(*result.outputs[0]);
  }

  // Structure points E_k at the current parameters (eval).
  PointCloud structure_cloud(int k) {
    auto e = structures_[k].forward(cloud_tensor(samples_[k]));
    return tensor_cloud(*e);
  }

  // Eq.-3-style training loss: symmetric Chamfer between the union output
  // and the target, minima taken jointly over all (k, i).
  TensorPtr<T> loss_unsupervised(const TensorPtr<T>& output, const PointCloud& target) const {
    if (cfg_.supervised) throw DataError("loss_unsupervised on a supervised-mode model");
    return ops::chamfer_loss(output, cloud_tensor(target));
  }

  // Eq.-2-style loss: index-aligned mean squared distance (K=1).
  TensorPtr<T> loss_supervised(const TensorPtr<T>& output, const PointCloud& target) const {
    if (!cfg_.supervised) throw DataError("loss_supervised on an unsupervised-mode model");
    if (static_cast<int>(target.size()) != output->dim(0))
      throw DimensionError("loss_supervised: target has " + std::to_string(target.size()) +
                           " points, output has " + std::to_string(output->dim(0)));
    return ops::l2_match_loss(output, cloud_tensor(target));
  }

  TensorPtr<T> loss(const TensorPtr<T>& output, const PointCloud& target) const {
    return cfg_.supervised ? loss_supervised(output, target) : loss_unsupervised(output, target);
  }

  // Eval-mode helpers used by mesh export and matching.
  TensorPtr<T> encode_eval(const PointCloud& target) {
    return encoder_(cloud_tensor(target), false);
  }

  TensorPtr<T> adjust_eval(int k, const TensorPtr<T>& structure_points,
                           const TensorPtr<T>& feature) {
    if (cfg_.adjustment_kind == AdjustmentKind::kLinear) {
      auto p = linear_adj_[k].predict(ops::reshape(feature, {1, cfg_.feature_size}), false);
      return linear_adj_[k].apply(structure_points, ops::slice_row(p, 0));
    }
    return mlp_adj_[k](structure_points, feature, false);
  }

  // --- checkpoint restore hooks ---

  void set_samples(int k, const PointCloud& samples) {
    samples_[k] = samples;
    structures_[k].set_base(samples);
  }

  void set_initial_fixed_points(const PointCloud& cloud) { initial_.fixed_points = cloud; }
  void set_initial_mesh(const TriangleMesh& mesh) { initial_.mesh = mesh; }

  void collect_running_stats(
      std::vector<std::pair<std::string, std::shared_ptr<std::vector<T>>>>& sink) {
    encoder_.collect_running(sink, "encoder");
    for (int k = 0; k < cfg_.k; ++k) {
      if (cfg_.adjustment_kind == AdjustmentKind::kLinear)
        linear_adj_[k].collect_running(sink, "adjust" + std::to_string(k));
      else
        mlp_adj_[k].collect_running(sink, "adjust" + std::to_string(k));
    }
  }

  ParamCounts count_parameters() const {
    ParamCounts counts;
    counts.encoder = encoder_.param_count();
    for (auto& s : structures_) counts.structures += s.param_count();
    for (auto& a : linear_adj_) counts.adjustments += a.param_count();
    for (auto& a : mlp_adj_) counts.adjustments += a.param_count();
    return counts;
  }

  static TensorPtr<T> cloud_tensor(const PointCloud& cloud) {
    auto t = Tensor<T>::zeros({static_cast<int>(cloud.size()), cloud.dim});
    for (std::size_t i = 0; i < cloud.coords.size(); ++i)
      t->values[i] = static_cast<T>(cloud.coords[i]);
    return t;
  }

  static PointCloud tensor_cloud(const Tensor<T>& t) {
    PointCloud cloud(t.dim(1), static_cast<std::size_t>(t.dim(0)));
    for (std::size_t i = 0; i < t.values.size(); ++i)
      cloud.coords[i] = static_cast<double>(t.values[i]);
    return cloud;
  }

 private:
  ModelConfig cfg_;
  InitialStructure initial_;
  ShapeEncoder<T> encoder_;
  std::vector<StructureModule<T>> structures_;
  std::vector<LinearAdjustment<T>> linear_adj_;
  std::vector<MlpAdjustment<T>> mlp_adj_;
  std::vector<PointCloud> samples_;  // current S_k (raw input dim)
  ParamStore<T> params_;
};

}  // namespace es
