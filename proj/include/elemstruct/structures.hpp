#pragma once

// Learnable elementary-structure modules: per-point translation tables
// and continuous patch-deformation MLPs, plus the initial geometry they
// start from.

#include "elemstruct/config.hpp"
#include "elemstruct/meshio.hpp"
#include "elemstruct/nn.hpp"
#include "elemstruct/sampling.hpp"

namespace es {

// Pad with zero columns or project to the leading coordinates so a cloud
// lands in the requested dimensionality.
inline PointCloud embed_to(const PointCloud& cloud, int dim_out) {
  if (cloud.dim == dim_out) return cloud;
  PointCloud out(dim_out, cloud.size());
  out.ordered = cloud.ordered;
  const int copy = std::min(cloud.dim, dim_out);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (int j = 0; j < copy; ++j) out.at(i, j) = cloud.at(i, j);
  return out;
}

// The fixed starting geometry S_k from which a structure is learned.
struct InitialStructure {
  InitialKind kind = InitialKind::kUnitSquare2d;
  int dim_in = 2;
  PointCloud fixed_points;  // kFixedPointSet / kRandomPoints
  TriangleMesh mesh;        // kTemplateMesh

  bool supports_resampling() const {
    return kind == InitialKind::kUnitSquare2d || kind == InitialKind::kTemplateMesh;
  }

  // Fresh samples of the initial surface.
  PointCloud sample(std::size_t n, std::uint64_t seed) const {
    switch (kind) {
      case InitialKind::kUnitSquare2d:
        return sample_unit_square(n, SquareSampling::kRandom, seed);
      case InitialKind::kTemplateMesh:
        return sample_mesh_surface(mesh, n, seed);
      default:
        throw DataError("resample_initial: '" + to_string(kind) +
                        "' is a fixed point set and cannot be resampled");
    }
  }

  // The point set a module is built over.
  PointCloud base_points(std::size_t n, std::uint64_t seed) const {
    if (kind == InitialKind::kFixedPointSet || kind == InitialKind::kRandomPoints) {
      if (fixed_points.size() != n && n != 0)
        throw DataError("initial structure holds " + std::to_string(fixed_points.size()) +
                        " points but " + std::to_string(n) + " were requested");
      return fixed_points;
    }
    return sample(n, seed);
  }

  static InitialStructure unit_square() {
    return InitialStructure{InitialKind::kUnitSquare2d, 2, {}, {}};
  }

  static InitialStructure from_fixed_points(PointCloud cloud) {
    InitialStructure s;
    s.kind = InitialKind::kFixedPointSet;
    s.dim_in = cloud.dim;
    s.fixed_points = std::move(cloud);
    return s;
  }

  static InitialStructure random_points(std::size_t n, std::uint64_t seed) {
    InitialStructure s;
    s.kind = InitialKind::kRandomPoints;
    s.dim_in = 3;
    s.fixed_points = PointCloud(3, n);
    Rng rng(seed);
    for (auto& v : s.fixed_points.coords) v = rng.uniform(-0.5, 0.5);
    return s;
  }

  static InitialStructure from_mesh(TriangleMesh m) {
    InitialStructure s;
    s.kind = InitialKind::kTemplateMesh;
    s.dim_in = 3;
    s.mesh = std::move(m);
    return s;
  }
};

// One learnable map psi_k. Translation holds a per-point offset table over
// a fixed base; deformation is a continuous MLP usable on any sample set.
template <class T>
class StructureModule {
 public:
  StructureModule() = default;

  static StructureModule translation(const PointCloud& raw_base, int d_e) {
    StructureModule m;
    m.kind_ = StructureKind::kTranslation;
    m.d_e_ = d_e;
    m.d_in_ = raw_base.dim;
    m.base_ = embed_to(raw_base, d_e);
    m.offsets_ = Tensor<T>::zeros({static_cast<int>(m.base_.size()), d_e});
    return m;
  }

  static StructureModule deformation(int d_in, int d_e, const std::vector<int>& hidden,
                                     Rng& rng) {
    StructureModule m;
    m.kind_ = StructureKind::kDeformation;
    m.d_in_ = d_in;
    m.d_e_ = d_e;
    int in = d_in;
    for (int width : hidden) {
      m.layers_.emplace_back(in, width, rng);
      in = width;
    }
    m.layers_.emplace_back(in, d_e, rng);  // no final activation
    return m;
  }

  StructureKind kind() const { return kind_; }
  int dim_in() const { return d_in_; }
  int dim_out() const { return d_e_; }
  const PointCloud& base() const { return base_; }
  const TensorPtr<T>& offsets() const { return offsets_; }

  void register_params(ParamStore<T>& store, const std::string& prefix) {
    if (kind_ == StructureKind::kTranslation) {
      store.add(prefix + ".offsets", offsets_);
    } else {
      for (std::size_t i = 0; i < layers_.size(); ++i)
        layers_[i].register_params(store, prefix + ".def" + std::to_string(i));
    }
  }

  // samples: [M x d_in] (deformation) or exactly the stored base
  // (translation). Output: structure points E_k, [M x d_e].
  TensorPtr<T> forward(const TensorPtr<T>& samples) const {
    if (kind_ == StructureKind::kTranslation) {
      if (samples && samples->dim(0) != static_cast<int>(base_.size()))
        throw DimensionError("translation module: queried with " +
                             std::to_string(samples->dim(0)) + " samples, stores " +
                             std::to_string(base_.size()));
      auto base_t = Tensor<T>::zeros({static_cast<int>(base_.size()), d_e_});
      for (std::size_t i = 0; i < base_.coords.size(); ++i)
        base_t->values[i] = static_cast<T>(base_.coords[i]);
      return ops::add(base_t, offsets_);
    }
    if (!samples || samples->shape.size() != 2 || samples->dim(1) != d_in_)
      throw DimensionError("deformation module: expected [M x " + std::to_string(d_in_) +
                           "] samples");
    auto x = samples;
    for (std::size_t i = 0; i + 1 < layers_.size(); ++i) x = ops::relu(layers_[i](x));
    return layers_.back()(x);
  }

  // Replace the stored base (checkpoint restore). Offset table keeps its
  // shape, so the point count must match.
  void set_base(const PointCloud& raw_base) {
    if (kind_ != StructureKind::kTranslation) return;
    if (raw_base.size() != base_.size())
      throw DataError("translation module: base size mismatch on restore");
    base_ = embed_to(raw_base, d_e_);
  }

  std::size_t param_count() const {
    if (kind_ == StructureKind::kTranslation) return offsets_->numel();
    std::size_t n = 0;
    for (auto& l : layers_) n += l.param_count();
    return n;
  }

 private:
  StructureKind kind_ = StructureKind::kTranslation;
  int d_in_ = 2;
  int d_e_ = 2;
  PointCloud base_;
  TensorPtr<T> offsets_;
  std::vector<LinearLayer<T>> layers_;
};

}  // namespace es
