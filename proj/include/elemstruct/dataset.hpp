#pragma once

// Dataset abstraction: loading from a manifest, per-shape normalization
// into the tanh output box, a deterministic synthetic generator standing
// in for large scan collections, and stratified splitting.

#include <algorithm>
#include <filesystem>
#include <map>
#include <numeric>

#include "elemstruct/meshio.hpp"
#include "elemstruct/sampling.hpp"

namespace es {

// Shapes are normalized per shape by a similarity transform so every
// point lands in (-0.95, 0.95)^3, leaving headroom inside the (-1,1)^3
// tanh output range.
constexpr double kNormalizedHalfExtent = 0.95;

struct Normalization {
  double center[3] = {0, 0, 0};
  double scale = 1.0;

  void apply(PointCloud& cloud) const {
    for (std::size_t i = 0; i < cloud.size(); ++i)
      for (int j = 0; j < 3; ++j) cloud.at(i, j) = (cloud.at(i, j) - center[j]) * scale;
  }

  void invert(PointCloud& cloud) const {
    for (std::size_t i = 0; i < cloud.size(); ++i)
      for (int j = 0; j < 3; ++j) cloud.at(i, j) = cloud.at(i, j) / scale + center[j];
  }
};

inline Normalization compute_normalization(const PointCloud& cloud) {
  Normalization norm;
  double lo[3], hi[3];
  for (int j = 0; j < 3; ++j) {
    lo[j] = hi[j] = cloud.at(0, j);
  }
  for (std::size_t i = 1; i < cloud.size(); ++i)
    for (int j = 0; j < 3; ++j) {
      lo[j] = std::min(lo[j], cloud.at(i, j));
      hi[j] = std::max(hi[j], cloud.at(i, j));
    }
  double half = 0.0;
  for (int j = 0; j < 3; ++j) {
    norm.center[j] = 0.5 * (lo[j] + hi[j]);
    half = std::max(half, 0.5 * (hi[j] - lo[j]));
  }
  norm.scale = half > 0.0 ? kNormalizedHalfExtent / half : 1.0;
  return norm;
}

struct ShapeRecord {
  std::string id;
  std::string category;
  std::string group;  // non-empty: shapes in this group are in correspondence
  PointCloud cloud;   // normalized, d=3
  Normalization norm;
};

struct ShapeDataset {
  std::vector<ShapeRecord> records;
  PointCloud template_cloud;  // ordered template for correspondence groups; may be empty

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

// ---------------------------------------------------------------------
// manifest loading

// Manifest: one record per line, "relative/path<TAB>category<TAB>group".
inline ShapeDataset load_dataset(const std::string& root, const std::string& manifest,
                                 int mesh_sample_points, std::uint64_t seed) {
  namespace fs = std::filesystem;
  std::ifstream in(manifest);
  if (!in) throw DataError("cannot open manifest: " + manifest);
  ShapeDataset dataset;
  std::string line;
  long line_no = 0;
  Rng rng(seed);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      auto tab = line.find('\t', pos);
      cols.push_back(line.substr(pos, tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    if (cols.size() < 2)
      throw DataError(manifest + ":" + std::to_string(line_no) +
                      ": expected path<TAB>category[<TAB>group]");
    ShapeRecord rec;
    const std::string path = (fs::path(root) / cols[0]).string();
    rec.id = cols[0];
    rec.category = cols[1];
    if (cols.size() > 2) rec.group = cols[2];
    const std::string ext = fs::path(cols[0]).extension().string();
    try {
      if (ext == ".xyz") {
        rec.cloud = load_xyz(path);
        if (rec.cloud.dim != 3)
          throw DataError(path + ": expected 3 columns, got " + std::to_string(rec.cloud.dim));
      } else if (ext == ".obj") {
        rec.cloud = sample_mesh_surface(load_obj(path), mesh_sample_points, rng.next_u64());
      } else if (ext == ".ply") {
        auto ply = load_ply(path);
        if (ply.faces.empty()) {
          rec.cloud = ply.points;
        } else {
          TriangleMesh mesh;
          for (std::size_t i = 0; i < ply.points.size(); ++i)
            mesh.vertices.push_back(
                {ply.points.at(i, 0), ply.points.at(i, 1), ply.points.at(i, 2)});
          mesh.faces = ply.faces;
          rec.cloud = sample_mesh_surface(mesh, mesh_sample_points, rng.next_u64());
        }
      } else {
        throw DataError("unsupported file type '" + ext + "'");
      }
    } catch (const DataError& e) {
      throw DataError("record '" + rec.id + "': " + e.what());
    }
    rec.cloud.validate(rec.id.c_str());
    rec.cloud.ordered = !rec.group.empty();
    rec.norm = compute_normalization(rec.cloud);
    rec.norm.apply(rec.cloud);
    dataset.records.push_back(std::move(rec));
  }
  if (dataset.records.empty()) throw DataError(manifest + ": no records");
  // ordered groups pick up the generator template when present
  fs::path tpl = fs::path(root) / "template.xyz";
  if (fs::exists(tpl)) {
    dataset.template_cloud = load_xyz(tpl.string());
    dataset.template_cloud.ordered = true;
  }
  return dataset;
}

inline void save_normalization_csv(const std::string& path, const ShapeDataset& dataset) {
  auto out = io_detail::open_output(path);
  out << "id,center_x,center_y,center_z,scale\n";
  for (const auto& rec : dataset.records)
    out << rec.id << ',' << io_detail::fmt9(rec.norm.center[0]) << ','
        << io_detail::fmt9(rec.norm.center[1]) << ',' << io_detail::fmt9(rec.norm.center[2])
        << ',' << io_detail::fmt9(rec.norm.scale) << '\n';
}

// ---------------------------------------------------------------------
// synthetic generators

enum class SyntheticKind { kBoxEllipsoidMix, kArticulatedChain };

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::kBoxEllipsoidMix;
  int count = 100;
  int points_per_shape = 512;
  std::uint64_t seed = 0;
  // articulated-chain parameters
  int segments = 4;
  double segment_length = 0.5;
  double capsule_radius = 0.1;
  double max_joint_angle = 0.8;  // radians, per axis
};

namespace synth_detail {

struct Primitive {
  bool is_box = true;
  double center[3];
  double half[3];
};

inline double primitive_area(const Primitive& p) {
  if (p.is_box)
    return 8.0 * (p.half[0] * p.half[1] + p.half[1] * p.half[2] + p.half[0] * p.half[2]);
  // Thomsen approximation of the ellipsoid surface area
  const double q = 1.6075;
  const double a = std::pow(p.half[0], q), b = std::pow(p.half[1], q),
               c = std::pow(p.half[2], q);
  return 4.0 * 3.14159265358979323846 * std::pow((a * b + b * c + a * c) / 3.0, 1.0 / q);
}

inline void sample_primitive(const Primitive& p, Rng& rng, double* out) {
  if (p.is_box) {
    const double areas[3] = {p.half[1] * p.half[2], p.half[0] * p.half[2],
                             p.half[0] * p.half[1]};
    const double total = areas[0] + areas[1] + areas[2];
    double pick = rng.uniform() * total;
    int axis = pick < areas[0] ? 0 : (pick < areas[0] + areas[1] ? 1 : 2);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    for (int j = 0; j < 3; ++j)
      out[j] = p.center[j] + rng.uniform(-p.half[j], p.half[j]);
    out[axis] = p.center[axis] + sign * p.half[axis];
  } else {
    double u[3];
    double norm2;
    do {
      for (int j = 0; j < 3; ++j) u[j] = rng.normal();
      norm2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
    } while (norm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(norm2);
    for (int j = 0; j < 3; ++j) out[j] = p.center[j] + p.half[j] * u[j] * inv;
  }
}

// Fixed material coordinate of one chain point.
struct ChainCoord {
  int segment;
  double t;    // position along the segment axis in [0,1]
  double phi;  // angle around the axis
};

inline void rot_z(double a, double r[3][3]) {
  const double c = std::cos(a), s = std::sin(a);
  double m[3][3] = {{c, -s, 0}, {s, c, 0}, {0, 0, 1}};
  std::copy(&m[0][0], &m[0][0] + 9, &r[0][0]);
}

inline void rot_x(double a, double r[3][3]) {
  const double c = std::cos(a), s = std::sin(a);
  double m[3][3] = {{1, 0, 0}, {0, c, -s}, {0, s, c}};
  std::copy(&m[0][0], &m[0][0] + 9, &r[0][0]);
}

inline void mat_mul(const double a[3][3], const double b[3][3], double out[3][3]) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0;
      for (int p = 0; p < 3; ++p) acc += a[i][p] * b[p][j];
      out[i][j] = acc;
    }
}

inline void mat_vec(const double a[3][3], const double v[3], double out[3]) {
  for (int i = 0; i < 3; ++i) out[i] = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
}

// Pose the chain with the given joint angles and evaluate every material
// coordinate. Index i lands at the same material location in every pose,
// which is the ground-truth correspondence.
inline PointCloud pose_chain(const SyntheticSpec& spec, const std::vector<ChainCoord>& coords,
                             const std::vector<std::pair<double, double>>& angles) {
  PointCloud cloud(3, coords.size());
  cloud.ordered = true;
  std::vector<std::array<double, 3>> bases(spec.segments + 1);
  std::vector<std::array<std::array<double, 3>, 3>> frames(spec.segments);
  bases[0] = {0, 0, 0};
  double acc[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int s = 0; s < spec.segments; ++s) {
    double rz[3][3], rx[3][3], joint[3][3], next[3][3];
    rot_z(angles[s].first, rz);
    rot_x(angles[s].second, rx);
    mat_mul(rz, rx, joint);
    mat_mul(acc, joint, next);
    std::copy(&next[0][0], &next[0][0] + 9, &acc[0][0]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) frames[s][i][j] = acc[i][j];
    const double axis[3] = {0, spec.segment_length, 0};
    double step[3];
    mat_vec(acc, axis, step);
    for (int j = 0; j < 3; ++j) bases[s + 1][j] = bases[s][j] + step[j];
  }
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto& mc = coords[i];
    const double local[3] = {spec.capsule_radius * std::cos(mc.phi),
                             mc.t * spec.segment_length,
                             spec.capsule_radius * std::sin(mc.phi)};
    double world[3];
    double frame[3][3];
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) frame[r][c] = frames[mc.segment][r][c];
    mat_vec(frame, local, world);
    for (int j = 0; j < 3; ++j) cloud.at(i, j) = bases[mc.segment][j] + world[j];
  }
  return cloud;
}

}  // namespace synth_detail

// Output is fully determined by (spec, seed). Articulated chains come out
// ordered with a shared correspondence group and the zero-pose template.
inline ShapeDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.count < 1 || spec.points_per_shape < 1)
    throw DataError("generate_synthetic: counts must be positive");
  ShapeDataset dataset;
  Rng root(spec.seed + 0x5157ull);
  if (spec.kind == SyntheticKind::kBoxEllipsoidMix) {
    for (int s = 0; s < spec.count; ++s) {
      Rng rng = root.fork(static_cast<std::uint64_t>(s) + 1);
      const int n_prims = 1 + static_cast<int>(rng.uniform_int(3));
      std::vector<synth_detail::Primitive> prims(n_prims);
      int boxes = 0;
      for (auto& p : prims) {
        p.is_box = rng.uniform() < 0.5;
        boxes += p.is_box;
        for (int j = 0; j < 3; ++j) {
          p.center[j] = rng.uniform(-0.45, 0.45);
          p.half[j] = rng.uniform(0.1, 0.4);
        }
      }
      std::vector<double> cumulative(prims.size());
      double total = 0.0;
      for (std::size_t p = 0; p < prims.size(); ++p) {
        total += synth_detail::primitive_area(prims[p]);
        cumulative[p] = total;
      }
      ShapeRecord rec;
      rec.id = "shape" + std::to_string(s) + ".xyz";
      rec.category = boxes == n_prims ? "box" : (boxes == 0 ? "ellipsoid" : "mix");
      rec.cloud = PointCloud(3, static_cast<std::size_t>(spec.points_per_shape));
      for (int i = 0; i < spec.points_per_shape; ++i) {
        const double pick = rng.uniform() * total;
        const std::size_t p =
            std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
        synth_detail::sample_primitive(prims[std::min(p, prims.size() - 1)], rng,
                                       rec.cloud.point(i));
      }
      rec.norm = compute_normalization(rec.cloud);
      rec.norm.apply(rec.cloud);
      dataset.records.push_back(std::move(rec));
    }
    return dataset;
  }
  // articulated chain: fixed material coordinates shared by all poses
  Rng material_rng = root.fork(0xc0ffee);
  std::vector<synth_detail::ChainCoord> coords(spec.points_per_shape);
  for (auto& mc : coords) {
    mc.segment = static_cast<int>(material_rng.uniform_int(spec.segments));
    mc.t = material_rng.uniform();
    mc.phi = material_rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  }
  std::vector<std::pair<double, double>> zero_angles(spec.segments, {0.0, 0.0});
  dataset.template_cloud = synth_detail::pose_chain(spec, coords, zero_angles);
  for (int s = 0; s < spec.count; ++s) {
    Rng rng = root.fork(static_cast<std::uint64_t>(s) + 1);
    std::vector<std::pair<double, double>> angles(spec.segments);
    for (auto& [az, ax] : angles) {
      az = rng.uniform(-spec.max_joint_angle, spec.max_joint_angle);
      ax = rng.uniform(-spec.max_joint_angle, spec.max_joint_angle);
    }
    ShapeRecord rec;
    rec.id = "pose" + std::to_string(s) + ".xyz";
    rec.category = "chain";
    rec.group = "g0";
    rec.cloud = synth_detail::pose_chain(spec, coords, angles);
    rec.norm = compute_normalization(rec.cloud);
    rec.norm.apply(rec.cloud);
    dataset.records.push_back(std::move(rec));
  }
  return dataset;
}

// Re-evaluate the material coordinates of an articulated dataset: used by
// tests to confirm point i sits at the same material location per pose.
inline PointCloud chain_template(const SyntheticSpec& spec) {
  SyntheticSpec one = spec;
  one.count = 1;
  return generate_synthetic(one).template_cloud;
}

// ---------------------------------------------------------------------
// split

// Disjoint, seeded, stratified by category label.
inline std::pair<ShapeDataset, ShapeDataset> split(const ShapeDataset& dataset, double fraction,
                                                   std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw DataError("split: fraction must lie in (0,1)");
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < dataset.records.size(); ++i)
    by_category[dataset.records[i].category].push_back(i);
  Rng rng(seed + 0x51ull);
  ShapeDataset train, test;
  train.template_cloud = dataset.template_cloud;
  test.template_cloud = dataset.template_cloud;
  for (auto& [category, idx] : by_category) {
    if (idx.size() < 2)
      throw DataError("split: category '" + category + "' has fewer than 2 shapes");
    // Fisher-Yates with the shared stream
    for (std::size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.uniform_int(i + 1)]);
    std::size_t n_train = static_cast<std::size_t>(std::lround(fraction * idx.size()));
    n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < n_train ? train : test).records.push_back(dataset.records[idx[i]]);
  }
  return {train, test};
}

}  // namespace es
