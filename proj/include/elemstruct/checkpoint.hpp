#pragma once

// Checkpoint container: a JSON header describing the model configuration
// and parameter table, followed by raw little-endian float32 parameter
// payloads, the structure base geometry and optionally the Adam state.
// Writes are atomic (temp file + rename).

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "elemstruct/model.hpp"
#include "elemstruct/optim.hpp"

namespace es {

constexpr std::uint32_t kCheckpointVersion = 1;

inline nlohmann::json model_config_json(const ModelConfig& cfg) {
  return nlohmann::json{{"k", cfg.k},
                        {"structure_dim", cfg.structure_dim},
                        {"structure_kind", to_string(cfg.structure_kind)},
                        {"adjustment_kind", to_string(cfg.adjustment_kind)},
                        {"points_per_structure", cfg.points_per_structure},
                        {"feature_size", cfg.feature_size},
                        {"supervised", cfg.supervised},
                        {"freeze_structures", cfg.freeze_structures},
                        {"initial_kind", to_string(cfg.initial_kind)},
                        {"encoder_hidden", cfg.encoder_hidden},
                        {"adjustment_hidden", cfg.adjustment_hidden},
                        {"hyper_hidden", cfg.hyper_hidden},
                        {"deform_hidden", cfg.deform_hidden},
                        {"init_seed", cfg.init_seed}};
}

inline ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  cfg.k = j.at("k");
  cfg.structure_dim = j.at("structure_dim");
  cfg.structure_kind = j.at("structure_kind") == "translation" ? StructureKind::kTranslation
                                                               : StructureKind::kDeformation;
  cfg.adjustment_kind =
      j.at("adjustment_kind") == "linear" ? AdjustmentKind::kLinear : AdjustmentKind::kMlp;
  cfg.points_per_structure = j.at("points_per_structure");
  cfg.feature_size = j.at("feature_size");
  cfg.supervised = j.at("supervised");
  cfg.freeze_structures = j.at("freeze_structures");
  const std::string ik = j.at("initial_kind");
  if (ik == "unit-square") cfg.initial_kind = InitialKind::kUnitSquare2d;
  else if (ik == "template-mesh") cfg.initial_kind = InitialKind::kTemplateMesh;
  else if (ik == "fixed-points") cfg.initial_kind = InitialKind::kFixedPointSet;
  else cfg.initial_kind = InitialKind::kRandomPoints;
  cfg.encoder_hidden = j.at("encoder_hidden").get<std::vector<int>>();
  cfg.adjustment_hidden = j.at("adjustment_hidden").get<std::vector<int>>();
  cfg.hyper_hidden = j.at("hyper_hidden").get<std::vector<int>>();
  cfg.deform_hidden = j.at("deform_hidden").get<std::vector<int>>();
  cfg.init_seed = j.at("init_seed");
  return cfg;
}

namespace ckpt_detail {

template <class S>
void write_raw(std::ostream& out, const S* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(S)));
}

template <class S>
void read_raw(std::istream& in, S* data, std::size_t count) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(S)));
  if (!in) throw DataError("checkpoint: truncated payload");
}

template <class T>
void write_values_f32(std::ostream& out, const std::vector<T>& values) {
  std::vector<float> buf(values.begin(), values.end());
  write_raw(out, buf.data(), buf.size());
}

template <class T>
void read_values_f32(std::istream& in, std::vector<T>& values) {
  std::vector<float> buf(values.size());
  read_raw(in, buf.data(), buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) values[i] = static_cast<T>(buf[i]);
}

inline void write_cloud(std::ostream& out, const PointCloud& cloud) {
  write_raw(out, cloud.coords.data(), cloud.coords.size());
}

inline void read_cloud(std::istream& in, PointCloud& cloud) {
  read_raw(in, cloud.coords.data(), cloud.coords.size());
}

}  // namespace ckpt_detail

template <class T>
void save_checkpoint(const std::string& path, ReconstructionModel<T>& model,
                     const Adam<T>* optimizer = nullptr) {
  using nlohmann::json;
  json header;
  header["format_version"] = kCheckpointVersion;
  header["model"] = model_config_json(model.config());
  json params = json::array();
  for (auto& [name, t] : model.params().items)
    params.push_back({{"name", name}, {"shape", t->shape}});
  header["params"] = params;
  const auto& initial = model.initial();
  header["initial"] = {{"kind", to_string(initial.kind)},
                       {"dim_in", initial.dim_in},
                       {"fixed_n", initial.fixed_points.size()},
                       {"fixed_dim", initial.fixed_points.dim},
                       {"mesh_vertices", initial.mesh.vertices.size()},
                       {"mesh_faces", initial.mesh.faces.size()}};
  json bases = json::array();
  for (int k = 0; k < model.config().k; ++k) {
    const auto& sam = model.current_samples(k);
    bases.push_back({{"n", sam.size()}, {"dim", sam.dim}});
  }
  header["samples"] = bases;
  header["adam"] = {{"present", optimizer != nullptr},
                    {"step_count", optimizer ? optimizer->state.step_count : 0}};
  // running batchnorm statistics are saved as extra named buffers
  json running = json::array();
  std::vector<std::pair<std::string, std::shared_ptr<std::vector<T>>>> running_bufs;
  model.collect_running_stats(running_bufs);
  for (auto& [name, buf] : running_bufs) running.push_back({{"name", name}, {"n", buf->size()}});
  header["running_stats"] = running;

  const std::string header_str = header.dump();
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out.write("ESCP", 4);
    std::uint32_t version = kCheckpointVersion;
    ckpt_detail::write_raw(out, &version, 1);
    std::uint64_t len = header_str.size();
    ckpt_detail::write_raw(out, &len, 1);
    out.write(header_str.data(), static_cast<std::streamsize>(len));
    // geometry first: the loader needs it to rebuild the model before it
    // can read the parameter payloads into place
    if (initial.fixed_points.size()) ckpt_detail::write_cloud(out, initial.fixed_points);
    if (!initial.mesh.vertices.empty()) {
      ckpt_detail::write_raw(out, initial.mesh.vertices.data()->data(),
                             initial.mesh.vertices.size() * 3);
      ckpt_detail::write_raw(out, initial.mesh.faces.data()->data(),
                             initial.mesh.faces.size() * 3);
    }
    for (int k = 0; k < model.config().k; ++k)
      ckpt_detail::write_cloud(out, model.current_samples(k));
    for (auto& [name, t] : model.params().items) ckpt_detail::write_values_f32(out, t->values);
    for (auto& [name, buf] : running_bufs) ckpt_detail::write_values_f32(out, *buf);
    if (optimizer) {
      for (auto& [name, t] : model.params().items) {
        auto m = optimizer->state.first_moment.find(name);
        auto v = optimizer->state.second_moment.find(name);
        std::vector<T> zero(t->numel(), T(0));
        ckpt_detail::write_values_f32(
            out, m != optimizer->state.first_moment.end() ? m->second : zero);
        ckpt_detail::write_values_f32(
            out, v != optimizer->state.second_moment.end() ? v->second : zero);
      }
    }
  }
  std::filesystem::rename(tmp, path);
}

template <class T>
ReconstructionModel<T> load_checkpoint(const std::string& path, Adam<T>* optimizer = nullptr) {
  using nlohmann::json;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::strncmp(magic, "ESCP", 4) != 0)
    throw DataError(path + ": not a checkpoint file");
  std::uint32_t version = 0;
  ckpt_detail::read_raw(in, &version, 1);
  if (version != kCheckpointVersion)
    throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
  std::uint64_t len = 0;
  ckpt_detail::read_raw(in, &len, 1);
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  json header = json::parse(header_str);
  ModelConfig cfg = model_config_from_json(header.at("model"));

  InitialStructure initial;
  const auto& ij = header.at("initial");
  const std::string ik = ij.at("kind");
  if (ik == "unit-square") initial.kind = InitialKind::kUnitSquare2d;
  else if (ik == "template-mesh") initial.kind = InitialKind::kTemplateMesh;
  else if (ik == "fixed-points") initial.kind = InitialKind::kFixedPointSet;
  else initial.kind = InitialKind::kRandomPoints;
  initial.dim_in = ij.at("dim_in");
  initial.fixed_points = PointCloud(ij.at("fixed_dim").get<int>(),
                                    ij.at("fixed_n").get<std::size_t>());
  initial.mesh.vertices.resize(ij.at("mesh_vertices").get<std::size_t>());
  initial.mesh.faces.resize(ij.at("mesh_faces").get<std::size_t>());

  // geometry comes before the parameters so the model can be rebuilt
  // around the stored initial structure
  if (initial.fixed_points.size()) ckpt_detail::read_cloud(in, initial.fixed_points);
  if (!initial.mesh.vertices.empty()) {
    ckpt_detail::read_raw(in, initial.mesh.vertices.data()->data(),
                          initial.mesh.vertices.size() * 3);
    ckpt_detail::read_raw(in, initial.mesh.faces.data()->data(), initial.mesh.faces.size() * 3);
  }
  ReconstructionModel<T> model(cfg, initial);
  const auto& samples = header.at("samples");
  for (int k = 0; k < cfg.k; ++k) {
    PointCloud sam(samples[k].at("dim").get<int>(), samples[k].at("n").get<std::size_t>());
    ckpt_detail::read_cloud(in, sam);
    model.set_samples(k, sam);
  }
  for (const auto& pj : header.at("params")) {
    auto t = model.params().find(pj.at("name"));
    if (!t || t->shape != pj.at("shape").get<std::vector<int>>())
      throw DataError(path + ": parameter mismatch for '" +
                      pj.at("name").get<std::string>() + "'");
    ckpt_detail::read_values_f32(in, t->values);
  }
  std::vector<std::pair<std::string, std::shared_ptr<std::vector<T>>>> running_bufs;
  model.collect_running_stats(running_bufs);
  const auto& running = header.at("running_stats");
  if (running.size() != running_bufs.size())
    throw DataError(path + ": running-statistics table mismatch");
  for (std::size_t i = 0; i < running_bufs.size(); ++i) {
    if (running[i].at("name") != running_bufs[i].first ||
        running[i].at("n").get<std::size_t>() != running_bufs[i].second->size())
      throw DataError(path + ": running-statistics mismatch at '" + running_bufs[i].first + "'");
    ckpt_detail::read_values_f32(in, *running_bufs[i].second);
  }
  if (header.at("adam").at("present").get<bool>()) {
    if (optimizer) optimizer->state.step_count = header.at("adam").at("step_count");
    for (auto& [name, t] : model.params().items) {
      std::vector<T> m(t->numel()), v(t->numel());
      ckpt_detail::read_values_f32(in, m);
      ckpt_detail::read_values_f32(in, v);
      if (optimizer) {
        optimizer->state.first_moment[name] = std::move(m);
        optimizer->state.second_moment[name] = std::move(v);
      }
    }
  }
  return model;
}

}  // namespace es
