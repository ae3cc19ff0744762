#pragma once

// Model / training configuration and the sectioned key=value config file
// format used by the CLI. Flags override file keys; unknown keys are
// rejected with the list of valid ones.

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "elemstruct/common.hpp"

namespace es {

enum class StructureKind { kTranslation, kDeformation };
enum class AdjustmentKind { kLinear, kMlp };
enum class InitialKind { kUnitSquare2d, kTemplateMesh, kFixedPointSet, kRandomPoints };

inline std::string to_string(StructureKind k) {
  return k == StructureKind::kTranslation ? "translation" : "deformation";
}
inline std::string to_string(AdjustmentKind k) {
  return k == AdjustmentKind::kLinear ? "linear" : "mlp";
}
inline std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::kUnitSquare2d: return "unit-square";
    case InitialKind::kTemplateMesh: return "template-mesh";
    case InitialKind::kFixedPointSet: return "fixed-points";
    default: return "random-points";
  }
}

struct ModelConfig {
  int k = 10;                 // number of elementary structures
  int structure_dim = 2;      // d_e in {2, 3, 10}
  StructureKind structure_kind = StructureKind::kTranslation;
  AdjustmentKind adjustment_kind = AdjustmentKind::kMlp;
  int points_per_structure = 125;
  int feature_size = 1024;
  bool supervised = false;
  bool freeze_structures = false;  // keep structures at their initialization
  InitialKind initial_kind = InitialKind::kUnitSquare2d;
  std::string template_path;  // for template-mesh / fixed-points initials
  std::vector<int> encoder_hidden = {64, 128, 1024};
  std::vector<int> adjustment_hidden = {1024, 512, 256, 128};
  std::vector<int> hyper_hidden = {512, 512};
  std::vector<int> deform_hidden = {128, 128};
  std::uint64_t init_seed = 0;

  void validate() const {
    if (k < 1) throw DataError("model.k must be >= 1");
    if (structure_dim != 2 && structure_dim != 3 && structure_dim != 10)
      throw DataError("model.structure_dim must be 2, 3 or 10");
    if (points_per_structure < 1) throw DataError("model.points must be >= 1");
    if (feature_size < 1) throw DataError("model.feature_size must be >= 1");
    if (supervised && k != 1)
      throw DataError("supervised training uses a single elementary structure (model.k = 1)");
  }
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 16;
  int epochs = 100;
  std::vector<int> lr_milestones;  // absolute epochs; empty = 80%/90% of epochs
  double lr_decay = 0.1;
  int input_points = 2500;  // 6800 when correspondences are available
  std::uint64_t seed = 0;
  int checkpoint_interval = 0;  // 0 = final checkpoint only

  std::vector<int> milestones() const {
    if (!lr_milestones.empty()) return lr_milestones;
    // short runs can collapse the 80%/90% marks onto each other or epoch 0
    std::vector<int> ms;
    for (int m : {epochs * 8 / 10, epochs * 9 / 10})
      if (m > 0 && (ms.empty() || m > ms.back())) ms.push_back(m);
    return ms;
  }

  void validate() const {
    if (learning_rate < 0) throw DataError("train.learning_rate must be >= 0");
    if (batch_size < 1 || epochs < 1 || input_points < 1)
      throw DataError("train.batch_size, epochs and input_points must be positive");
    auto ms = milestones();
    for (std::size_t i = 1; i < ms.size(); ++i)
      if (ms[i] <= ms[i - 1]) throw DataError("train.lr_milestones must be strictly increasing");
  }
};

// ---------------------------------------------------------------------
// sectioned key=value parsing

class ConfigFile {
 public:
  std::map<std::string, std::string> entries;  // "section.key" -> value

  static ConfigFile parse(std::istream& in, const std::string& origin) {
    ConfigFile cfg;
    std::string line, section;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw DataError(origin + ":" + std::to_string(line_no) + ": expected key = value");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      cfg.entries[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  static ConfigFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    return parse(in, path);
  }

  void set(const std::string& dotted_key, const std::string& value) {
    entries[dotted_key] = value;
  }

 private:
  static std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
};

namespace cfg_detail {

inline std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  return out;
}

inline bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw DataError("expected boolean, got '" + s + "'");
}

}  // namespace cfg_detail

inline const std::vector<std::string>& valid_config_keys() {
  static const std::vector<std::string> keys = {
      "model.k",
      "model.structure_dim",
      "model.structure_kind",
      "model.adjustment_kind",
      "model.points_per_structure",
      "model.feature_size",
      "model.supervised",
      "model.freeze_structures",
      "model.initial_kind",
      "model.template_path",
      "model.encoder_hidden",
      "model.adjustment_hidden",
      "model.hyper_hidden",
      "model.deform_hidden",
      "train.learning_rate",
      "train.batch_size",
      "train.epochs",
      "train.lr_milestones",
      "train.lr_decay",
      "train.input_points",
      "train.seed",
      "train.checkpoint_interval",
  };
  return keys;
}

inline void apply_config(const ConfigFile& file, ModelConfig& model, TrainConfig& train) {
  using namespace cfg_detail;
  for (const auto& [key, value] : file.entries) {
    if (key == "model.k") model.k = std::stoi(value);
    else if (key == "model.structure_dim") model.structure_dim = std::stoi(value);
    else if (key == "model.structure_kind") {
      if (value == "translation") model.structure_kind = StructureKind::kTranslation;
      else if (value == "deformation") model.structure_kind = StructureKind::kDeformation;
      else throw DataError("model.structure_kind: expected translation|deformation, got " + value);
    } else if (key == "model.adjustment_kind") {
      if (value == "linear") model.adjustment_kind = AdjustmentKind::kLinear;
      else if (value == "mlp") model.adjustment_kind = AdjustmentKind::kMlp;
      else throw DataError("model.adjustment_kind: expected linear|mlp, got " + value);
    } else if (key == "model.points_per_structure") model.points_per_structure = std::stoi(value);
    else if (key == "model.feature_size") model.feature_size = std::stoi(value);
    else if (key == "model.supervised") model.supervised = parse_bool(value);
    else if (key == "model.freeze_structures") model.freeze_structures = parse_bool(value);
    else if (key == "model.initial_kind") {
      if (value == "unit-square") model.initial_kind = InitialKind::kUnitSquare2d;
      else if (value == "template-mesh") model.initial_kind = InitialKind::kTemplateMesh;
      else if (value == "fixed-points") model.initial_kind = InitialKind::kFixedPointSet;
      else if (value == "random-points") model.initial_kind = InitialKind::kRandomPoints;
      else throw DataError("model.initial_kind: unknown kind " + value);
    } else if (key == "model.template_path") model.template_path = value;
    else if (key == "model.encoder_hidden") model.encoder_hidden = parse_int_list(value);
    else if (key == "model.adjustment_hidden") model.adjustment_hidden = parse_int_list(value);
    else if (key == "model.hyper_hidden") model.hyper_hidden = parse_int_list(value);
    else if (key == "model.deform_hidden") model.deform_hidden = parse_int_list(value);
    else if (key == "train.learning_rate") train.learning_rate = std::stod(value);
    else if (key == "train.batch_size") train.batch_size = std::stoi(value);
    else if (key == "train.epochs") train.epochs = std::stoi(value);
    else if (key == "train.lr_milestones") train.lr_milestones = parse_int_list(value);
    else if (key == "train.lr_decay") train.lr_decay = std::stod(value);
    else if (key == "train.input_points") train.input_points = std::stoi(value);
    else if (key == "train.seed") train.seed = std::stoull(value);
    else if (key == "train.checkpoint_interval") train.checkpoint_interval = std::stoi(value);
    else {
      std::string msg = "unknown config key '" + key + "'. Valid keys:";
      for (const auto& k : valid_config_keys()) msg += "\n  " + k;
      throw DataError(msg);
    }
  }
  model.init_seed = train.seed;
  model.validate();
  train.validate();
}

}  // namespace es
