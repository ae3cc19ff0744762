// Command-line front end: dataset generation, training, evaluation and
// artifact export for the elementary-structures library.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "elemstruct/checkpoint.hpp"
#include "elemstruct/dataset.hpp"
#include "elemstruct/eval.hpp"
#include "elemstruct/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace es;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------
// output directories, locking, run manifests

// Holds an exclusive flock on <dir>/.lock for the lifetime of the run so
// two commands cannot clobber the same artifact directory.
class DirLock {
 public:
  explicit DirLock(const fs::path& dir) {
    const std::string lock_path = (dir / ".lock").string();
    fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw DataError("cannot create lock file: " + lock_path);
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw DataError("output directory is locked by another run: " + dir.string());
    }
  }
  ~DirLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  int fd_ = -1;
};

bool dir_has_artifacts(const fs::path& dir) {
  if (!fs::exists(dir)) return false;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().filename() != ".lock") return true;
  return false;
}

void prepare_output_dir(const fs::path& dir, bool force) {
  if (dir_has_artifacts(dir) && !force)
    throw DataError("output directory already contains files: " + dir.string() +
                    " (pass --force to overwrite)");
  fs::create_directories(dir);
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// One manifest per artifact directory; it records everything needed to
// reproduce the run.
struct RunManifest {
  json doc;

  RunManifest(const std::string& command, std::uint64_t seed) {
    doc["tool_version"] = kVersion;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["threads"] = kernels::thread_count();
    doc["started_at"] = iso_now();
    doc["config"] = json::object();
    doc["outputs"] = json::array();
  }

  void set_config(const ConfigFile& cfg) {
    for (const auto& [key, value] : cfg.entries) doc["config"][key] = value;
  }
  void add_output(const fs::path& path) { doc["outputs"].push_back(path.filename().string()); }

  void write(const fs::path& dir) {
    doc["finished_at"] = iso_now();
    auto out = io_detail::open_output((dir / "run_manifest.json").string());
    out << doc.dump(2) << "\n";
  }
};

// ---------------------------------------------------------------------
// shared plumbing

ConfigFile effective_config(const std::string& config_path,
                            const std::vector<std::string>& overrides) {
  ConfigFile file;
  if (!config_path.empty()) file = ConfigFile::load(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    file.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return file;
}

ShapeDataset load_data_dir(const std::string& data_dir, int sample_points, std::uint64_t seed) {
  return load_dataset(data_dir, (fs::path(data_dir) / "manifest.tsv").string(), sample_points,
                      seed);
}

// The starting geometry for the structure modules, resolved from the
// config and (for templates) the dataset.
InitialStructure resolve_initial(const ModelConfig& cfg, const ShapeDataset& dataset) {
  switch (cfg.initial_kind) {
    case InitialKind::kUnitSquare2d:
      return InitialStructure::unit_square();
    case InitialKind::kTemplateMesh: {
      if (cfg.template_path.empty())
        throw DataError("model.initial_kind=template-mesh needs model.template_path (an OBJ)");
      return InitialStructure::from_mesh(load_obj(cfg.template_path));
    }
    case InitialKind::kFixedPointSet: {
      PointCloud tpl;
      if (!cfg.template_path.empty()) {
        tpl = load_xyz(cfg.template_path);
        tpl.ordered = true;
      } else if (dataset.template_cloud.size()) {
        tpl = dataset.template_cloud;
      } else {
        throw DataError(
            "model.initial_kind=fixed-points needs model.template_path or a dataset "
            "template.xyz");
      }
      if (tpl.size() != static_cast<std::size_t>(cfg.points_per_structure))
        throw DataError("template has " + std::to_string(tpl.size()) +
                        " points but model.points_per_structure = " +
                        std::to_string(cfg.points_per_structure));
      return InitialStructure::from_fixed_points(tpl);
    }
    default:
      return InitialStructure::random_points(
          static_cast<std::size_t>(cfg.points_per_structure), cfg.init_seed);
  }
}

// Shapes given directly on the command line arrive un-normalized; the
// model expects the training box.
PointCloud load_target(const std::string& path, Normalization* norm_out = nullptr) {
  PointCloud cloud = load_xyz(path);
  if (cloud.dim != 3) throw DataError(path + ": expected 3 columns, got " + std::to_string(cloud.dim));
  Normalization norm = compute_normalization(cloud);
  norm.apply(cloud);
  if (norm_out) *norm_out = norm;
  return cloud;
}

std::array<unsigned char, 3> structure_color(int k) {
  static const std::array<unsigned char, 3> palette[10] = {
      {230, 25, 75},  {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},
      {145, 30, 180}, {70, 240, 240},  {240, 50, 230}, {210, 245, 60}, {250, 190, 190}};
  return palette[k % 10];
}

PointCloud first3(const PointCloud& cloud) {
  PointCloud out(3, cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (int j = 0; j < 3; ++j) out.at(i, j) = j < cloud.dim ? cloud.at(i, j) : 0.0;
  return out;
}

void write_correspondences(const std::string& path, const CorrespondenceMap& map) {
  auto out = io_detail::open_output(path);
  for (std::size_t v = 0; v < map.targets.size(); ++v)
    out << v << ' ' << io_detail::fmt9(map.targets.at(v, 0)) << ' '
        << io_detail::fmt9(map.targets.at(v, 1)) << ' ' << io_detail::fmt9(map.targets.at(v, 2))
        << ' ' << map.structure_indices[v] << '\n';
}

// ---------------------------------------------------------------------
// gen

struct GenOptions {
  std::string kind = "box";
  int count = 100;
  int points = 512;
  std::uint64_t seed = 0;
  std::string out;
  bool force = false;
  int segments = 4;
  double segment_length = 0.5;
  double radius = 0.1;
  double max_angle = 0.8;
};

int cmd_gen(const GenOptions& opt) {
  SyntheticSpec spec;
  if (opt.kind == "box") spec.kind = SyntheticKind::kBoxEllipsoidMix;
  else if (opt.kind == "articulated") spec.kind = SyntheticKind::kArticulatedChain;
  else throw std::invalid_argument("--kind must be box or articulated");
  spec.count = opt.count;
  spec.points_per_shape = opt.points;
  spec.seed = opt.seed;
  spec.segments = opt.segments;
  spec.segment_length = opt.segment_length;
  spec.capsule_radius = opt.radius;
  spec.max_joint_angle = opt.max_angle;

  prepare_output_dir(opt.out, opt.force);
  DirLock lock(opt.out);
  RunManifest manifest("gen", opt.seed);
  manifest.doc["config"] = {{"kind", opt.kind},
                            {"count", opt.count},
                            {"points", opt.points},
                            {"segments", opt.segments},
                            {"segment_length", opt.segment_length},
                            {"radius", opt.radius},
                            {"max_angle", opt.max_angle}};

  auto dataset = generate_synthetic(spec);
  auto tsv = io_detail::open_output((fs::path(opt.out) / "manifest.tsv").string());
  for (const auto& rec : dataset.records) {
    save_xyz((fs::path(opt.out) / rec.id).string(), rec.cloud);
    tsv << rec.id << '\t' << rec.category;
    if (!rec.group.empty()) tsv << '\t' << rec.group;
    tsv << '\n';
    manifest.add_output(rec.id);
  }
  if (dataset.template_cloud.size()) {
    // the template ships normalized so it can serve directly as an
    // initial structure inside the tanh range
    PointCloud tpl = dataset.template_cloud;
    compute_normalization(tpl).apply(tpl);
    save_xyz((fs::path(opt.out) / "template.xyz").string(), tpl);
    manifest.add_output("template.xyz");
  }
  save_normalization_csv((fs::path(opt.out) / "normalization.csv").string(), dataset);
  manifest.add_output("manifest.tsv");
  manifest.add_output("normalization.csv");
  manifest.write(opt.out);
  std::cout << "wrote " << dataset.size() << " shapes to " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// train

struct TrainOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string data;
  std::string out;
  bool force = false;
};

int cmd_train(const TrainOptions& opt) {
  ConfigFile file = effective_config(opt.config, opt.overrides);
  ModelConfig model_cfg;
  TrainConfig train_cfg;
  apply_config(file, model_cfg, train_cfg);

  auto dataset = load_data_dir(opt.data, train_cfg.input_points, train_cfg.seed);
  prepare_output_dir(opt.out, opt.force);
  DirLock lock(opt.out);
  RunManifest manifest("train", train_cfg.seed);
  manifest.set_config(file);
  manifest.doc["data"] = opt.data;

  ReconstructionModel<float> model(model_cfg, resolve_initial(model_cfg, dataset));
  Trainer<float> trainer(model, train_cfg);
  trainer.train(dataset, [&](int epoch) {
    const std::string name = "checkpoint_epoch" + std::to_string(epoch + 1) + ".escp";
    save_checkpoint((fs::path(opt.out) / name).string(), model, &trainer.optimizer());
    manifest.add_output(name);
  });
  save_checkpoint((fs::path(opt.out) / "checkpoint.escp").string(), model,
                  &trainer.optimizer());
  trainer.write_history_csv((fs::path(opt.out) / "history.csv").string());
  manifest.add_output("checkpoint.escp");
  manifest.add_output("history.csv");
  manifest.write(opt.out);
  std::cout << "trained " << train_cfg.epochs << " epochs on " << dataset.size()
            << " shapes; final mean loss " << trainer.history().back().mean_loss << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string checkpoint;
  std::string data;
  std::string out;
  int points = 2500;
  std::uint64_t seed = 0;
  bool force = false;
};

int cmd_eval(const EvalOptions& opt) {
  auto model = load_checkpoint<float>(opt.checkpoint);
  auto dataset = load_data_dir(opt.data, opt.points, opt.seed);
  prepare_output_dir(opt.out, opt.force);
  DirLock lock(opt.out);
  RunManifest manifest("eval", opt.seed);
  manifest.doc["checkpoint"] = opt.checkpoint;
  manifest.doc["data"] = opt.data;

  auto report = eval_chamfer_records(model, dataset.records);
  {
    auto csv = io_detail::open_output((fs::path(opt.out) / "metrics.csv").string());
    csv << "id,chamfer_x1e3\n";
    for (const auto& [id, raw] : report.per_shape)
      csv << id << ',' << io_detail::fmt9(raw * 1e3) << '\n';
    csv << "mean," << io_detail::fmt9(report.mean_reported()) << '\n';
  }
  manifest.add_output("metrics.csv");
  std::cout << "shapes=" << report.per_shape.size()
            << " mean_chamfer_x1e3=" << report.mean_reported() << "\n";

  // with ground-truth correspondences and a single-structure model, also
  // score dense matching over consecutive pairs of each ordered group
  if (model.config().k == 1) {
    std::map<std::string, std::vector<const ShapeRecord*>> groups;
    for (const auto& rec : dataset.records)
      if (!rec.group.empty() && rec.cloud.ordered) groups[rec.group].push_back(&rec);
    double total = 0.0;
    int pairs = 0;
    for (const auto& [group, recs] : groups)
      for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
        total += eval_correspondence_pair(model, recs[i]->cloud, recs[i + 1]->cloud);
        ++pairs;
      }
    if (pairs > 0) {
      const double mean = total / pairs;
      auto csv = io_detail::open_output((fs::path(opt.out) / "correspondence.csv").string());
      csv << "pairs,mean_error\n" << pairs << ',' << io_detail::fmt9(mean) << '\n';
      manifest.add_output("correspondence.csv");
      std::cout << "pairs=" << pairs << " mean_correspondence_error=" << mean << "\n";
    }
  }
  manifest.write(opt.out);
  return 0;
}

// ---------------------------------------------------------------------
// export

struct ExportOptions {
  std::string checkpoint;
  std::string what;
  std::string out;
  std::string input;   // reconstruction / mesh target
  std::string source;  // correspondences
  std::string target;
  int grid = 10;
  bool no_snap = false;
  bool force = false;
};

void export_structures(ReconstructionModel<float>& model, const ExportOptions& opt,
                       RunManifest& manifest) {
  const auto& cfg = model.config();
  for (int k = 0; k < cfg.k; ++k) {
    PointCloud structure = model.structure_cloud(k);
    const std::string stem = "structure_" + std::to_string(k);
    PlyData ply;
    ply.points = first3(structure);
    ply.colors.assign(structure.size(), structure_color(k));
    save_ply((fs::path(opt.out) / (stem + ".ply")).string(), ply);
    manifest.add_output(stem + ".ply");
    if (structure.dim > 3) {
      // the PLY is a first-three-coordinates projection; the sidecar
      // keeps the full-dimensional points
      save_xyz((fs::path(opt.out) / (stem + ".xyz")).string(), structure);
      manifest.add_output(stem + ".xyz");
    }
    json meta = {{"kind", to_string(cfg.structure_kind)},
                 {"structure_dim", cfg.structure_dim},
                 {"points", structure.size()},
                 {"source", opt.checkpoint}};
    auto out = io_detail::open_output((fs::path(opt.out) / (stem + ".json")).string());
    out << meta.dump(2) << "\n";
    manifest.add_output(stem + ".json");
  }
}

void export_reconstruction(ReconstructionModel<float>& model, const ExportOptions& opt,
                           RunManifest& manifest) {
  if (opt.input.empty()) throw std::invalid_argument("--what reconstruction needs --input");
  PointCloud target = load_target(opt.input);
  PointCloud recon = model.reconstruct(target);
  const int n = model.config().points_per_structure;
  PlyData ply;
  ply.points = recon;
  ply.colors.resize(recon.size());
  for (std::size_t i = 0; i < recon.size(); ++i)
    ply.colors[i] = structure_color(static_cast<int>(i) / n);
  save_ply((fs::path(opt.out) / "reconstruction.ply").string(), ply);
  manifest.add_output("reconstruction.ply");
}

void export_mesh(ReconstructionModel<float>& model, const ExportOptions& opt,
                 RunManifest& manifest) {
  if (opt.input.empty()) throw std::invalid_argument("--what mesh needs --input");
  PointCloud target = load_target(opt.input);
  auto meshes = reconstruct_mesh(model, target, opt.grid);
  for (std::size_t k = 0; k < meshes.size(); ++k) {
    const std::string name = "mesh_" + std::to_string(k) + ".obj";
    save_obj((fs::path(opt.out) / name).string(), meshes[k]);
    manifest.add_output(name);
  }
}

void export_correspondences(ReconstructionModel<float>& model, const ExportOptions& opt,
                            RunManifest& manifest) {
  if (opt.source.empty() || opt.target.empty())
    throw std::invalid_argument("--what correspondences needs --source and --target");
  PointCloud a = load_target(opt.source);
  Normalization b_norm;
  PointCloud b = load_target(opt.target, &b_norm);
  auto map = match(model, a, b, !opt.no_snap);
  b_norm.invert(map.targets);  // report targets in the target file's frame
  write_correspondences((fs::path(opt.out) / "correspondences.txt").string(), map);
  manifest.add_output("correspondences.txt");
}

int cmd_export(const ExportOptions& opt) {
  auto model = load_checkpoint<float>(opt.checkpoint);
  prepare_output_dir(opt.out, opt.force);
  DirLock lock(opt.out);
  RunManifest manifest("export", 0);
  manifest.doc["checkpoint"] = opt.checkpoint;
  manifest.doc["what"] = opt.what;
  if (opt.what == "structures") export_structures(model, opt, manifest);
  else if (opt.what == "reconstruction") export_reconstruction(model, opt, manifest);
  else if (opt.what == "mesh") export_mesh(model, opt, manifest);
  else if (opt.what == "correspondences") export_correspondences(model, opt, manifest);
  else throw std::invalid_argument("--what must be structures|reconstruction|mesh|correspondences");
  manifest.write(opt.out);
  std::cout << "exported " << opt.what << " to " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// match

struct MatchOptions {
  std::string checkpoint;
  std::string source;
  std::string target;
  std::string out;
  bool no_snap = false;
};

int cmd_match(const MatchOptions& opt) {
  auto model = load_checkpoint<float>(opt.checkpoint);
  PointCloud a = load_target(opt.source);
  Normalization b_norm;
  PointCloud b = load_target(opt.target, &b_norm);
  auto map = match(model, a, b, !opt.no_snap);
  b_norm.invert(map.targets);
  write_correspondences(opt.out, map);
  std::cout << "matched " << a.size() << " vertices -> " << opt.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------
// params

int cmd_params(const std::string& checkpoint, const std::string& config,
               const std::vector<std::string>& overrides) {
  ParamCounts counts;
  ModelConfig cfg;
  if (!checkpoint.empty()) {
    auto model = load_checkpoint<float>(checkpoint);
    counts = model.count_parameters();
    cfg = model.config();
  } else {
    ConfigFile file = effective_config(config, overrides);
    TrainConfig train_cfg;
    apply_config(file, cfg, train_cfg);
    ShapeDataset empty;
    // parameter counts do not depend on the data; a placeholder template
    // of the right size suffices for fixed-point initials
    if (cfg.initial_kind == InitialKind::kFixedPointSet && cfg.template_path.empty()) {
      PointCloud tpl(3, static_cast<std::size_t>(cfg.points_per_structure));
      ReconstructionModel<float> model(cfg, InitialStructure::from_fixed_points(tpl));
      counts = model.count_parameters();
    } else {
      ReconstructionModel<float> model(cfg, resolve_initial(cfg, empty));
      counts = model.count_parameters();
    }
  }
  std::cout << "encoder=" << counts.encoder << "\n";
  std::cout << "structures=" << counts.structures << " (" << cfg.k << " x "
            << to_string(cfg.structure_kind) << ")\n";
  std::cout << "adjustments=" << counts.adjustments << " (" << cfg.k << " x "
            << to_string(cfg.adjustment_kind) << ")\n";
  std::cout << "total=" << counts.total() << "\n";
  const double share =
      100.0 * static_cast<double>(counts.structures) / static_cast<double>(counts.total());
  std::cout << "structure_share_percent=" << share << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("ELEMSTRUCT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) kernels::set_thread_count(n);
  }

  CLI::App app{"Learned elementary structures for shape reconstruction and correspondence"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen_cmd->add_option("--kind", gen.kind, "box | articulated");
  gen_cmd->add_option("--count", gen.count, "number of shapes")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--points", gen.points, "points per shape")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out", gen.out, "output directory")->required();
  gen_cmd->add_flag("--force", gen.force, "overwrite an existing output directory");
  gen_cmd->add_option("--segments", gen.segments, "chain segments")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--segment-length", gen.segment_length, "chain segment length");
  gen_cmd->add_option("--radius", gen.radius, "chain capsule radius");
  gen_cmd->add_option("--max-angle", gen.max_angle, "max joint angle (radians)");

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", train.config, "config file");
  train_cmd->add_option("--set", train.overrides, "override a config key (key=value)");
  train_cmd->add_option("--data", train.data, "dataset directory (with manifest.tsv)")
      ->required();
  train_cmd->add_option("--out", train.out, "output directory")->required();
  train_cmd->add_flag("--force", train.force, "overwrite an existing output directory");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval.data, "dataset directory")->required();
  eval_cmd->add_option("--out", eval.out, "output directory")->required();
  eval_cmd->add_option("--points", eval.points, "target points per mesh-backed shape")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--seed", eval.seed, "mesh sampling seed");
  eval_cmd->add_flag("--force", eval.force, "overwrite an existing output directory");

  ExportOptions exp;
  auto* export_cmd = app.add_subcommand("export", "Export artifacts from a checkpoint");
  export_cmd->add_option("--checkpoint", exp.checkpoint, "checkpoint file")->required();
  export_cmd
      ->add_option("--what", exp.what, "structures | reconstruction | mesh | correspondences")
      ->required();
  export_cmd->add_option("--out", exp.out, "output directory")->required();
  export_cmd->add_option("--input", exp.input, "target shape (XYZ) for reconstruction/mesh");
  export_cmd->add_option("--source", exp.source, "source shape (XYZ) for correspondences");
  export_cmd->add_option("--target", exp.target, "target shape (XYZ) for correspondences");
  export_cmd->add_option("--grid", exp.grid, "mesh grid resolution")->check(CLI::Range(2, 512));
  export_cmd->add_flag("--no-snap", exp.no_snap, "keep raw reconstruction-B targets");
  export_cmd->add_flag("--force", exp.force, "overwrite an existing output directory");

  MatchOptions mat;
  auto* match_cmd = app.add_subcommand("match", "Dense correspondence between two shapes");
  match_cmd->add_option("--checkpoint", mat.checkpoint, "checkpoint file")->required();
  match_cmd->add_option("--source", mat.source, "source shape (XYZ)")->required();
  match_cmd->add_option("--target", mat.target, "target shape (XYZ)")->required();
  match_cmd->add_option("--out", mat.out, "output correspondence file")->required();
  match_cmd->add_flag("--no-snap", mat.no_snap, "keep raw reconstruction-B targets");

  std::string params_checkpoint, params_config;
  std::vector<std::string> params_overrides;
  auto* params_cmd = app.add_subcommand("params", "Report parameter counts per component");
  params_cmd->add_option("--checkpoint", params_checkpoint, "checkpoint file");
  params_cmd->add_option("--config", params_config, "config file");
  params_cmd->add_option("--set", params_overrides, "override a config key (key=value)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(gen_cmd)) return cmd_gen(gen);
    if (app.got_subcommand(train_cmd)) return cmd_train(train);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(eval);
    if (app.got_subcommand(export_cmd)) return cmd_export(exp);
    if (app.got_subcommand(match_cmd)) return cmd_match(mat);
    if (app.got_subcommand(params_cmd))
      return cmd_params(params_checkpoint, params_config, params_overrides);
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
