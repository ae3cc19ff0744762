// Acceptance gate: one pass/fail line per criterion. Thresholds are
// pinned here; the suite exits non-zero if any criterion fails.
//
// Usage: acceptance_tests [--cli <path-to-elemstruct-binary>] [--only N]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "elemstruct/checkpoint.hpp"
#include "elemstruct/dataset.hpp"
#include "elemstruct/eval.hpp"
#include "elemstruct/gradcheck.hpp"
#include "elemstruct/train.hpp"

namespace fs = std::filesystem;
using namespace es;
using Clock = std::chrono::steady_clock;

namespace {

// ---------------------------------------------------------------------
// pinned tolerances and budgets

constexpr double kGradRelTol = 1e-4;         // criterion 1
constexpr double kGradBudgetSec = 120.0;
constexpr double kChamferRelTol = 1e-6;      // criterion 2
constexpr double kChamferBudgetSec = 30.0;
constexpr double kAffineChamferMax = 0.5;    // criterion 5, x1e3 units
constexpr double kAffineBudgetSec = 1200.0;
constexpr double kDirectionalBudgetSec = 7200.0;  // criterion 6
constexpr double kSupLossRatioMax = 0.10;    // criterion 7a
constexpr double kCorrVsRandomMax = 0.25;    // criterion 7b
constexpr double kSelfMatchFactor = 2.0;     // criterion 7c
constexpr double kSupervisedBudgetSec = 3600.0;
constexpr double kMeshVertexTol = 1e-6;      // criterion 9
constexpr double kStructureShareMax = 2.0;   // criterion 10, percent

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string g_cli_path;

// ---------------------------------------------------------------------
// helpers

ShapeDataset box_dataset(int count, int points, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kBoxEllipsoidMix;
  spec.count = count;
  spec.points_per_shape = points;
  spec.seed = seed;
  return generate_synthetic(spec);
}

ShapeDataset chain_dataset(int count, int points, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::kArticulatedChain;
  spec.count = count;
  spec.points_per_shape = points;
  spec.seed = seed;
  return generate_synthetic(spec);
}

PointCloud random_cloud(int dim, std::size_t n, Rng& rng, double extent = 0.9) {
  PointCloud cloud(dim, n);
  for (auto& v : cloud.coords) v = rng.uniform(-extent, extent);
  return cloud;
}

template <class T>
void jitter_params(ParamStore<T>& store, Rng& rng) {
  // Zero-initialized biases can park pre-activations exactly on the relu
  // kink, where finite differences are invalid; perturb to a generic point.
  for (auto& [name, t] : store.items)
    for (auto& v : t->values) v += static_cast<T>(rng.uniform(-0.05, 0.05));
}

double file_bytes_equal(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return fa && fb && sa.str() == sb.str() && !sa.str().empty();
}

int run_cli(const std::string& args) {
  const std::string cmd = "ELEMSTRUCT_THREADS=1 \"" + g_cli_path + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

// ---------------------------------------------------------------------
// criterion 1: reverse-mode gradients vs central finite differences

Outcome criterion_gradients() {
  double worst = 0.0;
  std::size_t checked = 0;
  for (int seed = 0; seed < 20; ++seed) {
    ModelConfig cfg;
    cfg.feature_size = 6;
    cfg.encoder_hidden = {4, 5};
    cfg.points_per_structure = 5;
    cfg.adjustment_hidden = {5, 4};
    cfg.hyper_hidden = {5};
    cfg.deform_hidden = {4, 4};
    cfg.init_seed = 7000 + seed;
    const int variant = seed % 4;
    cfg.structure_kind =
        variant < 2 ? StructureKind::kTranslation : StructureKind::kDeformation;
    cfg.adjustment_kind =
        (variant == 0 || variant == 3) ? AdjustmentKind::kLinear : AdjustmentKind::kMlp;
    const bool supervised = variant == 1 || variant == 3;
    cfg.supervised = supervised;
    cfg.structure_dim = (seed % 3 == 0) ? 3 : 2;
    cfg.k = supervised ? 1 : 2;
    const bool train_mode = variant == 2;  // exercise batchnorm training once per cycle

    ReconstructionModel<double> model(cfg, InitialStructure::unit_square());
    Rng rng(9000 + seed);
    jitter_params(model.params(), rng);
    auto t0 = random_cloud(3, supervised ? 5 : 7, rng);
    t0.ordered = supervised;
    auto t1 = random_cloud(3, supervised ? 5 : 7, rng);
    t1.ordered = supervised;
    std::vector<const PointCloud*> batch{&t0};
    if (train_mode) batch.push_back(&t1);

    auto fn = [&]() {
      auto fwd = model.forward_batch(batch, train_mode);
      return model.loss(fwd.outputs[0], t0);
    };
    std::vector<TensorPtr<double>> inputs;
    for (auto& [name, t] : model.params().items) inputs.push_back(t);
    auto report = grad_check(fn, inputs);
    worst = std::max(worst, report.max_rel_err);
    checked += report.checked;
  }
  std::ostringstream out;
  out << "max rel err " << worst << " over " << checked << " coordinates, 20 configs";
  return {worst < kGradRelTol, out.str()};
}

// ---------------------------------------------------------------------
// criterion 2: kd-tree chamfer vs brute force

Outcome criterion_chamfer_oracle() {
  Rng rng(2222);
  double worst = 0.0;
  const int dims[3] = {2, 3, 10};
  for (int trial = 0; trial < 100; ++trial) {
    const int d = dims[trial % 3];
    auto a = random_cloud(d, 10 + rng.uniform_int(191), rng);
    auto b = random_cloud(d, 10 + rng.uniform_int(191), rng);
    const double fast = chamfer_symmetric(a, b);
    const double slow = chamfer_symmetric_brute(a, b);
    worst = std::max(worst, std::fabs(fast - slow) / std::max(1e-30, std::fabs(slow)));
  }
  std::ostringstream out;
  out << "max rel deviation " << worst << " over 100 pairs";
  return {worst < kChamferRelTol, out.str()};
}

// ---------------------------------------------------------------------
// criterion 3: exact permutation invariance

Outcome criterion_permutation() {
  Rng rng(3333);
  for (int trial = 0; trial < 50; ++trial) {
    ModelConfig cfg;
    cfg.k = 2;
    cfg.feature_size = 8;
    cfg.encoder_hidden = {6, 8};
    cfg.points_per_structure = 8;
    cfg.adjustment_hidden = {8};
    cfg.init_seed = 100 + trial;
    ReconstructionModel<float> model(cfg, InitialStructure::unit_square());

    const std::size_t n = 10 + rng.uniform_int(40);
    auto a = random_cloud(3, n, rng);
    auto b = random_cloud(3, 5 + rng.uniform_int(20), rng);
    PointCloud perm(3, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_int(i + 1)]);
    for (std::size_t i = 0; i < n; ++i)
      for (int j = 0; j < 3; ++j) perm.at(i, j) = a.at(order[i], j);

    auto f1 = model.encode_eval(a);
    auto f2 = model.encode_eval(perm);
    if (f1->values != f2->values)
      return {false, "encoder features changed under permutation (trial " +
                         std::to_string(trial) + ")"};
    if (chamfer_symmetric(a, b) != chamfer_symmetric(perm, b) ||
        chamfer_symmetric(b, a) != chamfer_symmetric(b, perm))
      return {false, "chamfer changed under permutation (trial " + std::to_string(trial) + ")"};
  }
  return {true, "features and loss bitwise stable over 50 random permutations"};
}

// ---------------------------------------------------------------------
// criterion 4: structures are target-independent

Outcome criterion_structure_independence() {
  ModelConfig cfg;
  cfg.k = 4;
  cfg.feature_size = 8;
  cfg.encoder_hidden = {6, 8};
  cfg.points_per_structure = 16;
  cfg.adjustment_hidden = {8};
  cfg.init_seed = 4;
  ReconstructionModel<float> model(cfg, InitialStructure::unit_square());
  std::vector<std::vector<double>> before;
  for (int k = 0; k < cfg.k; ++k) before.push_back(model.structure_cloud(k).coords);
  Rng rng(4444);
  for (int t = 0; t < 100; ++t) {
    auto target = random_cloud(3, 12 + rng.uniform_int(30), rng);
    (void)model.reconstruct(target);
  }
  for (int k = 0; k < cfg.k; ++k)
    if (model.structure_cloud(k).coords != before[k])
      return {false, "structure " + std::to_string(k) + " drifted across targets"};
  return {true, "all structures bitwise identical across 100 targets"};
}

// ---------------------------------------------------------------------
// criterion 5: affine recovery with the linear adjustment

Outcome criterion_affine_recovery() {
  Rng rng(5555);
  const std::size_t n = 150;
  PointCloud base = random_cloud(3, n, rng, 0.8);
  ShapeDataset train_set, test_set;
  for (int s = 0; s < 200; ++s) {
    // random affine maps near 0.5*I; every entry is well inside the
    // (-1, 1) range the tanh-bounded adjustment parameters can reach,
    // so each target is exactly representable
    double A[9], b[3];
    for (int i = 0; i < 9; ++i) A[i] = (i % 4 == 0 ? 0.5 : 0.0) + rng.uniform(-0.05, 0.05);
    for (auto& v : b) v = rng.uniform(-0.05, 0.05);
    ShapeRecord rec;
    rec.id = "affine" + std::to_string(s);
    rec.category = "affine";
    rec.cloud = PointCloud(3, n);
    rec.cloud.ordered = true;
    for (std::size_t i = 0; i < n; ++i)
      for (int r = 0; r < 3; ++r)
        rec.cloud.at(i, r) = A[r * 3 + 0] * base.at(i, 0) + A[r * 3 + 1] * base.at(i, 1) +
                             A[r * 3 + 2] * base.at(i, 2) + b[r];
    (s < 160 ? train_set : test_set).records.push_back(std::move(rec));
  }

  ModelConfig cfg;
  cfg.k = 1;
  cfg.supervised = true;  // targets share the base ordering, so the
                          // index-aligned loss applies; the pass metric
                          // below stays chamfer
  cfg.structure_dim = 3;
  cfg.structure_kind = StructureKind::kTranslation;
  cfg.adjustment_kind = AdjustmentKind::kLinear;
  cfg.initial_kind = InitialKind::kFixedPointSet;
  cfg.points_per_structure = static_cast<int>(n);
  cfg.feature_size = 64;
  cfg.encoder_hidden = {32, 64};
  cfg.hyper_hidden = {64, 64};
  cfg.init_seed = 5;
  ReconstructionModel<float> model(cfg, InitialStructure::from_fixed_points(base));

  TrainConfig tc;
  tc.epochs = 2000;
  tc.batch_size = 16;
  tc.learning_rate = 0.003;
  tc.seed = 5;
  Trainer<float> trainer(model, tc);
  trainer.train(train_set);

  auto report = eval_chamfer_records(model, test_set.records);
  std::ostringstream out;
  out << "held-out chamfer x1e3 = " << report.mean_reported() << " (limit "
      << kAffineChamferMax << ")";
  return {report.mean_reported() < kAffineChamferMax, out.str()};
}

// ---------------------------------------------------------------------
// criterion 6: directional ordering of structure variants

double train_and_eval_unsup(StructureKind kind, bool frozen, std::uint64_t seed,
                            const ShapeDataset& train_set, const ShapeDataset& test_set) {
  ModelConfig cfg;
  cfg.k = 10;
  cfg.structure_dim = 2;
  cfg.structure_kind = kind;
  cfg.adjustment_kind = AdjustmentKind::kMlp;
  cfg.freeze_structures = frozen;
  cfg.points_per_structure = 125;
  cfg.feature_size = 32;
  cfg.encoder_hidden = {16, 32};
  // a deliberately small adjustment: with a large one the adjustment
  // absorbs the whole reconstruction and structure quality stops
  // mattering, washing out the variant ordering under test
  cfg.adjustment_hidden = {16};
  cfg.deform_hidden = {32, 32};
  cfg.init_seed = seed;
  ReconstructionModel<float> model(cfg, InitialStructure::unit_square());
  TrainConfig tc;
  tc.epochs = 60;
  tc.batch_size = 16;
  tc.seed = seed;
  Trainer<float> trainer(model, tc);
  trainer.train(train_set);
  if (kind == StructureKind::kDeformation) {
    // a deformation structure is a continuous map, so evaluate it on an
    // evenly spread sample set (11x11 grid) rather than whichever
    // random draw the last training step left behind
    auto grid = sample_unit_square(121, SquareSampling::kGrid, 0);
    for (int k = 0; k < cfg.k; ++k) model.set_samples(k, grid);
  }
  return eval_chamfer_records(model, test_set.records).mean_reported();
}

Outcome criterion_directional() {
  auto full = box_dataset(360, 512, 66);
  auto [train_set, test_set] = split(full, 300.0 / 360.0, 6);
  int trans_beats_frozen = 0, deform_beats_frozen = 0, trans_beats_deform = 0;
  std::ostringstream out;
  for (std::uint64_t seed : {1, 2, 3}) {
    const double frozen =
        train_and_eval_unsup(StructureKind::kTranslation, true, seed, train_set, test_set);
    const double trans =
        train_and_eval_unsup(StructureKind::kTranslation, false, seed, train_set, test_set);
    const double deform =
        train_and_eval_unsup(StructureKind::kDeformation, false, seed, train_set, test_set);
    trans_beats_frozen += trans <= frozen;
    deform_beats_frozen += deform <= frozen;
    trans_beats_deform += trans <= deform;
    out << "[seed " << seed << ": frozen " << frozen << ", trans " << trans << ", deform "
        << deform << "] ";
  }
  out << "trans<=frozen " << trans_beats_frozen << "/3, deform<=frozen " << deform_beats_frozen
      << "/3, trans<=deform " << trans_beats_deform << "/3";
  const bool pass =
      trans_beats_frozen >= 2 && deform_beats_frozen >= 2 && trans_beats_deform >= 2;
  return {pass, out.str()};
}

// ---------------------------------------------------------------------
// criterion 7: supervised training + dense correspondence

struct SupRun {
  ReconstructionModel<float> model;
  double first_loss;
  double final_loss;
};

SupRun train_supervised_chain(const ShapeDataset& train_set, int structure_dim,
                              std::uint64_t seed, bool from_template, int epochs) {
  ModelConfig cfg;
  cfg.k = 1;
  cfg.supervised = true;
  cfg.structure_dim = structure_dim;
  cfg.structure_kind = StructureKind::kTranslation;
  cfg.adjustment_kind = AdjustmentKind::kMlp;
  cfg.points_per_structure = 512;
  cfg.feature_size = 64;
  cfg.encoder_hidden = {32, 64};
  cfg.adjustment_hidden = {64, 32};
  cfg.init_seed = seed;
  InitialStructure initial = InitialStructure::unit_square();
  if (from_template) {
    PointCloud tpl = train_set.template_cloud;
    compute_normalization(tpl).apply(tpl);
    initial = InitialStructure::from_fixed_points(tpl);
  }
  SupRun run{ReconstructionModel<float>(cfg, initial), 0.0, 0.0};
  TrainConfig tc;
  tc.epochs = epochs;
  tc.batch_size = 16;
  tc.seed = seed;
  Trainer<float> trainer(run.model, tc);
  trainer.train(train_set);
  run.first_loss = trainer.history().front().mean_loss;
  run.final_loss = trainer.history().back().mean_loss;
  return run;
}

Outcome criterion_supervised_correspondence() {
  auto full = chain_dataset(240, 512, 77);
  auto [train_set, test_set] = split(full, 200.0 / 240.0, 7);
  train_set.template_cloud = full.template_cloud;
  auto run = train_supervised_chain(train_set, 3, 11, true, 120);
  std::ostringstream out;

  // (a) convergence
  const double ratio = run.final_loss / run.first_loss;
  out << "loss ratio " << ratio << " (limit " << kSupLossRatioMax << "); ";
  bool pass = ratio < kSupLossRatioMax;

  // (b) matching two held-out poses beats random assignment
  const PointCloud& a = test_set.records[0].cloud;
  const PointCloud& b = test_set.records[1].cloud;
  const double corr_err = eval_correspondence_pair(run.model, a, b);
  Rng rng(777);
  double random_err = 0.0;
  std::size_t draws = 0;
  for (int rep = 0; rep < 10; ++rep)
    for (std::size_t v = 0; v < b.size(); ++v) {
      const std::size_t u = rng.uniform_int(b.size());
      random_err += std::sqrt(squared_distance(b.point(u), b.point(v), 3));
      ++draws;
    }
  random_err /= static_cast<double>(draws);
  out << "corr err " << corr_err << " vs random " << random_err << "; ";
  pass = pass && corr_err < kCorrVsRandomMax * random_err;

  // (c) self-matching stays within the reconstruction residual scale
  auto self_map = match(run.model, a, a, true);
  double self_err = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v)
    self_err += std::sqrt(squared_distance(self_map.targets.point(v), a.point(v), 3));
  self_err /= static_cast<double>(a.size());
  PointCloud recon = run.model.reconstruct(a);
  double residual = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    residual += std::sqrt(squared_distance(recon.point(i), a.point(i), 3));
  residual /= static_cast<double>(a.size());
  out << "self-match " << self_err << " vs " << kSelfMatchFactor << "x residual " << residual;
  pass = pass && self_err < kSelfMatchFactor * residual;
  return {pass, out.str()};
}

// ---------------------------------------------------------------------
// criterion 8: higher structure dimensionality helps

Outcome criterion_dimensionality() {
  auto full = chain_dataset(240, 512, 77);
  auto [train_set, test_set] = split(full, 200.0 / 240.0, 7);
  int wins = 0;
  std::ostringstream out;
  for (std::uint64_t seed : {21, 22, 23}) {
    auto run2 = train_supervised_chain(train_set, 2, seed, false, 15);
    auto run3 = train_supervised_chain(train_set, 3, seed, false, 15);
    double loss2 = 0.0, loss3 = 0.0;
    for (const auto& rec : test_set.records) {
      loss2 += supervised_l2(run2.model.reconstruct(rec.cloud), rec.cloud);
      loss3 += supervised_l2(run3.model.reconstruct(rec.cloud), rec.cloud);
    }
    wins += loss3 <= loss2;
    out << "[seed " << seed << ": 2D " << loss2 / test_set.size() << ", 3D "
        << loss3 / test_set.size() << "] ";
  }
  out << "3D<=2D in " << wins << "/3 seeds";
  return {wins >= 2, out.str()};
}

// ---------------------------------------------------------------------
// criterion 9: mesh export consistency

Outcome criterion_mesh_export() {
  ModelConfig cfg;
  cfg.k = 2;
  cfg.structure_dim = 2;
  cfg.structure_kind = StructureKind::kDeformation;
  cfg.adjustment_kind = AdjustmentKind::kMlp;
  cfg.points_per_structure = 9;  // 3x3 grid
  cfg.feature_size = 8;
  cfg.encoder_hidden = {6, 8};
  cfg.adjustment_hidden = {8};
  cfg.deform_hidden = {8, 8};
  cfg.init_seed = 9;
  ReconstructionModel<float> model(cfg, InitialStructure::unit_square());
  Rng rng(9999);
  auto target = random_cloud(3, 40, rng);

  const int r = 3;
  auto grid = sample_unit_square(9, SquareSampling::kGrid, 0);
  for (int k = 0; k < cfg.k; ++k) model.set_samples(k, grid);
  auto points = model.reconstruct(target);
  auto meshes = reconstruct_mesh(model, target, r);
  if (meshes.size() != 2) return {false, "expected 2 meshes"};
  double worst = 0.0;
  for (int k = 0; k < 2; ++k) {
    if (meshes[k].vertices.size() != 9 || meshes[k].faces.size() != 8) {
      std::ostringstream out;
      out << "structure " << k << ": " << meshes[k].vertices.size() << " vertices / "
          << meshes[k].faces.size() << " faces (want 9 / 8)";
      return {false, out.str()};
    }
    for (int v = 0; v < 9; ++v)
      for (int j = 0; j < 3; ++j)
        worst = std::max(worst,
                         std::fabs(meshes[k].vertices[v][j] - points.at(k * 9 + v, j)));
  }
  std::ostringstream out;
  out << "9 vertices / 8 triangles per structure; max vertex deviation " << worst;
  return {worst < kMeshVertexTol, out.str()};
}

// ---------------------------------------------------------------------
// criterion 10: parameter accounting

Outcome criterion_parameters() {
  // exact counts
  {
    PointCloud base(3, 2500);
    auto module = StructureModule<float>::translation(base, 3);
    if (module.param_count() != 7500)
      return {false, "translation N=2500 d_e=3 count " + std::to_string(module.param_count())};
    Rng rng(10);
    auto deform = StructureModule<float>::deformation(2, 3, {128, 128}, rng);
    if (deform.param_count() != 17283)
      return {false, "deformation 2->3 count " + std::to_string(deform.param_count())};
  }
  // structure share for the library default and every committed recipe
  std::ostringstream out;
  auto check_share = [&](const std::string& label, ReconstructionModel<float>& model) {
    auto counts = model.count_parameters();
    const double share =
        100.0 * static_cast<double>(counts.structures) / static_cast<double>(counts.total());
    out << label << " " << share << "% ";
    return share < kStructureShareMax;
  };
  {
    ModelConfig cfg;  // library defaults
    cfg.init_seed = 1;
    ReconstructionModel<float> model(cfg, InitialStructure::unit_square());
    if (!check_share("defaults", model)) return {false, out.str() + "(limit 2%)"};
  }
  const fs::path config_dir = fs::path(ELEMSTRUCT_SOURCE_DIR) / "configs";
  int recipes = 0;
  for (const auto& entry : fs::directory_iterator(config_dir)) {
    if (entry.path().extension() != ".cfg") continue;
    ConfigFile file = ConfigFile::load(entry.path().string());
    ModelConfig cfg;
    TrainConfig tc;
    apply_config(file, cfg, tc);
    InitialStructure initial = InitialStructure::unit_square();
    if (cfg.initial_kind == InitialKind::kFixedPointSet)
      initial = InitialStructure::from_fixed_points(
          PointCloud(3, static_cast<std::size_t>(cfg.points_per_structure)));
    ReconstructionModel<float> model(cfg, initial);
    if (!check_share(entry.path().stem().string(), model))
      return {false, out.str() + "(limit 2%)"};
    ++recipes;
  }
  out << "(" << recipes << " recipes; limit 2%)";
  return {recipes > 0, out.str()};
}

// ---------------------------------------------------------------------
// criterion 11: CLI training determinism

Outcome criterion_cli_determinism() {
  if (g_cli_path.empty()) return {false, "no --cli path given"};
  const fs::path root =
      fs::temp_directory_path() / ("es_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string data = (root / "data").string();
  if (run_cli("gen --kind box --count 12 --points 128 --seed 3 --out " + data) != 0)
    return {false, "gen failed"};
  const std::string overrides =
      " --set model.k=4 --set model.points_per_structure=32 --set model.feature_size=16"
      " --set model.encoder_hidden=8,16 --set model.adjustment_hidden=16,8"
      " --set train.epochs=4 --set train.input_points=128 --set train.seed=9";
  for (const char* run : {"run_a", "run_b"})
    if (run_cli("train --data " + data + " --out " + (root / run).string() + overrides) != 0)
      return {false, std::string("train failed (") + run + ")"};
  const bool same = file_bytes_equal(root / "run_a" / "history.csv",
                                     root / "run_b" / "history.csv");
  fs::remove_all(root);
  return {same, same ? "identical loss-history CSVs across reruns"
                     : "loss histories differ between identical runs"};
}

// ---------------------------------------------------------------------

struct Criterion {
  int number;
  const char* name;
  std::function<Outcome()> run;
  double budget_sec;  // <= 0: no budget
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", criterion_gradients, kGradBudgetSec},
      {2, "chamfer oracle equivalence", criterion_chamfer_oracle, kChamferBudgetSec},
      {3, "permutation invariance", criterion_permutation, 0},
      {4, "structure shape-independence", criterion_structure_independence, 0},
      {5, "affine recovery", criterion_affine_recovery, kAffineBudgetSec},
      {6, "directional variant ordering", criterion_directional, kDirectionalBudgetSec},
      {7, "supervised correspondence", criterion_supervised_correspondence,
       kSupervisedBudgetSec},
      {8, "dimensionality trend", criterion_dimensionality, 0},
      {9, "mesh export consistency", criterion_mesh_export, 0},
      {10, "parameter accounting", criterion_parameters, 0},
      {11, "training determinism via the CLI", criterion_cli_determinism, 0},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.number != only) continue;
    const auto start = Clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    bool pass = outcome.pass;
    std::string detail = outcome.detail;
    if (pass && c.budget_sec > 0 && elapsed > c.budget_sec) {
      pass = false;
      detail += " [over runtime budget]";
    }
    std::printf("%s criterion %2d (%s): %s [%.1fs]\n", pass ? "PASS" : "FAIL", c.number,
                c.name, detail.c_str(), elapsed);
    std::fflush(stdout);
    failures += !pass;
  }
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  else std::printf("all criteria passed\n");
  return failures == 0 ? 0 : 1;
}
