#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ilnn/harness.hpp"
#include "oracle.hpp"

using namespace ilnn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() / (std::string("ilnn_harness_") + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small noiseless dataset: 4 classes, quick to fit.
RunConfig tiny_config(const fs::path& work, double noise, std::uint64_t seed) {
  RunConfig cfg;
  cfg.task = "train";
  cfg.dataset_dir = (work / "data").string();
  cfg.out_dir = (work / "out").string();
  cfg.synth_depth = 2;
  cfg.synth_branching = 2;
  cfg.synth_dim = 6;
  cfg.synth_samples_per_leaf = 10;
  cfg.synth_noise = noise;
  cfg.hidden = {8};
  cfg.epochs = 6;
  cfg.batch_size = 8;
  cfg.lr = 0.05;
  cfg.dropout_p = 0.0;
  cfg.momentum = 0.9;
  cfg.weight_decay = 1e-4;
  cfg.seed = seed;
  cfg.seed_set = true;
  run_gen_synthetic([&] {
    RunConfig gen = cfg;
    gen.out_dir = cfg.dataset_dir;
    return gen;
  }());
  return cfg;
}

}  // namespace

TEST_CASE("config file parsing, overrides, and unknown keys") {
  fs::path dir = temp_dir("config");
  {
    std::ofstream out(dir / "run.cfg");
    out << "# comment line\n";
    out << "lr=0.25\n";
    out << "hidden=16,8\n";
    out << "norm=gyrobn-iter5\n";
    out << "track_running=false\n";
    out << "seed=42\n";
  }
  RunConfig cfg;
  apply_config_entries(cfg, parse_config_file(dir / "run.cfg"));
  CHECK(cfg.lr == 0.25);
  CHECK(cfg.hidden == std::vector<std::size_t>{16, 8});
  CHECK(cfg.norm == "gyrobn-iter5");
  CHECK_FALSE(cfg.track_running);
  CHECK(cfg.seed == 42);
  CHECK(cfg.seed_set);

  ModelConfig mc = cfg.model_config(8, 3);
  CHECK(mc.norm.kind == NormSpec::Kind::gyrobn);
  CHECK(mc.norm.iters == 5);

  CHECK_THROWS_AS(apply_config_entries(cfg, {{"learning_rate", "0.1"}}), ConfigError);
  CHECK_THROWS_AS(apply_config_entries(cfg, {{"lr", "fast"}}), ConfigError);

  RunConfig bad = cfg;
  bad.norm = "frechet";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  RunConfig no_seed;
  CHECK_THROWS_AS(no_seed.validate(), ConfigError);
  RunConfig neg_lr = cfg;
  neg_lr.lr = -0.1;
  CHECK_THROWS_AS(neg_lr.validate(), ConfigError);
}

TEST_CASE("canonical config text drives a stable hash") {
  RunConfig a;
  a.seed = 1;
  a.seed_set = true;
  RunConfig b = a;
  CHECK(config_hash(a) == config_hash(b));
  b.lr *= 2.0;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(canonical_config(a).find("seed=1\n") != std::string::npos);
}

TEST_CASE("checkpoint sections round-trip bit exactly") {
  fs::path dir = temp_dir("ckpt");
  std::vector<NamedTensor> sections;
  sections.push_back({"meta/demo", Tensor::from_vector({1.0, 2.0, 3.0})});
  sections.push_back({"block0.Z", Tensor::from_data({2, 2}, {0.1, -0.2, 0.3, 123.456})});
  sections.push_back({"scalar", Tensor::scalar(0.5)});
  save_checkpoint(dir / "c.ilnn", sections, 0xDEADBEEFu);

  Checkpoint ckpt = load_checkpoint(dir / "c.ilnn");
  CHECK(ckpt.config_hash == 0xDEADBEEFu);
  REQUIRE(ckpt.sections.size() == 3);
  CHECK(ckpt.section("block0.Z").data() == sections[1].value.data());
  CHECK(ckpt.section("scalar").shape() == Shape{});
  CHECK_THROWS_AS(ckpt.section("missing"), ConfigError);
}

TEST_CASE("zero-epoch training writes the header and the initial checkpoint") {
  fs::path work = temp_dir("zero_epoch");
  RunConfig cfg = tiny_config(work, 0.05, 11);
  cfg.epochs = 0;
  TrainReport report = train(cfg);
  CHECK(report.rows.empty());
  CHECK(slurp(report.metrics_path) == "epoch,loss,train_acc,test_acc,test_mcc\n");

  // The checkpoint equals initialization: rebuilding with the same seed
  // reproduces every parameter bit-exactly.
  Checkpoint ckpt = load_checkpoint(report.checkpoint_path);
  Dataset train_ds = load_dataset_split(cfg.dataset_dir, "train");
  Rng init_rng = Rng(cfg.seed).fork(0);
  Classifier fresh =
      Classifier::build(cfg.model_config(train_ds.dim(), train_ds.class_count), init_rng);
  for (const NamedTensor& s : fresh.state_sections()) {
    CHECK(ckpt.section(s.name).data() == s.value.data());
  }
}

TEST_CASE("one optimizer step lowers the loss on a noiseless dataset") {
  fs::path work = temp_dir("gradflow");
  RunConfig cfg = tiny_config(work, 0.0, 17);
  Dataset train_ds = load_dataset_split(cfg.dataset_dir, "train");

  Rng init_rng = Rng(cfg.seed).fork(0);
  Classifier model =
      Classifier::build(cfg.model_config(train_ds.dim(), train_ds.class_count), init_rng);
  RsgdOptimizer opt({cfg.lr, 0.0, 0.0});
  for (ParamRef& r : model.param_refs()) {
    if (r.lorentz) {
      opt.add_lorentz(r.name, r.point);
    } else {
      opt.add_euclidean(r.name, r.tensor, r.weight_decay, r.constraint);
    }
  }
  std::vector<std::size_t> idx(train_ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng dropout(1);
  const double before = batch_loss_value(model, train_ds, idx, Mode::train, dropout);
  (void)train_step(model, opt, train_ds, idx, dropout);
  const double after = batch_loss_value(model, train_ds, idx, Mode::train, dropout);
  CHECK(after < before);
}

TEST_CASE("training is bit-exactly reproducible and fits the tiny task") {
  fs::path work = temp_dir("repro");
  RunConfig cfg = tiny_config(work, 0.05, 23);
  cfg.epochs = 8;
  TrainReport first = train(cfg);
  REQUIRE_FALSE(first.rows.empty());
  const std::string metrics_a = slurp(first.metrics_path);

  RunConfig again = cfg;
  again.out_dir = (work / "out2").string();
  TrainReport second = train(again);
  const std::string metrics_b = slurp(second.metrics_path);
  CHECK(metrics_a == metrics_b);

  // Different seed, different trajectory.
  RunConfig other = cfg;
  other.out_dir = (work / "out3").string();
  other.seed = 24;
  CHECK(slurp(train(other).metrics_path) != metrics_a);

  CHECK(first.rows.back().train_acc >= 0.9);
}

TEST_CASE("evaluate reproduces the training-set metrics of a fitted model") {
  fs::path work = temp_dir("evalfit");
  RunConfig cfg = tiny_config(work, 0.0, 31);
  cfg.epochs = 12;
  TrainReport report = train(cfg);
  REQUIRE(report.rows.back().train_acc == 1.0);

  EvalResult e1 = evaluate(cfg);
  EvalResult e2 = evaluate(cfg);
  CHECK(e1.accuracy == e2.accuracy);
  CHECK(e1.mcc == e2.mcc);
  CHECK(e1.predictions == e2.predictions);
  CHECK(e1.accuracy == 1.0);
  CHECK(e1.mcc == 1.0);

  // Dimension mismatch between checkpoint and dataset is a config error.
  fs::path other = temp_dir("evalfit_other");
  RunConfig mismatched = cfg;
  {
    RunConfig gen = cfg;
    gen.synth_dim = 5;
    gen.out_dir = (other / "data").string();
    run_gen_synthetic(gen);
    mismatched.dataset_dir = gen.out_dir;
  }
  CHECK_THROWS_AS(evaluate(mismatched), ConfigError);
}

TEST_CASE("lfc head and the gyrobn-iter norm train end to end") {
  fs::path work = temp_dir("variants");
  RunConfig cfg = tiny_config(work, 0.05, 37);
  cfg.epochs = 3;
  cfg.head = "lfc";
  cfg.norm = "gyrobn-iter2";
  TrainReport report = train(cfg);
  CHECK(report.rows.size() == 3);
  CHECK(std::isfinite(report.rows.back().loss));
  Checkpoint ckpt = load_checkpoint(report.checkpoint_path);
  Classifier model = model_from_checkpoint(ckpt);
  CHECK(model.config().head == HeadKind::lfc);
  CHECK(model.config().norm.kind == NormSpec::Kind::gyrobn);
}

TEST_CASE("cnn preset trains on square feature grids") {
  fs::path work = temp_dir("cnn");
  RunConfig cfg = tiny_config(work, 0.05, 41);
  {
    RunConfig gen = cfg;
    gen.synth_dim = 16;  // 4x4 grid
    gen.out_dir = cfg.dataset_dir;
    fs::remove_all(cfg.dataset_dir);
    run_gen_synthetic(gen);
  }
  cfg.model = "cnn";
  cfg.hidden = {4, 8};
  cfg.epochs = 1;
  cfg.batch_size = 16;
  TrainReport report = train(cfg);
  CHECK(report.rows.size() == 1);
  CHECK(std::isfinite(report.rows.back().loss));
  EvalResult result = evaluate(cfg);
  CHECK(result.predictions.size() == load_dataset_split(cfg.dataset_dir, "test").size());
}

TEST_CASE("exploding learning rate aborts and keeps the last-good checkpoint") {
  fs::path work = temp_dir("abort");
  RunConfig cfg = tiny_config(work, 0.05, 43);
  cfg.epochs = 4;
  cfg.lr = 1e18;
  CHECK_THROWS_AS(train(cfg), TrainingAbortedError);
  // The initial checkpoint written before epoch 1 survives the abort.
  Checkpoint ckpt = load_checkpoint(cfg.checkpoint_path());
  CHECK(ckpt.sections.size() > 0);
}

TEST_CASE("bench-norm reports exactly the six variants and orders the budgets") {
  fs::path work = temp_dir("bench");
  RunConfig cfg;
  cfg.task = "bench-norm";
  cfg.out_dir = (work / "out").string();
  cfg.seed = 3;
  cfg.seed_set = true;
  cfg.bench_batch = 32;
  cfg.bench_dim = 8;
  cfg.bench_reps = 5;
  auto records = bench_norm(cfg);
  REQUIRE(records.size() == 6);
  CHECK(records[0].variant == "gyrolbn");
  CHECK(records[1].variant == "gyrobn-iter1");
  CHECK(records[5].variant == "gyrobn-converge");
  CHECK(records[1].median_ms <= records[4].median_ms);  // iter1 <= iter10

  const std::string report = slurp(fs::path(cfg.out_dir) / "bench.txt");
  CHECK(report.find("bench-norm batch=32 dim=8 reps=5") != std::string::npos);
  std::size_t variant_lines = 0;
  for (std::size_t pos = 0; (pos = report.find("variant=", pos)) != std::string::npos; ++pos) {
    ++variant_lines;
  }
  CHECK(variant_lines == 6);
}

TEST_CASE("exported embeddings stay in the ball and match their tangent norms") {
  fs::path work = temp_dir("export");
  RunConfig cfg = tiny_config(work, 0.05, 47);
  cfg.epochs = 2;
  (void)train(cfg);
  fs::path path = export_embeddings(cfg);

  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header.rfind("label,pred", 0) == 0);
  const std::size_t dim = 8;  // hidden width of the tiny preset

  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    REQUIRE(values.size() == 2 + 2 * dim);
    double ball_sq = 0.0, tang_sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      ball_sq += values[2 + j] * values[2 + j];
      tang_sq += values[2 + dim + j] * values[2 + dim + j];
    }
    const double ball_norm = std::sqrt(ball_sq);
    CHECK(ball_norm < 1.0);  // inside the unit ball at K = -1
    // The tangent norm equals the geodesic distance from the pole, which the
    // ball radius determines as 2 atanh(r).
    CHECK(std::sqrt(tang_sq) == doctest::Approx(2.0 * std::atanh(ball_norm)).epsilon(1e-8));
  }
  CHECK(rows == load_dataset_split(cfg.dataset_dir, "test").size());
}
