// Command-line harness: synthetic data generation, training, evaluation,
// normalization benchmarks and embedding export over the Lorentz-model
// toolkit. Exit codes: 0 success, 2 configuration error, 3 numeric abort.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "ilnn/harness.hpp"

namespace {

struct CommonArgs {
  std::string config_file;
  std::string out;
  std::string dataset;
  std::string checkpoint;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "flat key=value config file");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--dataset", args.dataset, "dataset directory");
  cmd->add_option("--checkpoint", args.checkpoint, "checkpoint path (eval/export)");
  cmd->add_option("--seed", args.seed, "run seed (mandatory unless set in the config)")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_option("--set", args.overrides, "config override KEY=VALUE (repeatable)");
}

ilnn::RunConfig make_config(const CommonArgs& args, const std::string& task) {
  ilnn::RunConfig config;
  config.task = task;
  if (!args.config_file.empty()) {
    ilnn::apply_config_entries(config, ilnn::parse_config_file(args.config_file));
  }
  std::map<std::string, std::string> cli_entries;
  for (const std::string& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ilnn::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    }
    cli_entries[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  ilnn::apply_config_entries(config, cli_entries);
  if (!args.out.empty()) config.out_dir = args.out;
  if (!args.dataset.empty()) config.dataset_dir = args.dataset;
  if (!args.checkpoint.empty()) config.checkpoint = args.checkpoint;
  if (args.seed_given) {
    config.seed = args.seed;
    config.seed_set = true;
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lorentz-model deep learning toolkit"};
  app.require_subcommand(1);

  CommonArgs gen_args, train_args, eval_args, bench_args, export_args;
  CLI::App* cmd_gen = app.add_subcommand("gen-synthetic", "generate the synthetic hierarchy dataset");
  CLI::App* cmd_train = app.add_subcommand("train", "train a classifier");
  CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  CLI::App* cmd_bench = app.add_subcommand("bench-norm", "time the normalization variants");
  CLI::App* cmd_export = app.add_subcommand("export-embeddings", "export penultimate embeddings");
  add_common(cmd_gen, gen_args);
  add_common(cmd_train, train_args);
  add_common(cmd_eval, eval_args);
  add_common(cmd_bench, bench_args);
  add_common(cmd_export, export_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_gen->parsed()) {
      ilnn::RunConfig config = make_config(gen_args, "gen-synthetic");
      ilnn::run_gen_synthetic(config);
      std::printf("wrote synthetic dataset (depth=%d branching=%d dim=%d) to %s\n",
                  config.synth_depth, config.synth_branching, config.synth_dim,
                  config.out_dir.c_str());
    } else if (cmd_train->parsed()) {
      ilnn::RunConfig config = make_config(train_args, "train");
      ilnn::TrainReport report = ilnn::train(config);
      if (report.rows.empty()) {
        std::printf("trained 0 epochs; checkpoint at %s\n",
                    report.checkpoint_path.string().c_str());
      } else {
        const ilnn::EpochRow& last = report.rows.back();
        std::printf("epoch %d: loss=%.6f train_acc=%.4f test_acc=%.4f test_mcc=%.4f\n",
                    last.epoch, last.loss, last.train_acc, last.test_acc, last.test_mcc);
      }
      std::printf("metrics: %s\n", report.metrics_path.string().c_str());
    } else if (cmd_eval->parsed()) {
      ilnn::RunConfig config = make_config(eval_args, "eval");
      ilnn::EvalResult result = ilnn::evaluate(config);
      std::printf("test_acc=%.6f test_mcc=%.6f (%zu samples)\n", result.accuracy, result.mcc,
                  result.predictions.size());
    } else if (cmd_bench->parsed()) {
      ilnn::RunConfig config = make_config(bench_args, "bench-norm");
      auto records = ilnn::bench_norm(config);
      std::printf("bench-norm batch=%d dim=%d reps=%d\n", config.bench_batch, config.bench_dim,
                  config.bench_reps);
      for (const auto& rec : records) {
        std::printf("variant=%s median_ms=%.6f iqr_ms=%.6f\n", rec.variant.c_str(),
                    rec.median_ms, rec.iqr_ms);
      }
    } else if (cmd_export->parsed()) {
      ilnn::RunConfig config = make_config(export_args, "export-embeddings");
      auto path = ilnn::export_embeddings(config);
      std::printf("embeddings: %s\n", path.string().c_str());
    }
  } catch (const ilnn::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const ilnn::DimensionError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const ilnn::TrainingAbortedError& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return 3;
  } catch (const ilnn::NumericDomainError& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return 3;
  } catch (const ilnn::ConvergenceError& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
