// SPDX-License-Identifier: Apache-2.0
//
// ermbridge command line: dataset generation, potential training, bridge
// sampling, evaluation, and full experiment recipes.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "ermbridge/config.hpp"
#include "ermbridge/datasets.hpp"
#include "ermbridge/errors.hpp"
#include "ermbridge/experiment.hpp"
#include "ermbridge/io.hpp"
#include "ermbridge/metrics.hpp"
#include "ermbridge/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

using namespace ermbridge;

ExperimentData data_from_files_or_generators(const ExperimentConfig& cfg,
                                             std::uint64_t seed) {
  const std::string src = out_path(cfg, "source.csv");
  const std::string tgt = out_path(cfg, "target.csv");
  if (std::filesystem::exists(src) && std::filesystem::exists(tgt))
    return {load_columnar(src), load_columnar(tgt)};
  return prepare_data(cfg, seed);
}

int cmd_generate(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const ExperimentData data = prepare_data(cfg, cfg.seeds.front());
  save_columnar(data.source, out_path(cfg, "source.csv"));
  save_columnar(data.target, out_path(cfg, "target.csv"));
  std::printf("wrote %s and %s (%zu x %d points each)\n",
              out_path(cfg, "source.csv").c_str(),
              out_path(cfg, "target.csv").c_str(), data.source.size(),
              data.source.dim);
  return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::uint64_t seed = cfg.seeds.front();
  const std::string tag = "seed" + std::to_string(seed);
  const ExperimentData data = data_from_files_or_generators(cfg, seed);
  auto potential = build_potential(cfg, data, seed);
  const TrainReport report = train_potential(cfg, data, *potential, seed);
  write_loss_trace_csv(report, out_path(cfg, "loss_trace_" + tag + ".csv"));
  save_potential(*potential, out_path(cfg, "potential_" + tag + ".ckpt"));
  std::printf("trained %s potential for %d epochs in %.1fs; final loss %.6g\n",
              potential->kind().c_str(), cfg.train.epochs, report.wall_seconds,
              report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back());
  return kExitOk;
}

int cmd_sample(const ExperimentConfig& cfg) {
  const std::uint64_t seed = cfg.seeds.front();
  const std::string tag = "seed" + std::to_string(seed);
  const std::string ckpt = out_path(cfg, "potential_" + tag + ".ckpt");
  if (!std::filesystem::exists(ckpt))
    throw UsageError("sample: missing checkpoint '" + ckpt +
                     "' (run the train subcommand first)");
  const auto potential = load_potential(ckpt);
  const ExperimentData data = data_from_files_or_generators(cfg, seed);
  const PointCloud starts = sampling_starts(cfg, data, seed);
  const SnapshotSet snaps = run_sampling(cfg, data, *potential, starts, seed);
  write_samples_csv(snaps, out_path(cfg, "samples_" + tag + ".csv"));
  std::printf("sampled %zu trajectories at %zu snapshot times\n",
              starts.size(), snaps.times.size());
  return kExitOk;
}

int cmd_evaluate(const ExperimentConfig& cfg) {
  const std::uint64_t seed = cfg.seeds.front();
  const std::string tag = "seed" + std::to_string(seed);
  const std::string samples = out_path(cfg, "samples_" + tag + ".csv");
  if (!std::filesystem::exists(samples))
    throw UsageError("evaluate: missing samples '" + samples +
                     "' (run the sample subcommand first)");
  const SnapshotSet snaps = read_samples_csv(samples);
  const ExperimentData data = data_from_files_or_generators(cfg, seed);
  const PointCloud& terminal = snaps.clouds.back();
  const PointCloud fresh =
      fresh_target_draw(cfg, data, seed, terminal.size());
  SlicedW1Config metric_cfg = cfg.metric;
  metric_cfg.seed = SplitMix64(seed, 31).next_u64();
  const double w1 = sliced_w1(terminal, fresh, metric_cfg);
  append_metric(out_path(cfg, "metrics.csv"), "sliced_w1_terminal", w1,
                std::to_string(seed));
  std::printf("sliced_w1_terminal = %.6g\n", w1);
  return kExitOk;
}

int cmd_experiment(const ExperimentConfig& cfg) {
  run_experiment(cfg);
  std::printf("experiment '%s' complete; artifacts in %s\n",
              experiment_name(cfg.experiment), cfg.out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-based bridge estimation: learn a continuous "
               "log-potential by residual minimization, then sample the "
               "bridge SDE with the induced drift."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool plots = false;
  bool parallel_seeds = false;
  std::vector<std::string> data_paths;
  app.add_option("--config", config_path, "Path to a key=value config file");
  app.add_option("--out", out_dir, "Output directory (overrides out.dir)");
  app.add_option("--seed", seed, "Run a single seed (overrides seeds)")
      ->each([&](const std::string&) { seed_set = true; });
  app.add_flag("--plots", plots, "Also emit SVG scatter/heatmap artifacts");
  app.add_flag("--parallel-seeds", parallel_seeds,
               "Run experiment seeds concurrently");
  app.add_option("--data", data_paths,
                 "Columnar sample file(s); one path sets the target "
                 "marginal, two set source then target (implies the "
                 "custom_data recipe)")
      ->expected(1, 2);

  auto* generate = app.add_subcommand("generate", "Write dataset CSVs");
  auto* train_cmd = app.add_subcommand("train", "Train the log-potential");
  auto* sample = app.add_subcommand("sample", "Simulate bridge trajectories");
  auto* evaluate = app.add_subcommand("evaluate", "Score sampled clouds");
  auto* experiment =
      app.add_subcommand("experiment", "Full recipe over all seeds");

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg;
    try {
      if (config_path.empty()) {
        cfg = default_config(data_paths.empty()
                                 ? ExperimentKind::SwissRollToSCurve
                                 : ExperimentKind::CustomData);
      } else {
        cfg = load_config_file(config_path);
      }
      if (data_paths.size() == 1) {
        cfg.experiment = ExperimentKind::CustomData;
        cfg.data.target_path = data_paths[0];
        if (cfg.data.source_path.empty())
          throw UsageError(
              "--data: a single path sets the target marginal; set "
              "data.source_path in the config or pass two paths");
      } else if (data_paths.size() == 2) {
        cfg.experiment = ExperimentKind::CustomData;
        cfg.data.source_path = data_paths[0];
        cfg.data.target_path = data_paths[1];
      }
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (seed_set) cfg.seeds = {seed};
      if (plots) cfg.plots = true;
      if (parallel_seeds) cfg.parallel_seeds = true;
      cfg.validate();
    } catch (const ParseError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kExitConfig;
    } catch (const UsageError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return kExitConfig;
    }

    if (generate->parsed()) return cmd_generate(cfg);
    if (train_cmd->parsed()) return cmd_train(cfg);
    if (sample->parsed()) return cmd_sample(cfg);
    if (evaluate->parsed()) return cmd_evaluate(cfg);
    if (experiment->parsed()) return cmd_experiment(cfg);
    std::fprintf(stderr, "no subcommand given\n");
    return kExitConfig;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return kExitNumeric;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "numeric abort: %s\n", e.what());
    return kExitNumeric;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
