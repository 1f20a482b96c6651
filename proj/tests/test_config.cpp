// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ermbridge/config.hpp"
#include "ermbridge/errors.hpp"
#include "ermbridge/experiment.hpp"
#include "ermbridge/io.hpp"

using namespace ermbridge;

TEST_CASE("empty config text yields the default recipe") {
  const ExperimentConfig cfg = parse_config("");
  CHECK(cfg.experiment == ExperimentKind::SwissRollToSCurve);
  CHECK(cfg.train.batch_size == 1000);
  CHECK(cfg.train.lr == doctest::Approx(2e-3));
  CHECK(cfg.train.epochs == 1500);
  CHECK(cfg.train.loss_scale == doctest::Approx(1.0));
  CHECK(cfg.model.hidden_dim == 64);
  CHECK(cfg.sde.sigma_end == doctest::Approx(0.5));
}

TEST_CASE("recipe defaults follow the experiment key") {
  const ExperimentConfig cfg = parse_config("experiment = gauss_grid_shift\n");
  CHECK(cfg.train.batch_size == 64);
  CHECK(cfg.train.lr == doctest::Approx(5e-4));
  CHECK(cfg.train.epochs == 140);
  CHECK(cfg.train.loss_scale == doctest::Approx(0.11));
  CHECK(cfg.model.hidden_dim == 128);
  CHECK(cfg.sde.sigma_end == doctest::Approx(0.9));
  CHECK(cfg.data.n_train == 3000);

  const ExperimentConfig cell = parse_config("experiment = custom_data\n");
  CHECK(cell.train.batch_size == 2048);
  CHECK(cell.train.loss_scale == doctest::Approx(196.5431));
  CHECK(cell.model.hidden_dim == 2048);
  CHECK(cell.sde.sigma_end == doctest::Approx(0.4216));
}

TEST_CASE("config errors carry position and key information") {
  try {
    (void)parse_config("train.lr = 2e-3\nbogus.key = 1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("bogus.key") != std::string::npos);
  }

  try {
    (void)parse_config("train.lr = 1e-3\ntrain.lr = 2e-3\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  CHECK_THROWS_AS((void)parse_config("train.lr = -1\n"), UsageError);
  CHECK_THROWS_AS((void)parse_config("just some words\n"), ParseError);
  CHECK_THROWS_AS((void)parse_config("train.lr = abc\n"), ParseError);
  CHECK_THROWS_AS((void)parse_config("experiment = nonsense\n"), ParseError);
}

TEST_CASE("comments and spacing are tolerated") {
  const ExperimentConfig cfg = parse_config(
      "# a comment line\n"
      "  train.lr =   5e-4   # trailing comment\n"
      "\n"
      "train.epochs = 7\n");
  CHECK(cfg.train.lr == doctest::Approx(5e-4));
  CHECK(cfg.train.epochs == 7);
}

TEST_CASE("serialize/parse round trip") {
  ExperimentConfig cfg = default_config(ExperimentKind::GaussGridShift);
  cfg.seeds = {4, 9};
  cfg.train.lr = 3.25e-4;
  cfg.sample.snapshots = {0.0, 0.5, 1.0};
  cfg.data.sample_boxes = {1.0, 3.0};
  cfg.plots = true;
  const std::string text = serialize_config(cfg);
  const ExperimentConfig back = parse_config(text);
  CHECK(serialize_config(back) == text);

  // Round trip through an arbitrary user config too.
  const std::string user =
      "experiment = swissroll_to_scurve\n"
      "train.lr = 2e-3\n"
      "seeds = 1,2\n"
      "sample.snapshots = 0,0.25,0.5,0.75,1\n";
  const ExperimentConfig parsed = parse_config(user);
  CHECK(serialize_config(parse_config(serialize_config(parsed))) ==
        serialize_config(parsed));
}

TEST_CASE("tiny experiment end to end") {
  ExperimentConfig cfg = default_config(ExperimentKind::SwissRollToSCurve);
  cfg.data.n_train = 64;
  cfg.train.batch_size = 16;
  cfg.train.epochs = 3;
  cfg.model.hidden_dim = 8;
  cfg.sample.n = 24;
  cfg.sde.steps = 8;
  cfg.sample.snapshots = {0.0, 0.5, 1.0};
  cfg.metric.n_projections = 16;
  cfg.seeds = {1, 2};
  cfg.out_dir =
      (std::filesystem::temp_directory_path() / "ermbridge_exp").string();
  std::filesystem::remove_all(cfg.out_dir);

  run_experiment(cfg);

  CHECK(std::filesystem::exists(out_path(cfg, "config.txt")));
  CHECK(std::filesystem::exists(out_path(cfg, "loss_trace_seed1.csv")));
  CHECK(std::filesystem::exists(out_path(cfg, "potential_seed2.ckpt")));
  CHECK(std::filesystem::exists(out_path(cfg, "samples_seed1.csv")));
  REQUIRE(std::filesystem::exists(out_path(cfg, "metrics.csv")));

  // metrics.csv: header plus the per-seed and aggregate rows; every seed
  // reports sliced_w1_terminal.
  std::ifstream in(out_path(cfg, "metrics.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "name,value,seed");
  int terminal_rows = 0;
  std::string contents = line + "\n";
  while (std::getline(in, line)) {
    contents += line + "\n";
    if (line.rfind("sliced_w1_terminal,", 0) == 0) ++terminal_rows;
  }
  CHECK(terminal_rows == 2);
  CHECK(contents.find("sliced_w1_terminal_mean") != std::string::npos);

  // Samples CSV reads back with the requested snapshot times.
  const SnapshotSet snaps =
      read_samples_csv(out_path(cfg, "samples_seed1.csv"));
  CHECK(snaps.times.size() == 3);
  CHECK(snaps.clouds.front().size() == 24);

  // Re-running reproduces the numeric artifacts bitwise, with and without
  // concurrent seeds.
  std::string before = contents;
  run_experiment(cfg);
  std::ifstream again(out_path(cfg, "metrics.csv"));
  std::string after((std::istreambuf_iterator<char>(again)),
                    std::istreambuf_iterator<char>());
  CHECK(after == before);

  cfg.parallel_seeds = true;
  run_experiment(cfg);
  std::ifstream par(out_path(cfg, "metrics.csv"));
  std::string par_contents((std::istreambuf_iterator<char>(par)),
                           std::istreambuf_iterator<char>());
  CHECK(par_contents == before);

  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("custom data surrogate pipeline") {
  ExperimentConfig cfg = default_config(ExperimentKind::CustomData);
  cfg.data.n_train = 128;
  cfg.data.dim = 10;
  cfg.train.batch_size = 32;
  cfg.train.epochs = 2;
  cfg.model.hidden_dim = 8;
  cfg.sample.n = 16;
  cfg.sde.steps = 4;
  cfg.sample.snapshots = {0.0, 1.0};
  cfg.metric.n_projections = 8;
  cfg.seeds = {3};
  cfg.out_dir =
      (std::filesystem::temp_directory_path() / "ermbridge_custom").string();
  std::filesystem::remove_all(cfg.out_dir);
  run_experiment(cfg);
  CHECK(std::filesystem::exists(out_path(cfg, "metrics.csv")));
  std::filesystem::remove_all(cfg.out_dir);
}

TEST_CASE("grid-shift experiment emits per-box metric rows") {
  ExperimentConfig cfg = default_config(ExperimentKind::GaussGridShift);
  cfg.data.n_train = 64;
  cfg.train.batch_size = 16;
  cfg.train.epochs = 2;
  cfg.model.hidden_dim = 8;
  cfg.sample.n = 16;
  cfg.sde.steps = 8;
  cfg.sample.snapshots = {0.0, 1.0};
  cfg.metric.n_projections = 8;
  cfg.data.sample_boxes = {1.0, 2.0};
  cfg.seeds = {5};
  cfg.out_dir =
      (std::filesystem::temp_directory_path() / "ermbridge_grid").string();
  std::filesystem::remove_all(cfg.out_dir);
  run_experiment(cfg);

  std::ifstream in(out_path(cfg, "metrics.csv"));
  std::string line, contents;
  while (std::getline(in, line)) contents += line + "\n";
  CHECK(contents.find("sliced_w1_terminal_box1,") != std::string::npos);
  CHECK(contents.find("sliced_w1_terminal_box2,") != std::string::npos);
  CHECK(contents.find("sliced_w1_terminal,") != std::string::npos);
  CHECK(std::filesystem::exists(out_path(cfg, "samples_seed5_box1.csv")));
  CHECK(std::filesystem::exists(out_path(cfg, "samples_seed5_box2.csv")));
  std::filesystem::remove_all(cfg.out_dir);
}
