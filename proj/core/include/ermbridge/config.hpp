// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ermbridge/kernels.hpp"
#include "ermbridge/metrics.hpp"
#include "ermbridge/train.hpp"

namespace ermbridge {

enum class ExperimentKind { SwissRollToSCurve, GaussGridShift, CustomData };

struct DataConfig {
  std::size_t n_train = 2000;
  double noise = 0.02;          // swiss-roll / s-curve jitter
  std::size_t grid_side = 5;    // gauss_grid_shift target mixture
  double grid_spacing = 4.0;
  double component_std = 1.0;
  double train_box = 10.0;      // truncation half-width for training sources
  std::vector<double> sample_boxes = {1.0, 2.0, 5.0};
  std::string source_path;      // custom_data inputs; empty = bundled
  std::string target_path;      //   synthetic surrogate
  int dim = 100;                // surrogate dimension
};

struct SampleConfig {
  std::size_t n = 2000;
  std::vector<double> snapshots = {0.0, 0.25, 0.5, 0.75, 1.0};  // fractions of T
  std::size_t reference_limit = 0;  // 0 = full target set as references
};

struct ModelConfig {
  std::string kind = "mlp";  // "mlp" or "hermite"
  int hidden_dim = 64;
  int hermite_degree = 12;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::SwissRollToSCurve;
  double kernel_variance = 0.0;  // <= 0: derive sigma_end^2 * horizon
  TrainConfig train;
  ModelConfig model;
  SdeSchedule sde;
  SlicedW1Config metric;
  DataConfig data;
  SampleConfig sample;
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  bool plots = false;
  bool parallel_seeds = false;

  double resolved_kernel_variance() const;
  double resolved_sigma_min() const;
  void validate() const;
};

// Recipe defaults for one experiment kind (hyperparameters of the named
// presets).
ExperimentConfig default_config(ExperimentKind kind);

// Flat dotted-key text ("train.lr = 2e-3", '#' comments). Unknown keys,
// duplicates and malformed values raise ParseError with the line number;
// out-of-range values raise UsageError.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

// Canonical key order; parse(serialize(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

const char* experiment_name(ExperimentKind kind);

}  // namespace ermbridge
