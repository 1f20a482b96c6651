// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ermbridge/config.hpp"
#include "ermbridge/point_cloud.hpp"
#include "ermbridge/potential.hpp"
#include "ermbridge/sampler.hpp"
#include "ermbridge/train.hpp"

namespace ermbridge {

struct ExperimentData {
  PointCloud source;  // draws from the start marginal
  PointCloud target;  // draws from the end marginal
};

// Generates (or loads, for custom_data with paths) the training clouds.
// custom_data with empty paths falls back to a deterministic synthetic
// surrogate pair of dimension cfg.data.dim.
ExperimentData prepare_data(const ExperimentConfig& cfg, std::uint64_t seed);

// Fresh potential per the model config (mlp or clipped hermite).
std::unique_ptr<LogPotential> build_potential(const ExperimentConfig& cfg,
                                              const ExperimentData& data,
                                              std::uint64_t seed);

// Start points for sampling. box_index selects a sample box for
// gauss_grid_shift (ignored otherwise).
PointCloud sampling_starts(const ExperimentConfig& cfg,
                           const ExperimentData& data, std::uint64_t seed,
                           std::size_t box_index = 0);

// Independent draw from the target marginal, for metric baselines.
PointCloud fresh_target_draw(const ExperimentConfig& cfg,
                             const ExperimentData& data, std::uint64_t seed,
                             std::size_t count);

// Resolved schedule / kernel / risk pieces shared by the pipeline stages.
SdeSchedule resolved_schedule(const ExperimentConfig& cfg);
KernelParams resolved_kernel(const ExperimentConfig& cfg, int dim);
RiskConfig resolved_risk(const ExperimentConfig& cfg);
std::vector<double> snapshot_times(const ExperimentConfig& cfg);

// Trains in place and returns the report.
TrainReport train_potential(const ExperimentConfig& cfg,
                            const ExperimentData& data, LogPotential& p,
                            std::uint64_t seed);

SnapshotSet run_sampling(const ExperimentConfig& cfg,
                         const ExperimentData& data, const LogPotential& p,
                         const PointCloud& starts, std::uint64_t seed);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> metrics;
};

// Full single-seed pipeline; writes loss trace, checkpoint, samples, and
// (with plots on, 2-D data) SVG/density artifacts into cfg.out_dir.
SeedOutcome run_seed(const ExperimentConfig& cfg, std::uint64_t seed);

// All seeds plus mean/std aggregate rows in metrics.csv; also echoes the
// resolved config to <out>/config.txt. Throws on failure.
void run_experiment(const ExperimentConfig& cfg);

std::string out_path(const ExperimentConfig& cfg, const std::string& name);

}  // namespace ermbridge
