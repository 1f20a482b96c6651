// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ermbridge/fixed_point.hpp"
#include "ermbridge/kernels.hpp"
#include "ermbridge/point_cloud.hpp"
#include "ermbridge/potential.hpp"

namespace ermbridge {

enum class OptimizerKind { Sgd, AdaptiveMoment };

struct AdaptiveMomentParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  std::size_t batch_size = 1000;
  double lr = 2e-3;
  int epochs = 1500;
  double loss_scale = 1.0;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::AdaptiveMoment;
  AdaptiveMomentParams adaptive;
  // Refresh the normalizer clip band each epoch from the observed
  // quantiles; when false the band in the RiskConfig is used as given.
  bool auto_clip = true;

  void validate() const;
};

struct StepRecord {
  long step = 0;
  double loss = 0.0;
  double clip_active_frac = 0.0;
};

struct TrainReport {
  std::vector<double> epoch_loss;   // length == epochs
  std::vector<StepRecord> steps;    // one row per optimizer step
  double wall_seconds = 0.0;
  long clip_activations = 0;        // source rows that hit the clip band
};

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Sgd;
  double lr = 1e-3;
  AdaptiveMomentParams adaptive;
  long t = 0;
  std::vector<double> m;
  std::vector<double> v;
};

OptimizerState make_optimizer(OptimizerKind kind, double lr,
                              const AdaptiveMomentParams& ap,
                              std::size_t param_count);

// One in-place update; Sgd: theta -= lr * grad; AdaptiveMoment: standard
// bias-corrected first/second-moment step.
void optimizer_step(OptimizerState& state, std::span<double> params,
                    std::span<const double> grads);

// Minibatch ERM loop: per step, fresh source/target batches (shuffled
// without replacement within an epoch), risk gradient, one optimizer step;
// Hermite potentials are ball-projected after every step. Throws
// NumericError with step diagnostics if the loss turns non-finite.
TrainReport train(const TrainConfig& cfg, const PointCloud& X,
                  const PointCloud& Y, LogPotential& p, const KernelParams& k,
                  RiskConfig risk);

// "step,loss,clip_active_frac" rows.
void write_loss_trace_csv(const TrainReport& report, const std::string& path);

}  // namespace ermbridge
