// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "ermbridge/kernels.hpp"
#include "ermbridge/point_cloud.hpp"
#include "ermbridge/potential.hpp"
#include "ermbridge/rng.hpp"

namespace ermbridge {

// One simulated path on the uniform grid t_k = k T / K.
struct Trajectory {
  std::vector<double> times;  // K + 1 entries, 0 .. T
  PointCloud states;          // (K + 1) x d
};

// Frozen sampling state: reference targets, their cached log potential
// values, and the noise schedule.
struct DriftContext {
  PointCloud targets;
  std::vector<double> log_phi;  // one per target row
  SdeSchedule schedule;

  void validate() const;
};

// Caches log phi over the reference targets once; the potential is frozen
// for the whole sampling run.
DriftContext make_drift_context(const PointCloud& reference_targets,
                                const LogPotential& potential,
                                const SdeSchedule& schedule);

// logsumexp_j(-|x - y_j|^2 / (2 nu_t) - log phi(y_j)) with
// nu_t = bridge_variance(t); requires 0 <= t < T.
double log_target_mixture(std::span<const double> x, double t,
                          const DriftContext& ctx);

// Drift u(x, t) = sigma_t^2 grad_x log_target_mixture
//              = sigma_t^2 / nu_t * (sum_j w_j y_j - x)
// with softmax weights w_j over the mixture terms. `weights_scratch` must
// hold one slot per target.
void drift(std::span<const double> x, double t, const DriftContext& ctx,
           std::span<double> out, std::span<double> weights_scratch);

std::vector<double> drift(std::span<const double> x, double t,
                          const DriftContext& ctx);

// Euler-Maruyama on the uniform grid; drift is evaluated at t_k for k < K
// only, so nu stays positive. Throws NumericError (with the step index) if
// the state turns non-finite.
Trajectory euler_maruyama(std::span<const double> x0, const DriftContext& ctx,
                          SplitMix64 rng);

// Clouds gathered at the requested snapshot times (each must lie on the
// step grid). One independent noise stream per start point.
struct SnapshotSet {
  std::vector<double> times;
  std::vector<PointCloud> clouds;

  const PointCloud& at(double t) const;
};

SnapshotSet sample_bridge(const PointCloud& starts, const DriftContext& ctx,
                          const std::vector<double>& snapshot_times,
                          std::uint64_t seed);

}  // namespace ermbridge
