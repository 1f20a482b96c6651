// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

namespace ermbridge {

// Gaussian reference kernel q_T(x, y) = (2*pi*T)^(-d/2) exp(-|x-y|^2 / (2T)).
struct KernelParams {
  int dim = 1;
  double variance = 1.0;  // T, in units of squared coordinate

  void validate() const;
};

enum class ScheduleKind { Constant, Cosine };

// Noise schedule sigma_t driving the sampler; horizon T and step count K.
struct SdeSchedule {
  double horizon = 1.0;
  int steps = 100;
  double sigma_end = 1.0;
  double sigma_min = 0.0;  // only used by the Cosine kind
  ScheduleKind kind = ScheduleKind::Constant;

  void validate() const;
};

// Smallest bridge variance returned by bridge_variance; keeps the
// 1/nu_t terms in the sampler finite as t -> T.
inline constexpr double kBridgeVarianceFloor = 1e-8;

// log q_T(x, y); throws UsageError on dimension mismatch.
double log_gauss_kernel(std::span<const double> x, std::span<const double> y,
                        const KernelParams& params);

// Same, from a precomputed squared distance (hot-loop form).
double log_gauss_kernel_sq(double squared_dist, const KernelParams& params);

// sigma_t for t in [0, T]. Constant: sigma_end. Cosine:
// sigma_min + (sigma_end - sigma_min) * (1 - cos(pi t / T)) / 2.
double noise_sigma(double t, const SdeSchedule& sched);

// nu_t = sigma_t^2 (T - t), floored at kBridgeVarianceFloor; t must be < T.
double bridge_variance(double t, const SdeSchedule& sched);

}  // namespace ermbridge
