// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ermbridge/errors.hpp"
#include "ermbridge/point_cloud.hpp"

namespace ermbridge {

void KernelParams::validate() const {
  if (dim < 1) throw UsageError("KernelParams: dim must be >= 1");
  if (!(variance > 0.0)) throw UsageError("KernelParams: variance must be > 0");
}

void SdeSchedule::validate() const {
  if (!(horizon > 0.0)) throw UsageError("SdeSchedule: horizon must be > 0");
  if (steps < 1) throw UsageError("SdeSchedule: steps must be >= 1");
  if (!(sigma_end > 0.0)) throw UsageError("SdeSchedule: sigma_end must be > 0");
  if (sigma_min < 0.0) throw UsageError("SdeSchedule: sigma_min must be >= 0");
  if (sigma_min > sigma_end)
    throw UsageError("SdeSchedule: sigma_min must be <= sigma_end");
}

double log_gauss_kernel(std::span<const double> x, std::span<const double> y,
                        const KernelParams& params) {
  if (static_cast<int>(x.size()) != params.dim ||
      static_cast<int>(y.size()) != params.dim)
    throw UsageError("log_gauss_kernel: point dimension " +
                     std::to_string(x.size()) + "/" + std::to_string(y.size()) +
                     " does not match kernel dim " + std::to_string(params.dim));
  return log_gauss_kernel_sq(squared_distance(x, y), params);
}

double log_gauss_kernel_sq(double squared_dist, const KernelParams& params) {
  const double t = params.variance;
  return -0.5 * params.dim * std::log(2.0 * std::numbers::pi * t) -
         squared_dist / (2.0 * t);
}

double noise_sigma(double t, const SdeSchedule& sched) {
  if (t < 0.0 || t > sched.horizon)
    throw UsageError("noise_sigma: t outside [0, horizon]");
  switch (sched.kind) {
    case ScheduleKind::Constant:
      return sched.sigma_end;
    case ScheduleKind::Cosine:
      return sched.sigma_min +
             (sched.sigma_end - sched.sigma_min) *
                 (1.0 - std::cos(std::numbers::pi * t / sched.horizon)) / 2.0;
  }
  throw UsageError("noise_sigma: unknown schedule kind");
}

double bridge_variance(double t, const SdeSchedule& sched) {
  if (t >= sched.horizon)
    throw UsageError("bridge_variance: t must be < horizon (nu_T = 0)");
  const double s = noise_sigma(t, sched);
  const double nu = s * s * (sched.horizon - t);
  return nu < kBridgeVarianceFloor ? kBridgeVarianceFloor : nu;
}

}  // namespace ermbridge
