// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ermbridge/errors.hpp"
#include "ermbridge/parallel.hpp"

namespace ermbridge {

void DriftContext::validate() const {
  if (targets.empty()) throw UsageError("DriftContext: empty reference set");
  if (log_phi.size() != targets.size())
    throw UsageError("DriftContext: cache length must match reference set");
  schedule.validate();
}

DriftContext make_drift_context(const PointCloud& reference_targets,
                                const LogPotential& potential,
                                const SdeSchedule& schedule) {
  reference_targets.validate();
  schedule.validate();
  DriftContext ctx;
  ctx.targets = reference_targets;
  ctx.schedule = schedule;
  ctx.log_phi.resize(reference_targets.size());
  parallel_for(reference_targets.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j)
      ctx.log_phi[j] = potential.log_eval(reference_targets.point(j));
  });
  return ctx;
}

namespace {

// Mixture exponents L_j = -|x - y_j|^2 / (2 nu_t) - log phi_j; returns the
// max for the softmax shift.
double mixture_terms(std::span<const double> x, double nu,
                     const DriftContext& ctx, std::span<double> terms) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ctx.targets.size(); ++j) {
    terms[j] = -squared_distance(x, ctx.targets.point(j)) / (2.0 * nu) -
               ctx.log_phi[j];
    mx = std::max(mx, terms[j]);
  }
  return mx;
}

}  // namespace

double log_target_mixture(std::span<const double> x, double t,
                          const DriftContext& ctx) {
  ctx.validate();
  if (t < 0.0 || t >= ctx.schedule.horizon)
    throw UsageError("log_target_mixture: t must lie in [0, horizon)");
  const double nu = bridge_variance(t, ctx.schedule);
  std::vector<double> terms(ctx.targets.size());
  const double mx = mixture_terms(x, nu, ctx, terms);
  double s = 0.0;
  for (double v : terms) s += std::exp(v - mx);
  return mx + std::log(s);
}

void drift(std::span<const double> x, double t, const DriftContext& ctx,
           std::span<double> out, std::span<double> weights_scratch) {
  const std::size_t m = ctx.targets.size();
  const double sigma = noise_sigma(t, ctx.schedule);
  const double nu = bridge_variance(t, ctx.schedule);
  const double mx = mixture_terms(x, nu, ctx, weights_scratch);
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    weights_scratch[j] = std::exp(weights_scratch[j] - mx);
    s += weights_scratch[j];
  }
  const int d = ctx.targets.dim;
  for (int c = 0; c < d; ++c) out[c] = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double w = weights_scratch[j] / s;
    const auto y = ctx.targets.point(j);
    for (int c = 0; c < d; ++c) out[c] += w * y[c];
  }
  const double factor = sigma * sigma / nu;
  for (int c = 0; c < d; ++c) out[c] = factor * (out[c] - x[c]);
}

std::vector<double> drift(std::span<const double> x, double t,
                          const DriftContext& ctx) {
  ctx.validate();
  if (t < 0.0 || t >= ctx.schedule.horizon)
    throw UsageError("drift: t must lie in [0, horizon)");
  std::vector<double> out(ctx.targets.dim), scratch(ctx.targets.size());
  drift(x, t, ctx, out, scratch);
  return out;
}

Trajectory euler_maruyama(std::span<const double> x0, const DriftContext& ctx,
                          SplitMix64 rng) {
  ctx.validate();
  const int d = ctx.targets.dim;
  if (static_cast<int>(x0.size()) != d)
    throw UsageError("euler_maruyama: start point has wrong dimension");
  const int k = ctx.schedule.steps;
  const double dt = ctx.schedule.horizon / k;
  const double sq_dt = std::sqrt(dt);

  Trajectory traj;
  traj.times.resize(k + 1);
  traj.states = PointCloud(static_cast<std::size_t>(k) + 1, d);
  std::vector<double> state(x0.begin(), x0.end());
  std::vector<double> u(d), scratch(ctx.targets.size());
  for (int c = 0; c < d; ++c) traj.states.point(0)[c] = state[c];
  traj.times[0] = 0.0;
  for (int step = 0; step < k; ++step) {
    const double t = dt * step;
    const double sigma = noise_sigma(t, ctx.schedule);
    drift(state, t, ctx, u, scratch);
    for (int c = 0; c < d; ++c) {
      state[c] += u[c] * dt + sigma * sq_dt * rng.next_gauss();
      if (!std::isfinite(state[c]))
        throw NumericError("euler_maruyama: non-finite state at step " +
                           std::to_string(step));
    }
    traj.times[step + 1] = (step + 1 == k) ? ctx.schedule.horizon
                                           : dt * (step + 1);
    auto row = traj.states.point(static_cast<std::size_t>(step) + 1);
    for (int c = 0; c < d; ++c) row[c] = state[c];
  }
  return traj;
}

const PointCloud& SnapshotSet::at(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] == t) return clouds[i];
  throw UsageError("SnapshotSet::at: no snapshot at t = " + std::to_string(t));
}

SnapshotSet sample_bridge(const PointCloud& starts, const DriftContext& ctx,
                          const std::vector<double>& snapshot_times,
                          std::uint64_t seed) {
  ctx.validate();
  starts.validate();
  if (starts.dim != ctx.targets.dim)
    throw UsageError("sample_bridge: start/reference dimension mismatch");
  if (snapshot_times.empty())
    throw UsageError("sample_bridge: no snapshot times requested");

  const int k = ctx.schedule.steps;
  const double dt = ctx.schedule.horizon / k;
  std::vector<int> snapshot_steps(snapshot_times.size());
  for (std::size_t s = 0; s < snapshot_times.size(); ++s) {
    const double pos = snapshot_times[s] / dt;
    const int step = static_cast<int>(std::llround(pos));
    if (step < 0 || step > k || std::abs(pos - step) > 1e-9)
      throw UsageError("sample_bridge: snapshot time " +
                       std::to_string(snapshot_times[s]) +
                       " is not on the step grid");
    snapshot_steps[s] = step;
  }

  SnapshotSet out;
  out.times = snapshot_times;
  out.clouds.assign(snapshot_times.size(),
                    PointCloud(starts.size(), starts.dim));

  SplitMix64 root(seed, /*stream=*/9090);
  parallel_for(starts.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const Trajectory traj =
          euler_maruyama(starts.point(i), ctx, root.split(i));
      for (std::size_t s = 0; s < snapshot_steps.size(); ++s) {
        const auto src = traj.states.point(snapshot_steps[s]);
        auto dst = out.clouds[s].point(i);
        std::copy(src.begin(), src.end(), dst.begin());
      }
    }
  });
  return out;
}

}  // namespace ermbridge
