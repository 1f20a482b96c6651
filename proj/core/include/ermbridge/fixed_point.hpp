// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "ermbridge/kernels.hpp"
#include "ermbridge/point_cloud.hpp"
#include "ermbridge/potential.hpp"

namespace ermbridge {

// Max-shifted log(sum(exp(values))); exact for one element, finite for any
// mix of finite values and -inf. Throws UsageError on an empty list.
double logsumexp(std::span<const double> values);

// Clipping band for the empirical normalizer (linear domain).
struct ClipBounds {
  double lower = 1e-300;
  double upper = 1e300;

  void validate() const;
  // Band so wide it never binds on finite data.
  static ClipBounds inactive() { return {}; }
};

enum class LossKind { SquaredLogResidual };

struct RiskConfig {
  LossKind loss = LossKind::SquaredLogResidual;
  double loss_scale = 1.0;
  ClipBounds clip;
  bool center = true;  // uncentered variant kept for ablation

  void validate() const;
};

// log of the empirical normalizer at x:
// logsumexp_k(log q_T(x, Y_k) - log g(Y_k)) - log M.
double empirical_log_normalizer(std::span<const double> x, const PointCloud& Y,
                                const LogPotential& g, const KernelParams& k);

// log clip(exp(log_normalizer), bounds.lower, bounds.upper); idempotent.
double clip_log_normalizer(double log_normalizer, const ClipBounds& bounds);

// log of the empirical fixed-point map applied to g, at y:
// logsumexp_i(log q_T(X_i, y) - clipped log normalizer at X_i) - log N.
// The single-point form recomputes the normalizers; batch callers should use
// empirical_fixed_point_map_batch, which computes them once.
double empirical_fixed_point_map(std::span<const double> y,
                                 const PointCloud& X, const PointCloud& Y,
                                 const LogPotential& g, const KernelParams& k,
                                 const ClipBounds& bounds);

// Fixed-point map evaluated at every point of eval_points; normalizers over
// X are computed once and shared.
std::vector<double> empirical_fixed_point_map_batch(
    const PointCloud& eval_points, const PointCloud& X, const PointCloud& Y,
    const LogPotential& g, const KernelParams& k, const ClipBounds& bounds);

// Centered squared log-residual risk (or the uncentered variant):
// loss_scale * mean_j (Delta_j - mean(Delta))^2 with
// Delta_j = log g(Y_j) - log map[g](Y_j).
double empirical_risk(const LogPotential& g, const PointCloud& X,
                      const PointCloud& Y, const KernelParams& k,
                      const RiskConfig& cfg);

// Risk plus the exact parameter gradient, reverse-accumulated through both
// logsumexp stages; saturated normalizer clips contribute zero gradient.
struct RiskGradient {
  double loss = 0.0;
  std::vector<double> grad;
  double clip_active_frac = 0.0;
  std::vector<double> log_normalizers;  // per X row, pre-clip
  std::vector<double> residuals;        // Delta_j per Y row
};

RiskGradient param_gradient(const LogPotential& g, const PointCloud& X,
                            const PointCloud& Y, const KernelParams& k,
                            const RiskConfig& cfg);

// Same pipeline without the gradient pass (cheaper full-data evaluation).
RiskGradient evaluate_risk(const LogPotential& g, const PointCloud& X,
                           const PointCloud& Y, const KernelParams& k,
                           const RiskConfig& cfg);

// Data-driven clip band: (0.1%, 99.9%) quantiles of the given pre-clip log
// normalizers, widened by a factor of 10 on each side.
ClipBounds quantile_clip_bounds(std::vector<double> log_normalizers);

// Uniform trapezoid quadrature box for the population-operator checks.
struct QuadratureSpec {
  double lo = -8.0;
  double hi = 8.0;
  int nodes = 513;
  double self_check_tol = 1e-6;  // <= 0 disables the node-doubling check

  void validate() const;
};

// Population fixed-point map C[g](y) = int q_T(x,y) rho0(x) / D(x) dx with
// D(x) = int q_T(x,z) rhoT(z) / g(z) dz, both integrals by quadrature on the
// given box (dim <= 2). Node-doubling self-check; test-suite oracle, not a
// runtime path.
double population_fixed_point_map(std::span<const double> y,
                                  const ScalarField& rho0,
                                  const ScalarField& rhoT,
                                  const LogPotential& g, const KernelParams& k,
                                  const QuadratureSpec& quad);

std::vector<double> population_fixed_point_map_batch(
    const PointCloud& eval_points, const ScalarField& rho0,
    const ScalarField& rhoT, const LogPotential& g, const KernelParams& k,
    const QuadratureSpec& quad);

}  // namespace ermbridge
