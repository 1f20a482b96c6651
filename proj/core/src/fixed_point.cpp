// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ermbridge/errors.hpp"
#include "ermbridge/parallel.hpp"

namespace ermbridge {

double logsumexp(std::span<const double> values) {
  if (values.empty()) throw UsageError("logsumexp: empty list");
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf)
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

void ClipBounds::validate() const {
  if (!(lower > 0.0)) throw UsageError("ClipBounds: lower must be > 0");
  if (!(lower <= upper)) throw UsageError("ClipBounds: lower must be <= upper");
}

void RiskConfig::validate() const {
  if (!(loss_scale > 0.0)) throw UsageError("RiskConfig: loss_scale must be > 0");
  clip.validate();
}

double empirical_log_normalizer(std::span<const double> x, const PointCloud& Y,
                                const LogPotential& g, const KernelParams& k) {
  const std::size_t m = Y.size();
  if (m == 0) throw UsageError("empirical_log_normalizer: empty target cloud");
  std::vector<double> terms(m);
  for (std::size_t j = 0; j < m; ++j)
    terms[j] = log_gauss_kernel(x, Y.point(j), k) - g.log_eval(Y.point(j));
  return logsumexp(terms) - std::log(static_cast<double>(m));
}

double clip_log_normalizer(double log_normalizer, const ClipBounds& bounds) {
  bounds.validate();
  return std::clamp(log_normalizer, std::log(bounds.lower),
                    std::log(bounds.upper));
}

double empirical_fixed_point_map(std::span<const double> y,
                                 const PointCloud& X, const PointCloud& Y,
                                 const LogPotential& g, const KernelParams& k,
                                 const ClipBounds& bounds) {
  PointCloud single(1, static_cast<int>(y.size()));
  auto row = single.point(0);
  std::copy(y.begin(), y.end(), row.begin());
  return empirical_fixed_point_map_batch(single, X, Y, g, k, bounds)[0];
}

std::vector<double> empirical_fixed_point_map_batch(
    const PointCloud& eval_points, const PointCloud& X, const PointCloud& Y,
    const LogPotential& g, const KernelParams& k, const ClipBounds& bounds) {
  const std::size_t n = X.size();
  const std::size_t m = Y.size();
  if (n == 0 || m == 0)
    throw UsageError("empirical_fixed_point_map: empty sample cloud");
  bounds.validate();
  // Potential values and normalizers are computed once and shared across
  // all evaluation points.
  std::vector<double> log_g(m);
  parallel_for(m, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) log_g[j] = g.log_eval(Y.point(j));
  });
  const double log_m = std::log(static_cast<double>(m));
  std::vector<double> clipped(n);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> terms(m);
    for (std::size_t i = lo; i < hi; ++i) {
      const auto xi = X.point(i);
      for (std::size_t j = 0; j < m; ++j)
        terms[j] =
            log_gauss_kernel_sq(squared_distance(xi, Y.point(j)), k) - log_g[j];
      clipped[i] = clip_log_normalizer(logsumexp(terms) - log_m, bounds);
    }
  });
  const double log_n = std::log(static_cast<double>(n));
  std::vector<double> out(eval_points.size());
  parallel_for(eval_points.size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> terms(n);
    for (std::size_t e = lo; e < hi; ++e) {
      const auto y = eval_points.point(e);
      for (std::size_t i = 0; i < n; ++i)
        terms[i] = log_gauss_kernel(X.point(i), y, k) - clipped[i];
      out[e] = logsumexp(terms) - log_n;
    }
  });
  return out;
}

namespace {

// Shared batch pipeline: potential values, pairwise log kernel, normalizer
// stage over X, clipped, update stage over Y, residuals, loss, and (when
// requested) the exact reverse-mode parameter gradient.
RiskGradient run_risk(const LogPotential& g, const PointCloud& X,
                      const PointCloud& Y, const KernelParams& k,
                      const RiskConfig& cfg, bool with_grad) {
  cfg.validate();
  const std::size_t n = X.size();
  const std::size_t m = Y.size();
  if (n == 0 || m == 0) throw UsageError("risk: empty sample cloud");
  if (X.dim != Y.dim || X.dim != k.dim)
    throw UsageError("risk: dimension mismatch between clouds and kernel");

  RiskGradient out;
  std::vector<double> v(m);
  parallel_for(m, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) v[j] = g.log_eval(Y.point(j));
  });

  std::vector<double> logq(n * m);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto xi = X.point(i);
      double* row = logq.data() + i * m;
      for (std::size_t j = 0; j < m; ++j)
        row[j] = log_gauss_kernel_sq(squared_distance(xi, Y.point(j)), k);
    }
  });

  const double log_m = std::log(static_cast<double>(m));
  const double log_n = std::log(static_cast<double>(n));
  const double log_lo = std::log(cfg.clip.lower);
  const double log_hi = std::log(cfg.clip.upper);

  // Normalizer stage: one logsumexp per source row.
  std::vector<double> log_norm(n), log_norm_clipped(n), row_sum(n);
  std::vector<double> exp_row;
  if (with_grad) exp_row.assign(n * m, 0.0);
  std::vector<char> active(n, 1);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* row = logq.data() + i * m;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, row[j] - v[j]);
      double s = 0.0;
      if (with_grad) {
        double* er = exp_row.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) {
          er[j] = std::exp(row[j] - v[j] - mx);
          s += er[j];
        }
      } else {
        for (std::size_t j = 0; j < m; ++j) s += std::exp(row[j] - v[j] - mx);
      }
      row_sum[i] = s;
      log_norm[i] = mx + std::log(s) - log_m;
      const double c = std::clamp(log_norm[i], log_lo, log_hi);
      active[i] = (log_norm[i] > log_lo && log_norm[i] < log_hi) ? 1 : 0;
      log_norm_clipped[i] = c;
    }
  });

  // Update stage: column logsumexp, row-major two-pass for cache locality.
  std::vector<double> col_max(m, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logq.data() + i * m;
    const double c = log_norm_clipped[i];
    for (std::size_t j = 0; j < m; ++j)
      col_max[j] = std::max(col_max[j], row[j] - c);
  }
  std::vector<double> col_sum(m, 0.0);
  std::vector<double> exp_col;
  if (with_grad) exp_col.assign(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logq.data() + i * m;
    const double c = log_norm_clipped[i];
    if (with_grad) {
      double* ec = exp_col.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) {
        ec[j] = std::exp(row[j] - c - col_max[j]);
        col_sum[j] += ec[j];
      }
    } else {
      for (std::size_t j = 0; j < m; ++j)
        col_sum[j] += std::exp(row[j] - c - col_max[j]);
    }
  }

  std::vector<double> delta(m);
  double mean_delta = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double log_update = col_max[j] + std::log(col_sum[j]) - log_n;
    delta[j] = v[j] - log_update;
    mean_delta += delta[j];
  }
  mean_delta /= static_cast<double>(m);

  double loss = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double c = cfg.center ? delta[j] - mean_delta : delta[j];
    loss += c * c;
  }
  loss *= cfg.loss_scale / static_cast<double>(m);

  std::size_t inactive = 0;
  for (std::size_t i = 0; i < n; ++i) inactive += active[i] ? 0 : 1;

  out.loss = loss;
  out.clip_active_frac =
      static_cast<double>(inactive) / static_cast<double>(n);
  out.log_normalizers = std::move(log_norm);
  out.residuals = delta;

  if (!with_grad) return out;

  // d loss / d Delta_j.
  std::vector<double> g_delta(m);
  const double scale2 = 2.0 * cfg.loss_scale / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j)
    g_delta[j] = scale2 * (cfg.center ? delta[j] - mean_delta : delta[j]);

  // Through the update stage: dA_i = sum_j g_delta_j * softmax_col(i | j).
  std::vector<double> d_clip(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ec = exp_col.data() + i * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += g_delta[j] * ec[j] / col_sum[j];
    d_clip[i] = acc;
  }

  // Through the normalizer stage into the potential values.
  std::vector<double> dv(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;  // saturated clip: zero subgradient
    const double coef = d_clip[i] / row_sum[i];
    const double* er = exp_row.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) dv[j] -= coef * er[j];
  }
  for (std::size_t j = 0; j < m; ++j) dv[j] += g_delta[j];

  out.grad.assign(g.param_count(), 0.0);
  for (std::size_t j = 0; j < m; ++j)
    g.accumulate_param_grad(Y.point(j), dv[j], out.grad);
  return out;
}

}  // namespace

double empirical_risk(const LogPotential& g, const PointCloud& X,
                      const PointCloud& Y, const KernelParams& k,
                      const RiskConfig& cfg) {
  return run_risk(g, X, Y, k, cfg, /*with_grad=*/false).loss;
}

RiskGradient param_gradient(const LogPotential& g, const PointCloud& X,
                            const PointCloud& Y, const KernelParams& k,
                            const RiskConfig& cfg) {
  return run_risk(g, X, Y, k, cfg, /*with_grad=*/true);
}

RiskGradient evaluate_risk(const LogPotential& g, const PointCloud& X,
                           const PointCloud& Y, const KernelParams& k,
                           const RiskConfig& cfg) {
  return run_risk(g, X, Y, k, cfg, /*with_grad=*/false);
}

ClipBounds quantile_clip_bounds(std::vector<double> log_normalizers) {
  if (log_normalizers.empty())
    throw UsageError("quantile_clip_bounds: no normalizer samples");
  std::sort(log_normalizers.begin(), log_normalizers.end());
  const auto pick = [&](double q) {
    const double pos = q * static_cast<double>(log_normalizers.size() - 1);
    return log_normalizers[static_cast<std::size_t>(std::llround(pos))];
  };
  ClipBounds b;
  b.lower = std::exp(pick(0.001) - std::log(10.0));
  b.upper = std::exp(pick(0.999) + std::log(10.0));
  return b;
}

void QuadratureSpec::validate() const {
  if (!(hi > lo)) throw UsageError("QuadratureSpec: requires hi > lo");
  if (nodes < 3) throw UsageError("QuadratureSpec: nodes must be >= 3");
}

namespace {

struct QuadGrid {
  PointCloud points;
  std::vector<double> log_weights;
};

QuadGrid build_grid(const QuadratureSpec& spec, int dim) {
  const int n = spec.nodes;
  const double h = (spec.hi - spec.lo) / (n - 1);
  std::vector<double> axis(n), axis_logw(n);
  for (int a = 0; a < n; ++a) {
    axis[a] = spec.lo + h * a;
    axis_logw[a] = std::log((a == 0 || a == n - 1) ? 0.5 * h : h);
  }
  std::size_t total = 1;
  for (int j = 0; j < dim; ++j) total *= static_cast<std::size_t>(n);
  QuadGrid grid{PointCloud(total, dim), std::vector<double>(total, 0.0)};
  std::vector<int> idx(dim, 0);
  for (std::size_t p = 0; p < total; ++p) {
    auto row = grid.points.point(p);
    double lw = 0.0;
    for (int j = 0; j < dim; ++j) {
      row[j] = axis[idx[j]];
      lw += axis_logw[idx[j]];
    }
    grid.log_weights[p] = lw;
    int axis_i = 0;
    while (axis_i < dim && ++idx[axis_i] == n) idx[axis_i++] = 0;
  }
  return grid;
}

std::vector<double> population_map_on_grid(const PointCloud& eval_points,
                                           const ScalarField& rho0,
                                           const ScalarField& rhoT,
                                           const LogPotential& g,
                                           const KernelParams& k,
                                           const QuadGrid& grid) {
  const std::size_t p = grid.points.size();
  std::vector<double> log_rho0(p), inner_term(p);
  for (std::size_t a = 0; a < p; ++a) {
    const auto z = grid.points.point(a);
    log_rho0[a] = std::log(std::max(rho0(z), 0.0));
    inner_term[a] =
        grid.log_weights[a] + std::log(std::max(rhoT(z), 0.0)) - g.log_eval(z);
  }
  // Normalizer on every grid node.
  std::vector<double> log_norm(p);
  parallel_for(p, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> terms(p);
    for (std::size_t x = lo; x < hi; ++x) {
      const auto xp = grid.points.point(x);
      for (std::size_t a = 0; a < p; ++a)
        terms[a] = inner_term[a] + log_gauss_kernel_sq(
                                       squared_distance(xp, grid.points.point(a)), k);
      log_norm[x] = logsumexp(terms);
    }
  });
  std::vector<double> out(eval_points.size());
  parallel_for(eval_points.size(), [&](std::size_t lo, std::size_t hi) {
    std::vector<double> terms(p);
    for (std::size_t e = lo; e < hi; ++e) {
      const auto y = eval_points.point(e);
      for (std::size_t x = 0; x < p; ++x)
        terms[x] = grid.log_weights[x] + log_rho0[x] - log_norm[x] +
                   log_gauss_kernel_sq(
                       squared_distance(grid.points.point(x), y), k);
      out[e] = std::exp(logsumexp(terms));
    }
  });
  return out;
}

}  // namespace

std::vector<double> population_fixed_point_map_batch(
    const PointCloud& eval_points, const ScalarField& rho0,
    const ScalarField& rhoT, const LogPotential& g, const KernelParams& k,
    const QuadratureSpec& quad) {
  quad.validate();
  if (k.dim > 2)
    throw UsageError("population_fixed_point_map: quadrature limited to d <= 2");
  const auto coarse = build_grid(quad, k.dim);
  auto values = population_map_on_grid(eval_points, rho0, rhoT, g, k, coarse);
  if (quad.self_check_tol > 0.0) {
    QuadratureSpec fine = quad;
    fine.nodes = 2 * (quad.nodes - 1) + 1;
    const auto fine_grid = build_grid(fine, k.dim);
    const auto refined =
        population_map_on_grid(eval_points, rho0, rhoT, g, k, fine_grid);
    for (std::size_t e = 0; e < values.size(); ++e) {
      const double denom = std::max(std::abs(refined[e]), 1e-12);
      if (std::abs(values[e] - refined[e]) / denom > quad.self_check_tol)
        throw NumericError(
            "population_fixed_point_map: node-doubling disagreement " +
            std::to_string(std::abs(values[e] - refined[e]) / denom) +
            " exceeds tolerance");
    }
  }
  return values;
}

double population_fixed_point_map(std::span<const double> y,
                                  const ScalarField& rho0,
                                  const ScalarField& rhoT,
                                  const LogPotential& g, const KernelParams& k,
                                  const QuadratureSpec& quad) {
  PointCloud single(1, static_cast<int>(y.size()));
  auto row = single.point(0);
  std::copy(y.begin(), y.end(), row.begin());
  return population_fixed_point_map_batch(single, rho0, rhoT, g, k, quad)[0];
}

}  // namespace ermbridge
