// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ermbridge/errors.hpp"
#include "ermbridge/fixed_point.hpp"
#include "ermbridge/parallel.hpp"

namespace ermbridge {

std::vector<double> DiscretePotential::values() const {
  std::vector<double> out(log_values.size());
  for (std::size_t j = 0; j < log_values.size(); ++j)
    out[j] = std::exp(log_values[j]);
  return out;
}

TablePotential DiscretePotential::as_table_potential() const {
  return TablePotential(support, log_values);
}

namespace {

// One full sweep: normalizers over sources given log g, then the updated
// log potential on the targets.
void sweep(const std::vector<double>& logq, std::size_t n, std::size_t m,
           const std::vector<double>& log_g, std::vector<double>& log_norm,
           std::vector<double>& log_update) {
  const double log_m = std::log(static_cast<double>(m));
  const double log_n = std::log(static_cast<double>(n));
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* row = logq.data() + i * m;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, row[j] - log_g[j]);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += std::exp(row[j] - log_g[j] - mx);
      log_norm[i] = mx + std::log(s) - log_m;
    }
  });
  std::vector<double> col_max(m, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logq.data() + i * m;
    for (std::size_t j = 0; j < m; ++j)
      col_max[j] = std::max(col_max[j], row[j] - log_norm[i]);
  }
  std::vector<double> col_sum(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logq.data() + i * m;
    for (std::size_t j = 0; j < m; ++j)
      col_sum[j] += std::exp(row[j] - log_norm[i] - col_max[j]);
  }
  for (std::size_t j = 0; j < m; ++j)
    log_update[j] = col_max[j] + std::log(col_sum[j]) - log_n;
}

std::vector<double> pairwise_log_kernel(const PointCloud& X,
                                        const PointCloud& Y,
                                        const KernelParams& k) {
  const std::size_t n = X.size(), m = Y.size();
  std::vector<double> logq(n * m);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto xi = X.point(i);
      double* row = logq.data() + i * m;
      for (std::size_t j = 0; j < m; ++j)
        row[j] = log_gauss_kernel_sq(squared_distance(xi, Y.point(j)), k);
    }
  });
  return logq;
}

}  // namespace

DiscretePotential fixed_point_iterate(const PointCloud& X, const PointCloud& Y,
                                      const KernelParams& k, double tol,
                                      int max_iter) {
  X.validate();
  Y.validate();
  k.validate();
  if (X.dim != Y.dim || X.dim != k.dim)
    throw UsageError("fixed_point_iterate: dimension mismatch");
  if (!(tol > 0.0)) throw UsageError("fixed_point_iterate: tol must be > 0");
  if (max_iter < 1) throw UsageError("fixed_point_iterate: max_iter must be >= 1");

  const std::size_t n = X.size(), m = Y.size();
  const auto logq = pairwise_log_kernel(X, Y, k);

  std::vector<double> log_g(m, 0.0), log_norm(n), log_update(m);
  std::vector<double> residual_trace;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  for (int it = 0; it < max_iter; ++it) {
    sweep(logq, n, m, log_g, log_norm, log_update);
    ++iterations;
    residual = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      residual = std::max(residual, std::abs(log_g[j] - log_update[j]));
    residual_trace.push_back(residual);
    if (residual < tol) break;
    log_g = log_update;
    if (it + 1 == max_iter)
      throw ConvergenceError(
          "fixed_point_iterate: residual " + std::to_string(residual) +
              " after " + std::to_string(max_iter) + " iterations",
          residual);
  }

  // Mean-log gauge; the residual is invariant under this shift.
  double mean = 0.0;
  for (double v : log_g) mean += v;
  mean /= static_cast<double>(m);
  for (double& v : log_g) v -= mean;

  DiscretePotential out;
  out.support = Y;
  out.log_values = std::move(log_g);
  out.iterations = iterations;
  out.final_residual = residual;
  out.residual_trace = std::move(residual_trace);
  return out;
}

CouplingMarginals coupling_marginals(const PointCloud& X, const PointCloud& Y,
                                     const KernelParams& k,
                                     const DiscretePotential& potential) {
  const std::size_t n = X.size(), m = Y.size();
  if (potential.log_values.size() != m)
    throw UsageError("coupling_marginals: potential does not match Y");
  const auto logq = pairwise_log_kernel(X, Y, k);
  const double log_m = std::log(static_cast<double>(m));
  const double log_n = std::log(static_cast<double>(n));

  std::vector<double> log_norm(n);
  parallel_for(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* row = logq.data() + i * m;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < m; ++j)
        mx = std::max(mx, row[j] - potential.log_values[j]);
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j)
        s += std::exp(row[j] - potential.log_values[j] - mx);
      log_norm[i] = mx + std::log(s) - log_m;
    }
  });

  CouplingMarginals out;
  out.row_sums.assign(n, 0.0);
  out.col_sums.assign(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logq.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double pi = std::exp(row[j] - log_norm[i] -
                                 potential.log_values[j] - log_n - log_m);
      out.row_sums[i] += pi;
      out.col_sums[j] += pi;
    }
  }
  return out;
}

double GridField::log_at(double y) const {
  const std::size_t n = nodes.size();
  if (y <= nodes.front()) return log_values.front();
  if (y >= nodes.back()) return log_values.back();
  const double h = nodes[1] - nodes[0];
  const std::size_t i = std::min(
      n - 2, static_cast<std::size_t>((y - nodes.front()) / h));
  const double t = (y - nodes[i]) / h;
  return (1.0 - t) * log_values[i] + t * log_values[i + 1];
}

namespace {

GridField grid_fixed_point(double s0, double sT, double variance, double lo,
                           double hi, int nodes) {
  const double h = (hi - lo) / (nodes - 1);
  GridField field;
  field.nodes.resize(nodes);
  std::vector<double> logw(nodes), log_rho0(nodes), log_rhoT(nodes);
  const double c0 = -0.5 * std::log(2.0 * std::numbers::pi) - std::log(s0);
  const double cT = -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sT);
  for (int a = 0; a < nodes; ++a) {
    const double x = lo + h * a;
    field.nodes[a] = x;
    logw[a] = std::log((a == 0 || a == nodes - 1) ? 0.5 * h : h);
    log_rho0[a] = c0 - 0.5 * x * x / (s0 * s0);
    log_rhoT[a] = cT - 0.5 * x * x / (sT * sT);
  }
  // The kernel on a uniform grid depends only on |m - l|.
  std::vector<double> logq_gap(nodes);
  KernelParams k{1, variance};
  for (int gap = 0; gap < nodes; ++gap) {
    const double d = h * gap;
    logq_gap[gap] = log_gauss_kernel_sq(d * d, k);
  }

  std::vector<double> log_g(nodes, 0.0), log_norm(nodes), update(nodes);
  std::vector<double> terms(nodes);
  const int max_iter = 5000;
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    for (int x = 0; x < nodes; ++x) {
      for (int a = 0; a < nodes; ++a)
        terms[a] = logw[a] + logq_gap[std::abs(x - a)] + log_rhoT[a] - log_g[a];
      log_norm[x] = logsumexp(terms);
    }
    for (int a = 0; a < nodes; ++a) {
      for (int x = 0; x < nodes; ++x)
        terms[x] = logw[x] + logq_gap[std::abs(x - a)] + log_rho0[x] -
                   log_norm[x];
      update[a] = logsumexp(terms);
    }
    residual = 0.0;
    for (int a = 0; a < nodes; ++a)
      residual = std::max(residual, std::abs(update[a] - log_g[a]));
    log_g = update;
    if (residual < 1e-13) break;
    if (it + 1 == max_iter)
      throw ConvergenceError(
          "gaussian_fixed_point_field: grid iteration did not converge",
          residual);
  }
  double mean = 0.0;
  for (double v : log_g) mean += v;
  mean /= nodes;
  for (double& v : log_g) v -= mean;
  field.log_values = std::move(log_g);
  return field;
}

}  // namespace

GridField gaussian_fixed_point_field(double s0, double sT, double variance,
                                     double lo, double hi, int nodes,
                                     double self_check_tol) {
  if (!(s0 > 0.0) || !(sT > 0.0))
    throw UsageError("gaussian_fixed_point_field: stds must be > 0");
  if (!(variance > 0.0))
    throw UsageError("gaussian_fixed_point_field: variance must be > 0");
  if (nodes < 3 || !(hi > lo))
    throw UsageError("gaussian_fixed_point_field: bad grid");
  GridField base = grid_fixed_point(s0, sT, variance, lo, hi, nodes);
  if (self_check_tol > 0.0) {
    const GridField fine =
        grid_fixed_point(s0, sT, variance, lo, hi, 2 * (nodes - 1) + 1);
    // Align gauges on the shared nodes, then compare there.
    double offset = 0.0;
    for (int a = 0; a < nodes; ++a)
      offset += base.log_values[a] - fine.log_values[2 * a];
    offset /= nodes;
    double sup = 0.0;
    for (int a = 0; a < nodes; ++a)
      sup = std::max(sup, std::abs(base.log_values[a] - offset -
                                   fine.log_values[2 * a]));
    if (sup > self_check_tol)
      throw NumericError(
          "gaussian_fixed_point_field: node-doubling disagreement " +
          std::to_string(sup) + " exceeds tolerance");
  }
  return base;
}

}  // namespace ermbridge
