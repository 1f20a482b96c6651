// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ermbridge/kernels.hpp"
#include "ermbridge/point_cloud.hpp"
#include "ermbridge/potential.hpp"

namespace ermbridge {

// Potential values on the empirical target support, produced by direct
// fixed-point iteration (one Sinkhorn sweep per iteration, log-domain, no
// clipping). Gauge: mean log value is zero.
struct DiscretePotential {
  PointCloud support;
  std::vector<double> log_values;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residual_trace;  // one entry per map evaluation

  std::vector<double> values() const;
  TablePotential as_table_potential() const;
};

// Iterates g <- map[g] from g == 1 until max_j |log g_j - log map[g]_j| <
// tol. Throws ConvergenceError (carrying the last residual) at max_iter.
DiscretePotential fixed_point_iterate(const PointCloud& X, const PointCloud& Y,
                                      const KernelParams& k, double tol,
                                      int max_iter);

// Row and column sums of the induced coupling
// pi_ij = q_T(X_i, Y_j) / (N M normalizer_i g_j). Rows sum to 1/N by
// construction; columns sum to 1/M at convergence.
struct CouplingMarginals {
  std::vector<double> row_sums;
  std::vector<double> col_sums;
};

CouplingMarginals coupling_marginals(const PointCloud& X, const PointCloud& Y,
                                     const KernelParams& k,
                                     const DiscretePotential& potential);

// 1-D log-potential field on a uniform grid.
struct GridField {
  std::vector<double> nodes;
  std::vector<double> log_values;

  // Linear interpolation of the log values; clamps to the grid range.
  double log_at(double y) const;
};

// Grid-discretized fixed point of the population operator for
// rho0 = N(0, s0^2), rhoT = N(0, sT^2) and Gaussian kernel variance
// `variance`, d = 1. Computed by quadrature fixed-point iteration on
// [lo, hi] with `nodes` points; node-doubling self-check throws NumericError
// if the field moves by more than self_check_tol. Mean-log gauge.
GridField gaussian_fixed_point_field(double s0, double sT, double variance,
                                     double lo, double hi, int nodes,
                                     double self_check_tol = 1e-6);

}  // namespace ermbridge
