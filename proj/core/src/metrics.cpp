// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ermbridge/errors.hpp"
#include "ermbridge/parallel.hpp"
#include "ermbridge/rng.hpp"

namespace ermbridge {

void SlicedW1Config::validate() const {
  if (n_projections < 1)
    throw UsageError("SlicedW1Config: n_projections must be >= 1");
}

double wasserstein1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || a.size() != b.size())
    throw UsageError("wasserstein1_1d: requires equal nonzero sizes");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

double sliced_w1(const PointCloud& X, const PointCloud& Y,
                 const SlicedW1Config& cfg) {
  cfg.validate();
  if (X.size() != Y.size() || X.empty())
    throw UsageError("sliced_w1: clouds must have equal nonzero sizes");
  if (X.dim != Y.dim) throw UsageError("sliced_w1: dimension mismatch");
  const int d = X.dim;
  const std::size_t n = X.size();
  SplitMix64 rng(cfg.seed, /*stream=*/5151);

  // Draw all directions up front so projections can run data-parallel.
  std::vector<double> dirs(static_cast<std::size_t>(cfg.n_projections) * d);
  for (int p = 0; p < cfg.n_projections; ++p) {
    double norm_sq = 0.0;
    double* dir = dirs.data() + static_cast<std::size_t>(p) * d;
    do {
      norm_sq = 0.0;
      for (int c = 0; c < d; ++c) {
        dir[c] = rng.next_gauss();
        norm_sq += dir[c] * dir[c];
      }
    } while (norm_sq == 0.0);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (int c = 0; c < d; ++c) dir[c] *= inv;
  }

  std::vector<double> per_projection(cfg.n_projections, 0.0);
  parallel_for(cfg.n_projections, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> px(n), py(n);
    for (std::size_t p = lo; p < hi; ++p) {
      const double* dir = dirs.data() + p * d;
      for (std::size_t i = 0; i < n; ++i) {
        const auto xp = X.point(i);
        const auto yp = Y.point(i);
        double sx = 0.0, sy = 0.0;
        for (int c = 0; c < d; ++c) {
          sx += dir[c] * xp[c];
          sy += dir[c] * yp[c];
        }
        px[i] = sx;
        py[i] = sy;
      }
      per_projection[p] = wasserstein1_1d(px, py);
    }
  });
  double acc = 0.0;
  for (double v : per_projection) acc += v;
  return acc / cfg.n_projections;
}

void Grid2d::validate() const {
  if (nx < 2 || ny < 2) throw UsageError("Grid2d: need at least 2x2 nodes");
  if (!(x1 > x0) || !(y1 > y0)) throw UsageError("Grid2d: empty extent");
}

double Grid2d::cell_area() const {
  return (x1 - x0) / (nx - 1) * (y1 - y0) / (ny - 1);
}

std::vector<double> kde_density(const PointCloud& points, const Grid2d& grid,
                                double bandwidth) {
  grid.validate();
  points.validate();
  if (points.dim != 2) throw UsageError("kde_density: cloud must be 2-D");
  if (!(bandwidth > 0.0)) throw UsageError("kde_density: bandwidth must be > 0");
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double norm = 1.0 / (2.0 * std::numbers::pi * bandwidth * bandwidth *
                             static_cast<double>(points.size()));
  std::vector<double> density(grid.count(), 0.0);
  parallel_for(static_cast<std::size_t>(grid.nx),
               [&](std::size_t lo, std::size_t hi) {
                 for (std::size_t i = lo; i < hi; ++i) {
                   const double gx = grid.node_x(static_cast<int>(i));
                   double* row = density.data() + i * grid.ny;
                   for (int j = 0; j < grid.ny; ++j) {
                     const double gy = grid.node_y(j);
                     double acc = 0.0;
                     for (std::size_t pidx = 0; pidx < points.size(); ++pidx) {
                       const auto p = points.point(pidx);
                       const double dx = gx - p[0];
                       const double dy = gy - p[1];
                       acc += std::exp(-(dx * dx + dy * dy) * inv2h2);
                     }
                     row[j] = norm * acc;
                   }
                 }
               });
  return density;
}

double scott_bandwidth(const PointCloud& points) {
  points.validate();
  const auto sd = column_stddevs(points);
  double mean_sd = 0.0;
  for (double s : sd) mean_sd += s;
  mean_sd /= static_cast<double>(sd.size());
  const double factor =
      std::pow(static_cast<double>(points.size()), -1.0 / 6.0);
  const double h = factor * mean_sd;
  return h > 0.0 ? h : 1e-3;
}

}  // namespace ermbridge
