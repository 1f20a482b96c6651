// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "ermbridge/point_cloud.hpp"

namespace ermbridge {

struct SlicedW1Config {
  int n_projections = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

// Exact 1-D Wasserstein-1 between equal-size empirical measures: mean
// absolute difference of the sorted samples.
double wasserstein1_1d(std::vector<double> a, std::vector<double> b);

// Average of wasserstein1_1d over uniformly random unit directions
// (normalized standard Gaussians).
double sliced_w1(const PointCloud& X, const PointCloud& Y,
                 const SlicedW1Config& cfg);

// Regular 2-D evaluation lattice, nodes inclusive of both ends.
struct Grid2d {
  double x0 = -1.0, x1 = 1.0;
  int nx = 64;
  double y0 = -1.0, y1 = 1.0;
  int ny = 64;

  void validate() const;
  double cell_area() const;
  std::size_t count() const { return static_cast<std::size_t>(nx) * ny; }
  double node_x(int i) const { return x0 + (x1 - x0) * i / (nx - 1); }
  double node_y(int j) const { return y0 + (y1 - y0) * j / (ny - 1); }
};

// Isotropic Gaussian KDE evaluated on the lattice (row-major, y fastest);
// values * cell_area sum to roughly the mass inside the window.
std::vector<double> kde_density(const PointCloud& points, const Grid2d& grid,
                                double bandwidth);

// Scott's rule bandwidth n^{-1/6} times the mean per-axis std.
double scott_bandwidth(const PointCloud& points);

}  // namespace ermbridge
