// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "ermbridge/point_cloud.hpp"

namespace ermbridge {

// 2-D spiral: t ~ U[1.5*pi, 4.5*pi], point = (t cos t, t sin t) / (4.5*pi)
// plus isotropic Gaussian jitter of the given scale. Roughly unit radius.
PointCloud swiss_roll(std::size_t n, double noise, std::uint64_t seed);

// 2-D S shape: t ~ U[-3*pi/2, 3*pi/2],
// point = (sin t, sign(t)(cos t - 1)) / 2 plus jitter.
PointCloud s_curve(std::size_t n, double noise, std::uint64_t seed);

// Mixture of side*side Gaussians centered on a uniform grid with the given
// spacing, isotropic per-component std; components chosen uniformly.
PointCloud gaussian_grid_mixture(std::size_t side, double spacing,
                                 std::size_t n, std::uint64_t seed,
                                 double component_std = 1.0);

// i.i.d. standard normal coordinates rejection-sampled into [lo, hi]^dim.
PointCloud truncated_normal(std::size_t n, double lo, double hi,
                            std::uint64_t seed, int dim);

// One point per line, comma-separated decimal reals, no header. Throws
// ParseError (with line number) on ragged rows, non-numeric fields, or an
// empty file.
PointCloud load_columnar(const std::string& path);

// Inverse of load_columnar; values round-trip to full double precision.
void save_columnar(const PointCloud& cloud, const std::string& path);

}  // namespace ermbridge
