// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ermbridge {

// Row-major n x d sample matrix; one point per row. Holds the empirical
// measures the estimator works from.
struct PointCloud {
  std::vector<double> coords;
  int dim = 0;

  PointCloud() = default;
  PointCloud(std::size_t n, int d)
      : coords(n * static_cast<std::size_t>(d), 0.0), dim(d) {}

  std::size_t size() const {
    return dim > 0 ? coords.size() / static_cast<std::size_t>(dim) : 0;
  }
  bool empty() const { return coords.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  std::span<double> point(std::size_t i) {
    return {coords.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }

  void append(std::span<const double> p);

  // Cloud with the rows coords[idx[0]], coords[idx[1]], ...
  PointCloud gather(std::span<const std::size_t> idx) const;

  // Throws UsageError unless n >= 1, dim >= 1 and every coordinate is finite.
  void validate() const;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

// Per-column mean and standard deviation (population convention, 1/n).
std::vector<double> column_means(const PointCloud& c);
std::vector<double> column_stddevs(const PointCloud& c);

}  // namespace ermbridge
