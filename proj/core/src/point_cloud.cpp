// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/point_cloud.hpp"

#include <cmath>
#include <string>

#include "ermbridge/errors.hpp"

namespace ermbridge {

void PointCloud::append(std::span<const double> p) {
  if (dim == 0) dim = static_cast<int>(p.size());
  if (static_cast<int>(p.size()) != dim)
    throw UsageError("PointCloud::append: point has dimension " +
                     std::to_string(p.size()) + ", cloud has " +
                     std::to_string(dim));
  coords.insert(coords.end(), p.begin(), p.end());
}

PointCloud PointCloud::gather(std::span<const std::size_t> idx) const {
  PointCloud out(idx.size(), dim);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto src = point(idx[r]);
    auto dst = out.point(r);
    for (int c = 0; c < dim; ++c) dst[c] = src[c];
  }
  return out;
}

void PointCloud::validate() const {
  if (dim < 1) throw UsageError("PointCloud: dim must be >= 1");
  if (size() < 1) throw UsageError("PointCloud: at least one point required");
  for (double v : coords)
    if (!std::isfinite(v))
      throw UsageError("PointCloud: non-finite coordinate");
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<double> column_means(const PointCloud& c) {
  std::vector<double> mean(c.dim, 0.0);
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = c.point(i);
    for (int j = 0; j < c.dim; ++j) mean[j] += p[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  return mean;
}

std::vector<double> column_stddevs(const PointCloud& c) {
  const auto mean = column_means(c);
  std::vector<double> var(c.dim, 0.0);
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = c.point(i);
    for (int j = 0; j < c.dim; ++j) {
      const double d = p[j] - mean[j];
      var[j] += d * d;
    }
  }
  std::vector<double> sd(c.dim, 0.0);
  for (int j = 0; j < c.dim; ++j)
    sd[j] = std::sqrt(var[j] / static_cast<double>(n));
  return sd;
}

}  // namespace ermbridge
