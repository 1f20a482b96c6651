// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/datasets.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ermbridge/errors.hpp"
#include "ermbridge/rng.hpp"

namespace ermbridge {

namespace {

constexpr double kPi = std::numbers::pi;

// Stream ids keep the generators decoupled: reusing one seed across
// different dataset calls never aliases draws.
enum Stream : std::uint64_t {
  kSwissRoll = 101,
  kSCurve = 102,
  kGridMixture = 103,
  kTruncNormal = 104,
};

void require_count(std::size_t n) {
  if (n < 1) throw UsageError("dataset generator: n must be >= 1");
}

}  // namespace

PointCloud swiss_roll(std::size_t n, double noise, std::uint64_t seed) {
  require_count(n);
  if (noise < 0.0) throw UsageError("swiss_roll: noise must be >= 0");
  SplitMix64 rng(seed, kSwissRoll);
  PointCloud out(n, 2);
  const double scale = 1.0 / (4.5 * kPi);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.next_uniform(1.5 * kPi, 4.5 * kPi);
    auto p = out.point(i);
    p[0] = t * std::cos(t) * scale + noise * rng.next_gauss();
    p[1] = t * std::sin(t) * scale + noise * rng.next_gauss();
  }
  return out;
}

PointCloud s_curve(std::size_t n, double noise, std::uint64_t seed) {
  require_count(n);
  if (noise < 0.0) throw UsageError("s_curve: noise must be >= 0");
  SplitMix64 rng(seed, kSCurve);
  PointCloud out(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = rng.next_uniform(-1.5 * kPi, 1.5 * kPi);
    const double sign = t < 0.0 ? -1.0 : 1.0;
    auto p = out.point(i);
    p[0] = 0.5 * std::sin(t) + noise * rng.next_gauss();
    p[1] = 0.5 * sign * (std::cos(t) - 1.0) + noise * rng.next_gauss();
  }
  return out;
}

PointCloud gaussian_grid_mixture(std::size_t side, double spacing,
                                 std::size_t n, std::uint64_t seed,
                                 double component_std) {
  require_count(n);
  if (side < 1) throw UsageError("gaussian_grid_mixture: side must be >= 1");
  if (!(component_std > 0.0))
    throw UsageError("gaussian_grid_mixture: component_std must be > 0");
  SplitMix64 rng(seed, kGridMixture);
  PointCloud out(n, 2);
  // Grid centered at the origin: coordinates spacing * (k - (side-1)/2).
  const double offset = 0.5 * static_cast<double>(side - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t cell = rng.next_below(side * side);
    const double cx = spacing * (static_cast<double>(cell % side) - offset);
    const double cy = spacing * (static_cast<double>(cell / side) - offset);
    auto p = out.point(i);
    p[0] = cx + component_std * rng.next_gauss();
    p[1] = cy + component_std * rng.next_gauss();
  }
  return out;
}

PointCloud truncated_normal(std::size_t n, double lo, double hi,
                            std::uint64_t seed, int dim) {
  require_count(n);
  if (dim < 1) throw UsageError("truncated_normal: dim must be >= 1");
  if (!(lo < hi)) throw UsageError("truncated_normal: requires lo < hi");
  SplitMix64 rng(seed, kTruncNormal);
  PointCloud out(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = out.point(i);
    for (int j = 0; j < dim; ++j) {
      double v;
      do {
        v = rng.next_gauss();
      } while (v < lo || v > hi);
      p[j] = v;
    }
  }
  return out;
}

PointCloud load_columnar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("load_columnar: cannot open '" + path + "'");
  PointCloud out;
  std::string line;
  long lineno = 0;
  std::vector<double> row;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.eof()) break;
    row.clear();
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const std::string field = line.substr(pos, comma - pos);
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0' || errno == ERANGE ||
          !std::isfinite(v))
        throw ParseError("load_columnar: non-numeric field '" + field + "'",
                         lineno);
      row.push_back(v);
      pos = comma + 1;
    }
    if (out.dim != 0 && static_cast<int>(row.size()) != out.dim)
      throw ParseError("load_columnar: expected " + std::to_string(out.dim) +
                           " columns, found " + std::to_string(row.size()),
                       lineno);
    out.append(row);
  }
  if (out.empty()) throw ParseError("load_columnar: empty file", 1);
  return out;
}

void save_columnar(const PointCloud& cloud, const std::string& path) {
  cloud.validate();
  std::ofstream out(path);
  if (!out) throw UsageError("save_columnar: cannot open '" + path + "'");
  char buf[40];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (int j = 0; j < cloud.dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", p[j]);
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace ermbridge
