// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ermbridge/datasets.hpp"
#include "ermbridge/errors.hpp"

using namespace ermbridge;

namespace {

double norm2(std::span<const double> p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return std::sqrt(s);
}

// Standard normal CDF.
double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("generators reject zero counts") {
  CHECK_THROWS_AS((void)swiss_roll(0, 0.0, 1), UsageError);
  CHECK_THROWS_AS((void)s_curve(0, 0.0, 1), UsageError);
  CHECK_THROWS_AS((void)gaussian_grid_mixture(5, 4.0, 0, 1), UsageError);
  CHECK_THROWS_AS((void)truncated_normal(0, -1, 1, 1, 2), UsageError);
}

TEST_CASE("swiss roll stays within the unit-ish disk without noise") {
  const PointCloud cloud = swiss_roll(1000, 0.0, 42);
  REQUIRE(cloud.size() == 1000);
  REQUIRE(cloud.dim == 2);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(norm2(cloud.point(i)) <= 1.05);
  cloud.validate();  // all coordinates finite
}

TEST_CASE("generators are deterministic in the seed") {
  const PointCloud a = swiss_roll(100, 0.05, 7);
  const PointCloud b = swiss_roll(100, 0.05, 7);
  CHECK(a.coords == b.coords);
  const PointCloud c = s_curve(100, 0.05, 7);
  const PointCloud d = s_curve(100, 0.05, 7);
  CHECK(c.coords == d.coords);
  const PointCloud e = gaussian_grid_mixture(5, 4.0, 100, 7);
  const PointCloud f = gaussian_grid_mixture(5, 4.0, 100, 7);
  CHECK(e.coords == f.coords);
  const PointCloud g = truncated_normal(100, -1, 1, 7, 3);
  const PointCloud h = truncated_normal(100, -1, 1, 7, 3);
  CHECK(g.coords == h.coords);
  // Different seeds give different clouds.
  const PointCloud i = swiss_roll(100, 0.05, 8);
  CHECK(a.coords != i.coords);
}

TEST_CASE("s curve coordinate ranges") {
  const PointCloud cloud = s_curve(2000, 0.0, 3);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    CHECK(p[0] >= -0.5);
    CHECK(p[0] <= 0.5);
    CHECK(p[1] >= -1.0);
    CHECK(p[1] <= 1.0);
  }
}

TEST_CASE("grid mixture basics") {
  const PointCloud single = gaussian_grid_mixture(1, 4.0, 4000, 11);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < single.size(); ++i) {
    mx += single.point(i)[0];
    my += single.point(i)[1];
  }
  mx /= single.size();
  my /= single.size();
  // Single component centered at the origin.
  CHECK(std::abs(mx) < 0.1);
  CHECK(std::abs(my) < 0.1);

  const PointCloud grid = gaussian_grid_mixture(5, 4.0, 10000, 12);
  double gx = 0.0, gy = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    gx += grid.point(i)[0];
    gy += grid.point(i)[1];
  }
  gx /= grid.size();
  gy /= grid.size();
  CHECK(std::abs(gx) < 0.15);
  CHECK(std::abs(gy) < 0.15);
}

TEST_CASE("truncated normal moments and support") {
  CHECK_THROWS_AS((void)truncated_normal(10, 1.0, 1.0, 1, 1), UsageError);

  const PointCloud wide = truncated_normal(20000, -10, 10, 5, 1);
  double var = 0.0;
  for (std::size_t i = 0; i < wide.size(); ++i)
    var += wide.point(i)[0] * wide.point(i)[0];
  var /= wide.size();
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));  // near-untruncated

  const PointCloud narrow = truncated_normal(50000, -1, 1, 5, 1);
  double mean = 0.0, v2 = 0.0;
  for (std::size_t i = 0; i < narrow.size(); ++i) {
    const double x = narrow.point(i)[0];
    CHECK(x >= -1.0);
    CHECK(x <= 1.0);
    mean += x;
    v2 += x * x;
  }
  mean /= narrow.size();
  v2 = v2 / narrow.size() - mean * mean;
  // Closed-form variance of the standard normal truncated to [-1, 1].
  const double expected = 1.0 - 2.0 * 0.24197072451914337 / 0.6826894921370859;
  CHECK(v2 == doctest::Approx(expected).epsilon(0.035));
  CHECK(std::abs(v2 - expected) < 0.01);
}

TEST_CASE("truncated normal marginal passes a KS test") {
  const double lo = -1.5, hi = 0.8;
  const std::size_t n = 50000;
  const PointCloud cloud = truncated_normal(n, lo, hi, 99, 1);
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = cloud.point(i)[0];
  std::sort(xs.begin(), xs.end());
  const double z = phi_cdf(hi) - phi_cdf(lo);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = (phi_cdf(xs[i]) - phi_cdf(lo)) / z;
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  // Kolmogorov critical value at level 0.001: sqrt(-ln(alpha/2)/2) / sqrt(n).
  const double crit = std::sqrt(-std::log(0.0005) / 2.0) / std::sqrt(n);
  CHECK(d < crit);
}

TEST_CASE("columnar file round trip") {
  const std::string path = temp_file("ermbridge_roundtrip.csv");
  const PointCloud cloud = swiss_roll(37, 0.1, 21);
  save_columnar(cloud, path);
  const PointCloud back = load_columnar(path);
  REQUIRE(back.size() == cloud.size());
  REQUIRE(back.dim == cloud.dim);
  for (std::size_t i = 0; i < cloud.coords.size(); ++i)
    CHECK(back.coords[i] == doctest::Approx(cloud.coords[i]).epsilon(1e-12));
  std::filesystem::remove(path);
}

TEST_CASE("columnar parsing") {
  const std::string path = temp_file("ermbridge_parse.csv");
  {
    std::ofstream out(path);
    out << "0,0\n1,2\n";
  }
  const PointCloud cloud = load_columnar(path);
  CHECK(cloud.size() == 2);
  CHECK(cloud.dim == 2);
  CHECK(cloud.point(1)[1] == 2.0);

  {
    std::ofstream out(path);
    out << "x,y\n0,0\n";
  }
  try {
    (void)load_columnar(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }

  {
    std::ofstream out(path);
    out << "0,0\n1,2,3\n";
  }
  try {
    (void)load_columnar(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  {
    std::ofstream out(path);
  }
  CHECK_THROWS_AS((void)load_columnar(path), ParseError);
  std::filesystem::remove(path);
}
