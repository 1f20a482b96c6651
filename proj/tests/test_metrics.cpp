// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "ermbridge/errors.hpp"
#include "ermbridge/metrics.hpp"
#include "ermbridge/rng.hpp"

using namespace ermbridge;

namespace {

PointCloud random_cloud(std::size_t n, int d, SplitMix64& rng,
                        double spread = 1.0) {
  PointCloud c(n, d);
  for (double& v : c.coords) v = spread * rng.next_gauss();
  return c;
}

// Exhaustive assignment over permutations; optimal transport for tiny sets.
double w1_bruteforce(std::vector<double> a, std::vector<double> b) {
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = 1e300;
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      cost += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, cost / a.size());
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("wasserstein1 in one dimension") {
  CHECK(wasserstein1_1d({1.0, 2.0, 3.0}, {3.0, 1.0, 2.0}) == 0.0);
  CHECK(wasserstein1_1d({0.0}, {3.0}) == 3.0);
  CHECK(wasserstein1_1d({0.0, 1.0}, {2.0, 5.0}) == doctest::Approx(3.0));
  CHECK_THROWS_AS((void)wasserstein1_1d({0.0}, {1.0, 2.0}), UsageError);
  CHECK_THROWS_AS((void)wasserstein1_1d({}, {}), UsageError);
}

TEST_CASE("wasserstein1 matches brute-force assignment") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next_below(5);  // up to 6
    std::vector<double> a(n), b(n);
    for (double& v : a) v = rng.next_uniform(-5.0, 5.0);
    for (double& v : b) v = rng.next_uniform(-5.0, 5.0);
    CHECK(wasserstein1_1d(a, b) ==
          doctest::Approx(w1_bruteforce(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("sliced distance basics") {
  SplitMix64 rng(7);
  const PointCloud x = random_cloud(100, 3, rng);
  SlicedW1Config cfg;
  cfg.seed = 5;
  CHECK(sliced_w1(x, x, cfg) == 0.0);

  const PointCloud y = random_cloud(100, 3, rng);
  const PointCloud z = random_cloud(80, 3, rng);
  CHECK_THROWS_AS((void)sliced_w1(x, z, cfg), UsageError);

  // d = 1 reduces to the plain metric.
  const PointCloud a = random_cloud(64, 1, rng);
  const PointCloud b = random_cloud(64, 1, rng);
  std::vector<double> av(a.coords), bv(b.coords);
  CHECK(sliced_w1(a, b, cfg) ==
        doctest::Approx(wasserstein1_1d(av, bv)).epsilon(1e-12));
}

TEST_CASE("sliced distance of a pure shift") {
  SplitMix64 rng(11);
  const std::size_t n = 300;
  PointCloud x = random_cloud(n, 2, rng, 0.7);
  PointCloud y = x;
  const double delta = 1.3;
  for (std::size_t i = 0; i < n; ++i) y.point(i)[0] += delta;
  SlicedW1Config cfg;
  cfg.n_projections = 10000;
  cfg.seed = 3;
  const double got = sliced_w1(x, y, cfg);
  const double expected = delta * 2.0 / std::numbers::pi;
  // E |cos theta| = 2 / pi; the cloud shape cancels in the pairing.
  CHECK(std::abs(got - expected) / expected < 0.02);
}

TEST_CASE("sliced distance is a pseudo-metric on a fixed projection set") {
  SplitMix64 rng(23);
  SlicedW1Config cfg;
  cfg.n_projections = 64;
  cfg.seed = 77;
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud x = random_cloud(40, 2, rng);
    const PointCloud y = random_cloud(40, 2, rng);
    const PointCloud z = random_cloud(40, 2, rng);
    const double xy = sliced_w1(x, y, cfg);
    const double yx = sliced_w1(y, x, cfg);
    const double yz = sliced_w1(y, z, cfg);
    const double xz = sliced_w1(x, z, cfg);
    CHECK(xy == doctest::Approx(yx).epsilon(1e-12));
    CHECK(xy >= 0.0);
    CHECK(xz <= xy + yz + 1e-12);
  }
}

TEST_CASE("sliced distance is rotation invariant in expectation") {
  SplitMix64 rng(31);
  const std::size_t n = 200;
  const PointCloud x = random_cloud(n, 2, rng);
  PointCloud y = random_cloud(n, 2, rng, 1.4);

  const double theta = 0.83;
  const double c = std::cos(theta), s = std::sin(theta);
  PointCloud xr(n, 2), yr(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const auto px = x.point(i);
    xr.point(i)[0] = c * px[0] - s * px[1];
    xr.point(i)[1] = s * px[0] + c * px[1];
    const auto py = y.point(i);
    yr.point(i)[0] = c * py[0] - s * py[1];
    yr.point(i)[1] = s * py[0] + c * py[1];
  }

  // Sample single-projection values to estimate the Monte Carlo spread.
  const int reps = 10000;
  std::vector<double> base(reps), rot(reps);
  for (int r = 0; r < reps; ++r) {
    SlicedW1Config one{1, static_cast<std::uint64_t>(1000 + r)};
    base[r] = sliced_w1(x, y, one);
    SlicedW1Config two{1, static_cast<std::uint64_t>(500000 + r)};
    rot[r] = sliced_w1(xr, yr, two);
  }
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  auto stderr_of = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double var = 0.0;
    for (double t : v) var += (t - m) * (t - m);
    return std::sqrt(var / v.size() / v.size());
  };
  const double diff = std::abs(mean(base) - mean(rot));
  const double spread = std::hypot(stderr_of(base), stderr_of(rot));
  CHECK(diff < 3.0 * spread);
}

TEST_CASE("kde density") {
  Grid2d grid;
  grid.x0 = -1.0;
  grid.x1 = 1.0;
  grid.nx = 41;
  grid.y0 = -1.0;
  grid.y1 = 1.0;
  grid.ny = 41;

  PointCloud point(1, 2);
  point.point(0)[0] = 0.0;
  point.point(0)[1] = 0.0;
  const double h = 0.2;
  const auto density = kde_density(point, grid, h);
  // Peak value at the sample location (grid node 20, 20).
  const double peak = density[20 * 41 + 20];
  CHECK(peak ==
        doctest::Approx(1.0 / (2.0 * std::numbers::pi * h * h)).epsilon(1e-12));
  for (double v : density) CHECK(v >= 0.0);

  // Mass over a wide window is close to one for a compact cloud.
  SplitMix64 rng(13);
  const PointCloud cloud = random_cloud(200, 2, rng, 0.8);
  Grid2d wide;
  wide.x0 = wide.y0 = -7.0;
  wide.x1 = wide.y1 = 7.0;
  wide.nx = wide.ny = 141;
  const auto dens = kde_density(cloud, wide, scott_bandwidth(cloud));
  double mass = 0.0;
  for (double v : dens) mass += v;
  mass *= wide.cell_area();
  CHECK(mass == doctest::Approx(1.0).epsilon(0.01));
}
