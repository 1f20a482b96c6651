// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "ermbridge/errors.hpp"
#include "ermbridge/fixed_point.hpp"
#include "ermbridge/oracle.hpp"
#include "ermbridge/rng.hpp"

using namespace ermbridge;

namespace {

PointCloud cloud1d(std::initializer_list<double> xs) {
  PointCloud c(xs.size(), 1);
  std::size_t i = 0;
  for (double x : xs) c.point(i++)[0] = x;
  return c;
}

PointCloud random_cloud(std::size_t n, int d, SplitMix64& rng, double spread) {
  PointCloud c(n, d);
  for (double& v : c.coords) v = spread * rng.next_gauss();
  return c;
}

TablePotential table_for(const PointCloud& support,
                         const std::vector<double>& log_values) {
  return TablePotential(support, log_values);
}

}  // namespace

TEST_CASE("logsumexp") {
  const double pair[] = {0.0, 0.0};
  CHECK(logsumexp(pair) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  const double deep[] = {-1000.0, -1000.0};
  CHECK(logsumexp(deep) ==
        doctest::Approx(-1000.0 + std::log(2.0)).epsilon(1e-15));
  const double single[] = {3.25};
  CHECK(logsumexp(single) == 3.25);
  const double mixed[] = {-std::numeric_limits<double>::infinity(), 0.0};
  CHECK(logsumexp(mixed) == doctest::Approx(0.0));
  CHECK_THROWS_AS((void)logsumexp(std::span<const double>{}), UsageError);
}

TEST_CASE("empirical log normalizer") {
  KernelParams k{1, 1.0};
  const PointCloud y = cloud1d({-1.0, 1.0});
  const TablePotential ones = table_for(y, {0.0, 0.0});
  const double x0[] = {0.0};
  CHECK(empirical_log_normalizer(x0, y, ones, k) ==
        doctest::Approx(-1.41893853320467274).epsilon(1e-12));

  // Single target: plain log q - log g.
  const PointCloud y1 = cloud1d({0.7});
  const TablePotential g1 = table_for(y1, {0.31});
  CHECK(empirical_log_normalizer(x0, y1, g1, k) ==
        doctest::Approx(log_gauss_kernel(x0, y1.point(0), k) - 0.31)
            .epsilon(1e-13));

  // Scaling g by c shifts the normalizer by -log c.
  const ShiftedPotential scaled(ones, std::log(5.0));
  CHECK(empirical_log_normalizer(x0, y, scaled, k) ==
        doctest::Approx(empirical_log_normalizer(x0, y, ones, k) -
                        std::log(5.0))
            .epsilon(1e-12));
}

TEST_CASE("clip log normalizer") {
  const ClipBounds b{0.5, 2.0};
  CHECK(clip_log_normalizer(0.1, b) == 0.1);
  CHECK(clip_log_normalizer(-std::numeric_limits<double>::infinity(), b) ==
        doctest::Approx(std::log(0.5)));
  CHECK(clip_log_normalizer(10.0, b) == doctest::Approx(std::log(2.0)));
  const double once = clip_log_normalizer(10.0, b);
  CHECK(clip_log_normalizer(once, b) == once);
  CHECK_THROWS_AS((void)clip_log_normalizer(0.0, ClipBounds{2.0, 1.0}),
                  UsageError);
}

TEST_CASE("empirical fixed-point map hand values") {
  KernelParams k{1, 1.0};
  const ClipBounds wide = ClipBounds::inactive();

  // Single pair: any potential value is a fixed point.
  const PointCloud x1 = cloud1d({0.3});
  const PointCloud y1 = cloud1d({-0.9});
  const TablePotential g1 = table_for(y1, {1.234});
  CHECK(empirical_fixed_point_map(y1.point(0), x1, y1, g1, k, wide) ==
        doctest::Approx(1.234).epsilon(1e-12));

  // Sources {0}, targets {-1, +1}, unit potential.
  const PointCloud x = cloud1d({0.0});
  const PointCloud y = cloud1d({-1.0, 1.0});
  const TablePotential ones = table_for(y, {0.0, 0.0});
  const double origin[] = {0.0};
  CHECK(std::exp(empirical_fixed_point_map(origin, x, y, ones, k, wide)) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  CHECK(std::exp(empirical_fixed_point_map(y.point(0), x, y, ones, k, wide)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::exp(empirical_fixed_point_map(y.point(1), x, y, ones, k, wide)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empirical map equals brute-force linear arithmetic") {
  SplitMix64 rng(31);
  KernelParams k{2, 0.7};
  const ClipBounds wide = ClipBounds::inactive();
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 1 + rng.next_below(5);
    const std::size_t m = 1 + rng.next_below(5);
    const PointCloud x = random_cloud(n, 2, rng, 1.0);
    const PointCloud y = random_cloud(m, 2, rng, 1.0);
    std::vector<double> logg(m);
    for (double& v : logg) v = rng.next_uniform(-1.0, 1.0);
    const TablePotential g = table_for(y, logg);

    const auto batch = empirical_fixed_point_map_batch(y, x, y, g, k, wide);
    for (std::size_t j = 0; j < m; ++j) {
      double outer = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (std::size_t l = 0; l < m; ++l)
          norm += std::exp(log_gauss_kernel(x.point(i), y.point(l), k)) /
                  std::exp(logg[l]);
        norm /= static_cast<double>(m);
        outer += std::exp(log_gauss_kernel(x.point(i), y.point(j), k)) / norm;
      }
      outer /= static_cast<double>(n);
      CHECK(std::exp(batch[j]) == doctest::Approx(outer).epsilon(1e-12));
    }
  }
}

TEST_CASE("risk basics and scale invariance") {
  KernelParams k{1, 1.0};
  RiskConfig cfg;

  // Single pair: zero risk for any potential.
  const PointCloud x1 = cloud1d({0.4});
  const PointCloud y1 = cloud1d({-0.2});
  const TablePotential g1 = table_for(y1, {0.77});
  CHECK(empirical_risk(g1, x1, y1, k, cfg) == doctest::Approx(0.0));

  SplitMix64 rng(17);
  const PointCloud x = random_cloud(40, 1, rng, 1.0);
  const PointCloud y = random_cloud(50, 1, rng, 1.0);
  std::vector<double> logg(50);
  for (double& v : logg) v = rng.next_uniform(-0.5, 0.5);
  const TablePotential g = table_for(y, logg);

  const double base = empirical_risk(g, x, y, k, cfg);
  CHECK(base > 0.0);
  for (double c : {1e-3, 1e3}) {
    const ShiftedPotential scaled(g, std::log(c));
    CHECK(std::abs(empirical_risk(scaled, x, y, k, cfg) - base) < 1e-10);
  }

  // Doubling loss_scale doubles the risk exactly.
  RiskConfig doubled = cfg;
  doubled.loss_scale = 2.0;
  CHECK(empirical_risk(g, x, y, k, doubled) == doctest::Approx(2.0 * base));
}

TEST_CASE("no NaN from finite inputs and positive map values") {
  SplitMix64 rng(99);
  KernelParams k{2, 0.5};
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud x = random_cloud(6, 2, rng, 8.0);
    const PointCloud y = random_cloud(7, 2, rng, 8.0);
    std::vector<double> logg(7);
    for (double& v : logg) v = rng.next_uniform(-30.0, 30.0);
    const TablePotential g = table_for(y, logg);
    const auto vals =
        empirical_fixed_point_map_batch(y, x, y, g, k, ClipBounds::inactive());
    for (double v : vals) {
      CHECK(std::isfinite(v));
      CHECK(std::exp(v) > 0.0);
    }
    CHECK(std::isfinite(empirical_risk(g, x, y, k, RiskConfig{})));
  }
}

TEST_CASE("clipping a converged potential only hurts") {
  // For a potential satisfying the fixed point, a band containing all
  // normalizers leaves the residual at zero; narrower bands cannot do
  // better.
  SplitMix64 rng(5);
  KernelParams k{1, 1.0};
  const PointCloud x = random_cloud(30, 1, rng, 1.0);
  const PointCloud y = random_cloud(30, 1, rng, 1.0);
  const DiscretePotential oracle = fixed_point_iterate(x, y, k, 1e-13, 500);
  const TablePotential g = oracle.as_table_potential();

  RiskConfig wide_cfg;
  const auto wide = evaluate_risk(g, x, y, k, wide_cfg);
  double lo = *std::min_element(wide.log_normalizers.begin(),
                                wide.log_normalizers.end());
  double hi = *std::max_element(wide.log_normalizers.begin(),
                                wide.log_normalizers.end());
  for (int trial = 0; trial < 20; ++trial) {
    RiskConfig narrow_cfg;
    const double a = rng.next_uniform(lo - 1.0, hi);
    const double b = rng.next_uniform(a, hi + 1.0);
    narrow_cfg.clip = ClipBounds{std::exp(a), std::exp(b)};
    const auto narrow = evaluate_risk(g, x, y, k, narrow_cfg);
    for (std::size_t j = 0; j < narrow.residuals.size(); ++j)
      CHECK(std::abs(wide.residuals[j]) <=
            std::abs(narrow.residuals[j]) + 1e-12);
  }
}

TEST_CASE("quantile clip bounds") {
  std::vector<double> logs;
  SplitMix64 rng(2);
  for (int i = 0; i < 1000; ++i) logs.push_back(rng.next_gauss());
  const ClipBounds b = quantile_clip_bounds(logs);
  b.validate();
  // Wide enough that almost everything is inside.
  std::size_t inside = 0;
  for (double v : logs)
    if (v > std::log(b.lower) && v < std::log(b.upper)) ++inside;
  CHECK(inside >= 998);
}

TEST_CASE("population map: homogeneity and concentration limit") {
  KernelParams k{1, 1.0};
  QuadratureSpec quad{-6.0, 6.0, 301, 0.0};
  const auto rho0 = [](std::span<const double> x) {
    return std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * std::numbers::pi);
  };
  const auto rhoT = rho0;

  PointCloud eval(5, 1);
  for (int i = 0; i < 5; ++i) eval.point(i)[0] = -2.0 + i;

  // Smooth non-trivial candidate.
  PointCloud support = cloud1d({-2.0, -1.0, 0.0, 1.0, 2.0});
  const TablePotential g(support, {0.1, -0.2, 0.3, 0.0, -0.1});
  const auto base = population_fixed_point_map_batch(eval, rho0, rhoT, g, k, quad);
  const ShiftedPotential scaled(g, std::log(7.0));
  const auto scaled_vals =
      population_fixed_point_map_batch(eval, rho0, rhoT, scaled, k, quad);
  for (std::size_t i = 0; i < base.size(); ++i)
    CHECK(scaled_vals[i] ==
          doctest::Approx(7.0 * base[i]).epsilon(1e-10));

  // Narrow marginals reproduce the single-pair cancellation.
  const double s = 0.03;
  const auto narrow0 = [s](std::span<const double> x) {
    return std::exp(-0.5 * x[0] * x[0] / (s * s)) /
           (s * std::sqrt(2.0 * std::numbers::pi));
  };
  const auto narrowT = [s](std::span<const double> x) {
    const double d = x[0] - 1.0;
    return std::exp(-0.5 * d * d / (s * s)) /
           (s * std::sqrt(2.0 * std::numbers::pi));
  };
  PointCloud at_one(1, 1);
  at_one.point(0)[0] = 1.0;
  QuadratureSpec fine{-4.0, 4.0, 1201, 0.0};
  const auto limit =
      population_fixed_point_map_batch(at_one, narrow0, narrowT, g, k, fine);
  CHECK(limit[0] == doctest::Approx(std::exp(g.log_eval(at_one.point(0))))
                        .epsilon(1e-2));
}

TEST_CASE("population map matches the grid fixed point") {
  KernelParams k{1, 1.0};
  const GridField field = gaussian_fixed_point_field(1.0, 1.0, 1.0, -8.0, 8.0,
                                                     801, /*self_check=*/0.0);
  struct GridPotential final : LogPotential {
    const GridField* f;
    explicit GridPotential(const GridField& g) : f(&g) {}
    int dim() const override { return 1; }
    double log_eval(std::span<const double> y) const override {
      return f->log_at(y[0]);
    }
    std::string kind() const override { return "grid"; }
    std::unique_ptr<LogPotential> clone() const override {
      return std::make_unique<GridPotential>(*f);
    }
  };
  const GridPotential g(field);
  const auto rho = [](std::span<const double> x) {
    return std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * std::numbers::pi);
  };
  PointCloud eval(13, 1);
  for (int i = 0; i < 13; ++i) eval.point(i)[0] = -3.0 + 0.5 * i;
  QuadratureSpec quad{-8.0, 8.0, 801, 0.0};
  const auto mapped = population_fixed_point_map_batch(eval, rho, rho, g, k, quad);
  // Every rescaling of a fixed point is a fixed point; compare in the
  // g(0) = 1 gauge so the tolerance is meaningful.
  const double scale = std::exp(field.log_at(0.0));
  for (int i = 0; i < 13; ++i) {
    const double gv = std::exp(field.log_at(eval.point(i)[0]));
    CHECK(std::abs(mapped[i] - gv) / scale < 1e-4);
  }
}

TEST_CASE("population map self-check flags a coarse grid") {
  KernelParams k{1, 1.0};
  const auto rho = [](std::span<const double> x) {
    return std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * std::numbers::pi);
  };
  PointCloud support = cloud1d({0.0});
  const TablePotential g(support, {0.0});
  PointCloud eval(1, 1);
  eval.point(0)[0] = 0.0;
  QuadratureSpec coarse{-8.0, 8.0, 5, 1e-6};
  CHECK_THROWS_AS((void)population_fixed_point_map_batch(eval, rho, rho, g, k,
                                                         coarse),
                  NumericError);
}

TEST_CASE("duplicate sample points are legal") {
  KernelParams k{1, 1.0};
  PointCloud x(4, 1), y(4, 1);
  x.point(0)[0] = x.point(1)[0] = 0.5;  // atom of mass 2
  x.point(2)[0] = -1.0;
  x.point(3)[0] = 1.0;
  y = x;
  const TablePotential g(y, {0.1, 0.1, -0.2, 0.3});
  CHECK(std::isfinite(empirical_risk(g, x, y, k, RiskConfig{})));
  const auto vals =
      empirical_fixed_point_map_batch(y, x, y, g, k, ClipBounds::inactive());
  for (double v : vals) CHECK(std::isfinite(v));
}
