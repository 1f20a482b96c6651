// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/hermite.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ermbridge/errors.hpp"

namespace ermbridge {

namespace {

constexpr double kPi = std::numbers::pi;
const double kQuarticRootPi = std::pow(kPi, -0.25);

// C(n + d, d) with an overflow guard; multi-index counts beyond this are a
// usage error, not a silent wrap.
std::size_t multiindex_count(int degree, int dim) {
  constexpr std::size_t kLimit = 50'000'000;
  std::size_t count = 1;
  for (int j = 1; j <= dim; ++j) {
    const double projected = static_cast<double>(count) *
                             static_cast<double>(degree + j) /
                             static_cast<double>(j);
    if (projected > static_cast<double>(kLimit))
      throw UsageError("enumerate_multiindices: index count exceeds " +
                       std::to_string(kLimit));
    count = count * static_cast<std::size_t>(degree + j) /
            static_cast<std::size_t>(j);
  }
  return count;
}

void emit_compositions(int remaining, int slot, std::vector<int>& scratch,
                       std::vector<int>& out) {
  const int dim = static_cast<int>(scratch.size());
  if (slot == dim - 1) {
    scratch[slot] = remaining;
    out.insert(out.end(), scratch.begin(), scratch.end());
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    scratch[slot] = v;
    emit_compositions(remaining - v, slot + 1, scratch, out);
  }
}

// Orthonormal polynomial part of psi_n: psi_n(x) = p_n(x) e^{-x^2/2} with
// p_0 = pi^{-1/4}. Used by the quadrature builder and the Bargmann oracle.
double hermite_ortho_poly(int n, double x, double* prev = nullptr) {
  double p0 = kQuarticRootPi;
  double p1 = std::sqrt(2.0) * x * kQuarticRootPi;
  if (n == 0) {
    if (prev) *prev = 0.0;
    return p0;
  }
  for (int j = 2; j <= n; ++j) {
    const double p2 = x * std::sqrt(2.0 / j) * p1 -
                      std::sqrt(static_cast<double>(j - 1) / j) * p0;
    p0 = p1;
    p1 = p2;
  }
  if (prev) *prev = p0;
  return p1;
}

}  // namespace

int MultiIndexSet::total_degree(std::size_t k) const {
  const auto a = index(k);
  int m = 0;
  for (int v : a) m += v;
  return m;
}

MultiIndexSet enumerate_multiindices(int degree, int dim) {
  if (degree < 0) throw UsageError("enumerate_multiindices: degree must be >= 0");
  if (dim < 1) throw UsageError("enumerate_multiindices: dim must be >= 1");
  const std::size_t count = multiindex_count(degree, dim);
  MultiIndexSet set;
  set.dim = dim;
  set.degree = degree;
  set.flat.reserve(count * static_cast<std::size_t>(dim));
  std::vector<int> scratch(dim, 0);
  for (int m = 0; m <= degree; ++m)
    emit_compositions(m, 0, scratch, set.flat);
  return set;
}

double hermite_polynomial(int n, double x) {
  if (n < 0) throw UsageError("hermite_polynomial: n must be >= 0");
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * x;
  for (int j = 1; j < n; ++j) {
    const double h2 = 2.0 * x * h1 - 2.0 * j * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double hermite_function(int n, double x) {
  if (n < 0) throw UsageError("hermite_function: n must be >= 0");
  const double g = std::exp(-0.5 * x * x);
  double p0 = kQuarticRootPi * g;
  if (n == 0) return p0;
  double p1 = std::sqrt(2.0) * x * p0;
  for (int j = 1; j < n; ++j) {
    const double p2 = x * std::sqrt(2.0 / (j + 1)) * p1 -
                      std::sqrt(static_cast<double>(j) / (j + 1)) * p0;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double hermite_function_derivative(int n, double x) {
  if (n < 0) throw UsageError("hermite_function_derivative: n must be >= 0");
  if (n == 0) return -x * hermite_function(0, x);
  return std::sqrt(2.0 * n) * hermite_function(n - 1, x) -
         x * hermite_function(n, x);
}

void hermite_function_table(int nmax, double x, std::span<double> out) {
  if (nmax < 0) throw UsageError("hermite_function_table: nmax must be >= 0");
  if (out.size() < static_cast<std::size_t>(nmax) + 1)
    throw UsageError("hermite_function_table: output span too small");
  const double g = std::exp(-0.5 * x * x);
  out[0] = kQuarticRootPi * g;
  if (nmax == 0) return;
  out[1] = std::sqrt(2.0) * x * out[0];
  for (int j = 1; j < nmax; ++j)
    out[j + 1] = x * std::sqrt(2.0 / (j + 1)) * out[j] -
                 std::sqrt(static_cast<double>(j) / (j + 1)) * out[j - 1];
}

double HermiteBasis::eval(std::size_t k, std::span<const double> y) const {
  if (k >= indexset.count())
    throw UsageError("HermiteBasis::eval: index out of set");
  if (static_cast<int>(y.size()) != indexset.dim)
    throw UsageError("HermiteBasis::eval: wrong point dimension");
  const auto alpha = indexset.index(k);
  double v = std::pow(scale, 0.5 * indexset.dim);
  for (int j = 0; j < indexset.dim; ++j)
    v *= hermite_function(alpha[j], scale * y[j]);
  return v;
}

void HermiteBasis::eval_all(std::span<const double> y,
                            std::span<double> out) const {
  const int d = indexset.dim;
  const int n = indexset.degree;
  if (static_cast<int>(y.size()) != d)
    throw UsageError("HermiteBasis::eval_all: wrong point dimension");
  if (out.size() < indexset.count())
    throw UsageError("HermiteBasis::eval_all: output span too small");
  // One recurrence table per axis, shared by all indices.
  std::vector<double> tables(static_cast<std::size_t>(d) * (n + 1));
  for (int j = 0; j < d; ++j)
    hermite_function_table(
        n, scale * y[j],
        {tables.data() + static_cast<std::size_t>(j) * (n + 1),
         static_cast<std::size_t>(n) + 1});
  const double prefix = std::pow(scale, 0.5 * d);
  const std::size_t count = indexset.count();
  for (std::size_t k = 0; k < count; ++k) {
    const auto alpha = indexset.index(k);
    double v = prefix;
    for (int j = 0; j < d; ++j)
      v *= tables[static_cast<std::size_t>(j) * (n + 1) + alpha[j]];
    out[k] = v;
  }
}

HermiteBasis make_hermite_basis(int degree, int dim, double scale) {
  if (!(scale > 0.0)) throw UsageError("make_hermite_basis: scale must be > 0");
  return HermiteBasis{enumerate_multiindices(degree, dim), scale};
}

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw UsageError("gauss_hermite: need at least one node");
  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  rule.total_weights.assign(n, 0.0);

  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    // Asymptotic first guesses for the descending positive roots.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) -
          1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pprev = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double p = hermite_ortho_poly(n, z, &pprev);
      const double dp = std::sqrt(2.0 * n) * pprev;
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) break;
    }
    const double p = hermite_ortho_poly(n, z, &pprev);
    (void)p;
    const double dp = std::sqrt(2.0 * n) * pprev;
    rule.nodes[i] = z;
    rule.weights[i] = 2.0 / (dp * dp);
    rule.nodes[n - 1 - i] = -z;
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  if (n % 2 == 1) rule.nodes[half - 1] = 0.0;  // middle root is exact
  for (int i = 0; i < n; ++i) {
    const double x = rule.nodes[i];
    rule.total_weights[i] = std::exp(std::log(rule.weights[i]) + x * x);
  }
  // Ascending order is what tensor loops expect.
  for (int i = 0; i < n / 2; ++i) {
    std::swap(rule.nodes[i], rule.nodes[n - 1 - i]);
    std::swap(rule.weights[i], rule.weights[n - 1 - i]);
    std::swap(rule.total_weights[i], rule.total_weights[n - 1 - i]);
  }
  return rule;
}

std::vector<double> project_coefficients(const ScalarField& f,
                                         const HermiteBasis& basis,
                                         int quad_nodes) {
  const int d = basis.indexset.dim;
  const int n = basis.indexset.degree;
  if (d > 3)
    throw UsageError("project_coefficients: tensor quadrature limited to d <= 3");
  if (quad_nodes < n + 1)
    throw UsageError("project_coefficients: quad_nodes must exceed the degree");
  const GaussHermiteRule rule = gauss_hermite(quad_nodes);

  // psi_k(u_q) for every node and degree; axes share the table.
  std::vector<double> tab(static_cast<std::size_t>(quad_nodes) * (n + 1));
  for (int q = 0; q < quad_nodes; ++q)
    hermite_function_table(n, rule.nodes[q],
                           {tab.data() + static_cast<std::size_t>(q) * (n + 1),
                            static_cast<std::size_t>(n) + 1});

  const std::size_t count = basis.indexset.count();
  std::vector<double> coeffs(count, 0.0);
  const double lambda = basis.scale;
  const double jacobian = std::pow(lambda, -0.5 * d);

  std::vector<int> q(d, 0);
  std::vector<double> y(d, 0.0);
  for (;;) {
    double wprod = 1.0;
    for (int j = 0; j < d; ++j) {
      wprod *= rule.total_weights[q[j]];
      y[j] = rule.nodes[q[j]] / lambda;
    }
    const double fv = f(std::span<const double>(y.data(), y.size()));
    if (fv != 0.0) {
      const double base = wprod * fv * jacobian;
      for (std::size_t k = 0; k < count; ++k) {
        const auto alpha = basis.indexset.index(k);
        double prod = 1.0;
        for (int j = 0; j < d; ++j)
          prod *= tab[static_cast<std::size_t>(q[j]) * (n + 1) + alpha[j]];
        coeffs[k] += base * prod;
      }
    }
    int axis = 0;
    while (axis < d && ++q[axis] == quad_nodes) q[axis++] = 0;
    if (axis == d) break;
  }
  return coeffs;
}

DecayBoundParams DecayBoundParams::make(double support_radius, int dim,
                                        double mass) {
  if (!(support_radius > 0.0) || dim < 1 || !(mass > 0.0))
    throw UsageError("DecayBoundParams: all parameters must be positive");
  DecayBoundParams p;
  p.support_radius = support_radius;
  p.dim = dim;
  p.mass = mass;
  p.beta = support_radius * std::sqrt(0.5 * dim);
  p.prefactor = std::pow(kPi, -0.25 * dim) * std::pow(2.0, -0.5 * dim) * mass;
  return p;
}

double coefficient_decay_bound(int m, const DecayBoundParams& p) {
  if (m < 1) throw UsageError("coefficient_decay_bound: m must be >= 1");
  const double ratio = std::exp(0.5) * p.beta / std::sqrt(static_cast<double>(m));
  return p.prefactor * std::pow(static_cast<double>(m), 0.25) *
         std::pow(ratio, static_cast<double>(m));
}

double projection_error_bound(int n, const DecayBoundParams& p) {
  const double k = std::exp(0.5) * p.beta;
  const double np1 = static_cast<double>(n) + 1.0;
  if (!(np1 > 2.0 * k * k))
    throw UsageError("projection_error_bound: requires n + 1 > 2 K^2");
  const double d = static_cast<double>(p.dim);
  const double cd_tilde = std::sqrt(
      1.0 + std::pow(2.0, d - 0.5) * std::tgamma(d + 0.5) /
                std::pow(std::numbers::ln2, d + 0.5));
  return cd_tilde * p.prefactor * std::pow(np1, 0.5 * d - 0.25) *
         std::pow(k / std::sqrt(np1), np1);
}

std::complex<double> bargmann_transform_hermite(int n, std::complex<double> z,
                                                int quad_nodes) {
  if (n < 0 || n > 20)
    throw UsageError("bargmann_transform_hermite: supported for 0 <= n <= 20");
  if (std::abs(z) > 5.0)
    throw UsageError("bargmann_transform_hermite: supported for |z| <= 5");
  const GaussHermiteRule rule = gauss_hermite(quad_nodes);
  const std::complex<double> half_zsq = 0.5 * z * z;
  std::complex<double> acc = 0.0;
  for (int q = 0; q < quad_nodes; ++q) {
    const double x = rule.nodes[q];
    const double poly = hermite_ortho_poly(n, x);
    acc += rule.weights[q] * poly *
           std::exp(std::sqrt(2.0) * z * x - half_zsq);
  }
  return kQuarticRootPi * acc;
}

}  // namespace ermbridge
