// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ermbridge {

// Multi-indices alpha in N_0^d with |alpha| <= degree, in graded
// lexicographic order: sorted by total degree, then lexicographically with
// the first coordinate most significant. Count is C(degree + dim, dim).
struct MultiIndexSet {
  int dim = 1;
  int degree = 0;
  std::vector<int> flat;  // count * dim entries

  std::size_t count() const {
    return dim > 0 ? flat.size() / static_cast<std::size_t>(dim) : 0;
  }
  std::span<const int> index(std::size_t k) const {
    return {flat.data() + k * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  int total_degree(std::size_t k) const;
};

// Throws UsageError if C(degree + dim, dim) would overflow a size_t budget.
MultiIndexSet enumerate_multiindices(int degree, int dim);

// Physicists' Hermite polynomial H_n(x) by the three-term recurrence
// H_{n+1} = 2x H_n - 2n H_{n-1}.
double hermite_polynomial(int n, double x);

// Normalized Hermite function psi_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x)
// e^{-x^2/2}, evaluated by the factorial-free normalized recurrence
// psi_{n+1} = x sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1}.
double hermite_function(int n, double x);

// psi_n'(x) = sqrt(2n) psi_{n-1}(x) - x psi_n(x).
double hermite_function_derivative(int n, double x);

// Fills out[0..nmax] with psi_0(x)..psi_nmax(x) in one recurrence pass.
void hermite_function_table(int nmax, double x, std::span<double> out);

// Tensor basis psi_alpha^{(lambda)}(y) = lambda^{d/2} prod_j
// psi_{alpha_j}(lambda y_j); the natural scale for kernel variance T is
// lambda = T^{-1/2}.
struct HermiteBasis {
  MultiIndexSet indexset;
  double scale = 1.0;  // lambda

  // Value of the k-th basis function at y; throws UsageError if k is out of
  // range or y has the wrong dimension.
  double eval(std::size_t k, std::span<const double> y) const;

  // Evaluates every basis function at y into out (size count()), sharing one
  // recurrence table per axis.
  void eval_all(std::span<const double> y, std::span<double> out) const;
};

HermiteBasis make_hermite_basis(int degree, int dim, double scale);

// Gauss-Hermite rule for weight e^{-x^2}: sum_i weight[i] f(node[i]) ~
// integral e^{-x^2} f(x) dx. total_weight[i] = weight[i] e^{node[i]^2}
// integrates plain functions that already contain their Gaussian decay.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> total_weights;
};

GaussHermiteRule gauss_hermite(int n);

using ScalarField = std::function<double(std::span<const double>)>;

// Coefficients c_alpha = <f, psi_alpha^{(lambda)}> by tensor Gauss-Hermite
// quadrature. Requires quad_nodes > degree (the rule must resolve the basis)
// and dim <= 3.
std::vector<double> project_coefficients(const ScalarField& f,
                                         const HermiteBasis& basis,
                                         int quad_nodes);

// Hermite coefficient envelope for g = w * q with w >= 0 supported in a ball
// of radius R and mass M0, for the unit-variance Gaussian q.
struct DecayBoundParams {
  double support_radius = 1.0;  // R
  int dim = 1;                  // d
  double mass = 1.0;            // M0 = integral of w
  double beta = 0.0;            // R sqrt(d/2)
  double prefactor = 0.0;       // pi^{-d/4} 2^{-d/2} M0

  static DecayBoundParams make(double support_radius, int dim, double mass);
};

// |c_alpha| <= prefactor * m^{1/4} (e^{1/2} beta / sqrt(m))^m for m = |alpha|.
double coefficient_decay_bound(int m, const DecayBoundParams& p);

// L2 tail bound for the degree-n projector,
// C~_d * C_d * (n+1)^{d/2 - 1/4} (K / sqrt(n+1))^{n+1} with K = e^{1/2} beta;
// valid for n + 1 > 2 K^2 (throws UsageError below that).
double projection_error_bound(int n, const DecayBoundParams& p);

// Bargmann transform of psi_n evaluated by quadrature; equals z^n / sqrt(n!)
// (test oracle for the basis implementation).
std::complex<double> bargmann_transform_hermite(int n, std::complex<double> z,
                                                int quad_nodes = 96);

}  // namespace ermbridge
