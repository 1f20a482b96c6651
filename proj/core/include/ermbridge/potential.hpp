// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ermbridge/hermite.hpp"
#include "ermbridge/point_cloud.hpp"

namespace ermbridge {

// Two-sided band [lower_scale * exp(-lower_decay |y|^2), upper_cap] the
// clipped Hermite class is projected into.
struct GaussianEnvelope {
  double lower_scale = 1e-6;
  double lower_decay = 1.0;
  double upper_cap = 1.0;

  void validate() const;
  double lower(std::span<const double> y) const;
  double log_lower(std::span<const double> y) const;
  double clip(double value, std::span<const double> y) const;
};

// A hypothesis g: log-domain evaluator with parameter-gradient support.
class LogPotential {
 public:
  virtual ~LogPotential() = default;

  virtual int dim() const = 0;
  virtual double log_eval(std::span<const double> y) const = 0;

  virtual std::size_t param_count() const { return 0; }
  virtual std::span<double> params() { return {}; }
  virtual std::span<const double> params() const { return {}; }

  // grad += weight * d(log_eval(y)) / d(theta). No-op for parameter-free
  // potentials.
  virtual void accumulate_param_grad(std::span<const double> y, double weight,
                                     std::span<double> grad) const {
    (void)y;
    (void)weight;
    (void)grad;
  }

  virtual std::string kind() const = 0;
  virtual std::unique_ptr<LogPotential> clone() const = 0;
};

// Scaled Hermite expansion sum_alpha c_alpha psi_alpha^{(lambda)} with an
// l2 ball constraint on the coefficients and optional envelope clipping.
class HermitePotential final : public LogPotential {
 public:
  HermitePotential(HermiteBasis basis, GaussianEnvelope envelope,
                   double ball_radius, bool clip_enabled);

  int dim() const override { return basis_.indexset.dim; }
  double log_eval(std::span<const double> y) const override;
  std::size_t param_count() const override { return coeffs_.size(); }
  std::span<double> params() override { return coeffs_; }
  std::span<const double> params() const override { return coeffs_; }
  void accumulate_param_grad(std::span<const double> y, double weight,
                             std::span<double> grad) const override;
  std::string kind() const override { return "hermite"; }
  std::unique_ptr<LogPotential> clone() const override {
    return std::make_unique<HermitePotential>(*this);
  }

  // Rescales the coefficients onto the ball |c|^2 <= ball_radius when they
  // lie outside; identity otherwise. Idempotent.
  void project_ball();

  // Unclipped expansion value at y.
  double raw_sum(std::span<const double> y) const;

  const HermiteBasis& basis() const { return basis_; }
  const GaussianEnvelope& envelope() const { return envelope_; }
  GaussianEnvelope& envelope() { return envelope_; }
  double ball_radius() const { return ball_radius_; }
  bool clip_enabled() const { return clip_enabled_; }
  void set_clip_enabled(bool on) { clip_enabled_ = on; }

 private:
  HermiteBasis basis_;
  GaussianEnvelope envelope_;
  double ball_radius_;
  bool clip_enabled_;
  std::vector<double> coeffs_;
};

// Warm start: coefficients (c0, 0, ...) with c0 chosen so the potential is 1
// at the origin, scale lambda = variance^{-1/2}, envelope calibrated on the
// given cloud (upper cap 10x the max initial value, lower scale 1e-6 of
// that, decay 2 / variance), ball radius (n+1) d^d capped at 1e6.
HermitePotential make_hermite_potential(int degree, double kernel_variance,
                                        const PointCloud& envelope_data,
                                        bool clip_enabled = true);

// Feed-forward log-potential V(y) = w3 tanh(W2 tanh(W1 y + b1) + b2) + b3
// with hand-written gradients; layer widths [d, h, h, 1]. The output is the
// log potential directly; an envelope clip can be switched on but the
// network is unconstrained by default.
class MlpPotential final : public LogPotential {
 public:
  MlpPotential(int input_dim, int hidden_dim, std::uint64_t seed);

  int dim() const override { return input_dim_; }
  double log_eval(std::span<const double> y) const override;
  std::size_t param_count() const override { return params_.size(); }
  std::span<double> params() override { return params_; }
  std::span<const double> params() const override { return params_; }
  void accumulate_param_grad(std::span<const double> y, double weight,
                             std::span<double> grad) const override;
  std::string kind() const override { return "mlp"; }
  std::unique_ptr<LogPotential> clone() const override {
    return std::make_unique<MlpPotential>(*this);
  }

  int hidden_dim() const { return hidden_dim_; }

  // Clip the output into the envelope band (saturated regions contribute
  // zero gradient). Off unless set.
  void set_envelope(const GaussianEnvelope& env);
  void clear_envelope() { clip_enabled_ = false; }
  bool clip_enabled() const { return clip_enabled_; }
  const GaussianEnvelope& envelope() const { return envelope_; }

 private:
  double raw_eval(std::span<const double> y) const;

  // Flat layout: W1[h*d] b1[h] W2[h*h] b2[h] w3[h] b3[1].
  int input_dim_;
  int hidden_dim_;
  std::vector<double> params_;
  GaussianEnvelope envelope_;
  bool clip_enabled_ = false;

  const double* w1() const { return params_.data(); }
  const double* b1() const { return w1() + hidden_dim_ * input_dim_; }
  const double* w2() const { return b1() + hidden_dim_; }
  const double* b2() const { return w2() + hidden_dim_ * hidden_dim_; }
  const double* w3() const { return b2() + hidden_dim_; }
  const double* b3() const { return w3() + hidden_dim_; }
};

// Table lookup over a fixed support cloud (nearest row); parameter-free.
// Wraps converged discrete potentials for use in risk evaluation and
// sampling.
class TablePotential final : public LogPotential {
 public:
  TablePotential(PointCloud support, std::vector<double> log_values);

  int dim() const override { return support_.dim; }
  double log_eval(std::span<const double> y) const override;
  std::string kind() const override { return "table"; }
  std::unique_ptr<LogPotential> clone() const override {
    return std::make_unique<TablePotential>(*this);
  }

  const PointCloud& support() const { return support_; }
  const std::vector<double>& log_values() const { return log_values_; }

 private:
  PointCloud support_;
  std::vector<double> log_values_;
};

// base shifted by a constant in the log domain (g -> e^{offset} g);
// parameter-free view used for gauge alignment and scale-invariance checks.
class ShiftedPotential final : public LogPotential {
 public:
  ShiftedPotential(const LogPotential& base, double log_offset)
      : base_(&base), offset_(log_offset) {}

  int dim() const override { return base_->dim(); }
  double log_eval(std::span<const double> y) const override {
    return base_->log_eval(y) + offset_;
  }
  std::string kind() const override { return "shifted:" + base_->kind(); }
  std::unique_ptr<LogPotential> clone() const override {
    return std::make_unique<ShiftedPotential>(*this);
  }

 private:
  const LogPotential* base_;
  double offset_;
};

// True iff |gstar - clip(f)| <= |gstar - f| at every grid point; gstar must
// lie inside the envelope band everywhere on the grid (UsageError if not).
bool clip_contraction_check(const ScalarField& gstar, const ScalarField& f,
                            const GaussianEnvelope& env,
                            const PointCloud& grid);

// Versioned text checkpoint; round-trips parameters exactly.
void save_potential(const LogPotential& p, const std::string& path);
std::unique_ptr<LogPotential> load_potential(const std::string& path);

}  // namespace ermbridge
