// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "ermbridge/errors.hpp"
#include "ermbridge/rng.hpp"

namespace ermbridge {

void GaussianEnvelope::validate() const {
  if (!(lower_scale > 0.0) || !(upper_cap > 0.0) || !(lower_decay > 0.0))
    throw UsageError("GaussianEnvelope: all fields must be positive");
  if (lower_scale > upper_cap)
    throw UsageError("GaussianEnvelope: lower_scale must be <= upper_cap");
}

double GaussianEnvelope::lower(std::span<const double> y) const {
  return std::exp(log_lower(y));
}

double GaussianEnvelope::log_lower(std::span<const double> y) const {
  double sq = 0.0;
  for (double v : y) sq += v * v;
  return std::log(lower_scale) - lower_decay * sq;
}

double GaussianEnvelope::clip(double value, std::span<const double> y) const {
  const double lo = lower(y);
  return std::min(upper_cap, std::max(value, lo));
}

HermitePotential::HermitePotential(HermiteBasis basis, GaussianEnvelope envelope,
                                   double ball_radius, bool clip_enabled)
    : basis_(std::move(basis)),
      envelope_(envelope),
      ball_radius_(ball_radius),
      clip_enabled_(clip_enabled),
      coeffs_(basis_.indexset.count(), 0.0) {
  envelope_.validate();
  if (!(ball_radius_ > 0.0))
    throw UsageError("HermitePotential: ball_radius must be > 0");
}

double HermitePotential::raw_sum(std::span<const double> y) const {
  std::vector<double> vals(coeffs_.size());
  basis_.eval_all(y, vals);
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) s += coeffs_[k] * vals[k];
  return s;
}

double HermitePotential::log_eval(std::span<const double> y) const {
  const double s = raw_sum(y);
  if (clip_enabled_) {
    if (s >= envelope_.upper_cap) return std::log(envelope_.upper_cap);
    const double log_lo = envelope_.log_lower(y);
    if (!(s > 0.0) || std::log(s) <= log_lo) return log_lo;
    return std::log(s);
  }
  if (!(s > 0.0))
    throw NumericError(
        "HermitePotential::log_eval: expansion is non-positive (" +
        std::to_string(s) + ") and clipping is disabled");
  return std::log(s);
}

void HermitePotential::accumulate_param_grad(std::span<const double> y,
                                             double weight,
                                             std::span<double> grad) const {
  std::vector<double> vals(coeffs_.size());
  basis_.eval_all(y, vals);
  double s = 0.0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) s += coeffs_[k] * vals[k];
  if (clip_enabled_) {
    // Saturated clip contributes zero gradient.
    if (s >= envelope_.upper_cap) return;
    if (!(s > 0.0) || std::log(s) <= envelope_.log_lower(y)) return;
  } else if (!(s > 0.0)) {
    throw NumericError(
        "HermitePotential::accumulate_param_grad: non-positive expansion");
  }
  const double inv = weight / s;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) grad[k] += inv * vals[k];
}

void HermitePotential::project_ball() {
  double sq = 0.0;
  for (double c : coeffs_) sq += c * c;
  if (sq > ball_radius_) {
    const double scale = std::sqrt(ball_radius_ / sq);
    for (double& c : coeffs_) c *= scale;
  }
}

HermitePotential make_hermite_potential(int degree, double kernel_variance,
                                        const PointCloud& envelope_data,
                                        bool clip_enabled) {
  if (!(kernel_variance > 0.0))
    throw UsageError("make_hermite_potential: kernel_variance must be > 0");
  envelope_data.validate();
  const int d = envelope_data.dim;
  const double lambda = 1.0 / std::sqrt(kernel_variance);
  HermiteBasis basis = make_hermite_basis(degree, d, lambda);

  double ball = (degree + 1.0) * std::pow(static_cast<double>(d), d);
  ball = std::min(ball, 1e6);

  // Warm start g(0) = 1: c0 * lambda^{d/2} pi^{-d/4} = 1.
  const double c0 = std::pow(std::numbers::pi, 0.25 * d) *
                    std::pow(lambda, -0.5 * d);

  GaussianEnvelope env;
  env.lower_decay = 2.0 / kernel_variance;
  // With the warm start, the initial value at y is c0 psi_0(lambda y); cap at
  // ten times its maximum over the data.
  double max_init = 0.0;
  for (std::size_t i = 0; i < envelope_data.size(); ++i) {
    const auto p = envelope_data.point(i);
    double sq = 0.0;
    for (double v : p) sq += v * v;
    max_init = std::max(max_init, std::exp(-0.5 * lambda * lambda * sq));
  }
  env.upper_cap = 10.0 * std::max(max_init, 1e-12);
  env.lower_scale = 1e-6 * env.upper_cap;

  HermitePotential p(std::move(basis), env, ball, clip_enabled);
  p.params()[0] = c0;
  return p;
}

MlpPotential::MlpPotential(int input_dim, int hidden_dim, std::uint64_t seed)
    : input_dim_(input_dim), hidden_dim_(hidden_dim) {
  if (input_dim < 1 || hidden_dim < 1)
    throw UsageError("MlpPotential: dimensions must be >= 1");
  const std::size_t h = hidden_dim, d = input_dim;
  params_.assign(h * d + h + h * h + h + h + 1, 0.0);
  SplitMix64 rng(seed, /*stream=*/7001);
  double* p = params_.data();
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < h * d; ++i) p[i] = rng.next_uniform(-s1, s1);
  p += h * d + h;  // skip b1 (zeros)
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (std::size_t i = 0; i < h * h; ++i) p[i] = rng.next_uniform(-s2, s2);
  p += h * h + h;  // skip b2
  for (std::size_t i = 0; i < h; ++i) p[i] = rng.next_uniform(-s2, s2);
}

void MlpPotential::set_envelope(const GaussianEnvelope& env) {
  env.validate();
  envelope_ = env;
  clip_enabled_ = true;
}

double MlpPotential::log_eval(std::span<const double> y) const {
  const double v = raw_eval(y);
  if (!clip_enabled_) return v;
  return std::clamp(v, envelope_.log_lower(y), std::log(envelope_.upper_cap));
}

double MlpPotential::raw_eval(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != input_dim_)
    throw UsageError("MlpPotential::log_eval: wrong point dimension");
  const int h = hidden_dim_, d = input_dim_;
  std::vector<double> a1(h), a2(h);
  for (int r = 0; r < h; ++r) {
    double z = b1()[r];
    const double* row = w1() + static_cast<std::size_t>(r) * d;
    for (int c = 0; c < d; ++c) z += row[c] * y[c];
    a1[r] = std::tanh(z);
  }
  for (int r = 0; r < h; ++r) {
    double z = b2()[r];
    const double* row = w2() + static_cast<std::size_t>(r) * h;
    for (int c = 0; c < h; ++c) z += row[c] * a1[c];
    a2[r] = std::tanh(z);
  }
  double v = b3()[0];
  for (int c = 0; c < h; ++c) v += w3()[c] * a2[c];
  return v;
}

void MlpPotential::accumulate_param_grad(std::span<const double> y,
                                         double weight,
                                         std::span<double> grad) const {
  if (static_cast<int>(y.size()) != input_dim_)
    throw UsageError("MlpPotential::accumulate_param_grad: wrong dimension");
  if (clip_enabled_) {
    const double v = raw_eval(y);
    if (v <= envelope_.log_lower(y) || v >= std::log(envelope_.upper_cap))
      return;  // saturated
  }
  const int h = hidden_dim_, d = input_dim_;
  std::vector<double> a1(h), a2(h), delta2(h), delta1(h);
  for (int r = 0; r < h; ++r) {
    double z = b1()[r];
    const double* row = w1() + static_cast<std::size_t>(r) * d;
    for (int c = 0; c < d; ++c) z += row[c] * y[c];
    a1[r] = std::tanh(z);
  }
  for (int r = 0; r < h; ++r) {
    double z = b2()[r];
    const double* row = w2() + static_cast<std::size_t>(r) * h;
    for (int c = 0; c < h; ++c) z += row[c] * a1[c];
    a2[r] = std::tanh(z);
  }
  for (int r = 0; r < h; ++r) delta2[r] = w3()[r] * (1.0 - a2[r] * a2[r]);
  for (int c = 0; c < h; ++c) {
    double acc = 0.0;
    for (int r = 0; r < h; ++r)
      acc += w2()[static_cast<std::size_t>(r) * h + c] * delta2[r];
    delta1[c] = acc * (1.0 - a1[c] * a1[c]);
  }

  const std::size_t o_w1 = 0;
  const std::size_t o_b1 = o_w1 + static_cast<std::size_t>(h) * d;
  const std::size_t o_w2 = o_b1 + h;
  const std::size_t o_b2 = o_w2 + static_cast<std::size_t>(h) * h;
  const std::size_t o_w3 = o_b2 + h;
  const std::size_t o_b3 = o_w3 + h;
  for (int r = 0; r < h; ++r) {
    const double wd = weight * delta1[r];
    double* g = grad.data() + o_w1 + static_cast<std::size_t>(r) * d;
    for (int c = 0; c < d; ++c) g[c] += wd * y[c];
    grad[o_b1 + r] += wd;
  }
  for (int r = 0; r < h; ++r) {
    const double wd = weight * delta2[r];
    double* g = grad.data() + o_w2 + static_cast<std::size_t>(r) * h;
    for (int c = 0; c < h; ++c) g[c] += wd * a1[c];
    grad[o_b2 + r] += wd;
  }
  for (int c = 0; c < h; ++c) grad[o_w3 + c] += weight * a2[c];
  grad[o_b3] += weight;
}

TablePotential::TablePotential(PointCloud support,
                               std::vector<double> log_values)
    : support_(std::move(support)), log_values_(std::move(log_values)) {
  support_.validate();
  if (log_values_.size() != support_.size())
    throw UsageError("TablePotential: values/support size mismatch");
  for (double v : log_values_)
    if (!std::isfinite(v))
      throw UsageError("TablePotential: non-finite log value");
}

double TablePotential::log_eval(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != support_.dim)
    throw UsageError("TablePotential::log_eval: wrong point dimension");
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const double sq = squared_distance(y, support_.point(i));
    if (sq < best_sq) {
      best_sq = sq;
      best = i;
    }
  }
  return log_values_[best];
}

bool clip_contraction_check(const ScalarField& gstar, const ScalarField& f,
                            const GaussianEnvelope& env,
                            const PointCloud& grid) {
  env.validate();
  grid.validate();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto y = grid.point(i);
    const double gs = gstar(y);
    if (gs < env.lower(y) || gs > env.upper_cap)
      throw UsageError("clip_contraction_check: gstar leaves the envelope band");
    const double fv = f(y);
    const double clipped = env.clip(fv, y);
    if (std::abs(gs - clipped) > std::abs(gs - fv)) return false;
  }
  return true;
}

namespace {

void write_values(std::ofstream& out, std::span<const double> vals) {
  char buf[40];
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
    out << (i ? " " : "") << buf;
  }
  out << '\n';
}

std::vector<double> read_values(std::istream& in, std::size_t n) {
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!(in >> vals[i]))
      throw ParseError("potential checkpoint: truncated value block", 0);
  return vals;
}

}  // namespace

void save_potential(const LogPotential& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("save_potential: cannot open '" + path + "'");
  out << "ermbridge-potential v1\n";
  out << "kind " << p.kind() << '\n';
  out << "dim " << p.dim() << '\n';
  if (const auto* mlp = dynamic_cast<const MlpPotential*>(&p)) {
    out << "hidden " << mlp->hidden_dim() << '\n';
    out << "clip " << (mlp->clip_enabled() ? 1 : 0) << '\n';
    if (mlp->clip_enabled()) {
      const double env[3] = {mlp->envelope().lower_scale,
                             mlp->envelope().lower_decay,
                             mlp->envelope().upper_cap};
      out << "envelope ";
      write_values(out, env);
    }
    out << "params " << mlp->param_count() << '\n';
    write_values(out, mlp->params());
  } else if (const auto* herm = dynamic_cast<const HermitePotential*>(&p)) {
    out << "degree " << herm->basis().indexset.degree << '\n';
    out << "scale ";
    write_values(out, std::span<const double>(&herm->basis().scale, 1));
    const double env[3] = {herm->envelope().lower_scale,
                           herm->envelope().lower_decay,
                           herm->envelope().upper_cap};
    out << "envelope ";
    write_values(out, env);
    const double extras[2] = {herm->ball_radius(),
                              herm->clip_enabled() ? 1.0 : 0.0};
    out << "ball_clip ";
    write_values(out, extras);
    out << "params " << herm->param_count() << '\n';
    write_values(out, herm->params());
  } else if (const auto* tab = dynamic_cast<const TablePotential*>(&p)) {
    out << "rows " << tab->support().size() << '\n';
    for (std::size_t i = 0; i < tab->support().size(); ++i) {
      const auto pt = tab->support().point(i);
      std::vector<double> row(pt.begin(), pt.end());
      row.push_back(tab->log_values()[i]);
      write_values(out, row);
    }
  } else {
    throw UsageError("save_potential: unsupported potential kind '" +
                     p.kind() + "'");
  }
}

std::unique_ptr<LogPotential> load_potential(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("load_potential: cannot open '" + path + "'");
  std::string magic, version;
  in >> magic >> version;
  if (magic != "ermbridge-potential" || version != "v1")
    throw ParseError("potential checkpoint: bad header", 1);
  std::string key, kind;
  int dim = 0;
  in >> key >> kind;
  in >> key >> dim;
  if (kind == "mlp") {
    int hidden = 0;
    int clip = 0;
    std::size_t n = 0;
    in >> key >> hidden >> key >> clip;
    MlpPotential mlp(dim, hidden, /*seed=*/0);
    if (clip) {
      in >> key;
      const auto env_vals = read_values(in, 3);
      mlp.set_envelope(GaussianEnvelope{env_vals[0], env_vals[1], env_vals[2]});
    }
    in >> key >> n;
    if (mlp.param_count() != n)
      throw ParseError("potential checkpoint: parameter count mismatch", 0);
    const auto vals = read_values(in, n);
    std::copy(vals.begin(), vals.end(), mlp.params().begin());
    return std::make_unique<MlpPotential>(std::move(mlp));
  }
  if (kind == "hermite") {
    int degree = 0;
    in >> key >> degree;
    in >> key;
    const double scale = read_values(in, 1)[0];
    in >> key;
    const auto env_vals = read_values(in, 3);
    in >> key;
    const auto extras = read_values(in, 2);
    std::size_t n = 0;
    in >> key >> n;
    GaussianEnvelope env{env_vals[0], env_vals[1], env_vals[2]};
    HermitePotential herm(make_hermite_basis(degree, dim, scale), env,
                          extras[0], extras[1] != 0.0);
    if (herm.param_count() != n)
      throw ParseError("potential checkpoint: coefficient count mismatch", 0);
    const auto vals = read_values(in, n);
    std::copy(vals.begin(), vals.end(), herm.params().begin());
    return std::make_unique<HermitePotential>(std::move(herm));
  }
  if (kind == "table") {
    std::size_t rows = 0;
    in >> key >> rows;
    PointCloud support(rows, dim);
    std::vector<double> logs(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      const auto row = read_values(in, static_cast<std::size_t>(dim) + 1);
      auto pt = support.point(i);
      for (int j = 0; j < dim; ++j) pt[j] = row[j];
      logs[i] = row[dim];
    }
    return std::make_unique<TablePotential>(std::move(support), std::move(logs));
  }
  throw ParseError("potential checkpoint: unknown kind '" + kind + "'", 2);
}

}  // namespace ermbridge
