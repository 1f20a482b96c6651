// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "ermbridge/errors.hpp"
#include "ermbridge/rng.hpp"

namespace ermbridge {

void TrainConfig::validate() const {
  if (batch_size < 2) throw UsageError("TrainConfig: batch_size must be >= 2");
  if (!(lr > 0.0)) throw UsageError("TrainConfig: lr must be > 0");
  if (epochs < 0) throw UsageError("TrainConfig: epochs must be >= 0");
  if (!(loss_scale > 0.0)) throw UsageError("TrainConfig: loss_scale must be > 0");
}

OptimizerState make_optimizer(OptimizerKind kind, double lr,
                              const AdaptiveMomentParams& ap,
                              std::size_t param_count) {
  OptimizerState s;
  s.kind = kind;
  s.lr = lr;
  s.adaptive = ap;
  if (kind == OptimizerKind::AdaptiveMoment) {
    s.m.assign(param_count, 0.0);
    s.v.assign(param_count, 0.0);
  }
  return s;
}

void optimizer_step(OptimizerState& state, std::span<double> params,
                    std::span<const double> grads) {
  if (params.size() != grads.size())
    throw UsageError("optimizer_step: parameter/gradient shape mismatch");
  if (state.kind == OptimizerKind::Sgd) {
    for (std::size_t i = 0; i < params.size(); ++i)
      params[i] -= state.lr * grads[i];
    return;
  }
  if (state.m.size() != params.size())
    throw UsageError("optimizer_step: state initialized for another shape");
  ++state.t;
  const double b1 = state.adaptive.beta1;
  const double b2 = state.adaptive.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grads[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grads[i] * grads[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.adaptive.eps);
  }
}

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, SplitMix64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[rng.next_below(i)]);
}

std::string batch_preview(const std::vector<std::size_t>& idx,
                          std::size_t offset, std::size_t count) {
  std::string s;
  for (std::size_t i = 0; i < std::min<std::size_t>(count, 8); ++i)
    s += (i ? "," : "") + std::to_string(idx[offset + i]);
  return s;
}

}  // namespace

TrainReport train(const TrainConfig& cfg, const PointCloud& X,
                  const PointCloud& Y, LogPotential& p, const KernelParams& k,
                  RiskConfig risk) {
  cfg.validate();
  X.validate();
  Y.validate();
  k.validate();
  risk.loss_scale = cfg.loss_scale;
  risk.validate();
  const std::size_t n = X.size(), m = Y.size();
  if (n < cfg.batch_size || m < cfg.batch_size)
    throw UsageError("train: both clouds must hold at least batch_size points");

  const auto t0 = std::chrono::steady_clock::now();
  TrainReport report;
  auto* hermite = dynamic_cast<HermitePotential*>(&p);
  SplitMix64 rng(cfg.seed, /*stream=*/4242);
  OptimizerState opt =
      make_optimizer(cfg.optimizer, cfg.lr, cfg.adaptive, p.param_count());

  std::vector<std::size_t> idx_x(n), idx_y(m);
  std::iota(idx_x.begin(), idx_x.end(), 0);
  std::iota(idx_y.begin(), idx_y.end(), 0);
  const std::size_t b = cfg.batch_size;
  const std::size_t steps_per_epoch = m / b;
  std::size_t x_pos = n;  // force an initial shuffle

  long step = 0;
  std::vector<double> epoch_normalizers;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_indices(idx_y, rng);
    epoch_normalizers.clear();
    double epoch_loss = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      if (x_pos + b > n) {
        shuffle_indices(idx_x, rng);
        x_pos = 0;
      }
      const PointCloud xb = X.gather({idx_x.data() + x_pos, b});
      const PointCloud yb = Y.gather({idx_y.data() + s * b, b});
      x_pos += b;

      RiskGradient res = param_gradient(p, xb, yb, k, risk);
      if (!std::isfinite(res.loss)) {
        double pnorm = 0.0;
        for (double w : p.params()) pnorm += w * w;
        throw NumericError(
            "train: non-finite loss at step " + std::to_string(step) +
            " (target batch [" + batch_preview(idx_y, s * b, b) +
            "...], parameter norm " + std::to_string(std::sqrt(pnorm)) + ")");
      }
      optimizer_step(opt, p.params(), res.grad);
      if (hermite) hermite->project_ball();

      report.steps.push_back({step, res.loss, res.clip_active_frac});
      report.clip_activations += static_cast<long>(
          std::lround(res.clip_active_frac * static_cast<double>(b)));
      epoch_loss += res.loss;
      epoch_normalizers.insert(epoch_normalizers.end(),
                               res.log_normalizers.begin(),
                               res.log_normalizers.end());
      ++step;
    }
    report.epoch_loss.push_back(
        steps_per_epoch ? epoch_loss / static_cast<double>(steps_per_epoch)
                        : 0.0);
    // Data-driven clip band for the next epoch, from this epoch's observed
    // normalizers (every source row appears once per epoch pass).
    if (cfg.auto_clip && !epoch_normalizers.empty())
      risk.clip = quantile_clip_bounds(epoch_normalizers);
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

void write_loss_trace_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("write_loss_trace_csv: cannot open '" + path + "'");
  out << "step,loss,clip_active_frac\n";
  char buf[96];
  for (const auto& rec : report.steps) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g\n", rec.step, rec.loss,
                  rec.clip_active_frac);
    out << buf;
  }
}

}  // namespace ermbridge
