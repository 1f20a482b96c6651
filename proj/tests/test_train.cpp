// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ermbridge/datasets.hpp"
#include "ermbridge/errors.hpp"
#include "ermbridge/train.hpp"

using namespace ermbridge;

TEST_CASE("optimizer steps") {
  std::vector<double> params = {1.0, -2.0, 0.5};

  OptimizerState sgd = make_optimizer(OptimizerKind::Sgd, 1.0, {}, 3);
  const std::vector<double> zero(3, 0.0);
  optimizer_step(sgd, params, zero);
  CHECK(params == std::vector<double>{1.0, -2.0, 0.5});
  // lr = 1 with grad = theta zeroes the parameters.
  optimizer_step(sgd, params, params);
  CHECK(params == std::vector<double>{0.0, 0.0, 0.0});

  // First adaptive step moves by about lr in the sign direction.
  OptimizerState adam =
      make_optimizer(OptimizerKind::AdaptiveMoment, 0.01, {}, 3);
  params = {1.0, 1.0, 1.0};
  const std::vector<double> grads = {0.5, -2.0, 1e-3};
  optimizer_step(adam, params, grads);
  for (int i = 0; i < 3; ++i) {
    const double expected =
        1.0 - 0.01 * grads[i] / (std::abs(grads[i]) + 1e-8);
    CHECK(params[i] == doctest::Approx(expected).epsilon(1e-12));
  }

  // Zero gradient leaves parameters fixed for both kinds.
  optimizer_step(adam, params, zero);
  const std::vector<double> frozen = params;
  optimizer_step(adam, params, zero);
  // Momentum decays toward zero; the parameters may still drift from the
  // first step's momentum but a fresh state with zero grad must not move.
  OptimizerState fresh =
      make_optimizer(OptimizerKind::AdaptiveMoment, 0.01, {}, 3);
  std::vector<double> q = {3.0, 4.0, 5.0};
  optimizer_step(fresh, q, zero);
  CHECK(q == std::vector<double>{3.0, 4.0, 5.0});
  (void)frozen;
}

namespace {

MlpPotential constant_potential(int dim, double value) {
  MlpPotential p(dim, 4, 0);
  for (double& w : p.params()) w = 0.0;
  p.params()[p.param_count() - 1] = value;
  return p;
}

}  // namespace

TEST_CASE("zero epochs leaves everything untouched") {
  const PointCloud x = swiss_roll(16, 0.0, 1);
  const PointCloud y = s_curve(16, 0.0, 1);
  MlpPotential p(2, 4, 3);
  const std::vector<double> before(p.params().begin(), p.params().end());
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.epochs = 0;
  KernelParams k{2, 0.25};
  const TrainReport report = train(cfg, x, y, p, k, RiskConfig{});
  CHECK(report.epoch_loss.empty());
  CHECK(report.steps.empty());
  CHECK(std::vector<double>(p.params().begin(), p.params().end()) == before);
}

TEST_CASE("symmetric two-point problem starts at the fixed point") {
  PointCloud x(2, 1), y(2, 1);
  x.point(0)[0] = -1.0;
  x.point(1)[0] = 1.0;
  y = x;
  MlpPotential p = constant_potential(1, 0.4);
  const std::vector<double> before(p.params().begin(), p.params().end());
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.epochs = 1;
  cfg.auto_clip = false;
  KernelParams k{1, 1.0};
  const TrainReport report = train(cfg, x, y, p, k, RiskConfig{});
  REQUIRE(report.steps.size() == 1);
  CHECK(report.steps[0].loss == doctest::Approx(0.0));
  CHECK(std::vector<double>(p.params().begin(), p.params().end()) == before);
}

TEST_CASE("training is deterministic and decreases the loss") {
  const PointCloud x = swiss_roll(128, 0.02, 5);
  const PointCloud y = s_curve(128, 0.02, 5);
  KernelParams k{2, 0.25};
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.epochs = 30;
  cfg.lr = 5e-3;
  cfg.seed = 9;

  MlpPotential p1(2, 16, 11);
  const TrainReport r1 = train(cfg, x, y, p1, k, RiskConfig{});
  MlpPotential p2(2, 16, 11);
  const TrainReport r2 = train(cfg, x, y, p2, k, RiskConfig{});
  REQUIRE(r1.steps.size() == r2.steps.size());
  for (std::size_t i = 0; i < r1.steps.size(); ++i)
    CHECK(r1.steps[i].loss == r2.steps[i].loss);
  CHECK(std::vector<double>(p1.params().begin(), p1.params().end()) ==
        std::vector<double>(p2.params().begin(), p2.params().end()));

  // Later epochs fit better than the start on this small problem.
  const double first = r1.epoch_loss.front();
  const double last = r1.epoch_loss.back();
  CHECK(last < first);

  // Parameters stayed finite.
  for (double w : p1.params()) CHECK(std::isfinite(w));
}

TEST_CASE("loss trace is invariant under a potential rescaling") {
  const PointCloud x = swiss_roll(64, 0.02, 6);
  const PointCloud y = s_curve(64, 0.02, 6);
  KernelParams k{2, 0.25};
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.epochs = 8;
  cfg.seed = 4;
  cfg.auto_clip = false;

  MlpPotential base(2, 8, 21);
  MlpPotential offset = base;
  offset.params()[offset.param_count() - 1] += 5.0;  // e^5 rescale

  const TrainReport rb = train(cfg, x, y, base, k, RiskConfig{});
  const TrainReport ro = train(cfg, x, y, offset, k, RiskConfig{});
  REQUIRE(rb.steps.size() == ro.steps.size());
  for (std::size_t i = 0; i < rb.steps.size(); ++i)
    CHECK(std::abs(rb.steps[i].loss - ro.steps[i].loss) < 1e-8);
}

TEST_CASE("hermite training respects the coefficient ball") {
  const PointCloud x = truncated_normal(64, -3, 3, 31, 1);
  const PointCloud y = truncated_normal(64, -3, 3, 32, 1);
  HermitePotential p = make_hermite_potential(6, 1.0, y);
  TrainConfig cfg;
  cfg.batch_size = 16;
  cfg.epochs = 10;
  cfg.lr = 0.05;
  KernelParams k{1, 1.0};
  (void)train(cfg, x, y, p, k, RiskConfig{});
  double norm_sq = 0.0;
  for (double c : p.params()) norm_sq += c * c;
  CHECK(norm_sq <= p.ball_radius() * (1.0 + 1e-12));
}

TEST_CASE("loss trace csv") {
  TrainReport report;
  report.steps = {{0, 0.5, 0.0}, {1, 0.25, 0.125}};
  const std::string path =
      (std::filesystem::temp_directory_path() / "ermbridge_trace.csv").string();
  write_loss_trace_csv(report, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,loss,clip_active_frac");
  std::getline(in, line);
  CHECK(line == "0,0.5,0");
  std::getline(in, line);
  CHECK(line == "1,0.25,0.125");
  std::filesystem::remove(path);
}

TEST_CASE("train validates batch size against the data") {
  const PointCloud x = swiss_roll(4, 0.0, 1);
  const PointCloud y = s_curve(4, 0.0, 1);
  MlpPotential p(2, 4, 0);
  TrainConfig cfg;
  cfg.batch_size = 8;
  KernelParams k{2, 1.0};
  CHECK_THROWS_AS((void)train(cfg, x, y, p, k, RiskConfig{}), UsageError);
}
