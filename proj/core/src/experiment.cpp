// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include "ermbridge/datasets.hpp"
#include "ermbridge/errors.hpp"
#include "ermbridge/io.hpp"
#include "ermbridge/metrics.hpp"
#include "ermbridge/rng.hpp"

namespace ermbridge {

namespace {

// Seed streams for the per-seed pipeline stages.
enum Stream : std::uint64_t {
  kSourceData = 11,
  kTargetData = 12,
  kPotentialInit = 13,
  kStartDraw = 14,
  kFreshTarget = 15,
  kSamplerNoise = 16,
  kSurrogate = 17,
};

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
  return SplitMix64(seed, stream).next_u64();
}

// Synthetic high-dimensional stand-in for external columnar data: sources
// near the origin, targets a two-lobe mixture along the first axis.
ExperimentData make_surrogate_pair(std::size_t n, int dim,
                                   std::uint64_t seed) {
  ExperimentData data;
  data.source = truncated_normal(n, -2.0, 2.0, derive(seed, kSurrogate), dim);
  SplitMix64 rng(seed, kSurrogate + 1);
  data.target = PointCloud(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = data.target.point(i);
    const double lobe = rng.next_double() < 0.5 ? -1.5 : 1.5;
    for (int c = 0; c < dim; ++c) p[c] = 0.5 * rng.next_gauss();
    p[0] += lobe;
  }
  return data;
}

std::string box_label(double b) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", b);
  return buf;
}

}  // namespace

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

ExperimentData prepare_data(const ExperimentConfig& cfg, std::uint64_t seed) {
  ExperimentData data;
  switch (cfg.experiment) {
    case ExperimentKind::SwissRollToSCurve:
      data.source =
          swiss_roll(cfg.data.n_train, cfg.data.noise, derive(seed, kSourceData));
      data.target =
          s_curve(cfg.data.n_train, cfg.data.noise, derive(seed, kTargetData));
      break;
    case ExperimentKind::GaussGridShift:
      data.source = truncated_normal(cfg.data.n_train, -cfg.data.train_box,
                                     cfg.data.train_box,
                                     derive(seed, kSourceData), 2);
      data.target = gaussian_grid_mixture(
          cfg.data.grid_side, cfg.data.grid_spacing, cfg.data.n_train,
          derive(seed, kTargetData), cfg.data.component_std);
      break;
    case ExperimentKind::CustomData:
      if (cfg.data.source_path.empty() != cfg.data.target_path.empty())
        throw UsageError(
            "custom_data: set both data.source_path and data.target_path, "
            "or neither");
      if (cfg.data.source_path.empty()) {
        data = make_surrogate_pair(cfg.data.n_train, cfg.data.dim, seed);
      } else {
        data.source = load_columnar(cfg.data.source_path);
        data.target = load_columnar(cfg.data.target_path);
        if (data.source.dim != data.target.dim)
          throw UsageError("custom_data: source/target dimension mismatch");
      }
      break;
  }
  return data;
}

std::unique_ptr<LogPotential> build_potential(const ExperimentConfig& cfg,
                                              const ExperimentData& data,
                                              std::uint64_t seed) {
  if (cfg.model.kind == "hermite")
    return std::make_unique<HermitePotential>(make_hermite_potential(
        cfg.model.hermite_degree, cfg.resolved_kernel_variance(), data.target));
  return std::make_unique<MlpPotential>(data.source.dim, cfg.model.hidden_dim,
                                        derive(seed, kPotentialInit));
}

PointCloud sampling_starts(const ExperimentConfig& cfg,
                           const ExperimentData& data, std::uint64_t seed,
                           std::size_t box_index) {
  const std::uint64_t s = derive(seed, kStartDraw + box_index);
  switch (cfg.experiment) {
    case ExperimentKind::SwissRollToSCurve:
      return swiss_roll(cfg.sample.n, cfg.data.noise, s);
    case ExperimentKind::GaussGridShift: {
      const double b = cfg.data.sample_boxes.at(box_index);
      return truncated_normal(cfg.sample.n, -b, b, s, 2);
    }
    case ExperimentKind::CustomData: {
      // Resample rows of the source cloud.
      SplitMix64 rng(s, 1);
      PointCloud out(cfg.sample.n, data.source.dim);
      for (std::size_t i = 0; i < cfg.sample.n; ++i) {
        const auto src = data.source.point(rng.next_below(data.source.size()));
        auto dst = out.point(i);
        std::copy(src.begin(), src.end(), dst.begin());
      }
      return out;
    }
  }
  throw UsageError("sampling_starts: unknown experiment");
}

PointCloud fresh_target_draw(const ExperimentConfig& cfg,
                             const ExperimentData& data, std::uint64_t seed,
                             std::size_t count) {
  const std::uint64_t s = derive(seed, kFreshTarget);
  switch (cfg.experiment) {
    case ExperimentKind::SwissRollToSCurve:
      return s_curve(count, cfg.data.noise, s);
    case ExperimentKind::GaussGridShift:
      return gaussian_grid_mixture(cfg.data.grid_side, cfg.data.grid_spacing,
                                   count, s, cfg.data.component_std);
    case ExperimentKind::CustomData: {
      SplitMix64 rng(s, 2);
      PointCloud out(count, data.target.dim);
      for (std::size_t i = 0; i < count; ++i) {
        const auto src = data.target.point(rng.next_below(data.target.size()));
        auto dst = out.point(i);
        std::copy(src.begin(), src.end(), dst.begin());
      }
      return out;
    }
  }
  throw UsageError("fresh_target_draw: unknown experiment");
}

SdeSchedule resolved_schedule(const ExperimentConfig& cfg) {
  SdeSchedule sched = cfg.sde;
  sched.sigma_min = cfg.resolved_sigma_min();
  sched.validate();
  return sched;
}

KernelParams resolved_kernel(const ExperimentConfig& cfg, int dim) {
  KernelParams k{dim, cfg.resolved_kernel_variance()};
  k.validate();
  return k;
}

RiskConfig resolved_risk(const ExperimentConfig& cfg) {
  RiskConfig risk;
  risk.loss_scale = cfg.train.loss_scale;
  risk.clip = ClipBounds::inactive();
  return risk;
}

std::vector<double> snapshot_times(const ExperimentConfig& cfg) {
  std::vector<double> times;
  times.reserve(cfg.sample.snapshots.size());
  for (double f : cfg.sample.snapshots) times.push_back(f * cfg.sde.horizon);
  return times;
}

TrainReport train_potential(const ExperimentConfig& cfg,
                            const ExperimentData& data, LogPotential& p,
                            std::uint64_t seed) {
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  const KernelParams k = resolved_kernel(cfg, data.source.dim);
  return train(tc, data.source, data.target, p, k, resolved_risk(cfg));
}

SnapshotSet run_sampling(const ExperimentConfig& cfg,
                         const ExperimentData& data, const LogPotential& p,
                         const PointCloud& starts, std::uint64_t seed) {
  PointCloud refs = data.target;
  if (cfg.sample.reference_limit > 0 &&
      cfg.sample.reference_limit < refs.size()) {
    SplitMix64 rng(derive(seed, kSamplerNoise), 3);
    std::vector<std::size_t> idx(refs.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[rng.next_below(i)]);
    idx.resize(cfg.sample.reference_limit);
    refs = refs.gather(idx);
  }
  const DriftContext ctx = make_drift_context(refs, p, resolved_schedule(cfg));
  return sample_bridge(starts, ctx, snapshot_times(cfg),
                       derive(seed, kSamplerNoise));
}

SeedOutcome run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedOutcome outcome;
  outcome.seed = seed;
  const std::string tag = "seed" + std::to_string(seed);

  ExperimentData data = prepare_data(cfg, seed);
  auto potential = build_potential(cfg, data, seed);
  const TrainReport report = train_potential(cfg, data, *potential, seed);
  write_loss_trace_csv(report, out_path(cfg, "loss_trace_" + tag + ".csv"));
  save_potential(*potential, out_path(cfg, "potential_" + tag + ".ckpt"));

  if (!report.epoch_loss.empty())
    outcome.metrics.emplace_back("final_loss", report.epoch_loss.back());

  SlicedW1Config metric_cfg = cfg.metric;
  metric_cfg.seed = derive(seed, 31);

  const std::size_t n_boxes = cfg.experiment == ExperimentKind::GaussGridShift
                                  ? cfg.data.sample_boxes.size()
                                  : 1;
  double first_terminal = 0.0;
  for (std::size_t box = 0; box < n_boxes; ++box) {
    const PointCloud starts = sampling_starts(cfg, data, seed, box);
    const SnapshotSet snaps =
        run_sampling(cfg, data, *potential, starts, seed + box);
    const std::string suffix =
        n_boxes > 1 ? tag + "_box" + box_label(cfg.data.sample_boxes[box]) : tag;
    write_samples_csv(snaps, out_path(cfg, "samples_" + suffix + ".csv"));

    const PointCloud& terminal = snaps.clouds.back();
    const PointCloud target_fresh =
        fresh_target_draw(cfg, data, seed + box, terminal.size());
    const double w1 = sliced_w1(terminal, target_fresh, metric_cfg);
    if (box == 0) first_terminal = w1;
    if (n_boxes > 1)
      outcome.metrics.emplace_back(
          "sliced_w1_terminal_box" + box_label(cfg.data.sample_boxes[box]), w1);

    if (cfg.plots && terminal.dim == 2) {
      for (std::size_t s = 0; s < snaps.times.size(); ++s) {
        char title[64];
        std::snprintf(title, sizeof title, "t = %.3g", snaps.times[s]);
        svg_scatter(snaps.clouds[s], title,
                    out_path(cfg, "scatter_" + suffix + "_t" +
                                      std::to_string(s) + ".svg"));
      }
      Grid2d grid;
      const auto mean = column_means(terminal);
      const auto sd = column_stddevs(terminal);
      grid.x0 = mean[0] - 3.5 * sd[0];
      grid.x1 = mean[0] + 3.5 * sd[0];
      grid.y0 = mean[1] - 3.5 * sd[1];
      grid.y1 = mean[1] + 3.5 * sd[1];
      grid.nx = grid.ny = 96;
      const auto density =
          kde_density(terminal, grid, scott_bandwidth(terminal));
      write_density_csv(grid, density,
                        out_path(cfg, "density_" + suffix + ".csv"));
      svg_heatmap(grid, density, out_path(cfg, "heatmap_" + suffix + ".svg"));
    }
  }
  outcome.metrics.emplace_back("sliced_w1_terminal", first_terminal);
  return outcome;
}

void run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  {
    std::ofstream echo(out_path(cfg, "config.txt"));
    echo << serialize_config(cfg);
  }
  const std::string metrics_path = out_path(cfg, "metrics.csv");
  std::filesystem::remove(metrics_path);

  std::vector<SeedOutcome> outcomes(cfg.seeds.size());
  if (cfg.parallel_seeds && cfg.seeds.size() > 1) {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(cfg.seeds.size());
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
      pool.emplace_back([&, i] {
        try {
          outcomes[i] = run_seed(cfg, cfg.seeds[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  } else {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
      outcomes[i] = run_seed(cfg, cfg.seeds[i]);
  }

  // Per-seed rows first (in seed order), then mean/std aggregates.
  for (const auto& outcome : outcomes)
    for (const auto& [name, value] : outcome.metrics)
      append_metric(metrics_path, name, value, std::to_string(outcome.seed));

  std::vector<std::string> names;
  for (const auto& [name, value] : outcomes.front().metrics)
    names.push_back(name);
  for (const auto& name : names) {
    std::vector<double> vals;
    for (const auto& outcome : outcomes)
      for (const auto& [n, v] : outcome.metrics)
        if (n == name) vals.push_back(v);
    if (vals.empty()) continue;
    const double mean =
        std::accumulate(vals.begin(), vals.end(), 0.0) / vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= vals.size();
    append_metric(metrics_path, name + "_mean", mean, "all");
    append_metric(metrics_path, name + "_std", std::sqrt(var), "all");
  }
}

}  // namespace ermbridge
