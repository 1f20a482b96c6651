// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "ermbridge/errors.hpp"

namespace ermbridge {

double ExperimentConfig::resolved_kernel_variance() const {
  if (kernel_variance > 0.0) return kernel_variance;
  return sde.sigma_end * sde.sigma_end * sde.horizon;
}

double ExperimentConfig::resolved_sigma_min() const {
  if (sde.kind != ScheduleKind::Cosine) return sde.sigma_min;
  return sde.sigma_min > 0.0 ? sde.sigma_min : 0.01 * sde.sigma_end;
}

void ExperimentConfig::validate() const {
  train.validate();
  SdeSchedule resolved = sde;
  resolved.sigma_min = resolved_sigma_min();
  resolved.validate();
  metric.validate();
  if (seeds.empty()) throw UsageError("config: seeds must be nonempty");
  if (out_dir.empty()) throw UsageError("config: out.dir must be nonempty");
  if (data.n_train < 2) throw UsageError("config: data.n_train must be >= 2");
  if (sample.n < 1) throw UsageError("config: sample.n must be >= 1");
  if (sample.snapshots.empty())
    throw UsageError("config: sample.snapshots must be nonempty");
  for (double f : sample.snapshots) {
    if (f < 0.0 || f > 1.0)
      throw UsageError("config: snapshot fractions must lie in [0, 1]");
    const double pos = f * sde.steps;
    if (std::abs(pos - std::llround(pos)) > 1e-9)
      throw UsageError(
          "config: sample.snapshots must lie on the sde.steps grid");
  }
  if (model.kind != "mlp" && model.kind != "hermite")
    throw UsageError("config: model.kind must be 'mlp' or 'hermite'");
  if (model.hidden_dim < 1) throw UsageError("config: model.hidden_dim >= 1");
  if (model.hermite_degree < 0)
    throw UsageError("config: model.hermite_degree >= 0");
  if (experiment == ExperimentKind::GaussGridShift) {
    if (data.sample_boxes.empty())
      throw UsageError("config: data.sample_boxes must be nonempty");
    for (double b : data.sample_boxes)
      if (!(b > 0.0)) throw UsageError("config: sample boxes must be positive");
  }
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  switch (kind) {
    case ExperimentKind::SwissRollToSCurve:
      cfg.train.batch_size = 1000;
      cfg.train.lr = 2e-3;
      cfg.train.epochs = 1500;
      cfg.train.loss_scale = 1.0;
      cfg.model.hidden_dim = 64;
      cfg.sde.sigma_end = 0.5;
      cfg.sde.steps = 100;
      cfg.data.n_train = 2000;
      cfg.data.noise = 0.02;
      cfg.sample.n = 2000;
      cfg.sample.snapshots = {0.0, 0.25, 0.5, 0.75, 1.0};
      break;
    case ExperimentKind::GaussGridShift:
      cfg.train.batch_size = 64;
      cfg.train.lr = 5e-4;
      cfg.train.epochs = 140;
      cfg.train.loss_scale = 0.11;
      cfg.model.hidden_dim = 128;
      cfg.sde.sigma_end = 0.9;
      cfg.sde.steps = 100;
      // Grid targets reach out to radius ~11; an entropic scale of
      // sigma_end^2 * horizon = 6 keeps the log-potential range learnable
      // at batch size 64 (at scale ~1 the far-field range exceeds what the
      // minibatch logsumexp can resolve).
      cfg.sde.horizon = 6.0 / (0.9 * 0.9);
      cfg.data.n_train = 3000;
      cfg.data.sample_boxes = {1.0, 2.0, 5.0};
      cfg.sample.n = 2000;
      cfg.sample.snapshots = {0.0, 0.5, 1.0};
      break;
    case ExperimentKind::CustomData:
      cfg.train.batch_size = 2048;
      cfg.train.lr = 1e-4;
      cfg.train.epochs = 141;
      cfg.train.loss_scale = 196.5431;
      cfg.model.hidden_dim = 2048;
      cfg.sde.sigma_end = 0.4216;
      cfg.sde.steps = 100;
      cfg.data.n_train = 4096;
      cfg.sample.n = 1024;
      cfg.sample.snapshots = {0.0, 0.5, 1.0};
      break;
  }
  return cfg;
}

const char* experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::SwissRollToSCurve:
      return "swissroll_to_scurve";
    case ExperimentKind::GaussGridShift:
      return "gauss_grid_shift";
    case ExperimentKind::CustomData:
      return "custom_data";
  }
  return "unknown";
}

namespace {

ExperimentKind experiment_from_name(const std::string& name, long line) {
  if (name == "swissroll_to_scurve") return ExperimentKind::SwissRollToSCurve;
  if (name == "gauss_grid_shift") return ExperimentKind::GaussGridShift;
  if (name == "custom_data") return ExperimentKind::CustomData;
  throw ParseError("config: unknown experiment '" + name + "'", line);
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& v, long line) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError("config: expected a number, got '" + v + "'", line);
  return x;
}

long long parse_int(const std::string& v, long line) {
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    throw ParseError("config: expected an integer, got '" + v + "'", line);
  return x;
}

bool parse_bool(const std::string& v, long line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError("config: expected true/false, got '" + v + "'", line);
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& v, long line, F item) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t comma = v.find(',', pos);
    if (comma == std::string::npos) comma = v.size();
    const std::string field = trim(v.substr(pos, comma - pos));
    if (field.empty())
      throw ParseError("config: empty list element", line);
    out.push_back(item(field, line));
    pos = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_same_v<T, double>)
      s += fmt(xs[i]);
    else
      s += std::to_string(xs[i]);
  }
  return s;
}

void apply_key(ExperimentConfig& cfg, const std::string& key,
               const std::string& value, long line) {
  if (key == "experiment") {
    // Handled in the first pass; accepted here so re-parsing works.
    return;
  }
  if (key == "seeds") {
    cfg.seeds = parse_list<std::uint64_t>(
        value, line, [](const std::string& s, long ln) {
          const long long v = parse_int(s, ln);
          if (v < 0) throw ParseError("config: seed must be >= 0", ln);
          return static_cast<std::uint64_t>(v);
        });
  } else if (key == "out.dir") {
    cfg.out_dir = value;
  } else if (key == "plots") {
    cfg.plots = parse_bool(value, line);
  } else if (key == "parallel_seeds") {
    cfg.parallel_seeds = parse_bool(value, line);
  } else if (key == "kernel.variance") {
    cfg.kernel_variance = parse_double(value, line);
  } else if (key == "model.kind") {
    cfg.model.kind = value;
  } else if (key == "model.hidden_dim") {
    cfg.model.hidden_dim = static_cast<int>(parse_int(value, line));
  } else if (key == "model.hermite_degree") {
    cfg.model.hermite_degree = static_cast<int>(parse_int(value, line));
  } else if (key == "train.batch_size") {
    cfg.train.batch_size = static_cast<std::size_t>(parse_int(value, line));
  } else if (key == "train.lr") {
    cfg.train.lr = parse_double(value, line);
  } else if (key == "train.epochs") {
    cfg.train.epochs = static_cast<int>(parse_int(value, line));
  } else if (key == "train.loss_scale") {
    cfg.train.loss_scale = parse_double(value, line);
  } else if (key == "train.optimizer") {
    if (value == "adam")
      cfg.train.optimizer = OptimizerKind::AdaptiveMoment;
    else if (value == "sgd")
      cfg.train.optimizer = OptimizerKind::Sgd;
    else
      throw ParseError("config: train.optimizer must be adam or sgd", line);
  } else if (key == "train.auto_clip") {
    cfg.train.auto_clip = parse_bool(value, line);
  } else if (key == "sde.horizon") {
    cfg.sde.horizon = parse_double(value, line);
  } else if (key == "sde.steps") {
    cfg.sde.steps = static_cast<int>(parse_int(value, line));
  } else if (key == "sde.sigma_end") {
    cfg.sde.sigma_end = parse_double(value, line);
  } else if (key == "sde.sigma_min") {
    cfg.sde.sigma_min = parse_double(value, line);
  } else if (key == "sde.kind") {
    if (value == "constant")
      cfg.sde.kind = ScheduleKind::Constant;
    else if (value == "cosine")
      cfg.sde.kind = ScheduleKind::Cosine;
    else
      throw ParseError("config: sde.kind must be constant or cosine", line);
  } else if (key == "metric.projections") {
    cfg.metric.n_projections = static_cast<int>(parse_int(value, line));
  } else if (key == "data.n_train") {
    cfg.data.n_train = static_cast<std::size_t>(parse_int(value, line));
  } else if (key == "data.noise") {
    cfg.data.noise = parse_double(value, line);
  } else if (key == "data.grid_side") {
    cfg.data.grid_side = static_cast<std::size_t>(parse_int(value, line));
  } else if (key == "data.grid_spacing") {
    cfg.data.grid_spacing = parse_double(value, line);
  } else if (key == "data.component_std") {
    cfg.data.component_std = parse_double(value, line);
  } else if (key == "data.train_box") {
    cfg.data.train_box = parse_double(value, line);
  } else if (key == "data.sample_boxes") {
    cfg.data.sample_boxes =
        parse_list<double>(value, line, [](const std::string& s, long ln) {
          return parse_double(s, ln);
        });
  } else if (key == "data.source_path") {
    cfg.data.source_path = value;
  } else if (key == "data.target_path") {
    cfg.data.target_path = value;
  } else if (key == "data.dim") {
    cfg.data.dim = static_cast<int>(parse_int(value, line));
  } else if (key == "sample.n") {
    cfg.sample.n = static_cast<std::size_t>(parse_int(value, line));
  } else if (key == "sample.snapshots") {
    cfg.sample.snapshots =
        parse_list<double>(value, line, [](const std::string& s, long ln) {
          return parse_double(s, ln);
        });
  } else if (key == "sample.reference_limit") {
    cfg.sample.reference_limit =
        static_cast<std::size_t>(parse_int(value, line));
  } else {
    throw ParseError("config: unknown key '" + key + "'", line);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  struct Entry {
    std::string value;
    long line;
  };
  std::vector<std::pair<std::string, Entry>> entries;
  std::map<std::string, long> seen;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ParseError("config: expected 'key = value'", lineno);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ParseError("config: empty key", lineno);
    if (auto it = seen.find(key); it != seen.end())
      throw ParseError("config: duplicate key '" + key + "' (first at line " +
                           std::to_string(it->second) + ")",
                       lineno);
    seen[key] = lineno;
    entries.emplace_back(key, Entry{value, lineno});
  }

  ExperimentKind kind = ExperimentKind::SwissRollToSCurve;
  for (const auto& [key, entry] : entries)
    if (key == "experiment") kind = experiment_from_name(entry.value, entry.line);
  ExperimentConfig cfg = default_config(kind);
  for (const auto& [key, entry] : entries)
    apply_key(cfg, key, entry.value, entry.line);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("load_config_file: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "experiment = " << experiment_name(cfg.experiment) << '\n';
  out << "seeds = " << join(cfg.seeds) << '\n';
  out << "out.dir = " << cfg.out_dir << '\n';
  out << "plots = " << (cfg.plots ? "true" : "false") << '\n';
  out << "parallel_seeds = " << (cfg.parallel_seeds ? "true" : "false") << '\n';
  out << "kernel.variance = " << fmt(cfg.kernel_variance) << '\n';
  out << "model.kind = " << cfg.model.kind << '\n';
  out << "model.hidden_dim = " << cfg.model.hidden_dim << '\n';
  out << "model.hermite_degree = " << cfg.model.hermite_degree << '\n';
  out << "train.batch_size = " << cfg.train.batch_size << '\n';
  out << "train.lr = " << fmt(cfg.train.lr) << '\n';
  out << "train.epochs = " << cfg.train.epochs << '\n';
  out << "train.loss_scale = " << fmt(cfg.train.loss_scale) << '\n';
  out << "train.optimizer = "
      << (cfg.train.optimizer == OptimizerKind::AdaptiveMoment ? "adam" : "sgd")
      << '\n';
  out << "train.auto_clip = " << (cfg.train.auto_clip ? "true" : "false")
      << '\n';
  out << "sde.horizon = " << fmt(cfg.sde.horizon) << '\n';
  out << "sde.steps = " << cfg.sde.steps << '\n';
  out << "sde.sigma_end = " << fmt(cfg.sde.sigma_end) << '\n';
  out << "sde.sigma_min = " << fmt(cfg.sde.sigma_min) << '\n';
  out << "sde.kind = "
      << (cfg.sde.kind == ScheduleKind::Cosine ? "cosine" : "constant") << '\n';
  out << "metric.projections = " << cfg.metric.n_projections << '\n';
  out << "data.n_train = " << cfg.data.n_train << '\n';
  out << "data.noise = " << fmt(cfg.data.noise) << '\n';
  out << "data.grid_side = " << cfg.data.grid_side << '\n';
  out << "data.grid_spacing = " << fmt(cfg.data.grid_spacing) << '\n';
  out << "data.component_std = " << fmt(cfg.data.component_std) << '\n';
  out << "data.train_box = " << fmt(cfg.data.train_box) << '\n';
  out << "data.sample_boxes = " << join(cfg.data.sample_boxes) << '\n';
  if (!cfg.data.source_path.empty())
    out << "data.source_path = " << cfg.data.source_path << '\n';
  if (!cfg.data.target_path.empty())
    out << "data.target_path = " << cfg.data.target_path << '\n';
  out << "data.dim = " << cfg.data.dim << '\n';
  out << "sample.n = " << cfg.sample.n << '\n';
  out << "sample.snapshots = " << join(cfg.sample.snapshots) << '\n';
  out << "sample.reference_limit = " << cfg.sample.reference_limit << '\n';
  return out.str();
}

}  // namespace ermbridge
