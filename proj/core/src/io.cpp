// SPDX-License-Identifier: Apache-2.0
#include "ermbridge/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "ermbridge/datasets.hpp"
#include "ermbridge/errors.hpp"

namespace ermbridge {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_samples_csv(const SnapshotSet& snapshots, const std::string& path) {
  if (snapshots.clouds.empty())
    throw UsageError("write_samples_csv: empty snapshot set");
  std::ofstream out(path);
  if (!out) throw UsageError("write_samples_csv: cannot open '" + path + "'");
  const int d = snapshots.clouds.front().dim;
  out << "t,traj_id";
  for (int c = 0; c < d; ++c) out << ",x" << c;
  out << '\n';
  for (std::size_t s = 0; s < snapshots.times.size(); ++s) {
    const auto& cloud = snapshots.clouds[s];
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      out << fmt(snapshots.times[s]) << ',' << i;
      const auto p = cloud.point(i);
      for (int c = 0; c < d; ++c) out << ',' << fmt(p[c]);
      out << '\n';
    }
  }
}

SnapshotSet read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("read_samples_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("read_samples_csv: empty file", 1);
  long lineno = 1;
  std::map<double, PointCloud> by_time;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      try {
        fields.push_back(std::stod(line.substr(pos, comma - pos)));
      } catch (const std::exception&) {
        throw ParseError("read_samples_csv: bad field", lineno);
      }
      pos = comma + 1;
    }
    if (fields.size() < 3)
      throw ParseError("read_samples_csv: row too short", lineno);
    const double t = fields[0];
    std::vector<double> coords(fields.begin() + 2, fields.end());
    by_time[t].append(coords);
  }
  SnapshotSet out;
  for (auto& [t, cloud] : by_time) {
    out.times.push_back(t);
    out.clouds.push_back(std::move(cloud));
  }
  return out;
}

void append_metric(const std::string& path, const std::string& name,
                   double value, const std::string& seed) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw UsageError("append_metric: cannot open '" + path + "'");
  if (fresh) out << "name,value,seed\n";
  out << name << ',' << fmt(value) << ',' << seed << '\n';
}

void write_density_csv(const Grid2d& grid, const std::vector<double>& density,
                       const std::string& path) {
  if (density.size() != grid.count())
    throw UsageError("write_density_csv: grid/value size mismatch");
  std::ofstream out(path);
  if (!out) throw UsageError("write_density_csv: cannot open '" + path + "'");
  out << "x,y,density\n";
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j)
      out << fmt(grid.node_x(i)) << ',' << fmt(grid.node_y(j)) << ','
          << fmt(density[static_cast<std::size_t>(i) * grid.ny + j]) << '\n';
}

namespace {

struct Rgb {
  double r, g, b;
};

// Compact dark-to-bright ramp for the heatmap.
Rgb ramp(double t) {
  static const Rgb stops[] = {{0.27, 0.00, 0.33},
                              {0.23, 0.32, 0.55},
                              {0.13, 0.57, 0.55},
                              {0.37, 0.79, 0.38},
                              {0.99, 0.91, 0.14}};
  t = std::clamp(t, 0.0, 1.0) * 3.999;
  const int k = static_cast<int>(t);
  const double f = t - k;
  return {stops[k].r + f * (stops[k + 1].r - stops[k].r),
          stops[k].g + f * (stops[k + 1].g - stops[k].g),
          stops[k].b + f * (stops[k + 1].b - stops[k].b)};
}

int channel(double v) {
  return static_cast<int>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

}  // namespace

void svg_scatter(const PointCloud& cloud, const std::string& title,
                 const std::string& path) {
  cloud.validate();
  if (cloud.dim < 2) throw UsageError("svg_scatter: cloud must be at least 2-D");
  double x0 = cloud.point(0)[0], x1 = x0, y0 = cloud.point(0)[1], y1 = y0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    x0 = std::min(x0, p[0]);
    x1 = std::max(x1, p[0]);
    y0 = std::min(y0, p[1]);
    y1 = std::max(y1, p[1]);
  }
  const double pad_x = 0.05 * (x1 - x0 + 1e-9);
  const double pad_y = 0.05 * (y1 - y0 + 1e-9);
  x0 -= pad_x;
  x1 += pad_x;
  y0 -= pad_y;
  y1 += pad_y;
  const double w = 600.0, h = 600.0;
  std::ofstream out(path);
  if (!out) throw UsageError("svg_scatter: cannot open '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" "
         "height=\"620\" viewBox=\"0 0 600 620\">\n";
  out << "<text x=\"10\" y=\"16\" font-family=\"sans-serif\" font-size=\"14\">"
      << title << "</text>\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    const double sx = (p[0] - x0) / (x1 - x0) * w;
    const double sy = 20.0 + (1.0 - (p[1] - y0) / (y1 - y0)) * h;
    out << "<circle cx=\"" << fmt(sx) << "\" cy=\"" << fmt(sy)
        << "\" r=\"1.6\" fill=\"#33658a\" fill-opacity=\"0.55\"/>\n";
  }
  out << "</svg>\n";
}

void svg_heatmap(const Grid2d& grid, const std::vector<double>& density,
                 const std::string& path) {
  if (density.size() != grid.count())
    throw UsageError("svg_heatmap: grid/value size mismatch");
  double vmax = 0.0;
  for (double v : density) vmax = std::max(vmax, v);
  if (vmax <= 0.0) vmax = 1.0;
  const double w = 600.0, h = 600.0;
  const double cw = w / grid.nx, ch = h / grid.ny;
  std::ofstream out(path);
  if (!out) throw UsageError("svg_heatmap: cannot open '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" "
         "height=\"600\" viewBox=\"0 0 600 600\">\n";
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const double v =
          density[static_cast<std::size_t>(i) * grid.ny + j] / vmax;
      const Rgb c = ramp(v);
      out << "<rect x=\"" << fmt(i * cw) << "\" y=\"" << fmt(h - (j + 1) * ch)
          << "\" width=\"" << fmt(cw + 0.5) << "\" height=\"" << fmt(ch + 0.5)
          << "\" fill=\"rgb(" << channel(c.r) << ',' << channel(c.g) << ','
          << channel(c.b) << ")\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace ermbridge
