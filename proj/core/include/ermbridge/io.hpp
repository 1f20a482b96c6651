// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ermbridge/metrics.hpp"
#include "ermbridge/point_cloud.hpp"
#include "ermbridge/sampler.hpp"

namespace ermbridge {

// "t,traj_id,x0,x1,..." rows, one per (snapshot, trajectory).
void write_samples_csv(const SnapshotSet& snapshots, const std::string& path);

// Reads a samples CSV back into per-snapshot clouds.
SnapshotSet read_samples_csv(const std::string& path);

// Appends "name,value,seed" (writing the header first if the file is new).
void append_metric(const std::string& path, const std::string& name,
                   double value, const std::string& seed);

// "x,y,density" rows over the full lattice.
void write_density_csv(const Grid2d& grid, const std::vector<double>& density,
                       const std::string& path);

// Minimal plot emitters; CSV stays the canonical artifact.
void svg_scatter(const PointCloud& cloud, const std::string& title,
                 const std::string& path);
void svg_heatmap(const Grid2d& grid, const std::vector<double>& density,
                 const std::string& path);

}  // namespace ermbridge
