// SPDX-License-Identifier: Apache-2.0
//
// scar-channel: LiDAR-driven scatterer recognition and V2V channel synthesis
// Copyright (C) 2026 The scar-channel authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#pragma once

#include "scar/config.hpp"

#include <complex>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace scar
{

// Everything known about one snapshot before any processing.
struct SnapshotScene
{
    int snapshot = 1;
    double time = 0.0;
    RawPointCloud tx_cloud, rx_cloud;
    SensorPose tx_pose, rx_pose;
    Transceiver tx, rx; // antenna positions (world) and velocities (m/s)
    std::optional<std::vector<Vec3>> truth;
    std::vector<VehicleState> vehicles; // traffic only
};

class SceneSource
{
public:
    virtual ~SceneSource() = default;
    virtual int n_snapshots() const = 0;
    virtual double dt_snap() const = 0;
    virtual bool has_truth() const = 0;
    virtual std::string vtd() const = 0;
    virtual std::string link() const { return "Tx-Rx"; }
    // Thread-safe; snapshots are 1-based.
    virtual SnapshotScene load(int snapshot) const = 0;
};

std::unique_ptr<SceneSource> open_scene(const RunConfig &cfg);

struct SnapshotProducts
{
    int snapshot = 1;
    double time = 0.0;
    Transceiver tx, rx;
    std::size_t valid_points = 0;
    FeatureGridMap features;
    GridSpec scatterer_spec;
    std::optional<ScattererGridMap> truth;
    std::optional<ScattererGridMap> predicted;
    std::vector<VehicleState> vehicles;
};

// Preprocess, featurize, rasterize ground truth and (optionally) recognize.
SnapshotProducts process_snapshot(const SnapshotScene &scene, const RunConfig &cfg, bool recognize_scatterers = true);
std::vector<SnapshotProducts> process_all(const SceneSource &source, const RunConfig &cfg,
                                          bool recognize_scatterers = true);

// Channel inputs referencing the feature maps inside `products`.
std::vector<SnapshotInput> channel_inputs(const std::vector<SnapshotProducts> &products);

struct EnsembleStats
{
    std::size_t anchor = 0; // index into the inputs
    std::vector<double> tacf_lag;
    std::vector<std::complex<double>> tacf; // normalized, at fc
    std::vector<double> fcf_lag;            // Hz
    std::vector<std::complex<double>> fcf;  // normalized, anchored at fc
    DpsdCurve dpsd;
};

// Sub-snapshot frames at the anchor: offsets 0, step, ..., (lags-1) step.
std::vector<Frame> tacf_frames(std::size_t anchor, const StatsConfig &stats);
std::size_t anchor_index(const StatsConfig &stats, std::size_t n_inputs);

// Per-realization pieces of the ensemble statistics.
struct RealizationStats
{
    TvtfGrid tacf; // lags x {fc}
    TvtfGrid fcf;  // {anchor} x band
};

RealizationStats realization_stats(std::span<const SnapshotInput> inputs, const RunConfig &cfg, std::size_t realization);
EnsembleStats ensemble_stats(std::span<const RealizationStats> parts, const RunConfig &cfg, std::size_t anchor);

// Commands. Each writes into `<out>.partial` and renames it to `out` on
// success; a failed command leaves no output behind.
void cmd_synth(const RunConfig &cfg);
void cmd_featurize(const RunConfig &cfg);
void cmd_recognize(const RunConfig &cfg);
void cmd_simulate(const RunConfig &cfg);
void cmd_eval(const std::filesystem::path &pred_dir, const std::filesystem::path &truth_dir,
              const std::filesystem::path &out);

} // namespace scar
