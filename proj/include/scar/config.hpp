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

#include "scar/channel.hpp"
#include "scar/preprocess.hpp"
#include "scar/recognize.hpp"
#include "scar/stats.hpp"
#include "scar/synth.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace scar
{

enum class SceneKind
{
    Synth, // generated in memory from SynthConfig and the run seed
    Files  // directory in the layout written by `synth`
};

struct SceneConfig
{
    SceneKind kind = SceneKind::Synth;
    std::filesystem::path dir; // Files
    SynthConfig synth;         // Synth
};

struct GridConfig
{
    int gx = 80, gy = 80; // feature raster
    int sx = 10, sy = 10; // scatterer raster
};

struct StatsConfig
{
    std::size_t realizations = 100;
    double vartheta = 0.5;
    double bandwidth = 2e9;       // Hz
    std::size_t freq_points = 41; // FCF grid across the band
    int anchor_snapshot = 0;      // 0 = middle of the run
    std::size_t tacf_lags = 128;
    double tacf_step = 1e-4; // s
    std::size_t dpsd_padding = 8;
    Window window = Window::Hann;
};

struct RunConfig
{
    SceneConfig scene;
    PreprocessConfig preprocess;
    GridConfig grid;
    RecognizerKind recognizer = RecognizerKind::Oracle;
    HeuristicParams heuristic;
    std::filesystem::path external_dir;
    ChannelConfig channel;
    StatsConfig stats;
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::filesystem::path out = "out";

    void validate() const;
};

// JSON with // and /* */ comments. Every key is optional; unknown keys are
// rejected so that typos do not silently fall back to defaults. Relative
// paths resolve against `base`.
RunConfig config_from_json(const std::string &text, const std::filesystem::path &base = {});
RunConfig load_config(const std::filesystem::path &path);
// Effective configuration, every field spelled out.
std::string config_to_json(const RunConfig &cfg);

} // namespace scar
