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

#include "scar/gridmap.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace scar
{

enum class RecognizerKind
{
    Oracle,    // ground-truth raster
    Heuristic, // density/distance prior
    External   // pred_<snapshot>.sgm1 written by the network
};

RecognizerKind parse_recognizer(const std::string &name);
const char *recognizer_name(RecognizerKind kind) noexcept;

enum class ScattererClass
{
    Static,
    Dynamic,
    Unknown
};

const char *class_name(ScattererClass c) noexcept;

struct Scatterer
{
    Vec3 position = Vec3::Zero();
    ScattererClass cls = ScattererClass::Unknown;
    Vec3 velocity = Vec3::Zero(); // m/s, zero unless dynamic
    std::optional<int> cluster_id;
    std::uint64_t key = 0; // (cell index << 32) | ordinal; stable across snapshots
    int cell = 0;
};

struct ClassifierConfig
{
    double h_th = 1.5; // m

    void validate() const;
};

struct HeuristicParams
{
    double alpha = 0.02;  // scatterers/m^2 at d = d_ref
    double rho0 = 1.0;    // points/m^2 below which a cell is treated as empty
    double d_ref = 30.0;  // m

    void validate() const;
};

struct RecognizeContext
{
    int snapshot = 1;
    GridSpec scatterer_spec;
    const ScattererGridMap *truth = nullptr;     // Oracle
    HeuristicParams heuristic;                   // Heuristic
    std::filesystem::path external_dir;          // External
};

ScattererGridMap recognize(const FeatureGridMap &features, RecognizerKind kind, const RecognizeContext &ctx);

// Scatterer count per cell, rounding half away from zero.
std::vector<int> densities_to_counts(const ScattererGridMap &map);

struct CellOverlap
{
    std::size_t feature_index = 0;
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    double area() const noexcept { return (x1 - x0) * (y1 - y0); }
};

// Feature cells overlapping scatterer cell (i, j), with the overlap rectangles.
std::vector<CellOverlap> cell_overlaps(const GridSpec &features, const GridSpec &scatterers, int i, int j);

struct VehicleState
{
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero(); // m/s
};

// Places counts[c] scatterers in every scatterer cell. Points go to the
// occupied feature cells overlapping the cell (area-weighted, uniform inside
// each overlap) and take the class of that feature cell's height; a cell
// without any occupied overlap gets unknown scatterers spread over the whole
// cell at z = 0. Draws are keyed on (seed, cell, ordinal) only.
std::vector<Scatterer> materialize(std::span<const int> counts, const GridSpec &scatterer_spec,
                                   const FeatureGridMap &features, const ClassifierConfig &cfg, std::uint64_t seed,
                                   std::span<const VehicleState> vehicles = {});

} // namespace scar
