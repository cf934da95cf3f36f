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
#include <iosfwd>
#include <string>
#include <vector>

namespace scar
{

// Multi-layer float32 raster. File layout: "SGM1", u32 layers, u32 rows,
// u32 cols (little-endian), then layers*rows*cols little-endian float32,
// layer-major then row-major.
struct Sgm1
{
    std::uint32_t layers = 0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<float> data;

    float at(std::uint32_t l, std::uint32_t r, std::uint32_t c) const
    {
        return data[(std::size_t(l) * rows + r) * cols + c];
    }
};

void write_sgm1(std::ostream &out, const Sgm1 &grid);
Sgm1 read_sgm1(std::istream &in);
// Written to a temporary name and renamed, so readers never see a torn file.
void write_sgm1(const std::filesystem::path &path, const Sgm1 &grid);
Sgm1 read_sgm1(const std::filesystem::path &path);

struct Sgm1Sidecar
{
    int snapshot = 1;
    Bounds bounds;
    Vec3 tx = Vec3::Zero();
    Vec3 rx = Vec3::Zero();
    std::vector<std::string> layers;
};

std::string sidecar_to_json(const Sgm1Sidecar &meta);
Sgm1Sidecar sidecar_from_json(const std::string &text);
void write_sidecar(const std::filesystem::path &path, const Sgm1Sidecar &meta);
Sgm1Sidecar read_sidecar(const std::filesystem::path &path);

// Density / height / position layers, in that order.
Sgm1 to_sgm1(const FeatureGridMap &features);
Sgm1 to_sgm1(const ScattererGridMap &scatterers);
// Single-layer file onto the given raster. Throws DimMismatch on shape and
// NegativeDensity on any negative or non-finite cell.
ScattererGridMap scatterer_map_from_sgm1(const Sgm1 &grid, const GridSpec &spec);

enum class Split
{
    Train,
    Val,
    Test
};

const char *split_name(Split s) noexcept;
// 3:1:1 assignment keyed on a stable hash of the sample id.
Split split_for(const std::string &sample_id) noexcept;

struct ManifestEntry
{
    std::string id;
    int snapshot = 1;
    std::string link;
    std::string features; // relative to the manifest
    std::string truth;
    std::string meta;
    Split split = Split::Train;
};

struct Manifest
{
    std::string format = "SGM1";
    std::vector<std::uint32_t> feature_shape{3, 80, 80};
    std::vector<std::uint32_t> truth_shape{1, 10, 10};
    std::string vtd;
    std::vector<ManifestEntry> samples;
};

std::string manifest_to_json(const Manifest &manifest);
Manifest manifest_from_json(const std::string &text);

} // namespace scar
