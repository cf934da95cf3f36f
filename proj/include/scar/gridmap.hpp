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

#include "scar/common.hpp"
#include "scar/preprocess.hpp"

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace scar
{

// Densities below this are treated as zero by the metrics and classifiers.
inline constexpr double kZeroDensity = 1e-12;

struct Bounds
{
    double x_min = 0.0;
    double x_max = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;

    bool operator==(const Bounds &) const = default;
};

// Uniform raster over a rectangle. Cells are half-open [lo, hi) along each
// axis, except that the last cell also owns the upper boundary.
struct GridSpec
{
    Bounds bounds;
    int nx = 1; // cells along x (rows)
    int ny = 1; // cells along y (cols)

    static GridSpec make(const Bounds &bounds, int nx, int ny);

    double cell_x() const noexcept { return (bounds.x_max - bounds.x_min) / nx; }
    double cell_y() const noexcept { return (bounds.y_max - bounds.y_min) / ny; }
    double cell_area() const noexcept { return cell_x() * cell_y(); }
    double x_edge(int i) const noexcept { return i >= nx ? bounds.x_max : bounds.x_min + i * cell_x(); }
    double y_edge(int j) const noexcept { return j >= ny ? bounds.y_max : bounds.y_min + j * cell_y(); }
    Vec3 center(int i, int j) const noexcept
    {
        return Vec3(0.5 * (x_edge(i) + x_edge(i + 1)), 0.5 * (y_edge(j) + y_edge(j + 1)), 0.0);
    }
    std::size_t size() const noexcept { return std::size_t(nx) * std::size_t(ny); }
    std::size_t index(int i, int j) const noexcept { return std::size_t(i) * std::size_t(ny) + std::size_t(j); }
    bool same_layout(const GridSpec &o) const noexcept { return bounds == o.bounds && nx == o.nx && ny == o.ny; }

    // Cell owning (x, y), or nothing when outside the rectangle.
    std::optional<std::pair<int, int>> locate(double x, double y) const noexcept;
};

// Row-major rows x cols layer.
struct Raster
{
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Raster() = default;
    Raster(int r, int c, double fill = 0.0) : rows(r), cols(c), data(std::size_t(r) * std::size_t(c), fill) {}
    double &at(int r, int c) { return data[std::size_t(r) * std::size_t(cols) + std::size_t(c)]; }
    double at(int r, int c) const { return data[std::size_t(r) * std::size_t(cols) + std::size_t(c)]; }
};

struct FeatureGridMap
{
    GridSpec spec;
    Raster density;  // points per m^2
    Raster height;   // max sensor-frame height, 0 for empty cells
    Raster position; // mean distance of the cell center to Tx and Rx
    std::vector<int> counts;
    std::size_t points_out_of_bounds = 0;
};

struct ScattererGridMap
{
    GridSpec spec;
    Raster density; // scatterers per m^2
    std::size_t dropped_out_of_bounds = 0;
    std::size_t dropped_outside_vr = 0;
};

// Tight bounding rectangle of the valid points.
Bounds bounds_of(const ValidPointCloud &cloud);
Bounds bounds_of(std::span<const Vec3> points);

FeatureGridMap featurize(const ValidPointCloud &cloud, const Vec3 &tx_pos, const Vec3 &rx_pos, int gx, int gy);
// Same, on a caller-fixed raster; points outside it are counted and skipped.
FeatureGridMap featurize_fixed(const ValidPointCloud &cloud, const Bounds &bounds, const Vec3 &tx_pos,
                               const Vec3 &rx_pos, int gx, int gy);

ScattererGridMap rasterize_scatterers(std::span<const Vec3> scatterers, const Bounds &bounds, int sx, int sy,
                                      const VisibilityRegion &vr);

struct Confusion
{
    std::size_t zero_zero = 0;       // truth 0, prediction 0
    std::size_t nonzero_nonzero = 0; // truth non-0, prediction non-0
    std::size_t nonzero_zero = 0;    // truth non-0, prediction 0
    std::size_t zero_nonzero = 0;    // truth 0, prediction non-0

    std::size_t total() const noexcept { return zero_zero + nonzero_nonzero + nonzero_zero + zero_nonzero; }
    Confusion &operator+=(const Confusion &o) noexcept
    {
        zero_zero += o.zero_zero;
        nonzero_nonzero += o.nonzero_nonzero;
        nonzero_zero += o.nonzero_zero;
        zero_nonzero += o.zero_nonzero;
        return *this;
    }
};

struct RegressionSums
{
    double abs_error = 0.0;
    double truth = 0.0;
};

Confusion confusion(const ScattererGridMap &pred, const ScattererGridMap &truth);
RegressionSums regression_sums(const ScattererGridMap &pred, const ScattererGridMap &truth);

// Fraction of cells whose zero / non-zero status agrees.
double metric_cla(const ScattererGridMap &pred, const ScattererGridMap &truth);
// 1 - sum|pred - truth| / sum truth over cells where truth is non-zero.
double metric_reg(const ScattererGridMap &pred, const ScattererGridMap &truth);

} // namespace scar
