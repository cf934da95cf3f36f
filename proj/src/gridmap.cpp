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


#include "scar/gridmap.hpp"
#include "scar/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace scar
{

GridSpec GridSpec::make(const Bounds &bounds, int nx, int ny)
{
    if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min))
        throw DegenerateBounds("grid bounds must have positive extent");
    if (nx < 1 || ny < 1)
        throw InvalidConfig("grid dimensions must be >= 1");
    return GridSpec{bounds, nx, ny};
}

namespace
{

// floor() guess corrected against the explicit edges so that membership
// agrees with [edge(i), edge(i+1)) exactly.
int locate_axis(double v, double lo, double hi, int n, double cell, double (GridSpec::*edge)(int) const noexcept,
                const GridSpec &spec)
{
    int i = static_cast<int>(std::floor((v - lo) / cell));
    i = std::clamp(i, 0, n - 1);
    while (i > 0 && v < (spec.*edge)(i))
        --i;
    while (i < n - 1 && v >= (spec.*edge)(i + 1))
        ++i;
    (void)hi;
    return i;
}

} // namespace

std::optional<std::pair<int, int>> GridSpec::locate(double x, double y) const noexcept
{
    if (!(x >= bounds.x_min && x <= bounds.x_max && y >= bounds.y_min && y <= bounds.y_max))
        return std::nullopt;
    const int i = locate_axis(x, bounds.x_min, bounds.x_max, nx, cell_x(), &GridSpec::x_edge, *this);
    const int j = locate_axis(y, bounds.y_min, bounds.y_max, ny, cell_y(), &GridSpec::y_edge, *this);
    return std::make_pair(i, j);
}

Bounds bounds_of(std::span<const Vec3> points)
{
    if (points.size() < 2)
        throw DegenerateBounds("bounds need at least two points");
    Bounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const Vec3 &p : points)
    {
        b.x_min = std::min(b.x_min, p.x());
        b.x_max = std::max(b.x_max, p.x());
        b.y_min = std::min(b.y_min, p.y());
        b.y_max = std::max(b.y_max, p.y());
    }
    if (!(b.x_max > b.x_min))
        throw DegenerateBounds("all points share the same x");
    if (!(b.y_max > b.y_min))
        throw DegenerateBounds("all points share the same y");
    return b;
}

Bounds bounds_of(const ValidPointCloud &cloud) { return bounds_of(std::span<const Vec3>(cloud.points)); }

FeatureGridMap featurize_fixed(const ValidPointCloud &cloud, const Bounds &bounds, const Vec3 &tx_pos,
                               const Vec3 &rx_pos, int gx, int gy)
{
    FeatureGridMap fm;
    fm.spec = GridSpec::make(bounds, gx, gy);
    fm.density = Raster(gx, gy);
    fm.height = Raster(gx, gy);
    fm.position = Raster(gx, gy);
    fm.counts.assign(fm.spec.size(), 0);

    for (std::size_t k = 0; k < cloud.points.size(); ++k)
    {
        const auto cell = fm.spec.locate(cloud.points[k].x(), cloud.points[k].y());
        if (!cell)
        {
            ++fm.points_out_of_bounds;
            continue;
        }
        const std::size_t idx = fm.spec.index(cell->first, cell->second);
        const double h = cloud.heights[k];
        if (fm.counts[idx] == 0 || h > fm.height.data[idx])
            fm.height.data[idx] = h;
        ++fm.counts[idx];
    }

    const double area = fm.spec.cell_area();
    double d_max_occupied = -1.0;
    double d_max_any = 0.0;
    for (int i = 0; i < gx; ++i)
        for (int j = 0; j < gy; ++j)
        {
            const std::size_t idx = fm.spec.index(i, j);
            const Vec3 c = fm.spec.center(i, j);
            const double d = 0.5 * ((c - tx_pos).norm() + (c - rx_pos).norm());
            fm.position.data[idx] = d;
            d_max_any = std::max(d_max_any, d);
            if (fm.counts[idx] > 0)
            {
                fm.density.data[idx] = fm.counts[idx] / area;
                d_max_occupied = std::max(d_max_occupied, d);
            }
        }
    const double fill = d_max_occupied >= 0.0 ? d_max_occupied : d_max_any;
    for (std::size_t idx = 0; idx < fm.counts.size(); ++idx)
        if (fm.counts[idx] == 0)
            fm.position.data[idx] = fill;
    return fm;
}

FeatureGridMap featurize(const ValidPointCloud &cloud, const Vec3 &tx_pos, const Vec3 &rx_pos, int gx, int gy)
{
    return featurize_fixed(cloud, bounds_of(cloud), tx_pos, rx_pos, gx, gy);
}

ScattererGridMap rasterize_scatterers(std::span<const Vec3> scatterers, const Bounds &bounds, int sx, int sy,
                                      const VisibilityRegion &vr)
{
    ScattererGridMap sm;
    sm.spec = GridSpec::make(bounds, sx, sy);
    sm.density = Raster(sx, sy);
    std::vector<int> counts(sm.spec.size(), 0);
    for (const Vec3 &s : scatterers)
    {
        if (!vr.contains(s))
        {
            ++sm.dropped_outside_vr;
            continue;
        }
        const auto cell = sm.spec.locate(s.x(), s.y());
        if (!cell)
        {
            ++sm.dropped_out_of_bounds;
            continue;
        }
        ++counts[sm.spec.index(cell->first, cell->second)];
    }
    const double area = sm.spec.cell_area();
    for (std::size_t idx = 0; idx < counts.size(); ++idx)
        sm.density.data[idx] = counts[idx] / area;
    return sm;
}

namespace
{

void check_dims(const ScattererGridMap &a, const ScattererGridMap &b)
{
    if (a.density.rows != b.density.rows || a.density.cols != b.density.cols)
        throw DimMismatch("scatterer maps differ in size: " + std::to_string(a.density.rows) + "x" +
                          std::to_string(a.density.cols) + " vs " + std::to_string(b.density.rows) + "x" +
                          std::to_string(b.density.cols));
}

} // namespace

Confusion confusion(const ScattererGridMap &pred, const ScattererGridMap &truth)
{
    check_dims(pred, truth);
    Confusion c;
    for (std::size_t i = 0; i < truth.density.data.size(); ++i)
    {
        const bool t = truth.density.data[i] >= kZeroDensity;
        const bool p = pred.density.data[i] >= kZeroDensity;
        if (!t && !p)
            ++c.zero_zero;
        else if (t && p)
            ++c.nonzero_nonzero;
        else if (t)
            ++c.nonzero_zero;
        else
            ++c.zero_nonzero;
    }
    return c;
}

RegressionSums regression_sums(const ScattererGridMap &pred, const ScattererGridMap &truth)
{
    check_dims(pred, truth);
    RegressionSums s;
    for (std::size_t i = 0; i < truth.density.data.size(); ++i)
    {
        const double g = truth.density.data[i];
        if (g < kZeroDensity)
            continue;
        s.abs_error += std::abs(pred.density.data[i] - g);
        s.truth += g;
    }
    return s;
}

double metric_cla(const ScattererGridMap &pred, const ScattererGridMap &truth)
{
    const Confusion c = confusion(pred, truth);
    return double(c.zero_zero + c.nonzero_nonzero) / double(c.total());
}

double metric_reg(const ScattererGridMap &pred, const ScattererGridMap &truth)
{
    const RegressionSums s = regression_sums(pred, truth);
    if (!(s.truth > 0.0))
        throw NoScatterers("metric_reg: ground truth has no scatterers");
    return 1.0 - s.abs_error / s.truth;
}

} // namespace scar
