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


#include "scar/recognize.hpp"
#include "scar/error.hpp"
#include "scar/sgm1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scar
{

RecognizerKind parse_recognizer(const std::string &name)
{
    if (name == "oracle")
        return RecognizerKind::Oracle;
    if (name == "heuristic")
        return RecognizerKind::Heuristic;
    if (name == "external")
        return RecognizerKind::External;
    throw InvalidConfig("unknown recognizer '" + name + "' (expected oracle, heuristic or external)");
}

const char *recognizer_name(RecognizerKind kind) noexcept
{
    switch (kind)
    {
    case RecognizerKind::Oracle:
        return "oracle";
    case RecognizerKind::Heuristic:
        return "heuristic";
    case RecognizerKind::External:
        return "external";
    }
    return "oracle";
}

const char *class_name(ScattererClass c) noexcept
{
    switch (c)
    {
    case ScattererClass::Static:
        return "static";
    case ScattererClass::Dynamic:
        return "dynamic";
    case ScattererClass::Unknown:
        return "unknown";
    }
    return "unknown";
}

void ClassifierConfig::validate() const
{
    if (!(h_th > 0.0))
        throw InvalidConfig("h_th must be > 0");
}

void HeuristicParams::validate() const
{
    if (!(alpha >= 0.0) || !(rho0 >= 0.0) || !(d_ref > 0.0))
        throw InvalidConfig("heuristic parameters must satisfy alpha >= 0, rho0 >= 0, d_ref > 0");
}

std::vector<CellOverlap> cell_overlaps(const GridSpec &features, const GridSpec &scatterers, int i, int j)
{
    const double sx0 = scatterers.x_edge(i), sx1 = scatterers.x_edge(i + 1);
    const double sy0 = scatterers.y_edge(j), sy1 = scatterers.y_edge(j + 1);
    // Candidate index windows, padded by one cell; exact overlap decides.
    auto window = [](double lo, double hi, double origin, double cell, int n)
    {
        const int a = static_cast<int>(std::floor((lo - origin) / cell)) - 1;
        const int b = static_cast<int>(std::ceil((hi - origin) / cell)) + 1;
        return std::make_pair(std::clamp(a, 0, n - 1), std::clamp(b, 0, n - 1));
    };
    const auto [fi0, fi1] = window(sx0, sx1, features.bounds.x_min, features.cell_x(), features.nx);
    const auto [fj0, fj1] = window(sy0, sy1, features.bounds.y_min, features.cell_y(), features.ny);
    std::vector<CellOverlap> out;
    for (int fi = fi0; fi <= fi1; ++fi)
    {
        const double x0 = std::max(sx0, features.x_edge(fi));
        const double x1 = std::min(sx1, features.x_edge(fi + 1));
        if (!(x1 > x0))
            continue;
        for (int fj = fj0; fj <= fj1; ++fj)
        {
            const double y0 = std::max(sy0, features.y_edge(fj));
            const double y1 = std::min(sy1, features.y_edge(fj + 1));
            if (!(y1 > y0))
                continue;
            out.push_back({features.index(fi, fj), x0, x1, y0, y1});
        }
    }
    return out;
}

namespace
{

ScattererGridMap heuristic(const FeatureGridMap &features, const GridSpec &spec, const HeuristicParams &p)
{
    p.validate();
    ScattererGridMap m;
    m.spec = spec;
    m.density = Raster(spec.nx, spec.ny);
    for (int i = 0; i < spec.nx; ++i)
        for (int j = 0; j < spec.ny; ++j)
        {
            double acc = 0.0, area = 0.0;
            for (const CellOverlap &o : cell_overlaps(features.spec, spec, i, j))
            {
                const double a = o.area();
                area += a;
                if (features.density.data[o.feature_index] > p.rho0)
                    acc += a * p.d_ref / features.position.data[o.feature_index];
            }
            m.density.at(i, j) = area > 0.0 ? p.alpha * acc / area : 0.0;
        }
    return m;
}

} // namespace

ScattererGridMap recognize(const FeatureGridMap &features, RecognizerKind kind, const RecognizeContext &ctx)
{
    if (!(ctx.scatterer_spec.bounds == features.spec.bounds))
        throw BoundsMismatch("scatterer raster and feature raster have different bounds");
    switch (kind)
    {
    case RecognizerKind::Oracle:
        if (ctx.truth == nullptr)
            throw InvalidConfig("oracle recognizer requires ground-truth scatterers");
        if (!ctx.truth->spec.same_layout(ctx.scatterer_spec))
            throw BoundsMismatch("ground-truth raster does not match the scatterer raster");
        return *ctx.truth;
    case RecognizerKind::Heuristic:
        return heuristic(features, ctx.scatterer_spec, ctx.heuristic);
    case RecognizerKind::External:
    {
        const auto path = ctx.external_dir / ("pred_" + std::to_string(ctx.snapshot) + ".sgm1");
        if (!std::filesystem::exists(path))
            throw MissingPrediction(ctx.snapshot);
        return scatterer_map_from_sgm1(read_sgm1(path), ctx.scatterer_spec);
    }
    }
    throw InvalidConfig("unknown recognizer kind");
}

std::vector<int> densities_to_counts(const ScattererGridMap &map)
{
    const double area = map.spec.cell_area();
    std::vector<int> counts(map.density.data.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
    {
        const double v = map.density.data[i];
        if (!(v >= 0.0))
            throw NegativeDensity("cell " + std::to_string(i) + " has negative density");
        counts[i] = static_cast<int>(std::round(v * area));
    }
    return counts;
}

std::vector<Scatterer> materialize(std::span<const int> counts, const GridSpec &scatterer_spec,
                                   const FeatureGridMap &features, const ClassifierConfig &cfg, std::uint64_t seed,
                                   std::span<const VehicleState> vehicles)
{
    cfg.validate();
    if (!(scatterer_spec.bounds == features.spec.bounds))
        throw BoundsMismatch("materialize: scatterer raster and feature raster have different bounds");
    if (counts.size() != scatterer_spec.size())
        throw DimMismatch("materialize: count grid does not match the scatterer raster");

    std::vector<Scatterer> out;
    for (int i = 0; i < scatterer_spec.nx; ++i)
        for (int j = 0; j < scatterer_spec.ny; ++j)
        {
            const std::size_t cell = scatterer_spec.index(i, j);
            const int kappa = counts[cell];
            if (kappa <= 0)
                continue;
            std::vector<CellOverlap> occupied;
            double total = 0.0;
            for (const CellOverlap &o : cell_overlaps(features.spec, scatterer_spec, i, j))
                if (features.counts[o.feature_index] > 0)
                {
                    occupied.push_back(o);
                    total += o.area();
                }
            for (int k = 0; k < kappa; ++k)
            {
                SplitMix64 g(derive_seed(seed, {cell, std::uint64_t(k)}));
                Scatterer s;
                s.cell = static_cast<int>(cell);
                s.key = (std::uint64_t(cell) << 32) | std::uint64_t(k);
                const double pick = g.uniform() * total;
                const double ux = g.uniform(), uy = g.uniform(), uz = g.uniform();
                if (occupied.empty())
                {
                    const double x0 = scatterer_spec.x_edge(i), x1 = scatterer_spec.x_edge(i + 1);
                    const double y0 = scatterer_spec.y_edge(j), y1 = scatterer_spec.y_edge(j + 1);
                    s.position = Vec3(x0 + (x1 - x0) * ux, y0 + (y1 - y0) * uy, 0.0);
                    s.cls = ScattererClass::Unknown;
                }
                else
                {
                    std::size_t sel = 0;
                    double acc = occupied[0].area();
                    while (sel + 1 < occupied.size() && pick >= acc)
                        acc += occupied[++sel].area();
                    const CellOverlap &o = occupied[sel];
                    const double h = features.height.data[o.feature_index];
                    s.position = Vec3(o.x0 + (o.x1 - o.x0) * ux, o.y0 + (o.y1 - o.y0) * uy, h * (1.0 - uz));
                    s.cls = h < cfg.h_th ? ScattererClass::Dynamic : ScattererClass::Static;
                }
                if (s.cls == ScattererClass::Dynamic && !vehicles.empty())
                {
                    double best = std::numeric_limits<double>::infinity();
                    for (const VehicleState &v : vehicles)
                    {
                        const double d = (v.position - s.position).head<2>().squaredNorm();
                        if (d < best)
                        {
                            best = d;
                            s.velocity = v.velocity;
                        }
                    }
                }
                out.push_back(s);
            }
        }
    return out;
}

} // namespace scar
