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


#include "scar/sgm1.hpp"
#include "scar/error.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace scar
{

namespace
{

constexpr std::array<char, 4> kMagic{'S', 'G', 'M', '1'};

std::uint32_t to_le(std::uint32_t v) noexcept
{
    if constexpr (std::endian::native == std::endian::big)
        return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
    return v;
}

void put_u32(std::ostream &out, std::uint32_t v)
{
    v = to_le(v);
    out.write(reinterpret_cast<const char *>(&v), 4);
}

std::uint32_t get_u32(std::istream &in)
{
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char *>(&v), 4))
        throw FormatError("SGM1: truncated header");
    return to_le(v);
}

} // namespace

void write_sgm1(std::ostream &out, const Sgm1 &grid)
{
    if (grid.data.size() != std::size_t(grid.layers) * grid.rows * grid.cols)
        throw DimMismatch("SGM1: data size does not match layers*rows*cols");
    out.write(kMagic.data(), 4);
    put_u32(out, grid.layers);
    put_u32(out, grid.rows);
    put_u32(out, grid.cols);
    for (float f : grid.data)
        put_u32(out, std::bit_cast<std::uint32_t>(f));
    if (!out)
        throw IoError("SGM1: write failed");
}

Sgm1 read_sgm1(std::istream &in)
{
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), 4) || magic != kMagic)
        throw FormatError("SGM1: bad magic");
    Sgm1 g;
    g.layers = get_u32(in);
    g.rows = get_u32(in);
    g.cols = get_u32(in);
    const std::size_t n = std::size_t(g.layers) * g.rows * g.cols;
    std::vector<std::uint32_t> raw(n);
    if (n > 0 && !in.read(reinterpret_cast<char *>(raw.data()), std::streamsize(n * 4)))
        throw FormatError("SGM1: truncated payload");
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError("SGM1: trailing bytes after payload");
    g.data.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        g.data[i] = std::bit_cast<float>(to_le(raw[i]));
    return g;
}

void write_sgm1(const std::filesystem::path &path, const Sgm1 &grid)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot open " + tmp.string() + " for writing");
        write_sgm1(out, grid);
    }
    std::filesystem::rename(tmp, path);
}

Sgm1 read_sgm1(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return read_sgm1(in);
}

std::string sidecar_to_json(const Sgm1Sidecar &meta)
{
    nlohmann::ordered_json j;
    j["snapshot"] = meta.snapshot;
    j["bounds"] = {{"x_min", meta.bounds.x_min},
                   {"x_max", meta.bounds.x_max},
                   {"y_min", meta.bounds.y_min},
                   {"y_max", meta.bounds.y_max}};
    j["tx"] = {meta.tx.x(), meta.tx.y(), meta.tx.z()};
    j["rx"] = {meta.rx.x(), meta.rx.y(), meta.rx.z()};
    j["layers"] = meta.layers;
    return j.dump(2) + "\n";
}

Sgm1Sidecar sidecar_from_json(const std::string &text)
{
    try
    {
        const auto j = nlohmann::json::parse(text);
        Sgm1Sidecar m;
        m.snapshot = j.at("snapshot").get<int>();
        const auto &b = j.at("bounds");
        m.bounds = {b.at("x_min").get<double>(), b.at("x_max").get<double>(), b.at("y_min").get<double>(),
                    b.at("y_max").get<double>()};
        const auto tx = j.at("tx").get<std::vector<double>>();
        const auto rx = j.at("rx").get<std::vector<double>>();
        if (tx.size() != 3 || rx.size() != 3)
            throw FormatError("sidecar: tx/rx must have 3 components");
        m.tx = Vec3(tx[0], tx[1], tx[2]);
        m.rx = Vec3(rx[0], rx[1], rx[2]);
        m.layers = j.at("layers").get<std::vector<std::string>>();
        return m;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw FormatError(std::string("sidecar: ") + e.what());
    }
}

void write_sidecar(const std::filesystem::path &path, const Sgm1Sidecar &meta)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out << sidecar_to_json(meta);
}

Sgm1Sidecar read_sidecar(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return sidecar_from_json(ss.str());
}

Sgm1 to_sgm1(const FeatureGridMap &features)
{
    Sgm1 g;
    g.layers = 3;
    g.rows = std::uint32_t(features.density.rows);
    g.cols = std::uint32_t(features.density.cols);
    g.data.reserve(3 * features.density.data.size());
    for (const Raster *r : {&features.density, &features.height, &features.position})
        for (double v : r->data)
            g.data.push_back(static_cast<float>(v));
    return g;
}

Sgm1 to_sgm1(const ScattererGridMap &scatterers)
{
    Sgm1 g;
    g.layers = 1;
    g.rows = std::uint32_t(scatterers.density.rows);
    g.cols = std::uint32_t(scatterers.density.cols);
    g.data.assign(scatterers.density.data.begin(), scatterers.density.data.end());
    return g;
}

ScattererGridMap scatterer_map_from_sgm1(const Sgm1 &grid, const GridSpec &spec)
{
    if (grid.layers != 1 || grid.rows != std::uint32_t(spec.nx) || grid.cols != std::uint32_t(spec.ny))
        throw DimMismatch("SGM1 prediction is " + std::to_string(grid.layers) + "x" + std::to_string(grid.rows) +
                          "x" + std::to_string(grid.cols) + ", expected 1x" + std::to_string(spec.nx) + "x" +
                          std::to_string(spec.ny));
    ScattererGridMap m;
    m.spec = spec;
    m.density = Raster(spec.nx, spec.ny);
    for (std::size_t i = 0; i < grid.data.size(); ++i)
    {
        const float v = grid.data[i];
        if (!(v >= 0.0f) || !std::isfinite(v))
            throw NegativeDensity("prediction cell " + std::to_string(i) + " has density " + std::to_string(v));
        m.density.data[i] = v;
    }
    return m;
}

const char *split_name(Split s) noexcept
{
    switch (s)
    {
    case Split::Train:
        return "train";
    case Split::Val:
        return "val";
    case Split::Test:
        return "test";
    }
    return "train";
}

Split split_for(const std::string &sample_id) noexcept
{
    switch (mix64(fnv1a(sample_id)) % 5)
    {
    case 3:
        return Split::Val;
    case 4:
        return Split::Test;
    default:
        return Split::Train;
    }
}

std::string manifest_to_json(const Manifest &manifest)
{
    nlohmann::ordered_json j;
    j["format"] = manifest.format;
    j["feature_shape"] = manifest.feature_shape;
    j["truth_shape"] = manifest.truth_shape;
    j["vtd"] = manifest.vtd;
    auto samples = nlohmann::ordered_json::array();
    for (const auto &e : manifest.samples)
        samples.push_back({{"id", e.id},
                           {"snapshot", e.snapshot},
                           {"link", e.link},
                           {"features", e.features},
                           {"truth", e.truth},
                           {"meta", e.meta},
                           {"split", split_name(e.split)}});
    j["samples"] = std::move(samples);
    return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string &text)
{
    try
    {
        const auto j = nlohmann::json::parse(text);
        Manifest m;
        m.format = j.at("format").get<std::string>();
        m.feature_shape = j.at("feature_shape").get<std::vector<std::uint32_t>>();
        m.truth_shape = j.at("truth_shape").get<std::vector<std::uint32_t>>();
        m.vtd = j.value("vtd", std::string());
        for (const auto &s : j.at("samples"))
        {
            ManifestEntry e;
            e.id = s.at("id").get<std::string>();
            e.snapshot = s.at("snapshot").get<int>();
            e.link = s.value("link", std::string());
            e.features = s.at("features").get<std::string>();
            e.truth = s.at("truth").get<std::string>();
            e.meta = s.value("meta", std::string());
            const auto split = s.at("split").get<std::string>();
            if (split == "train")
                e.split = Split::Train;
            else if (split == "val")
                e.split = Split::Val;
            else if (split == "test")
                e.split = Split::Test;
            else
                throw FormatError("manifest: unknown split '" + split + "'");
            m.samples.push_back(std::move(e));
        }
        return m;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw FormatError(std::string("manifest: ") + e.what());
    }
}

} // namespace scar
