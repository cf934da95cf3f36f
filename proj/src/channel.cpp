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


#include "scar/channel.hpp"
#include "scar/error.hpp"
#include "scar/scene_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <unordered_map>

namespace scar
{

const char *component_name(Component c) noexcept
{
    switch (c)
    {
    case Component::LoS:
        return "los";
    case Component::GroundReflection:
        return "gr";
    case Component::Static:
        return "static";
    case Component::Dynamic:
        return "dynamic";
    }
    return "los";
}

UnknownPolicy parse_unknown_policy(const std::string &name)
{
    if (name == "static")
        return UnknownPolicy::Static;
    if (name == "dynamic")
        return UnknownPolicy::Dynamic;
    if (name == "drop")
        return UnknownPolicy::Drop;
    throw InvalidConfig("unknown_as must be static, dynamic or drop, got '" + name + "'");
}

void ClusterConfig::validate() const
{
    if (!(eps > 0.0))
        throw InvalidConfig("DBSCAN eps must be > 0");
    if (min_pts < 1)
        throw InvalidConfig("DBSCAN min_pts must be >= 1");
}

std::vector<std::vector<std::size_t>> dbscan(std::span<const Vec3> points, double eps, int min_pts)
{
    if (!(eps > 0.0) || min_pts < 1)
        throw InvalidConfig("dbscan: eps must be > 0 and min_pts >= 1");
    const std::size_t n = points.size();

    // Spatial hash with eps-sized buckets; neighbours lie in the 27 around.
    auto bucket = [eps](const Vec3 &p)
    {
        return std::array<long long, 3>{static_cast<long long>(std::floor(p.x() / eps)),
                                        static_cast<long long>(std::floor(p.y() / eps)),
                                        static_cast<long long>(std::floor(p.z() / eps))};
    };
    std::map<std::array<long long, 3>, std::vector<std::size_t>> grid;
    for (std::size_t i = 0; i < n; ++i)
        grid[bucket(points[i])].push_back(i);

    const double eps2 = eps * eps;
    std::vector<std::vector<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto b = bucket(points[i]);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy)
                for (long long dz = -1; dz <= 1; ++dz)
                {
                    auto it = grid.find({b[0] + dx, b[1] + dy, b[2] + dz});
                    if (it == grid.end())
                        continue;
                    for (std::size_t j : it->second)
                        if ((points[i] - points[j]).squaredNorm() <= eps2)
                            nbrs[i].push_back(j);
                }
        std::sort(nbrs[i].begin(), nbrs[i].end());
    }

    std::vector<char> core(n);
    for (std::size_t i = 0; i < n; ++i)
        core[i] = nbrs[i].size() >= static_cast<std::size_t>(min_pts);

    constexpr std::size_t unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> label(n, unset);
    std::size_t next = 0;
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!core[i] || label[i] != unset)
            continue;
        label[i] = next;
        stack.assign(1, i);
        while (!stack.empty())
        {
            const std::size_t p = stack.back();
            stack.pop_back();
            for (std::size_t q : nbrs[p])
                if (core[q] && label[q] == unset)
                {
                    label[q] = next;
                    stack.push_back(q);
                }
        }
        ++next;
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        if (core[i])
            continue;
        for (std::size_t q : nbrs[i]) // ascending, so the first core wins
            if (core[q])
            {
                label[i] = label[q];
                break;
            }
        if (label[i] == unset)
            label[i] = next++;
    }

    std::vector<std::vector<std::size_t>> clusters(next);
    for (std::size_t i = 0; i < n; ++i)
        clusters[label[i]].push_back(i);
    std::sort(clusters.begin(), clusters.end(),
              [](const auto &a, const auto &b) { return a.front() < b.front(); });
    return clusters;
}

std::vector<Cluster> cluster_scatterers(std::vector<Scatterer> &scatterers, const ClusterConfig &cfg, const Vec3 &tx,
                                        const Vec3 &rx)
{
    cfg.validate();
    for (Scatterer &s : scatterers)
        s.cluster_id.reset();
    std::vector<Cluster> out;
    for (ScattererClass cls : {ScattererClass::Static, ScattererClass::Dynamic})
    {
        std::vector<std::size_t> idx;
        std::vector<Vec3> pts;
        for (std::size_t i = 0; i < scatterers.size(); ++i)
        {
            ScattererClass c = scatterers[i].cls;
            if (c == ScattererClass::Unknown)
            {
                if (cfg.unknown_as == UnknownPolicy::Drop)
                    continue;
                c = cfg.unknown_as == UnknownPolicy::Static ? ScattererClass::Static : ScattererClass::Dynamic;
            }
            if (c != cls)
                continue;
            idx.push_back(i);
            pts.push_back(scatterers[i].position);
        }
        for (const auto &members : dbscan(pts, cfg.eps, cfg.min_pts))
        {
            Cluster c;
            c.id = static_cast<int>(out.size());
            c.cls = cls;
            c.key = std::numeric_limits<std::uint64_t>::max();
            for (std::size_t m : members)
            {
                const Scatterer &s = scatterers[idx[m]];
                c.members.push_back(idx[m]);
                c.centroid += s.position;
                c.velocity += s.velocity;
                c.key = std::min(c.key, s.key);
                scatterers[idx[m]].cluster_id = c.id;
            }
            c.centroid /= static_cast<double>(members.size());
            c.velocity /= static_cast<double>(members.size());
            c.side = (c.centroid - tx).norm() <= (c.centroid - rx).norm() ? Side::Tx : Side::Rx;
            out.push_back(std::move(c));
        }
    }
    return out;
}

namespace
{

double exponential(SplitMix64 &g, double mean) { return -mean * std::log1p(-g.uniform()); }

double gaussian(SplitMix64 &g)
{
    const double u1 = g.uniform(), u2 = g.uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * kPi * u2);
}

} // namespace

std::vector<TwinClusterLink> match_twins(std::span<const Cluster> tx_clusters, std::span<const Cluster> rx_clusters,
                                         std::uint64_t seed, double tau_mean)
{
    if (!(tau_mean >= 0.0))
        throw InvalidConfig("mean virtual delay must be >= 0");
    auto order = [seed](std::span<const Cluster> cs, std::uint64_t side)
    {
        std::vector<std::pair<std::uint64_t, std::size_t>> pri;
        for (std::size_t i = 0; i < cs.size(); ++i)
            pri.emplace_back(derive_seed(seed, {side, cs[i].key}), i);
        std::sort(pri.begin(), pri.end());
        std::vector<std::size_t> out;
        for (const auto &p : pri)
            out.push_back(p.second);
        return out;
    };
    const auto ot = order(tx_clusters, 1);
    const auto orr = order(rx_clusters, 2);
    const std::size_t m = std::min(ot.size(), orr.size());

    std::vector<TwinClusterLink> links;
    for (std::size_t i = 0; i < m; ++i)
    {
        const Cluster &a = tx_clusters[ot[i]];
        const Cluster &b = rx_clusters[orr[i]];
        SplitMix64 g(derive_seed(seed, {3, a.key, b.key}));
        links.push_back({a.id, b.id, exponential(g, tau_mean)});
    }
    for (std::size_t i = m; i < ot.size(); ++i)
        links.push_back({tx_clusters[ot[i]].id, tx_clusters[ot[i]].id, 0.0});
    for (std::size_t i = m; i < orr.size(); ++i)
        links.push_back({rx_clusters[orr[i]].id, rx_clusters[orr[i]].id, 0.0});
    return links;
}

PathGeometry los_path(const Transceiver &tx, const Transceiver &rx, double lambda)
{
    const Vec3 d = rx.position - tx.position;
    const double len = d.norm();
    if (!(len > 0.0))
        throw CoincidentTransceivers("Tx and Rx share the same position");
    PathGeometry g;
    g.length = len;
    g.delay = len / kSpeedOfLight;
    g.doppler = d.dot(tx.velocity - rx.velocity) / (lambda * len);
    g.doppler_tx = d.dot(tx.velocity) / (lambda * len);
    g.doppler_rx = g.doppler - g.doppler_tx;
    return g;
}

Vec3 ground_reflection_point(const Vec3 &tx, const Vec3 &rx)
{
    if (!(tx.z() > 0.0) || !(rx.z() > 0.0))
        throw BelowGround("ground reflection needs both antennas above z = 0");
    const Vec3 image(rx.x(), rx.y(), -rx.z());
    Vec3 p = tx + (tx.z() / (tx.z() + rx.z())) * (image - tx);
    p.z() = 0.0;
    return p;
}

PathGeometry ground_reflection_path(const Transceiver &tx, const Transceiver &rx, double lambda)
{
    const Vec3 g = ground_reflection_point(tx.position, rx.position);
    return nlos_path(tx, g, Vec3::Zero(), g, Vec3::Zero(), rx, 0.0, lambda);
}

PathGeometry nlos_path(const Transceiver &tx, const Vec3 &a, const Vec3 &va, const Vec3 &b, const Vec3 &vb,
                       const Transceiver &rx, double virtual_delay, double lambda)
{
    const Vec3 dt = a - tx.position;
    const Vec3 dr = b - rx.position;
    const double lt = dt.norm(), lr = dr.norm();
    PathGeometry g;
    g.length = lt + lr;
    g.delay = g.length / kSpeedOfLight + virtual_delay;
    g.doppler_tx = lt > 0.0 ? dt.dot(tx.velocity - va) / (lambda * lt) : 0.0;
    g.doppler_rx = lr > 0.0 ? dr.dot(rx.velocity - vb) / (lambda * lr) : 0.0;
    g.doppler = g.doppler_tx + g.doppler_rx;
    return g;
}

double path_phase(double phase0, double delay, double lambda)
{
    return std::fmod(phase0 + 2.0 * kPi * (kSpeedOfLight * delay) / lambda, 2.0 * kPi);
}

void PowerModel::validate() const
{
    if (!(chi_s >= 0.0) || !(chi_d >= 0.0))
        throw InvalidConfig("power model chi must be >= 0");
    if (!(sigma_s >= 0.0) || !(sigma_d >= 0.0))
        throw InvalidConfig("power model sigma must be >= 0");
    if (!std::isfinite(nu_s) || !std::isfinite(nu_d))
        throw InvalidConfig("power model nu must be finite");
}

double PowerModel::power(Component c, double delay, double shadowing_db) const
{
    const bool dyn = c == Component::Dynamic;
    return std::exp(-(dyn ? chi_d : chi_s) * delay - (dyn ? nu_d : nu_s)) * std::pow(10.0, -shadowing_db / 10.0);
}

void MixConfig::validate() const
{
    if (!(ricean >= 0.0) || !std::isfinite(ricean))
        throw InvalidConfig("Ricean factor must be finite and >= 0");
    if (!(theta_gr >= 0.0) || !(theta_s >= 0.0) || !(theta_d >= 0.0))
        throw InvalidConfig("power ratios must be >= 0");
    if (std::abs(theta_gr + theta_s + theta_d - 1.0) > 1e-9)
        throw InvalidConfig("power ratios must sum to 1");
}

double MixConfig::los_weight() const noexcept { return std::sqrt(ricean / (ricean + 1.0)); }

double MixConfig::weight(Component c) const noexcept
{
    switch (c)
    {
    case Component::LoS:
        return los_weight();
    case Component::GroundReflection:
        return std::sqrt(theta_gr / (ricean + 1.0));
    case Component::Static:
        return std::sqrt(theta_s / (ricean + 1.0));
    case Component::Dynamic:
        return std::sqrt(theta_d / (ricean + 1.0));
    }
    return 0.0;
}

void ChannelConfig::validate() const
{
    if (!(fc > 0.0))
        throw InvalidConfig("carrier frequency must be > 0");
    if (!(tau_mean >= 0.0))
        throw InvalidConfig("mean virtual delay must be >= 0");
    mix.validate();
    power.validate();
    cluster.validate();
    classifier.validate();
}

namespace
{

constexpr std::uint64_t kLoSKey = 1;
constexpr std::uint64_t kGroundKey = 2;

struct PathPlan
{
    Component component;
    int k;
    int ki;
    std::size_t a;
    std::size_t b;
    double virtual_excess; // random part of the virtual delay
    double shadow_db;
    double phase;          // initial phase at the snapshot instant
    std::uint64_t key;
};

struct InputPlan
{
    std::vector<Scatterer> scatterers;
    std::vector<PathPlan> paths;
    double los_phase = 0.0;
    double gr_phase = 0.0;
};

InputPlan plan_input(const SnapshotInput &in, const ChannelConfig &cfg, std::uint64_t rseed)
{
    const double lambda = cfg.lambda();
    InputPlan plan;
    if (in.features == nullptr && !in.counts.empty())
        throw InvalidConfig("snapshot input has counts but no feature map");
    if (in.features != nullptr)
        plan.scatterers =
            materialize(in.counts, in.scatterer_spec, *in.features, cfg.classifier, derive_seed(rseed, {10}), in.vehicles);

    SplitMix64 g_los(derive_seed(rseed, {11, kLoSKey}));
    plan.los_phase = path_phase(2.0 * kPi * g_los.uniform(), los_path(in.tx, in.rx, lambda).delay, lambda);
    if (cfg.mix.theta_gr > 0.0)
    {
        SplitMix64 g_gr(derive_seed(rseed, {11, kGroundKey}));
        plan.gr_phase =
            path_phase(2.0 * kPi * g_gr.uniform(), ground_reflection_path(in.tx, in.rx, lambda).delay, lambda);
    }

    const auto clusters = cluster_scatterers(plan.scatterers, cfg.cluster, in.tx.position, in.rx.position);
    for (ScattererClass cls : {ScattererClass::Static, ScattererClass::Dynamic})
    {
        const Component comp = cls == ScattererClass::Static ? Component::Static : Component::Dynamic;
        if (cfg.mix.weight(comp) == 0.0)
            continue;
        const double sigma = comp == Component::Static ? cfg.power.sigma_s : cfg.power.sigma_d;
        std::vector<Cluster> tx_side, rx_side;
        for (const Cluster &c : clusters)
            if (c.cls == cls)
                (c.side == Side::Tx ? tx_side : rx_side).push_back(c);
        const auto links = match_twins(tx_side, rx_side, derive_seed(rseed, {12, std::uint64_t(comp)}), cfg.tau_mean);
        for (std::size_t k = 0; k < links.size(); ++k)
        {
            const Cluster &ca = clusters[links[k].tx_cluster];
            const Cluster &cb = clusters[links[k].rx_cluster];
            const std::size_t n = std::max(ca.members.size(), cb.members.size());
            for (std::size_t p = 0; p < n; ++p)
            {
                PathPlan path;
                path.component = comp;
                path.k = static_cast<int>(k);
                path.ki = static_cast<int>(p);
                path.a = ca.members[p % ca.members.size()];
                path.b = links[k].single_bounce() ? path.a : cb.members[p % cb.members.size()];
                path.virtual_excess = links[k].virtual_delay;
                const Scatterer &sa = plan.scatterers[path.a];
                const Scatterer &sb = plan.scatterers[path.b];
                path.key = derive_seed(0x5CA7, {std::uint64_t(comp), sa.key, sb.key});
                SplitMix64 g(derive_seed(rseed, {13, path.key}));
                const double phase0 = 2.0 * kPi * g.uniform();
                path.shadow_db = sigma * gaussian(g);
                const double virt = (sb.position - sa.position).norm() / kSpeedOfLight + path.virtual_excess;
                const auto geom =
                    nlos_path(in.tx, sa.position, sa.velocity, sb.position, sb.velocity, in.rx, virt, lambda);
                path.phase = path_phase(phase0, geom.delay, lambda);
                plan.paths.push_back(path);
            }
        }
    }
    return plan;
}

struct PhaseState
{
    double time;
    double doppler;
    double phase;
};

} // namespace

ChannelRealization synthesize_cir(std::span<const SnapshotInput> inputs, std::span<const Frame> frames,
                                  const ChannelConfig &cfg, std::uint64_t seed, std::size_t realization)
{
    cfg.validate();
    const double lambda = cfg.lambda();
    const std::uint64_t rseed = derive_seed(seed, {std::uint64_t(realization)});

    ChannelRealization out;
    out.index = realization;
    std::unordered_map<std::size_t, InputPlan> plans;
    std::unordered_map<std::uint64_t, PhaseState> acc;
    double last_time = -std::numeric_limits<double>::infinity();

    for (const Frame &fr : frames)
    {
        if (fr.input >= inputs.size())
            throw InvalidConfig("frame refers to a missing snapshot input");
        const SnapshotInput &in = inputs[fr.input];
        const double t = in.time + fr.offset;
        if (t < last_time)
            throw InvalidConfig("frames must be in non-decreasing time order");
        last_time = t;

        auto it = plans.find(fr.input);
        if (it == plans.end())
            it = plans.emplace(fr.input, plan_input(in, cfg, rseed)).first;
        const InputPlan &plan = it->second;

        const double off = fr.offset;
        Transceiver tx{in.tx.position + off * in.tx.velocity, in.tx.velocity};
        Transceiver rx{in.rx.position + off * in.rx.velocity, in.rx.velocity};

        FrameTaps ft;
        ft.snapshot = in.snapshot;
        ft.time = t;
        std::vector<double> initial;

        if (cfg.mix.los_weight() > 0.0)
        {
            const auto g = los_path(tx, rx, lambda);
            Tap tap;
            tap.component = Component::LoS;
            tap.delay = g.delay;
            tap.doppler = g.doppler;
            tap.weight = cfg.mix.los_weight();
            tap.key = kLoSKey;
            ft.taps.push_back(tap);
            initial.push_back(plan.los_phase);
        }
        if (cfg.mix.theta_gr > 0.0)
        {
            const auto g = ground_reflection_path(tx, rx, lambda);
            Tap tap;
            tap.component = Component::GroundReflection;
            tap.delay = g.delay;
            tap.doppler = g.doppler;
            tap.weight = cfg.mix.weight(Component::GroundReflection);
            tap.key = kGroundKey;
            ft.taps.push_back(tap);
            initial.push_back(plan.gr_phase);
        }

        std::array<double, 4> class_sum{};
        const std::size_t first_nlos = ft.taps.size();
        for (const PathPlan &p : plan.paths)
        {
            const Scatterer &sa = plan.scatterers[p.a];
            const Scatterer &sb = plan.scatterers[p.b];
            const Vec3 pa = sa.position + off * sa.velocity;
            const Vec3 pb = sb.position + off * sb.velocity;
            const double virt = p.a == p.b ? 0.0 : (pb - pa).norm() / kSpeedOfLight + p.virtual_excess;
            const auto g = nlos_path(tx, pa, sa.velocity, pb, sb.velocity, rx, virt, lambda);
            Tap tap;
            tap.component = p.component;
            tap.k = p.k;
            tap.ki = p.ki;
            tap.delay = g.delay;
            tap.doppler = g.doppler;
            tap.power = cfg.power.power(p.component, g.delay, p.shadow_db);
            tap.weight = cfg.mix.weight(p.component);
            tap.key = p.key;
            class_sum[std::size_t(p.component)] += tap.power;
            ft.taps.push_back(tap);
            initial.push_back(p.phase);
        }
        for (std::size_t i = first_nlos; i < ft.taps.size(); ++i)
            ft.taps[i].power /= class_sum[std::size_t(ft.taps[i].component)];

        if (ft.taps.empty())
            throw EmptyScene("no channel taps at snapshot " + std::to_string(in.snapshot));

        std::unordered_map<std::uint64_t, PhaseState> next;
        next.reserve(ft.taps.size());
        for (std::size_t i = 0; i < ft.taps.size(); ++i)
        {
            Tap &tap = ft.taps[i];
            double doppler_phase = 0.0;
            if (auto prev = acc.find(tap.key); prev != acc.end())
                doppler_phase = prev->second.phase +
                                kPi * (prev->second.doppler + tap.doppler) * (t - prev->second.time);
            next[tap.key] = {t, tap.doppler, doppler_phase};
            tap.phase = doppler_phase + initial[i];
            tap.gain = std::polar(tap.weight * std::sqrt(tap.power), tap.phase);
        }
        acc = std::move(next);
        out.frames.push_back(std::move(ft));
    }
    return out;
}

ChannelRealization synthesize_cir(std::span<const SnapshotInput> inputs, const ChannelConfig &cfg, std::uint64_t seed,
                                  std::size_t realization)
{
    std::vector<Frame> frames(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i)
        frames[i] = {i, 0.0};
    return synthesize_cir(inputs, frames, cfg, seed, realization);
}

void write_cir_csv(std::ostream &out, const ChannelRealization &realization)
{
    out << "snapshot,component,k,ki,delay_s,doppler_hz,re,im\n";
    for (const FrameTaps &f : realization.frames)
        for (const Tap &t : f.taps)
            out << f.snapshot << ',' << component_name(t.component) << ',' << t.k << ',' << t.ki << ','
                << format_double(t.delay) << ',' << format_double(t.doppler) << ',' << format_double(t.gain.real())
                << ',' << format_double(t.gain.imag()) << '\n';
}

void write_cir_csv(const std::filesystem::path &path, const ChannelRealization &realization)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    write_cir_csv(out, realization);
}

} // namespace scar
