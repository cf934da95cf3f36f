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


#include <catch_amalgamated.hpp>

#include "scar/channel.hpp"
#include "scar/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

// Covered tests:
// - LoS, ground-reflection and single-bounce geometry against hand values
// - Doppler of co-moving dynamic scatterers
// - DBSCAN against a brute-force closure
// - Twin-cluster matching: determinism and fallbacks
// - Power model, mixing weights
// - CIR synthesis: normalization, delay ordering, limits, errors, determinism
// - Trapezoidal Doppler phase accumulation

using namespace scar;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
constexpr double kLambda28 = kSpeedOfLight / 28e9;

// Brute-force DBSCAN: explicit neighbour lists, union of core components.
std::vector<std::vector<std::size_t>> dbscan_oracle(const std::vector<Vec3> &p, double eps, int min_pts)
{
    const std::size_t n = p.size();
    std::vector<std::vector<std::size_t>> nb(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if ((p[i] - p[j]).norm() <= eps)
                nb[i].push_back(j);
    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i)
        core[i] = static_cast<int>(nb[i].size()) >= min_pts;
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (std::size_t i = 0; i < n; ++i)
        if (core[i])
            for (std::size_t j : nb[i])
                if (core[j])
                    parent[find(i)] = find(j);
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (core[i])
            groups[find(i)].push_back(i);
        else
        {
            std::size_t owner = n;
            for (std::size_t j : nb[i])
                if (core[j])
                {
                    owner = j;
                    break;
                }
            if (owner == n)
                groups[n + i].push_back(i);
            else
                groups[find(owner)].push_back(i);
        }
    }
    std::vector<std::vector<std::size_t>> out;
    for (auto &[k, g] : groups)
    {
        std::sort(g.begin(), g.end());
        out.push_back(g);
    }
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.front() < b.front(); });
    return out;
}

Cluster make_cluster(int id, std::uint64_t key)
{
    Cluster c;
    c.id = id;
    c.key = key;
    return c;
}

// Street segment: a building wall at y = 10 (h = 6 m) and a car at y = -5
// (h = 1.4 m) in a 60 x 60 m feature raster; 10 x 10 scatterer raster.
struct Scene
{
    FeatureGridMap features;
    GridSpec sspec;
    std::vector<int> counts;
};

Scene make_scene(int wall_count = 3, int car_count = 2)
{
    Scene s;
    const Bounds b{0, 60, -30, 30};
    s.features.spec = GridSpec::make(b, 80, 80);
    s.features.density = Raster(80, 80);
    s.features.height = Raster(80, 80);
    s.features.position = Raster(80, 80);
    s.features.counts.assign(80 * 80, 0);
    s.sspec = GridSpec::make(b, 10, 10);
    s.counts.assign(100, 0);
    for (int i = 0; i < 80; ++i)
        for (int j = 0; j < 80; ++j)
        {
            const Vec3 c = s.features.spec.center(i, j);
            const std::size_t idx = s.features.spec.index(i, j);
            if (c.y() > 10.0 && c.y() < 11.0)
            {
                s.features.counts[idx] = 5;
                s.features.height.data[idx] = 6.0;
            }
            else if (c.y() > -6.0 && c.y() < -4.0 && c.x() > 20.0 && c.x() < 25.0)
            {
                s.features.counts[idx] = 5;
                s.features.height.data[idx] = 1.4;
            }
        }
    // Wall cells: row j = 6 covers y in [6, 12); car cells: j = 4, i = 3 or 4.
    for (int i = 0; i < 10; ++i)
        s.counts[s.sspec.index(i, 6)] = wall_count;
    s.counts[s.sspec.index(3, 4)] = car_count;
    s.counts[s.sspec.index(4, 4)] = car_count;
    return s;
}

SnapshotInput make_input(const Scene &s, int snapshot, double time, double tx_x, double rx_x)
{
    SnapshotInput in;
    in.snapshot = snapshot;
    in.time = time;
    in.tx = {{tx_x, 0.0, 1.2}, {8.0, 0.0, 0.0}};
    in.rx = {{rx_x, 0.0, 1.2}, {6.0, 0.0, 0.0}};
    in.scatterer_spec = s.sspec;
    in.counts = s.counts;
    in.features = &s.features;
    in.vehicles = {{{22.5, -5.0, 0.7}, {-10.0, 0.0, 0.0}}};
    return in;
}
} // namespace

TEST_CASE("Channel - LoS geometry")
{
    Transceiver tx{{0, 0, 1.5}, {4, 0, 0}}, rx{{60, 0, 1.5}, {0, 0, 0}};
    auto g = los_path(tx, rx, kLambda28);
    CHECK_THAT(g.doppler, WithinAbs(373.6, 0.05));
    CHECK_THAT(g.doppler, WithinRel(4.0 * 28e9 / kSpeedOfLight, 1e-12));
    CHECK_THAT(g.delay * 1e9, WithinAbs(200.1, 0.05));

    // Rx receding at 5 m/s
    auto r = los_path({{0, 0, 1.5}, {0, 0, 0}}, {{60, 0, 1.5}, {5, 0, 0}}, kLambda28);
    CHECK_THAT(r.doppler, WithinAbs(-467.0, 0.1));

    auto same = los_path({{0, 0, 1.5}, {7, 1, 0}}, {{60, 3, 1.5}, {7, 1, 0}}, kLambda28);
    CHECK(same.doppler == 0.0);
    CHECK_THROWS_AS(los_path(tx, {{0, 0, 1.5}, Vec3::Zero()}, kLambda28), CoincidentTransceivers);
}

TEST_CASE("Channel - Ground reflection")
{
    Transceiver tx{{0, 0, 1.5}, Vec3::Zero()}, rx{{60, 0, 1.5}, Vec3::Zero()};
    auto g = ground_reflection_path(tx, rx, kLambda28);
    CHECK_THAT(g.length, WithinAbs(60.0749, 1e-4));
    CHECK_THAT(g.length, WithinRel(std::sqrt(3600.0 + 9.0), 1e-12));
    CHECK(g.doppler == 0.0);
    CHECK(ground_reflection_point(tx.position, rx.position).isApprox(Vec3(30, 0, 0)));

    // Unequal heights: reflection point splits the horizontal distance 1:2
    auto p = ground_reflection_point({0, 0, 1}, {30, 0, 2});
    CHECK_THAT(p.x(), WithinAbs(10.0, 1e-12));
    CHECK_THROWS_AS(ground_reflection_path(tx, {{60, 0, -1}, Vec3::Zero()}, kLambda28), BelowGround);
}

TEST_CASE("Channel - Single bounce")
{
    Transceiver tx{{0, 0, 0}, Vec3::Zero()}, rx{{60, 0, 0}, Vec3::Zero()};
    const Vec3 s(30, 10, 0);
    auto g = nlos_path(tx, s, Vec3::Zero(), s, Vec3::Zero(), rx, 0.0, kLambda28);
    CHECK_THAT(g.delay, WithinRel(2.0 * std::sqrt(1000.0) / kSpeedOfLight, 1e-12));
    CHECK_THAT(g.delay * 1e9, WithinAbs(211.0, 0.1));
    CHECK(g.doppler_tx == 0.0);
    CHECK(g.doppler_rx == 0.0);

    auto v = nlos_path(tx, s, Vec3::Zero(), s, Vec3::Zero(), rx, 5e-9, kLambda28);
    CHECK_THAT(v.delay - g.delay, WithinAbs(5e-9, 1e-18));
}

TEST_CASE("Channel - Co-moving dynamic scatterer")
{
    const Vec3 vel(5, 2, 0);
    Transceiver tx{{0, 0, 1}, Vec3::Zero()}, rx{{60, 0, 1}, vel};
    const Vec3 a(20, 8, 1), b(40, 8, 1);
    auto g = nlos_path(tx, a, vel, b, vel, rx, 0.0, kLambda28);
    CHECK(g.doppler_rx == 0.0);
    const Vec3 d = a - tx.position;
    CHECK_THAT(g.doppler_tx, WithinRel(d.dot(-vel) / (kLambda28 * d.norm()), 1e-12));
    CHECK_THAT(g.doppler, WithinRel(g.doppler_tx, 1e-12));
}

TEST_CASE("Channel - Path phase")
{
    const double tau = 200e-9;
    const double want = std::fmod(0.3 + 2.0 * kPi * kSpeedOfLight * tau / kLambda28, 2.0 * kPi);
    CHECK_THAT(path_phase(0.3, tau, kLambda28), WithinAbs(want, 1e-9));
    CHECK(path_phase(0.3, tau, kLambda28) >= 0.0);
    CHECK(path_phase(0.3, tau, kLambda28) < 2.0 * kPi);
}

TEST_CASE("Channel - DBSCAN")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    std::uniform_int_distribution<int> n_dist(0, 50), m_dist(1, 4);
    for (int rep = 0; rep < 200; ++rep)
    {
        std::vector<Vec3> pts(static_cast<std::size_t>(n_dist(rng)));
        for (auto &p : pts)
            p = Vec3(u(rng), u(rng), 0.2 * u(rng));
        // Exact duplicates stress tie handling.
        if (pts.size() > 3)
            pts[2] = pts[1];
        const double eps = 1.0 + 0.1 * (rep % 20);
        const int min_pts = m_dist(rng);
        REQUIRE(dbscan(pts, eps, min_pts) == dbscan_oracle(pts, eps, min_pts));
    }

    std::vector<Vec3> two{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {50, 0, 0}, {51, 0, 0}, {100, 0, 0}};
    auto c = dbscan(two, 1.5, 2);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == std::vector<std::size_t>{0, 1, 2});
    CHECK(c[1] == std::vector<std::size_t>{3, 4});
    CHECK(c[2] == std::vector<std::size_t>{5});

    std::vector<Vec3> same(4, Vec3(1, 2, 3));
    CHECK(dbscan(same, 1e-9, 4).size() == 1);
    CHECK(dbscan(two, 0.5, 1).size() == two.size());
    CHECK(dbscan(std::vector<Vec3>{}, 1.0, 2).empty());
}

TEST_CASE("Channel - Scatterer clustering")
{
    std::vector<Scatterer> s(5);
    s[0].position = {5, 8, 2};
    s[0].cls = ScattererClass::Static;
    s[1].position = {6, 8, 2};
    s[1].cls = ScattererClass::Static;
    s[2].position = {55, 8, 2};
    s[2].cls = ScattererClass::Static;
    s[3].position = {5.5, 8, 1};
    s[3].cls = ScattererClass::Dynamic; // near the static pair, still its own class
    s[4].position = {30, 0, 0};
    s[4].cls = ScattererClass::Unknown;
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i].key = i + 10;

    ClusterConfig cfg;
    auto cl = cluster_scatterers(s, cfg, {0, 0, 1}, {60, 0, 1});
    for (const auto &x : s)
        REQUIRE(x.cluster_id.has_value());
    CHECK(*s[0].cluster_id == *s[1].cluster_id);
    CHECK(*s[0].cluster_id != *s[3].cluster_id);
    std::map<int, const Cluster *> by_id;
    for (const auto &c : cl)
        by_id[c.id] = &c;
    CHECK(by_id.size() == cl.size());
    CHECK(by_id.at(*s[0].cluster_id)->side == Side::Tx);
    CHECK(by_id.at(*s[2].cluster_id)->side == Side::Rx);
    CHECK(by_id.at(*s[0].cluster_id)->key == 10);
    CHECK(by_id.at(*s[4].cluster_id)->cls == ScattererClass::Static);

    cfg.unknown_as = UnknownPolicy::Drop;
    auto dropped = cluster_scatterers(s, cfg, {0, 0, 1}, {60, 0, 1});
    CHECK(!s[4].cluster_id.has_value());
    CHECK(dropped.size() == cl.size() - 1);
    CHECK(parse_unknown_policy("dynamic") == UnknownPolicy::Dynamic);
    CHECK_THROWS_AS(parse_unknown_policy("maybe"), InvalidConfig);
}

TEST_CASE("Channel - Twin matching")
{
    std::vector<Cluster> tx{make_cluster(0, 11), make_cluster(1, 12), make_cluster(2, 13)};
    std::vector<Cluster> rx{make_cluster(3, 21), make_cluster(4, 22)};
    auto a = match_twins(tx, rx, 99, 30e-9);
    auto b = match_twins(tx, rx, 99, 30e-9);
    REQUIRE(a.size() == 3);
    int self = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i].tx_cluster == b[i].tx_cluster);
        CHECK(a[i].rx_cluster == b[i].rx_cluster);
        CHECK(a[i].virtual_delay == b[i].virtual_delay);
        CHECK(a[i].virtual_delay >= 0.0);
        if (a[i].single_bounce())
        {
            ++self;
            CHECK(a[i].virtual_delay == 0.0);
        }
    }
    CHECK(self == 1);

    // Pairing follows the cluster keys, not their position in the input.
    std::vector<Cluster> tx_rev(tx.rbegin(), tx.rend());
    auto c = match_twins(tx_rev, rx, 99, 30e-9);
    std::map<int, int> pa, pc;
    for (auto &l : a)
        pa[l.tx_cluster] = l.rx_cluster;
    for (auto &l : c)
        pc[l.tx_cluster] = l.rx_cluster;
    CHECK(pa == pc);

    auto one = match_twins(std::span(tx).first(1), std::span(rx).first(1), 5, 30e-9);
    REQUIRE(one.size() == 1);
    CHECK(one[0].tx_cluster == 0);
    CHECK(one[0].rx_cluster == 3);

    auto lone = match_twins(std::span(tx).first(2), {}, 5, 30e-9);
    REQUIRE(lone.size() == 2);
    CHECK(lone[0].single_bounce());
    CHECK(lone[1].single_bounce());
    CHECK(match_twins({}, {}, 5, 30e-9).empty());
}

TEST_CASE("Channel - Power and mixing")
{
    PowerModel pm;
    CHECK(pm.power(Component::Static, 100e-9, 0.0) > pm.power(Component::Static, 200e-9, 0.0));
    CHECK_THAT(pm.power(Component::Dynamic, 0.0, 0.0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(pm.power(Component::Static, 0.0, 10.0), WithinAbs(0.1, 1e-15));
    CHECK_THAT(pm.power(Component::Static, 1e-7, 0.0), WithinRel(std::exp(-0.69), 1e-12));

    MixConfig mix;
    const double total = std::pow(mix.los_weight(), 2) + std::pow(mix.weight(Component::GroundReflection), 2) +
                         std::pow(mix.weight(Component::Static), 2) + std::pow(mix.weight(Component::Dynamic), 2);
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    CHECK_THAT(mix.los_weight(), WithinAbs(std::sqrt(2.0 / 3.0), 1e-15));
    mix.theta_s = 0.6;
    CHECK_THROWS_AS(mix.validate(), InvalidConfig);
    mix.theta_s = 0.5;
    mix.ricean = -1.0;
    CHECK_THROWS_AS(mix.validate(), InvalidConfig);
}

TEST_CASE("Channel - CIR synthesis")
{
    const Scene s = make_scene();
    std::vector<SnapshotInput> inputs{make_input(s, 1, 0.0, 5.0, 50.0), make_input(s, 2, 0.1, 5.8, 50.6)};
    ChannelConfig cfg;
    auto r = synthesize_cir(inputs, cfg, 42, 0);
    REQUIRE(r.frames.size() == 2);

    for (const auto &f : r.frames)
    {
        std::map<Component, double> sums;
        std::map<Component, int> n;
        double los_delay = 0.0;
        for (const auto &t : f.taps)
        {
            sums[t.component] += t.power;
            ++n[t.component];
            if (t.component == Component::LoS)
                los_delay = t.delay;
            CHECK_THAT(std::abs(t.gain), WithinRel(t.weight * std::sqrt(t.power), 1e-12));
        }
        CHECK(n[Component::LoS] == 1);
        CHECK(n[Component::GroundReflection] == 1);
        REQUIRE(n[Component::Static] > 0);
        REQUIRE(n[Component::Dynamic] > 0);
        CHECK_THAT(sums[Component::Static], WithinAbs(1.0, 1e-12));
        CHECK_THAT(sums[Component::Dynamic], WithinAbs(1.0, 1e-12));
        for (const auto &t : f.taps)
            CHECK(t.delay >= los_delay);
    }

    // Deterministic per (seed, realization)
    std::ostringstream a, b, c;
    write_cir_csv(a, r);
    write_cir_csv(b, synthesize_cir(inputs, cfg, 42, 0));
    write_cir_csv(c, synthesize_cir(inputs, cfg, 42, 1));
    CHECK(a.str() == b.str());
    CHECK(a.str() != c.str());
    CHECK(a.str().rfind("snapshot,component,k,ki,delay_s,doppler_hz,re,im\n", 0) == 0);
}

TEST_CASE("Channel - Identical snapshots")
{
    const Scene s = make_scene();
    std::vector<SnapshotInput> inputs{make_input(s, 1, 0.0, 5.0, 50.0), make_input(s, 2, 0.1, 5.0, 50.0)};
    ChannelConfig cfg;
    auto r = synthesize_cir(inputs, cfg, 3, 0);
    REQUIRE(r.frames[0].taps.size() == r.frames[1].taps.size());
    for (std::size_t i = 0; i < r.frames[0].taps.size(); ++i)
    {
        const Tap &p = r.frames[0].taps[i], &q = r.frames[1].taps[i];
        CHECK(p.key == q.key);
        CHECK(p.delay == q.delay);
        CHECK(p.power == q.power);
    }
}

TEST_CASE("Channel - Mixing limits")
{
    const Scene s = make_scene();
    std::vector<SnapshotInput> inputs{make_input(s, 1, 0.0, 5.0, 50.0)};
    ChannelConfig cfg;
    cfg.mix.ricean = 1e9;
    auto r = synthesize_cir(inputs, cfg, 1, 0);
    for (const auto &t : r.frames[0].taps)
        if (t.component == Component::LoS)
            CHECK_THAT(std::abs(t.gain), WithinAbs(1.0, 1e-9));
        else
            CHECK(std::abs(t.gain) < 1e-4);

    cfg.mix = {2.0, 0.3, 0.7, 0.0};
    r = synthesize_cir(inputs, cfg, 1, 0);
    for (const auto &t : r.frames[0].taps)
        CHECK(t.component != Component::Dynamic);

    // No taps at all
    const Scene empty = make_scene(0, 0);
    std::vector<SnapshotInput> bare{make_input(empty, 1, 0.0, 5.0, 50.0)};
    cfg.mix = {0.0, 0.0, 1.0, 0.0};
    CHECK_THROWS_AS(synthesize_cir(bare, cfg, 1, 0), EmptyScene);

    std::vector<SnapshotInput> back{make_input(s, 2, 0.1, 5.0, 50.0), make_input(s, 1, 0.0, 5.0, 50.0)};
    CHECK_THROWS_AS(synthesize_cir(back, ChannelConfig{}, 1, 0), InvalidConfig);
}

TEST_CASE("Channel - Doppler phase accumulation")
{
    const Scene s = make_scene();
    std::vector<SnapshotInput> inputs{make_input(s, 1, 0.0, 5.0, 50.0)};
    std::vector<Frame> frames{{0, 0.0}, {0, 1e-3}, {0, 3e-3}};
    ChannelConfig cfg;
    auto r = synthesize_cir(inputs, frames, cfg, 8, 0);
    REQUIRE(r.frames.size() == 3);
    auto los = [](const FrameTaps &f)
    {
        for (const auto &t : f.taps)
            if (t.component == Component::LoS)
                return t;
        throw std::logic_error("no LoS tap");
    };
    // Constant relative velocity: Doppler is constant, phase grows linearly.
    const Tap a = los(r.frames[0]), b = los(r.frames[1]), c = los(r.frames[2]);
    const double f = (8.0 - 6.0) / cfg.lambda();
    CHECK_THAT(a.doppler, WithinRel(f, 1e-12));
    CHECK_THAT(b.phase - a.phase, WithinRel(2.0 * kPi * f * 1e-3, 1e-9));
    CHECK_THAT(c.phase - a.phase, WithinRel(2.0 * kPi * f * 3e-3, 1e-9));
}
