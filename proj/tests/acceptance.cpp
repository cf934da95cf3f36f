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


// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status if
// any criterion fails. Tolerances and runtime limits are the stated ones.
//
// Covered tests:
// - VR membership against the focal-distance oracle
// - Feature-grid mass conservation
// - Oracle recognizer scores exactly 1 on every snapshot
// - P_reg hand case
// - DBSCAN against a brute-force oracle
// - Mixing-weight identity and per-class power normalization
// - DPSD peak for a receding LoS link
// - TACF normalization and bound
// - TACF decreases with traffic density
// - FCF depends on the absolute frequency
// - Adjacent-snapshot consistency of recognized scatterers
// - End-to-end runtime and byte-identical reruns

#include "scar/error.hpp"
#include "scar/pipeline.hpp"
#include "scar/sgm1.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace scar;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const std::string &name, const std::function<Outcome()> &fn)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try
    {
        o = fn();
    }
    catch (const std::exception &e)
    {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("%s | %s | %s | %.2f s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), s);
    std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double mean(const std::vector<double> &v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double std_error(const std::vector<double> &v)
{
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v)
        ss += (x - m) * (x - m);
    return std::sqrt(ss / double(v.size() - 1) / double(v.size()));
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Brute-force DBSCAN: explicit neighbour lists, union of core components,
// border points to their lowest-index core neighbour, noise as singletons.
std::vector<std::vector<std::size_t>> dbscan_oracle(const std::vector<Vec3> &p, double eps, int min_pts)
{
    const std::size_t n = p.size();
    std::vector<std::vector<std::size_t>> nb(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if ((p[i] - p[j]).norm() <= eps)
                nb[i].push_back(j);
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x)
    { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    auto core = [&](std::size_t i) { return int(nb[i].size()) >= min_pts; };
    for (std::size_t i = 0; i < n; ++i)
        if (core(i))
            for (std::size_t j : nb[i])
                if (core(j))
                    parent[find(i)] = find(j);
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i)
    {
        std::size_t owner = core(i) ? i : n;
        for (std::size_t j = 0; owner == n && j < nb[i].size(); ++j)
            if (core(nb[i][j]))
                owner = nb[i][j];
        groups[owner == n ? n + i : find(owner)].push_back(i);
    }
    std::vector<std::vector<std::size_t>> out;
    for (auto &[k, g] : groups)
        out.push_back(g);
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.front() < b.front(); });
    return out;
}

std::set<std::size_t> occupied(const std::vector<double> &v)
{
    std::set<std::size_t> s;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] > 0.0)
            s.insert(i);
    return s;
}

double jaccard(const std::set<std::size_t> &a, const std::set<std::size_t> &b)
{
    std::size_t inter = 0;
    for (std::size_t x : a)
        inter += b.count(x);
    const std::size_t uni = a.size() + b.size() - inter;
    return uni == 0 ? 1.0 : double(inter) / double(uni);
}

RunConfig base_config()
{
    RunConfig c = config_from_json("{}");
    c.jobs = std::max(1u, std::thread::hardware_concurrency());
    return c;
}

} // namespace

int main()
{
    spdlog::set_level(spdlog::level::warn);

    criterion("VR oracle equivalence", []
    {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(101);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        std::size_t n = 0, mismatches = 0;
        for (int pair = 0; pair < 100; ++pair)
        {
            const Vec3 tx(100 * u(rng), 100 * u(rng), 2 + u(rng)), rx(100 * u(rng), 100 * u(rng), 2 + u(rng));
            const double d = (rx - tx).norm();
            const auto vr = VisibilityRegion::make(tx, rx);
            std::vector<Vec3> pts(100);
            const Vec3 mid = 0.5 * (tx + rx);
            for (auto &p : pts)
                p = mid + Vec3(u(rng), u(rng), u(rng)) * d;
            pts[0] = mid;
            for (std::size_t i = 0; i < pts.size(); ++i)
            {
                const bool want = (pts[i] - tx).norm() + (pts[i] - rx).norm() <= std::sqrt(2.0) * d + 1e-12;
                mismatches += want != bool(vr_mask(pts, vr)[i]);
            }
            n += pts.size();
        }
        const double s = seconds_since(t0);
        return Outcome{mismatches == 0 && n == 10000 && s < 1.0,
                       fmt::format("{} points, {} mismatches, {:.3f} s (limit 1 s)", n, mismatches, s)};
    });

    criterion("Grid mass conservation", []
    {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(202);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::uniform_int_distribution<int> size(2, 50000);
        double worst = 0.0;
        for (int k = 0; k < 100; ++k)
        {
            ValidPointCloud cloud;
            const int n = size(rng);
            const double w = 20 + 100 * u(rng), h = 10 + 50 * u(rng);
            for (int i = 0; i < n; ++i)
            {
                cloud.points.emplace_back(w * u(rng), h * u(rng) - h / 2, 5 * u(rng));
                cloud.heights.push_back(cloud.points.back().z());
            }
            cloud.points[0] = Vec3(0, -h / 2, 1); // keep both extents non-degenerate
            cloud.points[1] = Vec3(w, h / 2, 1);
            const auto f = featurize(cloud, {0, 0, 1}, {w, 0, 1}, 80, 80);
            double mass = 0.0;
            for (double rho : f.density.data)
                mass += rho * f.spec.cell_area();
            worst = std::max(worst, std::abs(mass - n) / n);
        }
        const double s = seconds_since(t0);
        return Outcome{worst <= 1e-9 && s < 5.0,
                       fmt::format("100 clouds, worst relative error {:.3g} (limit 1e-9), {:.2f} s (limit 5 s)", worst, s)};
    });

    criterion("Metric identities (oracle)", []
    {
        std::size_t snapshots = 0, bad = 0;
        for (int nv : {6, 20})
        {
            RunConfig c = base_config();
            c.seed = 303;
            c.scene.synth.n_vehicles = nv;
            const auto src = open_scene(c);
            for (const auto &p : process_all(*src, c, true))
            {
                ++snapshots;
                const bool ok = metric_cla(*p.predicted, *p.truth) == 1.0 && metric_reg(*p.predicted, *p.truth) == 1.0;
                bad += !ok;
            }
        }
        return Outcome{bad == 0, fmt::format("{} synthetic snapshots, {} with P_cla or P_reg != 1", snapshots, bad)};
    });

    criterion("P_reg hand case", []
    {
        ScattererGridMap truth, pred;
        truth.spec = pred.spec = GridSpec::make({0, 2, 0, 1}, 2, 1);
        truth.density = pred.density = Raster(2, 1);
        truth.density.data = {2, 4};
        pred.density.data = {2.5, 3.5};
        const double p = metric_reg(pred, truth);
        return Outcome{std::abs(p - 0.8333) <= 1e-4 && std::abs(p - 5.0 / 6.0) <= 1e-9,
                       fmt::format("P_reg = {:.10f} (expected 0.8333, exact 5/6)", p)};
    });

    criterion("DBSCAN brute-force equivalence", []
    {
        std::mt19937_64 rng(404);
        std::uniform_real_distribution<double> u(0.0, 20.0);
        std::uniform_int_distribution<int> n_dist(0, 50), m_dist(1, 5);
        std::uniform_real_distribution<double> e_dist(0.5, 4.0);
        int bad = 0;
        for (int k = 0; k < 200; ++k)
        {
            std::vector<Vec3> pts(std::size_t(n_dist(rng)));
            for (auto &p : pts)
                p = Vec3(u(rng), u(rng), 0.25 * u(rng));
            const double eps = e_dist(rng);
            const int m = m_dist(rng);
            bad += dbscan(pts, eps, m) != dbscan_oracle(pts, eps, m);
        }
        return Outcome{bad == 0, fmt::format("200 instances (<= 50 points), {} partition mismatches", bad)};
    });

    criterion("Power-weight identity", []
    {
        std::mt19937_64 rng(505);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double worst_mix = 0.0;
        for (int k = 0; k < 100; ++k)
        {
            MixConfig m;
            m.ricean = 20.0 * u(rng);
            double a = -std::log(1 - u(rng)), b = -std::log(1 - u(rng)), c = -std::log(1 - u(rng));
            const double s = a + b + c;
            m.theta_gr = a / s;
            m.theta_s = b / s;
            m.theta_d = 1.0 - m.theta_gr - m.theta_s;
            m.validate();
            const double lhs = m.ricean / (m.ricean + 1) + (m.theta_gr + m.theta_s + m.theta_d) / (m.ricean + 1);
            const double w = std::pow(m.los_weight(), 2) + std::pow(m.weight(Component::GroundReflection), 2) +
                             std::pow(m.weight(Component::Static), 2) + std::pow(m.weight(Component::Dynamic), 2);
            worst_mix = std::max({worst_mix, std::abs(lhs - 1.0), std::abs(w - 1.0)});
        }

        RunConfig c = base_config();
        c.seed = 506;
        c.scene.synth.n_vehicles = 20;
        c.scene.synth.n_snapshots = 20;
        const auto src = open_scene(c);
        const auto products = process_all(*src, c, true);
        const auto inputs = channel_inputs(products);
        double worst_power = 0.0;
        std::size_t classes = 0;
        for (std::size_t r = 0; r < 10; ++r)
            for (const FrameTaps &f : synthesize_cir(inputs, c.channel, c.seed, r).frames)
            {
                std::map<Component, double> sum;
                for (const Tap &t : f.taps)
                    if (t.component == Component::Static || t.component == Component::Dynamic)
                        sum[t.component] += t.power;
                for (const auto &[k, v] : sum)
                {
                    worst_power = std::max(worst_power, std::abs(v - 1.0));
                    ++classes;
                }
            }
        return Outcome{worst_mix <= 1e-9 && worst_power <= 1e-9 && classes > 0,
                       fmt::format("100 (Upsilon, Theta) draws, worst weight error {:.2g}; {} class sums, worst "
                                   "power error {:.2g} (limit 1e-9)",
                                   worst_mix, classes, worst_power)};
    });

    criterion("DPSD peak (Rx receding 5 m/s)", []
    {
        const auto t0 = std::chrono::steady_clock::now();
        RunConfig c = base_config();
        c.channel.mix.ricean = 1e12; // LoS only, diffuse weights ~1e-6
        FeatureGridMap f;
        f.spec = GridSpec::make({-10, 70, -30, 30}, 80, 80);
        f.density = f.height = f.position = Raster(80, 80);
        f.counts.assign(6400, 0);
        SnapshotInput in;
        in.tx = {{0, 0, 1.5}, Vec3::Zero()};
        in.rx = {{60, 0, 1.5}, {5, 0, 0}};
        in.scatterer_spec = GridSpec::make(f.spec.bounds, 10, 10);
        in.counts.assign(100, 0);
        in.features = &f;
        const std::vector<SnapshotInput> inputs{in};
        std::vector<RealizationStats> parts;
        for (std::size_t r = 0; r < 4; ++r)
            parts.push_back(realization_stats(inputs, c, r));
        const EnsembleStats e = ensemble_stats(parts, c, 0);
        const auto peak = std::max_element(e.dpsd.value.begin(), e.dpsd.value.end()) - e.dpsd.value.begin();
        const double fp = e.dpsd.doppler[std::size_t(peak)];
        const double fd = -5.0 / c.channel.lambda();
        const double s = seconds_since(t0);
        return Outcome{std::abs(fp - (-467.0)) <= e.dpsd.bin_width && e.dpsd.bin_width <= 10.0 && s < 2.0,
                       fmt::format("peak {:.2f} Hz, expected -467.0 Hz (analytic {:.2f}), bin {:.2f} Hz (limit 10), "
                                   "{:.2f} s (limit 2 s)",
                                   fp, fd, e.dpsd.bin_width, s)};
    });

    criterion("TACF normalization and bound", []
    {
        RunConfig c = base_config();
        c.seed = 707;
        c.scene.synth.n_vehicles = 12;
        c.scene.synth.n_snapshots = 100;
        const auto src = open_scene(c);
        std::vector<SnapshotProducts> products;
        for (int s = 10; s <= 100; s += 10)
            products.push_back(process_snapshot(src->load(s), c));
        const auto inputs = channel_inputs(products);
        double worst0 = 0.0, sup = 0.0;
        for (int e = 0; e < 100; ++e)
        {
            RunConfig ce = c;
            ce.seed = 7000 + std::uint64_t(e);
            ce.stats.anchor_snapshot = e % int(inputs.size()) + 1;
            std::vector<RealizationStats> parts;
            for (std::size_t r = 0; r < 20; ++r)
                parts.push_back(realization_stats(inputs, ce, r));
            const auto st = ensemble_stats(parts, ce, std::size_t(ce.stats.anchor_snapshot - 1));
            worst0 = std::max(worst0, std::abs(std::abs(st.tacf[0]) - 1.0));
            for (const auto &v : st.tacf)
                sup = std::max(sup, std::abs(v));
        }
        return Outcome{worst0 == 0.0 && sup <= 1.0 + 1e-9,
                       fmt::format("100 ensembles x 20 realizations, max ||TACF(0)| - 1| = {:.2g}, sup |TACF| = "
                                   "{:.12f} (limit 1 + 1e-9)",
                                   worst0, sup)};
    });

    criterion("VTD trend (high vs low traffic)", []
    {
        // Per-scene mean |TACF(5 ms)| over 10 anchors; scenes (seeds) are
        // the independent units of the standard error.
        const auto t0 = std::chrono::steady_clock::now();
        std::map<int, std::vector<double>> by_vtd;
        for (int nv : {6, 20})
            for (std::uint64_t seed = 1; seed <= 64; ++seed)
            {
                RunConfig c = base_config();
                c.seed = 9000 + seed;
                c.scene.synth.n_vehicles = nv;
                const auto src = open_scene(c);
                std::vector<SnapshotProducts> products;
                for (int s = 5; s <= 100; s += 10)
                    products.push_back(process_snapshot(src->load(s), c));
                const auto inputs = channel_inputs(products);
                const auto grid = FrequencyGrid::make(c.channel.fc, c.stats.bandwidth, {c.channel.fc});
                double acc = 0.0;
                for (std::size_t a = 0; a < inputs.size(); ++a)
                {
                    const std::vector<Frame> frames{{a, 0.0}, {a, 5e-3}};
                    std::vector<TvtfGrid> ens;
                    for (std::size_t r = 0; r < 50; ++r)
                        ens.push_back(tvtf(synthesize_cir(inputs, frames, c.channel, c.seed, r), grid,
                                           c.stats.vartheta));
                    acc += std::abs(tfcf(ens, 0, 0, std::vector<int>{1}, std::vector<int>{0}).normalized(0, 0));
                }
                by_vtd[nv].push_back(acc / double(inputs.size()));
            }
        const double lo = mean(by_vtd[6]), hi = mean(by_vtd[20]);
        const double sigma = std::hypot(std_error(by_vtd[6]), std_error(by_vtd[20]));
        const double s = seconds_since(t0);
        return Outcome{hi < lo && lo - hi > 3.0 * sigma && s < 60.0,
                       fmt::format("mean |TACF(5 ms)| low {:.4f} vs high {:.4f}, gap {:.4f} = {:.2f} sigma (need > 3), "
                                   "64 scenes x 10 anchors x 50 realizations per level, {:.1f} s (limit 60 s)",
                                   lo, hi, lo - hi, (lo - hi) / sigma, s)};
    });

    criterion("Frequency non-stationarity (FCF)", []
    {
        RunConfig c = base_config();
        c.seed = 1010;
        c.stats.vartheta = 0.5;
        const auto src = open_scene(c);
        const std::vector<SnapshotProducts> products{process_snapshot(src->load(50), c)};
        const auto inputs = channel_inputs(products);
        // 27 GHz anchor looks up by +200 MHz, 29 GHz down by -200 MHz; both stay in band.
        const auto grid = FrequencyGrid::make(c.channel.fc, 2e9, {27e9, 27.2e9, 28.8e9, 29e9});
        const std::size_t batches = 400, per = 100;
        std::vector<double> diff;
        double taps = 0.0, lo_sum = 0.0, hi_sum = 0.0;
        for (std::size_t b = 0; b < batches; ++b)
        {
            std::vector<TvtfGrid> ens;
            for (std::size_t r = b * per; r < (b + 1) * per; ++r)
            {
                const auto cir = synthesize_cir(inputs, c.channel, c.seed, r);
                taps += double(cir.frames[0].taps.size());
                ens.push_back(tvtf(cir, grid, c.stats.vartheta));
            }
            const double lo = std::abs(tfcf(ens, 0, 0, std::vector<int>{0}, std::vector<int>{1}).normalized(0, 0));
            const double hi = std::abs(tfcf(ens, 0, 3, std::vector<int>{0}, std::vector<int>{-1}).normalized(0, 0));
            lo_sum += lo;
            hi_sum += hi;
            diff.push_back(lo - hi);
        }
        const double mean_taps = taps / double(batches * per);
        const double d = mean(diff), se = std_error(diff);
        return Outcome{std::abs(d) > 3.0 * se && mean_taps >= 10.0,
                       fmt::format("|FCF| at 27 GHz {:.4f} vs 29 GHz {:.4f} (|df| = 200 MHz), difference {:.4f} = "
                                   "{:.1f} SE (need > 3), {:.1f} taps, {} realizations",
                                   lo_sum / double(batches), hi_sum / double(batches), d, std::abs(d) / se, mean_taps,
                                   batches * per)};
    });

    criterion("Consistency (adjacent-snapshot Jaccard)", []
    {
        RunConfig c = base_config();
        c.seed = 1111;
        c.scene.synth.n_snapshots = 101;
        const auto src = open_scene(c);
        const auto products = process_all(*src, c, true);
        double js = 0.0, jf = 0.0;
        for (std::size_t i = 0; i + 1 < products.size(); ++i)
        {
            js += jaccard(occupied(products[i].predicted->density.data),
                          occupied(products[i + 1].predicted->density.data));
            jf += jaccard(occupied(products[i].features.density.data), occupied(products[i + 1].features.density.data));
        }
        const double n = double(products.size() - 1);
        return Outcome{js / n >= 0.6,
                       fmt::format("recognized scatterer cells: mean Jaccard {:.3f} over {} pairs (need >= 0.6); "
                                   "feature-cell occupancy for reference {:.3f}",
                                   js / n, int(n), jf / n)};
    });

    criterion("End-to-end determinism and runtime", []
    {
        const auto root = fs::temp_directory_path() / "scar_acceptance_e2e";
        fs::remove_all(root);
        RunConfig c = base_config();
        c.seed = 1212;
        c.scene.synth.n_snapshots = 100;
        c.scene.synth.points_per_cloud = 50000;
        c.stats.realizations = 100;
        c.out = root / "run";
        const auto t0 = std::chrono::steady_clock::now();
        cmd_simulate(c);
        const double s = seconds_since(t0);
        fs::rename(root / "run", root / "first");
        cmd_simulate(c);
        std::size_t files = 0, differ = 0;
        for (const auto &e : fs::recursive_directory_iterator(root / "first"))
            if (e.is_regular_file())
            {
                ++files;
                differ += slurp(e.path()) != slurp(root / "run" / fs::relative(e.path(), root / "first"));
            }
        fs::remove_all(root);
        return Outcome{differ == 0 && files > 100 && s < 60.0,
                       fmt::format("100 snapshots, 50k points/cloud, 100 realizations on {} thread(s): {:.1f} s "
                                   "(limit 60 s); {} files, {} differ on re-run",
                                   c.jobs, s, files, differ)};
    });

    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
