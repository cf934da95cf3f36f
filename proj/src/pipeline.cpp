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


#include "scar/pipeline.hpp"
#include "scar/error.hpp"
#include "scar/sgm1.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace scar
{

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace
{

std::vector<VehicleState> traffic_at(std::span<const VehicleTrajectory> traffic, double snapshot, double dt)
{
    std::vector<VehicleState> out;
    for (const VehicleTrajectory &v : traffic)
        out.push_back({v.position_at(snapshot), v.velocity_mps(snapshot, dt)});
    return out;
}

class SynthSource final : public SceneSource
{
public:
    SynthSource(const SynthConfig &config, std::uint64_t seed) : scene_(config, seed) {}

    int n_snapshots() const override { return scene_.config().n_snapshots; }
    double dt_snap() const override { return scene_.config().dt_snap; }
    bool has_truth() const override { return true; }
    std::string vtd() const override { return scene_.config().vtd_label(); }

    SnapshotScene load(int s) const override
    {
        SnapshotScene out;
        out.snapshot = s;
        out.time = SnapshotIndex::make(s, dt_snap()).time();
        out.tx_cloud = scene_.point_cloud(Source::Tx, s);
        out.rx_cloud = scene_.point_cloud(Source::Rx, s);
        out.tx_pose = scene_.sensor_pose(Source::Tx, s);
        out.rx_pose = scene_.sensor_pose(Source::Rx, s);
        out.tx = {scene_.antenna_position(Source::Tx, s), scene_.antenna_velocity(Source::Tx, s)};
        out.rx = {scene_.antenna_position(Source::Rx, s), scene_.antenna_velocity(Source::Rx, s)};
        out.truth = scene_.ground_truth(s).positions;
        const auto &all = scene_.trajectories();
        out.vehicles = traffic_at(std::span(all).subspan(2), s, dt_snap());
        return out;
    }

private:
    SynthScene scene_;
};

// Directory in the layout written by SynthScene::write. scene.json is
// optional; trajectories.csv, poses.csv and the clouds are required.
class DirectorySource final : public SceneSource
{
public:
    DirectorySource(const fs::path &dir, const PreprocessConfig &pre) : dir_(dir)
    {
        if (!fs::is_directory(dir))
            throw IoError("scene directory " + dir.string() + " does not exist");
        std::string tx_name = "Tx", rx_name = "Rx";
        if (fs::exists(dir / "scene.json"))
        {
            std::ifstream in(dir / "scene.json", std::ios::binary);
            nlohmann::json j;
            try
            {
                j = nlohmann::json::parse(in);
                dt_ = j.value("dt_snap", dt_);
                n_ = j.value("n_snapshots", 0);
                antenna_height_ = j.value("antenna_height", antenna_height_);
                tx_name = j.value("tx_vehicle", tx_name);
                rx_name = j.value("rx_vehicle", rx_name);
                vtd_ = j.value("vtd", vtd_);
                if (j.contains("strict_paper_transform") &&
                    j.at("strict_paper_transform").get<bool>() != pre.strict_paper_transform)
                    throw InvalidConfig("scene.json and preprocess.strict_paper_transform disagree");
            }
            catch (const nlohmann::json::exception &e)
            {
                throw FormatError("bad scene.json: " + std::string(e.what()));
            }
        }
        for (auto &t : load_trajectories(dir / "trajectories.csv"))
        {
            if (t.name == tx_name)
                tx_ = t;
            else if (t.name == rx_name)
                rx_ = t;
            else
                traffic_.push_back(std::move(t));
        }
        if (tx_.name.empty() || rx_.name.empty())
            throw InvalidConfig("trajectories.csv lacks the '" + tx_name + "' or '" + rx_name + "' vehicle");
        for (const PoseRecord &p : load_poses(dir / "poses.csv"))
        {
            if (p.vehicle == tx_name)
                tx_poses_[p.snapshot] = p.pose;
            else if (p.vehicle == rx_name)
                rx_poses_[p.snapshot] = p.pose;
            if (n_ == 0)
                n_max_ = std::max(n_max_, p.snapshot);
        }
        if (n_ == 0)
            n_ = n_max_;
        if (n_ < 1)
            throw InvalidConfig("scene directory has no snapshots");
        if (fs::exists(dir / "ground_truth.csv"))
            truth_ = load_ground_truth(dir / "ground_truth.csv", n_, dt_);
    }

    int n_snapshots() const override { return n_; }
    double dt_snap() const override { return dt_; }
    bool has_truth() const override { return truth_.has_value(); }
    std::string vtd() const override { return vtd_; }

    SnapshotScene load(int s) const override
    {
        const SnapshotIndex idx = SnapshotIndex::make(s, dt_);
        auto pose = [&](const std::map<int, SensorPose> &m, const char *who)
        {
            auto it = m.find(s);
            if (it == m.end())
                throw InvalidConfig(fmt::format("poses.csv has no {} pose for snapshot {}", who, s));
            return it->second;
        };
        SnapshotScene out;
        out.snapshot = s;
        out.time = idx.time();
        out.tx_cloud = load_point_cloud(dir_ / "clouds" / fmt::format("Tx_{}.csv", s), Source::Tx, idx);
        out.rx_cloud = load_point_cloud(dir_ / "clouds" / fmt::format("Rx_{}.csv", s), Source::Rx, idx);
        out.tx_pose = pose(tx_poses_, "Tx");
        out.rx_pose = pose(rx_poses_, "Rx");
        const Vec3 up(0, 0, antenna_height_);
        out.tx = {tx_.position_at(s) + up, tx_.velocity_mps(s, dt_)};
        out.rx = {rx_.position_at(s) + up, rx_.velocity_mps(s, dt_)};
        if (truth_)
            out.truth = (*truth_)[std::size_t(s - 1)].positions;
        out.vehicles = traffic_at(traffic_, s, dt_);
        return out;
    }

private:
    fs::path dir_;
    double dt_ = 0.1;
    int n_ = 0, n_max_ = 0;
    double antenna_height_ = 0.0;
    std::string vtd_ = "unknown";
    VehicleTrajectory tx_, rx_;
    std::vector<VehicleTrajectory> traffic_;
    std::map<int, SensorPose> tx_poses_, rx_poses_;
    std::optional<std::vector<GroundTruthScatterers>> truth_;
};

// `<out>.partial`, renamed onto `out` by commit(); removed otherwise.
class StagedOutput
{
public:
    explicit StagedOutput(fs::path out) : out_(std::move(out)), tmp_(out_)
    {
        if (out_.empty())
            throw InvalidConfig("output directory is empty");
        tmp_ += ".partial";
        fs::remove_all(tmp_);
        fs::create_directories(tmp_);
    }
    ~StagedOutput()
    {
        if (!committed_)
        {
            std::error_code ec;
            fs::remove_all(tmp_, ec);
        }
    }
    StagedOutput(const StagedOutput &) = delete;
    StagedOutput &operator=(const StagedOutput &) = delete;

    const fs::path &dir() const noexcept { return tmp_; }
    void commit()
    {
        fs::remove_all(out_);
        fs::rename(tmp_, out_);
        committed_ = true;
        spdlog::info("wrote {}", out_.string());
    }

private:
    fs::path out_, tmp_;
    bool committed_ = false;
};

void write_text(const fs::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text))
        throw IoError("cannot write " + path.string());
}

Sgm1Sidecar sidecar_for(const SnapshotProducts &p, const Bounds &b, std::vector<std::string> layers)
{
    return {p.snapshot, b, p.tx.position, p.rx.position, std::move(layers)};
}

struct MetricTotals
{
    Confusion confusion;
    RegressionSums reg;
    double p_cla_sum = 0.0, p_reg_sum = 0.0;
    std::size_t n = 0, n_reg = 0;

    void add(const ScattererGridMap &pred, const ScattererGridMap &truth)
    {
        confusion += scar::confusion(pred, truth);
        const RegressionSums r = regression_sums(pred, truth);
        reg.abs_error += r.abs_error;
        reg.truth += r.truth;
        p_cla_sum += metric_cla(pred, truth);
        ++n;
        if (r.truth > 0.0)
        {
            p_reg_sum += metric_reg(pred, truth);
            ++n_reg;
        }
    }

    ojson to_json() const
    {
        ojson j;
        j["samples"] = n;
        j["P_cla"] = n ? p_cla_sum / double(n) : 0.0;
        j["P_reg"] = n_reg ? ojson(p_reg_sum / double(n_reg)) : ojson(nullptr);
        j["P_reg_samples"] = n_reg;
        j["pooled_P_cla"] = confusion.total() ? double(confusion.zero_zero + confusion.nonzero_nonzero) /
                                                    double(confusion.total())
                                              : 0.0;
        j["pooled_P_reg"] = reg.truth > 0.0 ? ojson(1.0 - reg.abs_error / reg.truth) : ojson(nullptr);
        j["confusion"] = {{"0_0", confusion.zero_zero},
                          {"Non-0_Non-0", confusion.nonzero_nonzero},
                          {"Non-0_0", confusion.nonzero_zero},
                          {"0_Non-0", confusion.zero_nonzero}};
        return j;
    }
};

std::vector<std::complex<double>> column(const Eigen::MatrixXcd &m, Eigen::Index c)
{
    std::vector<std::complex<double>> v(std::size_t(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        v[std::size_t(i)] = m(i, c);
    return v;
}

} // namespace

std::unique_ptr<SceneSource> open_scene(const RunConfig &cfg)
{
    if (cfg.scene.kind == SceneKind::Synth)
        return std::make_unique<SynthSource>(cfg.scene.synth, cfg.seed);
    return std::make_unique<DirectorySource>(cfg.scene.dir, cfg.preprocess);
}

SnapshotProducts process_snapshot(const SnapshotScene &scene, const RunConfig &cfg, bool recognize_scatterers)
{
    SnapshotProducts p;
    p.snapshot = scene.snapshot;
    p.time = scene.time;
    p.tx = scene.tx;
    p.rx = scene.rx;
    p.vehicles = scene.vehicles;

    const auto vr = VisibilityRegion::make(scene.tx.position, scene.rx.position);
    const ValidPointCloud valid =
        preprocess(scene.tx_cloud, scene.tx_pose, scene.rx_cloud, scene.rx_pose, vr, cfg.preprocess);
    p.valid_points = valid.size();
    p.features = featurize(valid, scene.tx.position, scene.rx.position, cfg.grid.gx, cfg.grid.gy);
    p.scatterer_spec = GridSpec::make(p.features.spec.bounds, cfg.grid.sx, cfg.grid.sy);
    if (scene.truth)
        p.truth = rasterize_scatterers(*scene.truth, p.features.spec.bounds, cfg.grid.sx, cfg.grid.sy, vr);

    if (recognize_scatterers)
    {
        RecognizeContext ctx;
        ctx.snapshot = scene.snapshot;
        ctx.scatterer_spec = p.scatterer_spec;
        ctx.truth = p.truth ? &*p.truth : nullptr;
        ctx.heuristic = cfg.heuristic;
        ctx.external_dir = cfg.external_dir;
        p.predicted = recognize(p.features, cfg.recognizer, ctx);
    }
    return p;
}

std::vector<SnapshotProducts> process_all(const SceneSource &source, const RunConfig &cfg, bool recognize_scatterers)
{
    if (recognize_scatterers && cfg.recognizer == RecognizerKind::Oracle && !source.has_truth())
        throw InvalidConfig("the oracle recognizer needs ground-truth scatterers, but the scene has none");
    const auto n = std::size_t(source.n_snapshots());
    std::vector<SnapshotProducts> out(n);
    parallel_for(n, cfg.jobs,
                 [&](std::size_t i)
                 { out[i] = process_snapshot(source.load(int(i) + 1), cfg, recognize_scatterers); });
    spdlog::info("processed {} snapshots", n);
    return out;
}

std::vector<SnapshotInput> channel_inputs(const std::vector<SnapshotProducts> &products)
{
    std::vector<SnapshotInput> inputs;
    inputs.reserve(products.size());
    for (const SnapshotProducts &p : products)
    {
        if (!p.predicted)
            throw InvalidConfig("snapshot " + std::to_string(p.snapshot) + " has no recognized scatterers");
        SnapshotInput in;
        in.snapshot = p.snapshot;
        in.time = p.time;
        in.tx = p.tx;
        in.rx = p.rx;
        in.scatterer_spec = p.scatterer_spec;
        in.counts = densities_to_counts(*p.predicted);
        in.features = &p.features;
        in.vehicles = p.vehicles;
        inputs.push_back(std::move(in));
    }
    return inputs;
}

std::size_t anchor_index(const StatsConfig &stats, std::size_t n_inputs)
{
    if (n_inputs == 0)
        throw EmptyScene("no snapshots");
    if (stats.anchor_snapshot == 0)
        return (n_inputs - 1) / 2;
    if (std::size_t(stats.anchor_snapshot) > n_inputs)
        throw InvalidConfig("stats.anchor_snapshot lies beyond the last snapshot");
    return std::size_t(stats.anchor_snapshot) - 1;
}

std::vector<Frame> tacf_frames(std::size_t anchor, const StatsConfig &stats)
{
    std::vector<Frame> frames(stats.tacf_lags);
    for (std::size_t k = 0; k < frames.size(); ++k)
        frames[k] = {anchor, double(k) * stats.tacf_step};
    return frames;
}

RealizationStats realization_stats(std::span<const SnapshotInput> inputs, const RunConfig &cfg, std::size_t realization)
{
    const std::size_t anchor = anchor_index(cfg.stats, inputs.size());
    const double fc = cfg.channel.fc;
    RealizationStats s;
    const auto fine = synthesize_cir(inputs, tacf_frames(anchor, cfg.stats), cfg.channel, cfg.seed, realization);
    s.tacf = tvtf(fine, FrequencyGrid::make(fc, cfg.stats.bandwidth, {fc}), cfg.stats.vartheta);
    // The first fine frame is the anchor snapshot itself.
    ChannelRealization at_anchor;
    at_anchor.index = realization;
    at_anchor.frames.push_back(fine.frames.front());
    s.fcf = tvtf(at_anchor, FrequencyGrid::uniform(fc, cfg.stats.bandwidth, cfg.stats.freq_points),
                 cfg.stats.vartheta);
    return s;
}

EnsembleStats ensemble_stats(std::span<const RealizationStats> parts, const RunConfig &cfg, std::size_t anchor)
{
    std::vector<TvtfGrid> tacf, fcf;
    for (const RealizationStats &p : parts)
    {
        tacf.push_back(p.tacf);
        fcf.push_back(p.fcf);
    }
    EnsembleStats e;
    e.anchor = anchor;
    const StatsConfig &st = cfg.stats;

    std::vector<int> dt(st.tacf_lags);
    for (std::size_t k = 0; k < dt.size(); ++k)
    {
        dt[k] = int(k);
        e.tacf_lag.push_back(double(k) * st.tacf_step);
    }
    e.tacf = column(tfcf(tacf, 0, 0, dt, std::vector<int>{0}).normalized, 0);

    const FrequencyGrid &g = fcf.front().freq;
    const int mid = int(g.f.size() / 2);
    std::vector<int> df;
    for (int k = -mid; k + mid < int(g.f.size()); ++k)
    {
        df.push_back(k);
        e.fcf_lag.push_back(g.f[std::size_t(mid + k)] - g.f[std::size_t(mid)]);
    }
    e.fcf = column(tfcf(fcf, 0, std::size_t(mid), std::vector<int>{0}, df).normalized.transpose(), 0);

    e.dpsd = dpsd(e.tacf_lag, e.tacf, dpsd_fft_size(st.tacf_lags, st.dpsd_padding), st.window);
    return e;
}

void cmd_synth(const RunConfig &cfg)
{
    if (cfg.scene.kind != SceneKind::Synth)
        throw InvalidConfig("synth needs scene.source = 'synth'");
    StagedOutput out(cfg.out);
    SynthScene(cfg.scene.synth, cfg.seed).write(out.dir(), cfg.jobs);
    write_text(out.dir() / "config.json", config_to_json(cfg));
    out.commit();
}

void cmd_featurize(const RunConfig &cfg)
{
    auto source = open_scene(cfg);
    if (cfg.recognizer == RecognizerKind::Oracle && !source->has_truth())
        throw InvalidConfig("the oracle recognizer needs ground-truth scatterers, but the scene has none");
    const auto products = process_all(*source, cfg, false);

    StagedOutput out(cfg.out);
    fs::create_directories(out.dir() / "features");
    if (source->has_truth())
        fs::create_directories(out.dir() / "truth");

    Manifest m;
    m.feature_shape = {3, std::uint32_t(cfg.grid.gx), std::uint32_t(cfg.grid.gy)};
    m.truth_shape = {1, std::uint32_t(cfg.grid.sx), std::uint32_t(cfg.grid.sy)};
    m.vtd = source->vtd();
    for (const SnapshotProducts &p : products)
    {
        ManifestEntry e;
        e.snapshot = p.snapshot;
        e.link = source->link();
        e.id = fmt::format("{}_{}_{}", cfg.seed, e.link, p.snapshot);
        e.features = fmt::format("features/feat_{}.sgm1", p.snapshot);
        e.meta = fmt::format("features/feat_{}.json", p.snapshot);
        write_sgm1(out.dir() / e.features, to_sgm1(p.features));
        write_sidecar(out.dir() / e.meta,
                      sidecar_for(p, p.features.spec.bounds, {"density", "height", "position"}));
        if (p.truth)
        {
            e.truth = fmt::format("truth/truth_{}.sgm1", p.snapshot);
            write_sgm1(out.dir() / e.truth, to_sgm1(*p.truth));
        }
        e.split = split_for(e.id);
        m.samples.push_back(std::move(e));
    }
    write_text(out.dir() / "manifest.json", manifest_to_json(m));
    write_text(out.dir() / "config.json", config_to_json(cfg));
    out.commit();
}

void cmd_recognize(const RunConfig &cfg)
{
    auto source = open_scene(cfg);
    const auto products = process_all(*source, cfg, true);
    StagedOutput out(cfg.out);
    fs::create_directories(out.dir() / "pred");
    MetricTotals totals;
    for (const SnapshotProducts &p : products)
    {
        write_sgm1(out.dir() / "pred" / fmt::format("pred_{}.sgm1", p.snapshot), to_sgm1(*p.predicted));
        write_sidecar(out.dir() / "pred" / fmt::format("pred_{}.json", p.snapshot),
                      sidecar_for(p, p.scatterer_spec.bounds, {"scatterer_density"}));
        if (p.truth)
            totals.add(*p.predicted, *p.truth);
    }
    ojson s;
    s["recognizer"] = recognizer_name(cfg.recognizer);
    s["snapshots"] = products.size();
    s["metrics"] = totals.n ? totals.to_json() : ojson(nullptr);
    write_text(out.dir() / "summary.json", s.dump(2) + "\n");
    write_text(out.dir() / "config.json", config_to_json(cfg));
    out.commit();
}

void cmd_simulate(const RunConfig &cfg)
{
    auto source = open_scene(cfg);
    const auto products = process_all(*source, cfg, true);
    const auto inputs = channel_inputs(products);
    const std::size_t n_real = cfg.stats.realizations;

    StagedOutput out(cfg.out);
    fs::create_directories(out.dir() / "cir");
    fs::create_directories(out.dir() / "stats");

    std::vector<RealizationStats> parts(n_real);
    std::vector<std::array<std::size_t, 4>> tap_counts(n_real);
    parallel_for(n_real, cfg.jobs,
                 [&](std::size_t r)
                 {
                     const auto cir = synthesize_cir(inputs, cfg.channel, cfg.seed, r);
                     write_cir_csv(out.dir() / "cir" / fmt::format("cir_r{:03d}.csv", r), cir);
                     for (const FrameTaps &f : cir.frames)
                         for (const Tap &t : f.taps)
                             ++tap_counts[r][std::size_t(t.component)];
                     parts[r] = realization_stats(inputs, cfg, r);
                 });
    spdlog::info("synthesized {} realizations", n_real);

    ojson s;
    s["seed"] = cfg.seed;
    s["recognizer"] = recognizer_name(cfg.recognizer);
    s["vtd"] = source->vtd();
    s["snapshots"] = products.size();
    s["realizations"] = n_real;

    MetricTotals totals;
    for (const SnapshotProducts &p : products)
        if (p.truth)
            totals.add(*p.predicted, *p.truth);
    s["metrics"] = totals.n ? totals.to_json() : ojson(nullptr);

    std::array<std::size_t, 4> taps{};
    for (const auto &c : tap_counts)
        for (std::size_t k = 0; k < 4; ++k)
            taps[k] += c[k];
    const double frames = double(n_real * inputs.size());
    for (Component c : {Component::LoS, Component::GroundReflection, Component::Static, Component::Dynamic})
        s["mean_taps_per_snapshot"][component_name(c)] = double(taps[std::size_t(c)]) / frames;

    if (n_real >= 2)
    {
        const std::size_t anchor = anchor_index(cfg.stats, inputs.size());
        const EnsembleStats e = ensemble_stats(parts, cfg, anchor);
        write_curve_csv(out.dir() / "stats" / "tacf.csv", e.tacf_lag, e.tacf);
        write_curve_csv(out.dir() / "stats" / "fcf.csv", e.fcf_lag, e.fcf);
        std::vector<std::complex<double>> xi(e.dpsd.value.begin(), e.dpsd.value.end());
        write_curve_csv(out.dir() / "stats" / "dpsd.csv", e.dpsd.doppler, xi);
        const auto peak = std::max_element(e.dpsd.value.begin(), e.dpsd.value.end()) - e.dpsd.value.begin();
        s["statistics"] = {{"anchor_snapshot", inputs[anchor].snapshot},
                           {"fc_hz", cfg.channel.fc},
                           {"tacf_step_s", cfg.stats.tacf_step},
                           {"dpsd_bin_hz", e.dpsd.bin_width},
                           {"dpsd_peak_hz", e.dpsd.doppler[std::size_t(peak)]},
                           {"tacf_abs_last", std::abs(e.tacf.back())}};
    }
    else
    {
        spdlog::warn("statistics need at least two realizations; skipping TACF/FCF/DPSD");
        s["statistics"] = nullptr;
    }
    write_text(out.dir() / "summary.json", s.dump(2) + "\n");
    write_text(out.dir() / "config.json", config_to_json(cfg));
    out.commit();
}

void cmd_eval(const fs::path &pred_dir, const fs::path &truth_dir, const fs::path &out_dir)
{
    // Files pair up on the part after the first underscore: pred_7.sgm1 <-> truth_7.sgm1.
    auto scan = [](const fs::path &dir)
    {
        if (!fs::is_directory(dir))
            throw IoError("not a directory: " + dir.string());
        std::map<std::string, fs::path> files;
        for (const auto &e : fs::directory_iterator(dir))
        {
            if (!e.is_regular_file() || e.path().extension() != ".sgm1")
                continue;
            const std::string stem = e.path().stem().string();
            const auto us = stem.find('_');
            files[us == std::string::npos ? stem : stem.substr(us + 1)] = e.path();
        }
        return files;
    };
    const auto preds = scan(pred_dir), truths = scan(truth_dir);
    for (const auto &[k, p] : preds)
        if (!truths.contains(k))
            throw FileSetMismatch(p.filename().string());
    for (const auto &[k, p] : truths)
        if (!preds.contains(k))
            throw FileSetMismatch(p.filename().string());
    if (preds.empty())
        throw FileSetMismatch("(no .sgm1 files in " + pred_dir.string() + ")");

    // Sample keys sort numerically where they are numbers.
    std::vector<std::string> keys;
    for (const auto &[k, p] : preds)
        keys.push_back(k);
    std::stable_sort(keys.begin(), keys.end(),
                     [](const std::string &a, const std::string &b)
                     { return a.size() != b.size() ? a.size() < b.size() : a < b; });

    StagedOutput out(out_dir);
    std::ostringstream csv;
    csv << "sample,P_cla,P_reg,0_0,Non-0_Non-0,Non-0_0,0_Non-0\n";
    MetricTotals totals;
    for (const std::string &k : keys)
    {
        const Sgm1 ps = read_sgm1(preds.at(k)), ts = read_sgm1(truths.at(k));
        if (ps.layers != 1 || ts.layers != 1 || ps.rows != ts.rows || ps.cols != ts.cols)
            throw DimMismatch("sample " + k + ": prediction and truth shapes differ");
        const auto spec = GridSpec::make({0.0, double(ts.rows), 0.0, double(ts.cols)}, int(ts.rows), int(ts.cols));
        const ScattererGridMap pm = scatterer_map_from_sgm1(ps, spec), tm = scatterer_map_from_sgm1(ts, spec);
        const Confusion c = confusion(pm, tm);
        const RegressionSums r = regression_sums(pm, tm);
        csv << k << ',' << format_double(metric_cla(pm, tm)) << ','
            << (r.truth > 0.0 ? format_double(metric_reg(pm, tm)) : std::string()) << ',' << c.zero_zero << ','
            << c.nonzero_nonzero << ',' << c.nonzero_zero << ',' << c.zero_nonzero << '\n';
        totals.add(pm, tm);
    }
    write_text(out.dir() / "per_sample.csv", csv.str());
    write_text(out.dir() / "eval.json", totals.to_json().dump(2) + "\n");
    out.commit();
}

} // namespace scar
