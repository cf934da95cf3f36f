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


#include "scar/config.hpp"
#include "scar/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace scar
{

using nlohmann::json;

namespace
{
// Reads typed fields from one JSON object and reports leftovers.
class Section
{
public:
    Section(const json &j, std::string name) : name_(std::move(name))
    {
        if (j.is_null())
            return;
        if (!j.is_object())
            throw InvalidConfig("'" + name_ + "' must be an object");
        j_ = &j;
    }

    // Rejects keys that no get()/sub() call asked for.
    void finish() const
    {
        if (j_ == nullptr)
            return;
        for (const auto &[k, v] : j_->items())
            if (!seen_.contains(k))
                throw InvalidConfig("unknown key '" + prefix() + k + "'");
    }

    template <class T>
    void get(const char *key, T &dst)
    {
        seen_.insert(key);
        if (j_ == nullptr || !j_->contains(key))
            return;
        try
        {
            dst = j_->at(key).get<T>();
        }
        catch (const json::exception &)
        {
            throw InvalidConfig("'" + prefix() + key + "' has the wrong type");
        }
    }

    const json &sub(const char *key)
    {
        seen_.insert(key);
        static const json null;
        return j_ != nullptr && j_->contains(key) ? j_->at(key) : null;
    }

    std::string prefix() const { return name_.empty() ? "" : name_ + "."; }

private:
    const json *j_ = nullptr;
    std::string name_;
    std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p)
{
    if (p.empty())
        return {};
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

const char *scene_kind_name(SceneKind k) { return k == SceneKind::Synth ? "synth" : "files"; }
const char *window_name(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }
const char *policy_name(UnknownPolicy p)
{
    return p == UnknownPolicy::Static ? "static" : p == UnknownPolicy::Dynamic ? "dynamic" : "drop";
}
} // namespace

void RunConfig::validate() const
{
    preprocess.validate();
    if (scene.kind == SceneKind::Synth)
        scene.synth.validate();
    else if (scene.dir.empty())
        throw InvalidConfig("scene.dir is required for a files scene");
    if (grid.gx < 1 || grid.gy < 1 || grid.sx < 1 || grid.sy < 1)
        throw InvalidConfig("grid dimensions must be positive");
    heuristic.validate();
    if (recognizer == RecognizerKind::External && external_dir.empty())
        throw InvalidConfig("recognizer.external_dir is required for the external recognizer");
    channel.validate();
    if (stats.realizations < 1)
        throw InvalidConfig("stats.realizations must be >= 1");
    if (!(stats.bandwidth >= 0.0) || stats.bandwidth >= 2.0 * channel.fc)
        throw InvalidConfig("stats.bandwidth must lie in [0, 2 fc)");
    if (stats.freq_points < 1 || stats.tacf_lags < 2 || stats.dpsd_padding < 1)
        throw InvalidConfig("stats.freq_points >= 1, stats.tacf_lags >= 2 and stats.dpsd_padding >= 1 are required");
    if (!(stats.tacf_step > 0.0))
        throw InvalidConfig("stats.tacf_step must be > 0");
    if (stats.anchor_snapshot < 0)
        throw InvalidConfig("stats.anchor_snapshot must be >= 0");
    if (jobs < 1)
        throw InvalidConfig("jobs must be >= 1");
}

RunConfig config_from_json(const std::string &text, const std::filesystem::path &base)
{
    json root;
    try
    {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    }
    catch (const json::parse_error &e)
    {
        throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    {
        Section top(root, "");
        top.get("seed", c.seed);
        top.get("jobs", c.jobs);
        std::string out = c.out.string();
        top.get("out", out);
        c.out = resolve(base, out);

        {
            Section s(top.sub("scene"), "scene");
            std::string kind = scene_kind_name(c.scene.kind), dir;
            s.get("source", kind);
            if (kind == "synth")
                c.scene.kind = SceneKind::Synth;
            else if (kind == "files")
                c.scene.kind = SceneKind::Files;
            else
                throw InvalidConfig("scene.source must be 'synth' or 'files'");
            s.get("dir", dir);
            c.scene.dir = resolve(base, dir);

            SynthConfig &y = c.scene.synth;
            Section t(s.sub("synth"), "scene.synth");
            t.get("n_buildings", y.n_buildings);
            t.get("n_vehicles", y.n_vehicles);
            t.get("n_snapshots", y.n_snapshots);
            t.get("dt_snap", y.dt_snap);
            t.get("points_per_cloud", y.points_per_cloud);
            t.get("tx_speed", y.tx_speed);
            t.get("rx_speed", y.rx_speed);
            t.get("link_distance", y.link_distance);
            t.get("antenna_height", y.antenna_height);
            t.get("x_min", y.x_min);
            t.get("x_max", y.x_max);
            t.get("building_setback", y.building_setback);
            std::vector<double> size{y.vehicle_size.x(), y.vehicle_size.y(), y.vehicle_size.z()};
            t.get("vehicle_size", size);
            if (size.size() != 3)
                throw InvalidConfig("scene.synth.vehicle_size needs three entries");
            y.vehicle_size = Vec3(size[0], size[1], size[2]);
            t.get("vehicle_speed_min", y.vehicle_speed_min);
            t.get("vehicle_speed_max", y.vehicle_speed_max);
            t.get("lidar_channels", y.lidar_channels);
            t.get("lidar_elevation_min", y.lidar_elevation_min);
            t.get("lidar_elevation_max", y.lidar_elevation_max);
            t.get("lidar_range", y.lidar_range);
            t.get("roughness_tile", y.roughness_tile);
            t.get("roughness_lobe", y.roughness_lobe);
            t.finish();
            s.finish();
        }
        {
            Section s(top.sub("preprocess"), "preprocess");
            s.get("ground_threshold", c.preprocess.ground_threshold);
            s.get("height_ceiling", c.preprocess.height_ceiling);
            s.get("strict_paper_transform", c.preprocess.strict_paper_transform);
            c.scene.synth.strict_paper_transform = c.preprocess.strict_paper_transform;
            s.finish();
        }
        {
            Section s(top.sub("grid"), "grid");
            std::vector<int> f{c.grid.gx, c.grid.gy}, sc{c.grid.sx, c.grid.sy};
            s.get("feature", f);
            s.get("scatterer", sc);
            if (f.size() != 2 || sc.size() != 2)
                throw InvalidConfig("grid.feature and grid.scatterer need two entries");
            c.grid = {f[0], f[1], sc[0], sc[1]};
            s.finish();
        }
        {
            Section s(top.sub("recognizer"), "recognizer");
            std::string kind = recognizer_name(c.recognizer), ext;
            s.get("kind", kind);
            c.recognizer = parse_recognizer(kind);
            s.get("external_dir", ext);
            c.external_dir = resolve(base, ext);
            Section h(s.sub("heuristic"), "recognizer.heuristic");
            h.get("alpha", c.heuristic.alpha);
            h.get("rho0", c.heuristic.rho0);
            h.get("d_ref", c.heuristic.d_ref);
            h.finish();
            s.finish();
        }
        {
            Section s(top.sub("classifier"), "classifier");
            s.get("h_th", c.channel.classifier.h_th);
            s.finish();
        }
        {
            Section s(top.sub("cluster"), "cluster");
            s.get("eps", c.channel.cluster.eps);
            s.get("min_pts", c.channel.cluster.min_pts);
            std::string unknown = policy_name(c.channel.cluster.unknown_as);
            s.get("unknown_as", unknown);
            c.channel.cluster.unknown_as = parse_unknown_policy(unknown);
            s.finish();
        }
        {
            PowerModel &p = c.channel.power;
            Section s(top.sub("power"), "power");
            s.get("chi_s", p.chi_s);
            s.get("chi_d", p.chi_d);
            s.get("nu_s", p.nu_s);
            s.get("nu_d", p.nu_d);
            s.get("sigma_s", p.sigma_s);
            s.get("sigma_d", p.sigma_d);
            s.finish();
        }
        {
            MixConfig &m = c.channel.mix;
            Section s(top.sub("mix"), "mix");
            s.get("ricean", m.ricean);
            s.get("theta_gr", m.theta_gr);
            s.get("theta_s", m.theta_s);
            s.get("theta_d", m.theta_d);
            s.finish();
        }
        {
            Section s(top.sub("channel"), "channel");
            s.get("fc", c.channel.fc);
            s.get("tau_mean", c.channel.tau_mean);
            s.finish();
        }
        {
            StatsConfig &st = c.stats;
            Section s(top.sub("stats"), "stats");
            s.get("realizations", st.realizations);
            s.get("vartheta", st.vartheta);
            s.get("bandwidth", st.bandwidth);
            s.get("freq_points", st.freq_points);
            s.get("anchor_snapshot", st.anchor_snapshot);
            s.get("tacf_lags", st.tacf_lags);
            s.get("tacf_step", st.tacf_step);
            s.get("dpsd_padding", st.dpsd_padding);
            std::string w = window_name(st.window);
            s.get("window", w);
            st.window = parse_window(w);
            s.finish();
        }
        top.finish();
    }
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read config " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return config_from_json(s.str(), path.parent_path());
}

std::string config_to_json(const RunConfig &c)
{
    nlohmann::ordered_json j;
    j["seed"] = c.seed;
    j["jobs"] = c.jobs;
    j["out"] = c.out.string();
    const SynthConfig &y = c.scene.synth;
    j["scene"] = {{"source", scene_kind_name(c.scene.kind)}, {"dir", c.scene.dir.string()}};
    j["scene"]["synth"] = {{"n_buildings", y.n_buildings},
                           {"n_vehicles", y.n_vehicles},
                           {"n_snapshots", y.n_snapshots},
                           {"dt_snap", y.dt_snap},
                           {"points_per_cloud", y.points_per_cloud},
                           {"tx_speed", y.tx_speed},
                           {"rx_speed", y.rx_speed},
                           {"link_distance", y.link_distance},
                           {"antenna_height", y.antenna_height},
                           {"x_min", y.x_min},
                           {"x_max", y.x_max},
                           {"building_setback", y.building_setback},
                           {"vehicle_size", {y.vehicle_size.x(), y.vehicle_size.y(), y.vehicle_size.z()}},
                           {"vehicle_speed_min", y.vehicle_speed_min},
                           {"vehicle_speed_max", y.vehicle_speed_max},
                           {"lidar_channels", y.lidar_channels},
                           {"lidar_elevation_min", y.lidar_elevation_min},
                           {"lidar_elevation_max", y.lidar_elevation_max},
                           {"lidar_range", y.lidar_range},
                           {"roughness_tile", y.roughness_tile},
                           {"roughness_lobe", y.roughness_lobe}};
    j["preprocess"] = {{"ground_threshold", c.preprocess.ground_threshold},
                       {"height_ceiling", c.preprocess.height_ceiling},
                       {"strict_paper_transform", c.preprocess.strict_paper_transform}};
    j["grid"] = {{"feature", {c.grid.gx, c.grid.gy}}, {"scatterer", {c.grid.sx, c.grid.sy}}};
    j["recognizer"] = {{"kind", recognizer_name(c.recognizer)},
                       {"external_dir", c.external_dir.string()},
                       {"heuristic",
                        {{"alpha", c.heuristic.alpha}, {"rho0", c.heuristic.rho0}, {"d_ref", c.heuristic.d_ref}}}};
    j["classifier"] = {{"h_th", c.channel.classifier.h_th}};
    j["cluster"] = {{"eps", c.channel.cluster.eps},
                    {"min_pts", c.channel.cluster.min_pts},
                    {"unknown_as", policy_name(c.channel.cluster.unknown_as)}};
    const PowerModel &p = c.channel.power;
    j["power"] = {{"chi_s", p.chi_s}, {"chi_d", p.chi_d},       {"nu_s", p.nu_s},
                  {"nu_d", p.nu_d},   {"sigma_s", p.sigma_s}, {"sigma_d", p.sigma_d}};
    const MixConfig &m = c.channel.mix;
    j["mix"] = {{"ricean", m.ricean}, {"theta_gr", m.theta_gr}, {"theta_s", m.theta_s}, {"theta_d", m.theta_d}};
    j["channel"] = {{"fc", c.channel.fc}, {"tau_mean", c.channel.tau_mean}};
    const StatsConfig &st = c.stats;
    j["stats"] = {{"realizations", st.realizations}, {"vartheta", st.vartheta},
                  {"bandwidth", st.bandwidth},       {"freq_points", st.freq_points},
                  {"anchor_snapshot", st.anchor_snapshot}, {"tacf_lags", st.tacf_lags},
                  {"tacf_step", st.tacf_step},       {"dpsd_padding", st.dpsd_padding},
                  {"window", window_name(st.window)}};
    return j.dump(2) + "\n";
}

} // namespace scar
