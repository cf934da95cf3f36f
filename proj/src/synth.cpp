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


#include "scar/synth.hpp"
#include "scar/error.hpp"

#include <json.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <limits>

namespace scar
{

bool Box::segment_hits(const Vec3 &a, const Vec3 &b, double t_lo, double t_hi) const noexcept
{
    const Vec3 d = b - a;
    double t0 = t_lo, t1 = t_hi;
    for (int k = 0; k < 3; ++k)
    {
        if (d[k] == 0.0)
        {
            if (a[k] <= min[k] || a[k] >= max[k])
                return false;
            continue;
        }
        double ta = (min[k] - a[k]) / d[k];
        double tb = (max[k] - a[k]) / d[k];
        if (ta > tb)
            std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 >= t1)
            return false;
    }
    return true;
}

double Box::distance_to_surface(const Vec3 &p) const noexcept
{
    const Vec3 below = (min - p).cwiseMax(0.0);
    const Vec3 above = (p - max).cwiseMax(0.0);
    const double outside = (below + above).norm();
    if (outside > 0.0)
        return outside;
    return std::min((p - min).minCoeff(), (max - p).minCoeff());
}

void SynthConfig::validate() const
{
    if (n_buildings < 1)
        throw InvalidConfig("synth: n_buildings must be >= 1");
    if (n_vehicles < 0)
        throw InvalidConfig("synth: n_vehicles must be >= 0");
    if (n_snapshots < 1)
        throw InvalidConfig("synth: n_snapshots must be >= 1");
    if (points_per_cloud < 1)
        throw InvalidConfig("synth: points_per_cloud must be >= 1");
    if (!(dt_snap > 0.0))
        throw InvalidConfig("synth: dt_snap must be > 0");
    if (!(link_distance > 0.0) || !(antenna_height > 0.0))
        throw InvalidConfig("synth: link_distance and antenna_height must be > 0");
    if (!(x_max > x_min))
        throw InvalidConfig("synth: x_max must exceed x_min");
    if (lidar_channels < 1 || !(lidar_range > 0.0) || lidar_elevation_max < lidar_elevation_min)
        throw InvalidConfig("synth: invalid LiDAR geometry");
    if (roughness_tile < 0.0 || roughness_lobe < 0.0)
        throw InvalidConfig("synth: roughness parameters must be >= 0");
    if (vehicle_speed_min < 0.0 || vehicle_speed_max < vehicle_speed_min)
        throw InvalidConfig("synth: invalid vehicle speed range");
    if ((vehicle_size.array() <= 0.0).any())
        throw InvalidConfig("synth: vehicle_size must be positive");
}

std::string SynthConfig::vtd_label() const
{
    if (n_vehicles >= 15)
        return "high";
    if (n_vehicles >= 8)
        return "medium";
    return "low";
}

namespace
{

// Face f of a box: axis f / 2, outward sign (f % 2 ? + : -).
struct Face
{
    int axis;
    int tangent;
    double sign;
    double plane;
    Vec3 normal;
};

Face face_of(const Box &b, int f)
{
    Face face;
    face.axis = f / 2;
    face.tangent = 1 - face.axis;
    face.sign = (f % 2) ? 1.0 : -1.0;
    face.plane = (f % 2) ? b.max[face.axis] : b.min[face.axis];
    face.normal = Vec3::Zero();
    face.normal[face.axis] = face.sign;
    return face;
}

bool occluded(const Vec3 &a, const Vec3 &p, const Vec3 &b, std::span<const Box> boxes, int skip_id)
{
    constexpr double eps = 1e-9;
    for (const Box &o : boxes)
    {
        if (o.id == skip_id)
            continue;
        if (o.segment_hits(a, p, eps, 1.0 - eps) || o.segment_hits(p, b, eps, 1.0 - eps))
            return true;
    }
    return false;
}

// Mirror point on the plane through c with unit normal n, or nothing if a
// transceiver is not strictly in front of it.
bool mirror_point(const Vec3 &tx, const Vec3 &rx, const Vec3 &c, const Vec3 &n, Vec3 &out)
{
    const double dt = (tx - c).dot(n);
    const double dr = (rx - c).dot(n);
    if (!(dt > 0.0) || !(dr > 0.0))
        return false;
    const Vec3 rx_image = rx - 2.0 * dr * n;
    out = tx + (dt / (dt + dr)) * (rx_image - tx);
    return true;
}

} // namespace

std::vector<SpecularHit> specular_scatterers(const Vec3 &tx, const Vec3 &rx, std::span<const Box> boxes,
                                             const RoughnessModel &roughness)
{
    std::vector<SpecularHit> hits;
    const bool rough = roughness.tile > 0.0 && roughness.lobe > 0.0;
    for (const Box &box : boxes)
    {
        for (int f = 0; f < 4; ++f)
        {
            const Face face = face_of(box, f);
            const int u = face.tangent;
            // Both ends must see the outer side of the face.
            if (!((tx[face.axis] - face.plane) * face.sign > 0.0) || !((rx[face.axis] - face.plane) * face.sign > 0.0))
                continue;

            if (!rough)
            {
                Vec3 c = box.min;
                c[face.axis] = face.plane;
                Vec3 p;
                if (!mirror_point(tx, rx, c, face.normal, p))
                    continue;
                p[face.axis] = face.plane;
                if (p[u] < box.min[u] || p[u] > box.max[u] || p.z() < box.min.z() || p.z() > box.max.z())
                    continue;
                if (!occluded(tx, p, rx, boxes, box.id))
                    hits.push_back({p, box.id, f});
                continue;
            }

            // Glistening surface: every facet carries one point at a fixed
            // jittered location, which scatters when the bisector of the
            // directions to Tx and Rx lies within that facet's lobe.
            const double len_u = box.max[u] - box.min[u];
            const double len_z = box.max.z() - box.min.z();
            const int nu = std::max(1, static_cast<int>(std::ceil(len_u / roughness.tile - 1e-9)));
            const int nz = std::max(1, static_cast<int>(std::ceil(len_z / roughness.tile - 1e-9)));
            const double cos_max = std::cos(roughness.lobe);
            for (int iu = 0; iu < nu; ++iu)
            {
                const double u0 = box.min[u] + iu * roughness.tile;
                const double wu = (iu == nu - 1 ? box.max[u] : u0 + roughness.tile) - u0;
                for (int iz = 0; iz < nz; ++iz)
                {
                    const double z0 = box.min.z() + iz * roughness.tile;
                    const double wz = (iz == nz - 1 ? box.max.z() : z0 + roughness.tile) - z0;
                    SplitMix64 g(derive_seed(roughness.seed, {std::uint64_t(box.id), std::uint64_t(f),
                                                              std::uint64_t(iu), std::uint64_t(iz)}));
                    Vec3 p;
                    p[face.axis] = face.plane;
                    p[u] = u0 + wu * g.uniform();
                    p.z() = z0 + wz * g.uniform();
                    const double lobe = g.uniform();
                    const Vec3 h = ((tx - p).normalized() + (rx - p).normalized()).normalized();
                    if (h.dot(face.normal) < 1.0 - lobe * (1.0 - cos_max))
                        continue;
                    if (!occluded(tx, p, rx, boxes, box.id))
                        hits.push_back({p, box.id, f});
                }
            }
        }
    }
    return hits;
}

SynthScene synth_scene(const SynthConfig &config, std::uint64_t seed) { return SynthScene(config, seed); }

SynthScene::SynthScene(const SynthConfig &config, std::uint64_t seed) : config_(config), seed_(seed)
{
    config_.validate();
    const double dt = config_.dt_snap;
    const int last = config_.n_snapshots + 1;
    const double lane_tx = -1.75;

    trajectories_.push_back({"Tx", Vec3(config_.tx_speed * dt, 0, 0), 1, last, Vec3(0, lane_tx, 0)});
    trajectories_.push_back({"Rx", Vec3(config_.rx_speed * dt, 0, 0), 1, last, Vec3(config_.link_distance, lane_tx, 0)});

    SplitMix64 layout(derive_seed(seed, {1}));
    const double span = config_.x_max - config_.x_min;
    const std::array<int, 2> per_side{(config_.n_buildings + 1) / 2, config_.n_buildings / 2};
    int id = 0;
    for (int side = 0; side < 2; ++side)
    {
        const int k = per_side[side];
        if (k == 0)
            continue;
        const double slot = span / k;
        for (int j = 0; j < k; ++j)
        {
            const double width = slot * (0.55 + 0.35 * layout.uniform());
            const double x0 = config_.x_min + j * slot + (slot - width) * layout.uniform();
            const double depth = 6.0 + 8.0 * layout.uniform();
            const double height = 5.0 + 15.0 * layout.uniform();
            const double near = config_.building_setback + 2.0 * layout.uniform();
            Box b;
            b.id = id++;
            if (side == 0)
            {
                b.min = Vec3(x0, near, 0.0);
                b.max = Vec3(x0 + width, near + depth, height);
            }
            else
            {
                b.min = Vec3(x0, -near - depth, 0.0);
                b.max = Vec3(x0 + width, -near, height);
            }
            buildings_.push_back(b);
        }
    }

    constexpr std::array<double, 3> lanes{-5.25, 1.75, 5.25};
    SplitMix64 traffic(derive_seed(seed, {2}));
    for (int i = 0; i < config_.n_vehicles; ++i)
    {
        const double lane = lanes[traffic() % lanes.size()];
        const double speed =
            config_.vehicle_speed_min + (config_.vehicle_speed_max - config_.vehicle_speed_min) * traffic.uniform();
        const double dir = lane < 0.0 ? 1.0 : -1.0;
        const double x0 = config_.x_min + span * traffic.uniform();
        trajectories_.push_back({"V" + std::to_string(i + 1), Vec3(dir * speed * dt, 0, 0), 1, last, Vec3(x0, lane, 0)});
    }
}

std::vector<Box> SynthScene::boxes_at(double snapshot) const
{
    std::vector<Box> boxes = buildings_;
    const Vec3 half(0.5 * config_.vehicle_size.x(), 0.5 * config_.vehicle_size.y(), 0.0);
    for (std::size_t v = 2; v < trajectories_.size(); ++v)
    {
        const Vec3 p = trajectories_[v].position_at(snapshot);
        Box b;
        b.id = 1000 + static_cast<int>(v);
        b.vehicle = static_cast<int>(v);
        b.min = p - half;
        b.max = p + half + Vec3(0, 0, config_.vehicle_size.z());
        boxes.push_back(b);
    }
    return boxes;
}

Vec3 SynthScene::antenna_position(Source s, double snapshot) const
{
    return trajectories_[s == Source::Tx ? 0 : 1].position_at(snapshot) + Vec3(0, 0, config_.antenna_height);
}

Vec3 SynthScene::antenna_velocity(Source s, double snapshot) const
{
    return trajectories_[s == Source::Tx ? 0 : 1].velocity_mps(snapshot, config_.dt_snap);
}

SensorPose SynthScene::sensor_pose(Source s, int snapshot) const
{
    const VehicleTrajectory &t = trajectories_[s == Source::Tx ? 0 : 1];
    const Vec3 base = t.position_at(snapshot);
    const double heading = t.velocity.head<2>().squaredNorm() > 0.0 ? std::atan2(t.velocity.y(), t.velocity.x()) : 0.0;
    SensorPose pose;
    pose.heading = SensorPose::normalize_heading(heading);
    if (config_.strict_paper_transform)
        pose.position = Vec3(base.x(), -base.y(), -2.0 * config_.antenna_height);
    else
        pose.position = Vec3(base.x(), base.y(), 0.0);
    return pose;
}

RawPointCloud SynthScene::point_cloud(Source s, int snapshot) const
{
    RawPointCloud cloud;
    cloud.source = s;
    cloud.snapshot = SnapshotIndex::make(snapshot, config_.dt_snap);

    const Vec3 origin = antenna_position(s, snapshot);
    const SensorPose pose = sensor_pose(s, snapshot);
    const double c = std::cos(pose.heading), sn = std::sin(pose.heading);
    const double range = config_.lidar_range;

    std::vector<Box> boxes;
    for (const Box &b : boxes_at(snapshot))
    {
        const Vec3 nearest = origin.cwiseMax(b.min).cwiseMin(b.max);
        if ((nearest - origin).norm() < range)
            boxes.push_back(b);
    }

    const int channels = config_.lidar_channels;
    const double el_min = config_.lidar_elevation_min * kPi / 180.0;
    const double el_max = config_.lidar_elevation_max * kPi / 180.0;
    constexpr double golden = 0.6180339887498949;
    const std::size_t target = static_cast<std::size_t>(config_.points_per_cloud);
    const std::size_t max_rays = 8 * target;
    cloud.points.reserve(target);

    for (std::size_t k = 0; k < max_rays && cloud.points.size() < target; ++k)
    {
        const int ch = static_cast<int>(k % channels);
        const std::size_t j = k / channels;
        const double el = channels == 1 ? 0.5 * (el_min + el_max) : el_min + (el_max - el_min) * ch / (channels - 1);
        double frac = (static_cast<double>(j) + 0.5) * golden + 0.5 * ch / channels;
        frac -= std::floor(frac);
        const double az = 2.0 * kPi * frac;
        const Vec3 d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));

        double t_best = range;
        if (d.z() < 0.0)
            t_best = std::min(t_best, -origin.z() / d.z());
        for (const Box &b : boxes)
        {
            double t0 = 0.0, t1 = t_best;
            bool hit = true;
            for (int a = 0; a < 3 && hit; ++a)
            {
                if (d[a] == 0.0)
                {
                    hit = origin[a] > b.min[a] && origin[a] < b.max[a];
                    continue;
                }
                double ta = (b.min[a] - origin[a]) / d[a];
                double tb = (b.max[a] - origin[a]) / d[a];
                if (ta > tb)
                    std::swap(ta, tb);
                t0 = std::max(t0, ta);
                t1 = std::min(t1, tb);
                hit = t0 < t1;
            }
            if (hit && t0 > 0.0 && t0 < t_best)
                t_best = t0;
        }
        if (!(t_best < range))
            continue;

        const Vec3 w = origin + t_best * d;
        const double dx = w.x() - origin.x(), dy = w.y() - origin.y();
        const double sx = c * dx + sn * dy;
        const double sy = config_.strict_paper_transform ? sn * dx - c * dy : -sn * dx + c * dy;
        cloud.points.emplace_back(sx, sy, std::max(0.0, w.z()));
    }
    if (cloud.points.empty())
        throw EmptyCloud("synth: LiDAR returned no points at snapshot " + std::to_string(snapshot));
    return cloud;
}

std::vector<SpecularHit> SynthScene::specular_hits(int snapshot) const
{
    const auto boxes = boxes_at(snapshot);
    RoughnessModel rough{config_.roughness_tile, config_.roughness_lobe, derive_seed(seed_, {3})};
    return specular_scatterers(antenna_position(Source::Tx, snapshot), antenna_position(Source::Rx, snapshot), boxes,
                               rough);
}

GroundTruthScatterers SynthScene::ground_truth(int snapshot) const
{
    GroundTruthScatterers gt;
    gt.snapshot = SnapshotIndex::make(snapshot, config_.dt_snap);
    for (const SpecularHit &h : specular_hits(snapshot))
        gt.positions.push_back(h.position);
    return gt;
}

void SynthScene::write(const std::filesystem::path &dir, unsigned jobs) const
{
    namespace fs = std::filesystem;
    fs::create_directories(dir / "clouds");

    nlohmann::ordered_json j;
    j["format"] = "scar-scene";
    j["seed"] = seed_;
    j["n_snapshots"] = config_.n_snapshots;
    j["dt_snap"] = config_.dt_snap;
    j["antenna_height"] = config_.antenna_height;
    j["strict_paper_transform"] = config_.strict_paper_transform;
    j["tx_vehicle"] = "Tx";
    j["rx_vehicle"] = "Rx";
    j["vehicle_size"] = {config_.vehicle_size.x(), config_.vehicle_size.y(), config_.vehicle_size.z()};
    j["vtd"] = config_.vtd_label();
    {
        std::ofstream out(dir / "scene.json", std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + (dir / "scene.json").string());
        out << j.dump(2) << "\n";
    }

    write_trajectories(dir / "trajectories.csv", trajectories_);

    {
        std::ofstream out(dir / "boxes.csv", std::ios::binary | std::ios::trunc);
        if (!out)
            throw IoError("cannot write " + (dir / "boxes.csv").string());
        out << "id,x_min,y_min,z_min,x_max,y_max,z_max\n";
        for (const Box &b : buildings_)
            out << b.id << ',' << format_double(b.min.x()) << ',' << format_double(b.min.y()) << ','
                << format_double(b.min.z()) << ',' << format_double(b.max.x()) << ',' << format_double(b.max.y())
                << ',' << format_double(b.max.z()) << '\n';
    }

    const int n = config_.n_snapshots;
    std::vector<PoseRecord> poses;
    for (int s = 1; s <= n; ++s)
    {
        poses.push_back({s, "Tx", sensor_pose(Source::Tx, s)});
        poses.push_back({s, "Rx", sensor_pose(Source::Rx, s)});
    }
    write_poses(dir / "poses.csv", poses);

    std::vector<GroundTruthScatterers> truth(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), jobs,
                 [&](std::size_t i)
                 {
                     const int s = static_cast<int>(i) + 1;
                     truth[i] = ground_truth(s);
                     for (Source src : {Source::Tx, Source::Rx})
                     {
                         const auto cloud = point_cloud(src, s);
                         const std::string name =
                             std::string(src == Source::Tx ? "Tx_" : "Rx_") + std::to_string(s) + ".csv";
                         write_point_cloud(dir / "clouds" / name, cloud.points);
                     }
                 });
    write_ground_truth(dir / "ground_truth.csv", truth);
}

} // namespace scar
