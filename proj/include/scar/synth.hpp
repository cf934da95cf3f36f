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
#include "scar/scene_io.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace scar
{

// Axis-aligned box resting on (or above) the ground plane z = 0.
struct Box
{
    int id = 0;
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();
    int vehicle = -1; // trajectory index for moving boxes, -1 for buildings

    bool moving() const noexcept { return vehicle >= 0; }
    // Entry parameter of the segment a + t (b - a) into the box, if it
    // enters for some t in (t_lo, t_hi).
    bool segment_hits(const Vec3 &a, const Vec3 &b, double t_lo, double t_hi) const noexcept;
    double distance_to_surface(const Vec3 &p) const noexcept;
};

struct SynthConfig
{
    int n_buildings = 8;
    int n_vehicles = 6;
    int n_snapshots = 100;
    double dt_snap = 0.1;
    int points_per_cloud = 20000;

    double tx_speed = 8.0;        // m/s along +x
    double rx_speed = 6.0;        // m/s along +x
    double link_distance = 60.0;  // initial Tx-Rx separation, m
    double antenna_height = 1.2;  // LiDAR and antenna height above ground, m
    double x_min = -60.0;         // scene extent along the road
    double x_max = 220.0;
    double building_setback = 8.0; // distance of building fronts from the road axis
    Vec3 vehicle_size{4.5, 1.8, 1.45};
    double vehicle_speed_min = 5.0;
    double vehicle_speed_max = 12.0;

    int lidar_channels = 16;
    double lidar_elevation_min = -15.0; // degrees
    double lidar_elevation_max = 15.0;
    double lidar_range = 120.0;

    double roughness_tile = 1.5; // facet size on object faces, m; 0 = mirror faces
    double roughness_lobe = 0.25; // widest facet scattering lobe, rad

    bool strict_paper_transform = true;

    void validate() const;
    std::string vtd_label() const;
};

struct SpecularHit
{
    Vec3 position = Vec3::Zero();
    int box_id = 0;
    int face = 0; // 0: -x, 1: +x, 2: -y, 3: +y
};

struct RoughnessModel
{
    double tile = 0.0; // facet size, m
    double lobe = 0.0; // facet lobe half-widths are uniform in [0, lobe], rad
    std::uint64_t seed = 0;
};

// Single-bounce reflection points on the vertical faces of the boxes. A
// smooth face yields its image-method mirror point; a rough face yields the
// facets whose lobe contains the specular direction. A point is kept only
// when both transceivers are in front of the face and neither leg is
// blocked by another box.
std::vector<SpecularHit> specular_scatterers(const Vec3 &tx, const Vec3 &rx, std::span<const Box> boxes,
                                             const RoughnessModel &roughness = {});

// Desk-scale street scene: buildings on both sides of a four-lane road,
// traffic in three lanes, and the Tx and Rx vehicles in the fourth. The
// scene is a pure function of (config, seed); snapshots are generated on
// demand.
class SynthScene
{
public:
    SynthScene(const SynthConfig &config, std::uint64_t seed);

    const SynthConfig &config() const noexcept { return config_; }
    std::uint64_t seed() const noexcept { return seed_; }
    // [0] is the Tx vehicle, [1] the Rx vehicle, the rest is traffic.
    const std::vector<VehicleTrajectory> &trajectories() const noexcept { return trajectories_; }
    const std::vector<Box> &buildings() const noexcept { return buildings_; }

    std::vector<Box> boxes_at(double snapshot) const;
    Vec3 antenna_position(Source s, double snapshot) const;
    Vec3 antenna_velocity(Source s, double snapshot) const; // m/s
    SensorPose sensor_pose(Source s, int snapshot) const;
    RawPointCloud point_cloud(Source s, int snapshot) const;
    GroundTruthScatterers ground_truth(int snapshot) const;
    std::vector<SpecularHit> specular_hits(int snapshot) const;

    // scene.json, trajectories.csv, poses.csv, boxes.csv, ground_truth.csv
    // and clouds/<Tx|Rx>_<snapshot>.csv.
    void write(const std::filesystem::path &dir, unsigned jobs = 1) const;

private:
    SynthConfig config_;
    std::uint64_t seed_;
    std::vector<VehicleTrajectory> trajectories_;
    std::vector<Box> buildings_;
};

SynthScene synth_scene(const SynthConfig &config, std::uint64_t seed);

} // namespace scar
