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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace scar
{

// 1-based snapshot number on a uniform timeline.
struct SnapshotIndex
{
    int index = 1;
    double dt_snap = 0.1; // seconds per snapshot (10 Hz LiDAR)

    static SnapshotIndex make(int index, double dt_snap = 0.1);
    double time() const noexcept { return (index - 1) * dt_snap; }
    bool operator==(const SnapshotIndex &) const = default;
};

enum class Source
{
    Tx,
    Rx
};

// One vehicle's piecewise-linear motion. Velocity is in m/snapshot; the
// vehicle moves over [start_snapshot, end_snapshot] and rests outside it.
struct VehicleTrajectory
{
    std::string name;
    Vec3 velocity = Vec3::Zero();
    int start_snapshot = 1;
    int end_snapshot = 1;
    Vec3 initial_position = Vec3::Zero();

    Vec3 position_at(double snapshot) const;
    Vec3 velocity_mps(double snapshot, double dt_snap) const;
};

struct SensorPose
{
    Vec3 position = Vec3::Zero(); // R(t) = [x_L, y_L, z_L]
    double heading = 0.0;         // radians, normalized to [-pi, pi)

    static double normalize_heading(double theta);
};

struct RawPointCloud
{
    std::vector<Vec3> points; // sensor frame, meters
    Source source = Source::Tx;
    SnapshotIndex snapshot;
};

struct GroundTruthScatterers
{
    std::vector<Vec3> positions; // world frame
    SnapshotIndex snapshot;
};

struct PoseRecord
{
    int snapshot = 1;
    std::string vehicle;
    SensorPose pose;
};

// Point clouds: headerless CSV "x,y,z" per line.
RawPointCloud parse_point_cloud(std::istream &in, Source source, SnapshotIndex snapshot);
RawPointCloud load_point_cloud(const std::filesystem::path &path, Source source, SnapshotIndex snapshot);
void write_point_cloud(std::ostream &out, std::span<const Vec3> points);
void write_point_cloud(const std::filesystem::path &path, std::span<const Vec3> points);

// Trajectories: CSV with header "name,vx,vy,vz,start,end,x0,y0,z0".
std::vector<VehicleTrajectory> parse_trajectories(std::istream &in);
std::vector<VehicleTrajectory> load_trajectories(const std::filesystem::path &path);
void write_trajectories(std::ostream &out, std::span<const VehicleTrajectory> trajectories);
void write_trajectories(const std::filesystem::path &path, std::span<const VehicleTrajectory> trajectories);

// Ground truth: CSV "snapshot,x,y,z"; one entry per snapshot in [1, n_snapshots]
// (snapshots without rows yield an empty set).
std::vector<GroundTruthScatterers> parse_ground_truth(std::istream &in, int n_snapshots, double dt_snap);
std::vector<GroundTruthScatterers> load_ground_truth(const std::filesystem::path &path, int n_snapshots, double dt_snap);
void write_ground_truth(const std::filesystem::path &path, std::span<const GroundTruthScatterers> truth);

// Sensor poses: CSV with header "snapshot,vehicle,x,y,z,heading".
std::vector<PoseRecord> load_poses(const std::filesystem::path &path);
void write_poses(const std::filesystem::path &path, std::span<const PoseRecord> poses);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

} // namespace scar
