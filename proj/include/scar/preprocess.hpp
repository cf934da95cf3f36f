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

#include <vector>

namespace scar
{

struct PreprocessConfig
{
    double ground_threshold = 0.2; // H_g, meters
    double height_ceiling = 10.0;  // H_h, meters
    // true: the verbatim transform with the -y_L and -z-z_L terms;
    // false: the right-handed rigid transform.
    bool strict_paper_transform = true;

    void validate() const;
};

// Ellipsoid with the transceivers as foci. Minor axis and focal length both
// equal D_tcv, which fixes the major axis at sqrt(2) * D_tcv.
struct VisibilityRegion
{
    Vec3 tx_pos = Vec3::Zero();
    Vec3 rx_pos = Vec3::Zero();
    double d_tcv = 0.0;
    double semi_major = 0.0; // a
    double semi_minor = 0.0; // b
    double focal = 0.0;      // c

    static VisibilityRegion make(const Vec3 &tx, const Vec3 &rx);

    double major_axis() const noexcept { return 2.0 * semi_major; }
    double distance_sum(const Vec3 &p) const noexcept { return (p - tx_pos).norm() + (p - rx_pos).norm(); }
    // Inclusive on the boundary (1e-12 m slack).
    bool contains(const Vec3 &p) const noexcept { return distance_sum(p) <= major_axis() + kBoundarySlack; }

    static constexpr double kBoundarySlack = 1e-12;
};

// World-frame points that still remember their sensor-frame height, which is
// what the height layer of the feature map is built from.
struct WorldPointCloud
{
    std::vector<Vec3> points;
    std::vector<double> heights;
    SnapshotIndex snapshot;
};

struct ValidPointCloud
{
    std::vector<Vec3> points;
    std::vector<double> heights;
    SnapshotIndex snapshot;

    std::size_t size() const noexcept { return points.size(); }
};

// Keeps points with H_g < z < H_h (sensor frame, strict on both sides).
RawPointCloud filter_heights(const RawPointCloud &cloud, const PreprocessConfig &cfg);

Vec3 to_world(const Vec3 &point, const SensorPose &pose, bool strict_paper_transform = true);

WorldPointCloud transform_cloud(const RawPointCloud &cloud, const SensorPose &pose, bool strict_paper_transform);

// Concatenation, Tx points first. Duplicates are kept.
WorldPointCloud merge_clouds(const WorldPointCloud &tx_cloud, const WorldPointCloud &rx_cloud);

std::vector<unsigned char> vr_mask(const std::vector<Vec3> &points, const VisibilityRegion &vr, unsigned jobs = 1);
ValidPointCloud vr_filter(const WorldPointCloud &cloud, const VisibilityRegion &vr, unsigned jobs = 1);

// Height filter -> world transform -> merge -> VR filter, for one snapshot.
ValidPointCloud preprocess(const RawPointCloud &tx_cloud, const SensorPose &tx_pose, const RawPointCloud &rx_cloud,
                           const SensorPose &rx_pose, const VisibilityRegion &vr, const PreprocessConfig &cfg,
                           unsigned jobs = 1);

} // namespace scar
