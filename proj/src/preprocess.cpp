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


#include "scar/preprocess.hpp"
#include "scar/error.hpp"

#include <cmath>

namespace scar
{

void PreprocessConfig::validate() const
{
    if (!(ground_threshold >= 0.0) || !(ground_threshold < height_ceiling))
        throw InvalidConfig("preprocess: need 0 <= H_g < H_h");
}

VisibilityRegion VisibilityRegion::make(const Vec3 &tx, const Vec3 &rx)
{
    VisibilityRegion vr;
    vr.tx_pos = tx;
    vr.rx_pos = rx;
    vr.d_tcv = (tx - rx).norm();
    if (!(vr.d_tcv > 0.0))
        throw DegenerateVR("visibility region: Tx and Rx coincide");
    vr.semi_minor = 0.5 * vr.d_tcv;
    vr.focal = 0.5 * vr.d_tcv;
    vr.semi_major = std::sqrt(vr.semi_minor * vr.semi_minor + vr.focal * vr.focal);
    return vr;
}

RawPointCloud filter_heights(const RawPointCloud &cloud, const PreprocessConfig &cfg)
{
    RawPointCloud out;
    out.source = cloud.source;
    out.snapshot = cloud.snapshot;
    out.points.reserve(cloud.points.size());
    for (const Vec3 &p : cloud.points)
        if (p.z() > cfg.ground_threshold && p.z() < cfg.height_ceiling)
            out.points.push_back(p);
    return out;
}

Vec3 to_world(const Vec3 &p, const SensorPose &pose, bool strict_paper_transform)
{
    const double c = std::cos(pose.heading);
    const double s = std::sin(pose.heading);
    const Vec3 &r = pose.position;
    if (strict_paper_transform)
        return Vec3(p.x() * c + p.y() * s + r.x(), p.x() * s - p.y() * c - r.y(), -p.z() - r.z());
    return Vec3(p.x() * c - p.y() * s + r.x(), p.x() * s + p.y() * c + r.y(), p.z() + r.z());
}

WorldPointCloud transform_cloud(const RawPointCloud &cloud, const SensorPose &pose, bool strict_paper_transform)
{
    WorldPointCloud out;
    out.snapshot = cloud.snapshot;
    out.points.reserve(cloud.points.size());
    out.heights.reserve(cloud.points.size());
    for (const Vec3 &p : cloud.points)
    {
        out.points.push_back(to_world(p, pose, strict_paper_transform));
        out.heights.push_back(p.z());
    }
    return out;
}

WorldPointCloud merge_clouds(const WorldPointCloud &tx_cloud, const WorldPointCloud &rx_cloud)
{
    if (!(tx_cloud.snapshot == rx_cloud.snapshot))
        throw SnapshotMismatch("merge_clouds: snapshot " + std::to_string(tx_cloud.snapshot.index) + " vs " +
                               std::to_string(rx_cloud.snapshot.index));
    WorldPointCloud out;
    out.snapshot = tx_cloud.snapshot;
    out.points.reserve(tx_cloud.points.size() + rx_cloud.points.size());
    out.heights.reserve(out.points.capacity());
    out.points.insert(out.points.end(), tx_cloud.points.begin(), tx_cloud.points.end());
    out.points.insert(out.points.end(), rx_cloud.points.begin(), rx_cloud.points.end());
    out.heights.insert(out.heights.end(), tx_cloud.heights.begin(), tx_cloud.heights.end());
    out.heights.insert(out.heights.end(), rx_cloud.heights.begin(), rx_cloud.heights.end());
    return out;
}

std::vector<unsigned char> vr_mask(const std::vector<Vec3> &points, const VisibilityRegion &vr, unsigned jobs)
{
    std::vector<unsigned char> keep(points.size(), 0);
    constexpr std::size_t kChunk = 8192;
    const std::size_t chunks = (points.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, jobs, [&](std::size_t c) {
        const std::size_t end = std::min(points.size(), (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i)
            keep[i] = vr.contains(points[i]) ? 1 : 0;
    });
    return keep;
}

ValidPointCloud vr_filter(const WorldPointCloud &cloud, const VisibilityRegion &vr, unsigned jobs)
{
    if (!(vr.d_tcv > 0.0))
        throw DegenerateVR("vr_filter: degenerate visibility region");
    const auto keep = vr_mask(cloud.points, vr, jobs);
    ValidPointCloud out;
    out.snapshot = cloud.snapshot;
    for (std::size_t i = 0; i < keep.size(); ++i)
        if (keep[i])
        {
            out.points.push_back(cloud.points[i]);
            out.heights.push_back(cloud.heights[i]);
        }
    return out;
}

ValidPointCloud preprocess(const RawPointCloud &tx_cloud, const SensorPose &tx_pose, const RawPointCloud &rx_cloud,
                           const SensorPose &rx_pose, const VisibilityRegion &vr, const PreprocessConfig &cfg,
                           unsigned jobs)
{
    cfg.validate();
    const auto tx_world = transform_cloud(filter_heights(tx_cloud, cfg), tx_pose, cfg.strict_paper_transform);
    const auto rx_world = transform_cloud(filter_heights(rx_cloud, cfg), rx_pose, cfg.strict_paper_transform);
    return vr_filter(merge_clouds(tx_world, rx_world), vr, jobs);
}

} // namespace scar
