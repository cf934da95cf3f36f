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


#include "scar/scene_io.hpp"
#include "scar/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_set>

namespace scar
{
namespace
{

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true)
    {
        const std::size_t comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return fields;
}

double parse_number(std::string_view field, std::size_t line)
{
    double v = 0.0;
    const char *first = field.data();
    const char *last = field.data() + field.size();
    if (!field.empty() && *first == '+')
        ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || field.empty())
        throw MalformedRow(line, "not a number: '" + std::string(field) + "'");
    if (!std::isfinite(v))
        throw MalformedRow(line, "non-finite value");
    return v;
}

int parse_int(std::string_view field, std::size_t line)
{
    int v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw MalformedRow(line, "not an integer: '" + std::string(field) + "'");
    return v;
}

std::ifstream open_input(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_output(const std::filesystem::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

} // namespace

std::string format_double(double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

SnapshotIndex SnapshotIndex::make(int index, double dt_snap)
{
    if (index < 1)
        throw InvalidRange("snapshot index must be >= 1");
    if (!(dt_snap > 0.0))
        throw InvalidRange("dt_snap must be positive");
    return SnapshotIndex{index, dt_snap};
}

Vec3 VehicleTrajectory::position_at(double snapshot) const
{
    const double s = std::clamp(snapshot, double(start_snapshot), double(end_snapshot));
    return initial_position + velocity * (s - start_snapshot);
}

Vec3 VehicleTrajectory::velocity_mps(double snapshot, double dt_snap) const
{
    if (snapshot >= start_snapshot && snapshot < end_snapshot)
        return velocity / dt_snap;
    return Vec3::Zero();
}

double SensorPose::normalize_heading(double theta)
{
    if (theta >= -kPi && theta < kPi)
        return theta;
    double t = std::fmod(theta + kPi, 2.0 * kPi);
    if (t < 0.0)
        t += 2.0 * kPi;
    return t - kPi;
}

RawPointCloud parse_point_cloud(std::istream &in, Source source, SnapshotIndex snapshot)
{
    RawPointCloud cloud;
    cloud.source = source;
    cloud.snapshot = snapshot;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty())
            continue;
        const auto fields = split(body);
        if (fields.size() != 3)
            throw MalformedRow(line_no, "expected 3 fields, got " + std::to_string(fields.size()));
        cloud.points.emplace_back(parse_number(fields[0], line_no), parse_number(fields[1], line_no),
                                  parse_number(fields[2], line_no));
    }
    if (cloud.points.empty())
        throw EmptyCloud("point cloud has no points");
    return cloud;
}

RawPointCloud load_point_cloud(const std::filesystem::path &path, Source source, SnapshotIndex snapshot)
{
    auto in = open_input(path);
    try
    {
        return parse_point_cloud(in, source, snapshot);
    }
    catch (const EmptyCloud &)
    {
        throw EmptyCloud("point cloud '" + path.string() + "' has no points");
    }
}

void write_point_cloud(std::ostream &out, std::span<const Vec3> points)
{
    std::string buf;
    buf.reserve(points.size() * 40);
    for (const Vec3 &p : points)
    {
        buf += format_double(p.x());
        buf += ',';
        buf += format_double(p.y());
        buf += ',';
        buf += format_double(p.z());
        buf += '\n';
    }
    out << buf;
}

void write_point_cloud(const std::filesystem::path &path, std::span<const Vec3> points)
{
    auto out = open_output(path);
    write_point_cloud(out, points);
}

std::vector<VehicleTrajectory> parse_trajectories(std::istream &in)
{
    static constexpr std::string_view kHeader[] = {"name", "vx", "vy", "vz", "start", "end", "x0", "y0", "z0"};
    std::vector<VehicleTrajectory> out;
    std::unordered_set<std::string> names;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line))
    {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty())
            continue;
        const auto fields = split(body);
        if (!header_seen)
        {
            if (fields.size() != 9 || !std::equal(fields.begin(), fields.end(), std::begin(kHeader)))
                throw MalformedRow(line_no, "expected header name,vx,vy,vz,start,end,x0,y0,z0");
            header_seen = true;
            continue;
        }
        if (fields.size() != 9)
            throw MalformedRow(line_no, "expected 9 fields, got " + std::to_string(fields.size()));
        VehicleTrajectory t;
        t.name = std::string(fields[0]);
        if (t.name.empty())
            throw MalformedRow(line_no, "empty vehicle name");
        t.velocity = Vec3(parse_number(fields[1], line_no), parse_number(fields[2], line_no),
                          parse_number(fields[3], line_no));
        t.start_snapshot = parse_int(fields[4], line_no);
        t.end_snapshot = parse_int(fields[5], line_no);
        t.initial_position = Vec3(parse_number(fields[6], line_no), parse_number(fields[7], line_no),
                                  parse_number(fields[8], line_no));
        if (t.start_snapshot > t.end_snapshot)
            throw InvalidRange("vehicle '" + t.name + "': start " + std::to_string(t.start_snapshot) + " > end " +
                               std::to_string(t.end_snapshot));
        if (!names.insert(t.name).second)
            throw DuplicateVehicle(t.name);
        out.push_back(std::move(t));
    }
    if (!header_seen)
        throw MalformedRow(1, "missing trajectory header");
    return out;
}

std::vector<VehicleTrajectory> load_trajectories(const std::filesystem::path &path)
{
    auto in = open_input(path);
    return parse_trajectories(in);
}

void write_trajectories(std::ostream &out, std::span<const VehicleTrajectory> trajectories)
{
    out << "name,vx,vy,vz,start,end,x0,y0,z0\n";
    for (const auto &t : trajectories)
    {
        out << t.name << ',' << format_double(t.velocity.x()) << ',' << format_double(t.velocity.y()) << ','
            << format_double(t.velocity.z()) << ',' << t.start_snapshot << ',' << t.end_snapshot << ','
            << format_double(t.initial_position.x()) << ',' << format_double(t.initial_position.y()) << ','
            << format_double(t.initial_position.z()) << '\n';
    }
}

void write_trajectories(const std::filesystem::path &path, std::span<const VehicleTrajectory> trajectories)
{
    auto out = open_output(path);
    write_trajectories(out, trajectories);
}

std::vector<GroundTruthScatterers> parse_ground_truth(std::istream &in, int n_snapshots, double dt_snap)
{
    if (n_snapshots < 1)
        throw InvalidRange("ground truth needs at least one snapshot");
    std::vector<GroundTruthScatterers> out(static_cast<std::size_t>(n_snapshots));
    for (int i = 0; i < n_snapshots; ++i)
        out[i].snapshot = SnapshotIndex::make(i + 1, dt_snap);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty())
            continue;
        const auto fields = split(body);
        if (line_no == 1 && !fields.empty() && fields[0] == "snapshot")
            continue;
        if (fields.size() != 4)
            throw MalformedRow(line_no, "expected 4 fields, got " + std::to_string(fields.size()));
        const int snap = parse_int(fields[0], line_no);
        if (snap < 1 || snap > n_snapshots)
            throw MalformedRow(line_no, "snapshot " + std::to_string(snap) + " out of range");
        out[snap - 1].positions.emplace_back(parse_number(fields[1], line_no), parse_number(fields[2], line_no),
                                             parse_number(fields[3], line_no));
    }
    return out;
}

std::vector<GroundTruthScatterers> load_ground_truth(const std::filesystem::path &path, int n_snapshots,
                                                     double dt_snap)
{
    auto in = open_input(path);
    return parse_ground_truth(in, n_snapshots, dt_snap);
}

void write_ground_truth(const std::filesystem::path &path, std::span<const GroundTruthScatterers> truth)
{
    auto out = open_output(path);
    std::string buf = "snapshot,x,y,z\n";
    for (const auto &snap : truth)
        for (const Vec3 &p : snap.positions)
        {
            buf += std::to_string(snap.snapshot.index);
            buf += ',';
            buf += format_double(p.x());
            buf += ',';
            buf += format_double(p.y());
            buf += ',';
            buf += format_double(p.z());
            buf += '\n';
        }
    out << buf;
}

std::vector<PoseRecord> load_poses(const std::filesystem::path &path)
{
    auto in = open_input(path);
    std::vector<PoseRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        const std::string_view body = trim(line);
        if (body.empty())
            continue;
        const auto fields = split(body);
        if (line_no == 1 && !fields.empty() && fields[0] == "snapshot")
            continue;
        if (fields.size() != 6)
            throw MalformedRow(line_no, "expected 6 fields, got " + std::to_string(fields.size()));
        PoseRecord r;
        r.snapshot = parse_int(fields[0], line_no);
        r.vehicle = std::string(fields[1]);
        r.pose.position = Vec3(parse_number(fields[2], line_no), parse_number(fields[3], line_no),
                               parse_number(fields[4], line_no));
        r.pose.heading = SensorPose::normalize_heading(parse_number(fields[5], line_no));
        out.push_back(std::move(r));
    }
    return out;
}

void write_poses(const std::filesystem::path &path, std::span<const PoseRecord> poses)
{
    auto out = open_output(path);
    out << "snapshot,vehicle,x,y,z,heading\n";
    for (const auto &r : poses)
        out << r.snapshot << ',' << r.vehicle << ',' << format_double(r.pose.position.x()) << ','
            << format_double(r.pose.position.y()) << ',' << format_double(r.pose.position.z()) << ','
            << format_double(r.pose.heading) << '\n';
}

} // namespace scar
