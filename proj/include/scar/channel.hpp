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

#include "scar/gridmap.hpp"
#include "scar/recognize.hpp"

#include <complex>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace scar
{

enum class Component
{
    LoS,
    GroundReflection,
    Static,
    Dynamic
};

const char *component_name(Component c) noexcept;

enum class UnknownPolicy
{
    Static,
    Dynamic,
    Drop
};

UnknownPolicy parse_unknown_policy(const std::string &name);

enum class Side
{
    Tx,
    Rx
};

struct Cluster
{
    int id = 0;
    ScattererClass cls = ScattererClass::Static;
    std::vector<std::size_t> members; // indices into the scatterer set, ascending
    Vec3 centroid = Vec3::Zero();
    Vec3 velocity = Vec3::Zero(); // mean member velocity, m/s
    Side side = Side::Tx;
    std::uint64_t key = 0; // smallest member key; stable while membership is
};

struct ClusterConfig
{
    double eps = 3.0; // m
    int min_pts = 2;
    UnknownPolicy unknown_as = UnknownPolicy::Static;

    void validate() const;
};

// DBSCAN over 3-D points. A point is core when at least min_pts points
// (itself included) lie within eps. Border points join the cluster of their
// lowest-index core neighbour; noise points come back as singletons.
// Clusters are ordered by their smallest member, members ascending.
std::vector<std::vector<std::size_t>> dbscan(std::span<const Vec3> points, double eps, int min_pts);

// Clusters static and dynamic populations separately (unknown scatterers
// follow cfg.unknown_as), assigns cluster ids and Tx/Rx sides.
std::vector<Cluster> cluster_scatterers(std::vector<Scatterer> &scatterers, const ClusterConfig &cfg, const Vec3 &tx,
                                        const Vec3 &rx);

struct TwinClusterLink
{
    int tx_cluster = 0;
    int rx_cluster = 0;       // equal to tx_cluster for a single-bounce link
    double virtual_delay = 0; // random part of the inter-cluster delay, s
    bool single_bounce() const noexcept { return tx_cluster == rx_cluster; }
};

// Uniform random matching of min(|tx|, |rx|) pairs; the leftovers become
// single-bounce links. The order is drawn from (seed, cluster key), so the
// same clusters pair the same way in every snapshot.
std::vector<TwinClusterLink> match_twins(std::span<const Cluster> tx_clusters, std::span<const Cluster> rx_clusters,
                                         std::uint64_t seed, double tau_mean);

struct Transceiver
{
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero(); // m/s
};

struct PathGeometry
{
    double length = 0.0;     // m, geometric part only
    double delay = 0.0;      // s, including any virtual delay
    double doppler = 0.0;    // Hz, both ends
    double doppler_tx = 0.0; // Hz
    double doppler_rx = 0.0; // Hz
};

PathGeometry los_path(const Transceiver &tx, const Transceiver &rx, double lambda);
// Specular reflection off the ground plane z = 0, reflection point static.
PathGeometry ground_reflection_path(const Transceiver &tx, const Transceiver &rx, double lambda);
Vec3 ground_reflection_point(const Vec3 &tx, const Vec3 &rx);
// Tx -> a ... b -> Rx. The virtual link between a and b contributes
// virtual_delay (s) but no Doppler; a == b is a single bounce.
PathGeometry nlos_path(const Transceiver &tx, const Vec3 &a, const Vec3 &va, const Vec3 &b, const Vec3 &vb,
                       const Transceiver &rx, double virtual_delay, double lambda);

// Phase of a path at delay tau for initial phase phase0.
double path_phase(double phase0, double delay, double lambda);

struct PowerModel
{
    double chi_s = 6.9e6; // 1/s
    double chi_d = 6.9e6; // 1/s
    double nu_s = 0.0;
    double nu_d = 0.0;
    double sigma_s = 3.0; // dB
    double sigma_d = 3.0; // dB

    void validate() const;
    // exp(-chi tau - nu) 10^(-rho/10), un-normalized.
    double power(Component c, double delay, double shadowing_db) const;
};

struct MixConfig
{
    double ricean = 2.0; // Upsilon
    double theta_gr = 0.2;
    double theta_s = 0.5;
    double theta_d = 0.3;

    void validate() const;
    double los_weight() const noexcept;
    double weight(Component c) const noexcept;
};

struct ChannelConfig
{
    double fc = 28e9; // Hz
    double tau_mean = 30e-9; // mean random virtual delay, s
    MixConfig mix;
    PowerModel power;
    ClusterConfig cluster;
    ClassifierConfig classifier;

    void validate() const;
    double lambda() const noexcept { return kSpeedOfLight / fc; }
};

struct Tap
{
    Component component = Component::LoS;
    int k = 0;  // link index within the component
    int ki = 0; // path index within the link
    double delay = 0.0;
    double doppler = 0.0;
    double power = 1.0;  // class-normalized path power
    double weight = 1.0; // mixing weight of the component
    double phase = 0.0;  // accumulated Doppler phase plus initial phase, rad
    std::complex<double> gain;
    std::uint64_t key = 0;
};

// One snapshot of the recognized scene for one link.
struct SnapshotInput
{
    int snapshot = 1;
    double time = 0.0; // s
    Transceiver tx;
    Transceiver rx;
    GridSpec scatterer_spec;
    std::vector<int> counts;
    const FeatureGridMap *features = nullptr;
    std::vector<VehicleState> vehicles; // traffic only, not the link's own vehicles
};

// Evaluation instant: snapshot input plus an offset (s) within it. Moving
// objects are advanced linearly by the offset.
struct Frame
{
    std::size_t input = 0;
    double offset = 0.0;
};

struct FrameTaps
{
    int snapshot = 1;
    double time = 0.0;
    std::vector<Tap> taps;
};

struct ChannelRealization
{
    std::size_t index = 0;
    std::vector<FrameTaps> frames;
};

// Frames must be in non-decreasing time order. Throws EmptyScene when a
// frame ends up without taps.
ChannelRealization synthesize_cir(std::span<const SnapshotInput> inputs, std::span<const Frame> frames,
                                  const ChannelConfig &cfg, std::uint64_t seed, std::size_t realization);
// One frame per input at offset 0.
ChannelRealization synthesize_cir(std::span<const SnapshotInput> inputs, const ChannelConfig &cfg, std::uint64_t seed,
                                  std::size_t realization);

// CSV "snapshot,component,k,ki,delay_s,doppler_hz,re,im".
void write_cir_csv(std::ostream &out, const ChannelRealization &realization);
void write_cir_csv(const std::filesystem::path &path, const ChannelRealization &realization);

} // namespace scar
