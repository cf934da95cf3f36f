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

#include "scar/channel.hpp"

#include <Eigen/Core>

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace scar
{

struct FrequencyGrid
{
    double fc = 28e9;
    double bandwidth = 2e9;
    std::vector<double> f; // Hz, each within [fc - B/2, fc + B/2]

    // n points spanning the band edge to edge (n = 1 gives fc).
    static FrequencyGrid uniform(double fc, double bandwidth, std::size_t n);
    static FrequencyGrid make(double fc, double bandwidth, std::vector<double> f);
    std::size_t index_of(double freq) const; // exact-match lookup
};

struct TvtfGrid
{
    std::vector<double> times; // one per frame, s
    FrequencyGrid freq;
    double vartheta = 0.0;
    Eigen::MatrixXcd h; // frames x frequencies
};

// H(t, f) = sum of gain * (f / fc)^vartheta * exp(-j 2 pi (f - fc) tau) over
// the taps; the LoS tap carries no frequency factor. The carrier part of the
// delay phase is carried by the tap gain (Doppler integral plus initial
// phase), so counting f tau in full would rotate it twice.
TvtfGrid tvtf(const ChannelRealization &realization, const FrequencyGrid &grid, double vartheta);

struct CorrelationSurface
{
    std::vector<int> dt_lags; // frame-index offsets
    std::vector<int> df_lags; // frequency-index offsets
    Eigen::MatrixXcd raw;     // E[H*(t,f) H(t+dt, f+df)], dt x df
    // raw / sqrt(E|H(t,f)|^2 E|H(t+dt,f+df)|^2); exactly 1 at zero lag.
    Eigen::MatrixXcd normalized;
    std::size_t n_realizations = 0;
};

CorrelationSurface tfcf(std::span<const TvtfGrid> ensemble, std::size_t t, std::size_t f, std::span<const int> dt_lags,
                        std::span<const int> df_lags);

enum class Window
{
    Rectangular,
    Hann
};

Window parse_window(const std::string &name);

struct DpsdCurve
{
    std::vector<double> doppler; // bin centers, Hz, ascending
    std::vector<double> value;   // power per Hz
    double bin_width = 0.0;      // Hz
    std::size_t fft_size = 0;
    Window window = Window::Hann;
};

// Smallest power of two holding `padding` times the two-sided lag sequence.
std::size_t dpsd_fft_size(std::size_t n_lags, std::size_t padding);

// Fourier transform of a one-sided TACF sampled at lag_times (uniform,
// starting at 0). Negative lags follow from Hermitian symmetry; the
// window is applied over the two-sided sequence.
DpsdCurve dpsd(std::span<const double> lag_times, std::span<const std::complex<double>> tacf, std::size_t fft_size,
               Window window = Window::Hann);

// CSV "lag_or_bin,value_re,value_im".
void write_curve_csv(std::ostream &out, std::span<const double> x, std::span<const std::complex<double>> y);
void write_curve_csv(const std::filesystem::path &path, std::span<const double> x,
                     std::span<const std::complex<double>> y);

} // namespace scar
