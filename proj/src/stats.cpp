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


#include "scar/stats.hpp"
#include "scar/error.hpp"
#include "scar/scene_io.hpp"

#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>

namespace scar
{

FrequencyGrid FrequencyGrid::uniform(double fc, double bandwidth, std::size_t n)
{
    if (n == 0)
        throw InvalidConfig("frequency grid needs at least one point");
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i)
        f[i] = n == 1 ? fc : fc - 0.5 * bandwidth + bandwidth * static_cast<double>(i) / static_cast<double>(n - 1);
    return make(fc, bandwidth, std::move(f));
}

FrequencyGrid FrequencyGrid::make(double fc, double bandwidth, std::vector<double> f)
{
    if (!(fc > 0.0) || !(bandwidth >= 0.0) || bandwidth >= 2.0 * fc)
        throw InvalidConfig("frequency grid needs fc > 0 and 0 <= B < 2 fc");
    const double lo = fc - 0.5 * bandwidth, hi = fc + 0.5 * bandwidth;
    const double tol = 1e-9 * fc;
    for (double v : f)
        if (!(v >= lo - tol && v <= hi + tol))
            throw InvalidConfig("frequency " + format_double(v) + " Hz lies outside the band");
    return FrequencyGrid{fc, bandwidth, std::move(f)};
}

std::size_t FrequencyGrid::index_of(double freq) const
{
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f[i] == freq)
            return i;
    throw LagOutOfRange("frequency " + format_double(freq) + " Hz is not on the grid");
}

TvtfGrid tvtf(const ChannelRealization &realization, const FrequencyGrid &grid, double vartheta)
{
    TvtfGrid out;
    out.freq = grid;
    out.vartheta = vartheta;
    out.h = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(realization.frames.size()),
                                   static_cast<Eigen::Index>(grid.f.size()));
    std::vector<double> factor(grid.f.size());
    for (std::size_t j = 0; j < grid.f.size(); ++j)
        factor[j] = std::pow(grid.f[j] / grid.fc, vartheta);
    for (std::size_t i = 0; i < realization.frames.size(); ++i)
    {
        const FrameTaps &fr = realization.frames[i];
        out.times.push_back(fr.time);
        for (std::size_t j = 0; j < grid.f.size(); ++j)
        {
            std::complex<double> acc = 0.0;
            for (const Tap &tap : fr.taps)
            {
                // The carrier phase of each tap already sits in its Doppler
                // integral, so only the offset from fc rotates with delay.
                const double cycles = std::fmod((grid.f[j] - grid.fc) * tap.delay, 1.0);
                const double scale = tap.component == Component::LoS ? 1.0 : factor[j];
                acc += scale * tap.gain * std::polar(1.0, -2.0 * kPi * cycles);
            }
            out.h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = acc;
        }
    }
    return out;
}

CorrelationSurface tfcf(std::span<const TvtfGrid> ensemble, std::size_t t, std::size_t f, std::span<const int> dt_lags,
                        std::span<const int> df_lags)
{
    if (ensemble.size() < 2)
        throw InvalidConfig("correlation estimate needs at least two realizations");
    const Eigen::Index rows = ensemble.front().h.rows(), cols = ensemble.front().h.cols();
    for (const TvtfGrid &g : ensemble)
        if (g.h.rows() != rows || g.h.cols() != cols)
            throw DimMismatch("realizations have different TVTF grids");
    auto in_range = [](std::size_t base, int lag, Eigen::Index n)
    {
        const long long v = static_cast<long long>(base) + lag;
        return v >= 0 && v < static_cast<long long>(n);
    };
    if (!in_range(t, 0, rows) || !in_range(f, 0, cols))
        throw LagOutOfRange("anchor outside the TVTF grid");
    for (int l : dt_lags)
        if (!in_range(t, l, rows))
            throw LagOutOfRange("time lag " + std::to_string(l) + " leaves the frame grid");
    for (int l : df_lags)
        if (!in_range(f, l, cols))
            throw LagOutOfRange("frequency lag " + std::to_string(l) + " leaves the frequency grid");

    const double n = static_cast<double>(ensemble.size());
    auto mean_product = [&](Eigen::Index t1, Eigen::Index f1, Eigen::Index t2, Eigen::Index f2)
    {
        std::complex<double> acc = 0.0;
        for (const TvtfGrid &g : ensemble)
            acc += std::conj(g.h(t1, f1)) * g.h(t2, f2);
        return acc / n;
    };

    CorrelationSurface s;
    s.dt_lags.assign(dt_lags.begin(), dt_lags.end());
    s.df_lags.assign(df_lags.begin(), df_lags.end());
    s.n_realizations = ensemble.size();
    s.raw.resize(static_cast<Eigen::Index>(dt_lags.size()), static_cast<Eigen::Index>(df_lags.size()));
    s.normalized.resizeLike(s.raw);
    const auto t0 = static_cast<Eigen::Index>(t), f0 = static_cast<Eigen::Index>(f);
    const double p0 = mean_product(t0, f0, t0, f0).real();
    for (std::size_t a = 0; a < dt_lags.size(); ++a)
        for (std::size_t b = 0; b < df_lags.size(); ++b)
        {
            const Eigen::Index t1 = t0 + dt_lags[a], f1 = f0 + df_lags[b];
            const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
            s.raw(ia, ib) = mean_product(t0, f0, t1, f1);
            if (dt_lags[a] == 0 && df_lags[b] == 0)
                s.normalized(ia, ib) = s.raw(ia, ib) / p0;
            else
                s.normalized(ia, ib) = s.raw(ia, ib) / std::sqrt(p0 * mean_product(t1, f1, t1, f1).real());
        }
    return s;
}

Window parse_window(const std::string &name)
{
    if (name == "hann")
        return Window::Hann;
    if (name == "rectangular" || name == "rect")
        return Window::Rectangular;
    throw InvalidConfig("unknown window '" + name + "' (expected hann or rectangular)");
}

std::size_t dpsd_fft_size(std::size_t n_lags, std::size_t padding)
{
    const std::size_t need = std::max<std::size_t>(1, padding) * (2 * std::max<std::size_t>(1, n_lags) - 1);
    std::size_t n = 1;
    while (n < need)
        n <<= 1;
    return n;
}

namespace
{
std::mutex fftw_plan_mutex; // FFTW planning is not thread-safe
}

DpsdCurve dpsd(std::span<const double> lag_times, std::span<const std::complex<double>> tacf, std::size_t fft_size,
               Window window)
{
    const std::size_t k = tacf.size();
    if (k == 0 || lag_times.size() != k)
        throw InvalidConfig("DPSD needs matching, non-empty lag and TACF arrays");
    if (k == 1)
        throw NonUniformGrid("DPSD needs at least two lags to define a step");
    const double step = lag_times[1] - lag_times[0];
    if (!(step > 0.0) || std::abs(lag_times[0]) > 1e-9 * step)
        throw NonUniformGrid("lags must start at 0 and increase");
    for (std::size_t i = 1; i < k; ++i)
        if (std::abs(lag_times[i] - static_cast<double>(i) * step) > 1e-6 * step)
            throw NonUniformGrid("lag " + std::to_string(i) + " is off the uniform grid");
    if (fft_size < 2 * k - 1)
        throw InvalidConfig("FFT size must hold the two-sided lag sequence");

    const std::size_t n = fft_size;
    fftw_complex *in = fftw_alloc_complex(n);
    fftw_complex *out = fftw_alloc_complex(n);
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_plan_mutex);
        plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < n; ++i)
        in[i][0] = in[i][1] = 0.0;
    for (std::size_t i = 0; i < k; ++i)
    {
        const double w = window == Window::Hann ? 0.5 * (1.0 + std::cos(kPi * static_cast<double>(i) / k)) : 1.0;
        const std::complex<double> v = w * tacf[i];
        in[i][0] = v.real();
        in[i][1] = v.imag();
        if (i > 0)
        {
            in[n - i][0] = v.real();
            in[n - i][1] = -v.imag();
        }
    }
    fftw_execute(plan);

    DpsdCurve c;
    c.fft_size = n;
    c.window = window;
    c.bin_width = 1.0 / (static_cast<double>(n) * step);
    c.doppler.resize(n);
    c.value.resize(n);
    const long long half = static_cast<long long>(n / 2);
    for (std::size_t i = 0; i < n; ++i)
    {
        const long long m = static_cast<long long>(i) - half; // -N/2 .. N/2-1
        const std::size_t src = static_cast<std::size_t>((m + static_cast<long long>(n)) % static_cast<long long>(n));
        c.doppler[i] = static_cast<double>(m) * c.bin_width;
        c.value[i] = step * out[src][0];
    }
    {
        std::lock_guard lock(fftw_plan_mutex);
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return c;
}

void write_curve_csv(std::ostream &out, std::span<const double> x, std::span<const std::complex<double>> y)
{
    if (x.size() != y.size())
        throw DimMismatch("curve axes differ in length");
    out << "lag_or_bin,value_re,value_im\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        out << format_double(x[i]) << ',' << format_double(y[i].real()) << ',' << format_double(y[i].imag()) << '\n';
}

void write_curve_csv(const std::filesystem::path &path, std::span<const double> x,
                     std::span<const std::complex<double>> y)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + path.string());
    write_curve_csv(out, x, y);
}

} // namespace scar
