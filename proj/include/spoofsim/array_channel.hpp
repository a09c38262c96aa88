// SPDX-License-Identifier: Apache-2.0
//
// spoofsim  Uplink channel estimation under pilot spoofing attacks
// Copyright (C) 2026 The spoofsim authors
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

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"
#include "scenario.hpp"

namespace spoofsim
{

// Unit-norm ULA response, entry n = exp(-j 2 pi n (d/lambda) cos(theta)) / sqrt(N).
inline Eigen::VectorXcd steering_vector(const array_config& arr, double aoa)
{
    const int n = arr.n_antennas;
    Eigen::VectorXcd a(n);
    const double w = -2.0 * M_PI * arr.spacing_over_wavelength * std::cos(aoa);
    for (int i = 0; i < n; ++i)
        a(i) = std::complex<double>(std::cos(w * i), std::sin(w * i)) / std::sqrt(double(n));
    return a;
}

// N x L matrix with the per-path responses as columns, scaled by 1/sqrt(L) so
// that E||A h||^2 = 1 for h ~ CN(0, I_L).
inline Eigen::MatrixXcd steering_matrix(const array_config& arr, const std::vector<double>& aoas)
{
    const int l = static_cast<int>(aoas.size());
    Eigen::MatrixXcd a(arr.n_antennas, l);
    for (int j = 0; j < l; ++j)
        a.col(j) = steering_vector(arr, aoas[j]) / std::sqrt(double(l));
    return a;
}

// K_TX = sqrt(P_TX) A_TX
inline Eigen::MatrixXcd composite_matrix(const array_config& arr, const user_link& link)
{
    return std::sqrt(link.power) * steering_matrix(arr, link.aoas);
}

// One Monte Carlo realization of every random quantity in the pilot phase.
struct channel_draw
{
    std::vector<Eigen::VectorXcd> h_b; // per user, length L_B,m
    std::vector<Eigen::VectorXcd> h_e; // per user, length L_E,m
    Eigen::MatrixXcd v;                // N x K receiver noise
};

inline Eigen::VectorXcd draw_cgaussian_vector(rng_stream& rng, int len, double variance = 1.0)
{
    Eigen::VectorXcd x(len);
    for (int i = 0; i < len; ++i)
        x(i) = rng.cgaussian(variance);
    return x;
}

// Draw order is part of the reproducibility contract: h_B for every user,
// then h_E for every user, then V column by column.
inline channel_draw sample_channel_draw(const scenario_config& cfg, rng_stream& rng)
{
    channel_draw d;
    d.h_b.reserve(cfg.bobs.size());
    d.h_e.reserve(cfg.eves.size());
    for (const auto& b : cfg.bobs)
        d.h_b.push_back(draw_cgaussian_vector(rng, static_cast<int>(b.aoas.size())));
    for (const auto& e : cfg.eves)
        d.h_e.push_back(draw_cgaussian_vector(rng, static_cast<int>(e.aoas.size())));
    d.v.resize(cfg.array.n_antennas, cfg.pilot_length);
    for (int k = 0; k < cfg.pilot_length; ++k)
        for (int n = 0; n < cfg.array.n_antennas; ++n)
            d.v(n, k) = rng.cgaussian(cfg.noise_variance);
    return d;
}

// Y = sum_m (K_B,m h_B,m + K_E,m h_E,m) p_m^T + V
inline Eigen::MatrixXcd synthesize_received(const scenario_config& cfg,
                                            const std::vector<Eigen::VectorXcd>& pilots,
                                            const channel_draw& draw)
{
    Eigen::MatrixXcd y = draw.v;
    for (std::size_t m = 0; m < cfg.bobs.size(); ++m)
    {
        Eigen::VectorXcd rx = composite_matrix(cfg.array, cfg.bobs[m]) * draw.h_b[m];
        rx += composite_matrix(cfg.array, cfg.eves[m]) * draw.h_e[m];
        y += rx * pilots[m].transpose();
    }
    return y;
}

// Pilot-matched correlation, y_m = Y p_m^*. With orthonormal pilots this
// removes the other users exactly and keeps the noise white.
inline Eigen::VectorXcd correlate(const Eigen::MatrixXcd& y_rx, const Eigen::VectorXcd& pilot)
{
    return y_rx * pilot.conjugate();
}

} // namespace spoofsim
