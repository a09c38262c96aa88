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
//
// Shared deterministic fixtures. The reference values in frozen:: were
// computed with an independent numpy/scipy implementation of the same
// formulas and are pinned here so regressions cannot hide behind a
// self-consistent rewrite.

#pragma once

#include <cmath>
#include <complex>

#include <spoofsim/harness.hpp>

namespace fixtures
{

using cd = std::complex<double>;

inline spoofsim::scenario_config preset()
{
    return spoofsim::build_reference_scenario(spoofsim::figure_preset::fig3).config;
}

struct user1_model
{
    spoofsim::scenario_config cfg;
    Eigen::MatrixXcd a_b, a_e, k_b, k_e;
    spoofsim::disturbance_model dist;
    Eigen::VectorXcd h_b, h_e, v, y;
};

// User 1 of the reference scenario with a fixed (non-random) channel, spoofed
// channel and noise realization.
inline user1_model make_user1()
{
    user1_model m;
    m.cfg = preset();
    m.a_b = spoofsim::steering_matrix(m.cfg.array, m.cfg.bobs[0].aoas);
    m.a_e = spoofsim::steering_matrix(m.cfg.array, m.cfg.eves[0].aoas);
    m.k_b = std::sqrt(m.cfg.bobs[0].power) * m.a_b;
    m.k_e = std::sqrt(m.cfg.eves[0].power) * m.a_e;
    m.dist = {m.k_e, m.cfg.noise_variance};
    m.h_b.resize(3);
    m.h_b << cd(1.0, 0.5), cd(-0.25, 1.0), cd(0.75, -0.5);
    m.h_e.resize(3);
    m.h_e << cd(0.5, -1.0), cd(1.25, 0.25), cd(-0.75, 0.75);
    m.v.resize(10);
    for (int i = 0; i < 10; ++i)
        m.v(i) = cd(0.1 * (i + 1) * (i % 2 ? -1.0 : 1.0), 0.05 * (i - 4));
    m.y = m.k_b * m.h_b + m.k_e * m.h_e + m.v;
    return m;
}

// Synthetic data correlation with a unitary-DFT eigenbasis and the clean
// spectrum (10, 9, 8, 7, 6, 5, 0.4, 0.3, 0.2, 0.1): Hermitian, well
// conditioned, with a wide gap after the sixth eigenvalue.
inline Eigen::MatrixXcd synthetic_corr()
{
    const int n = 10;
    Eigen::MatrixXcd f(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            f(r, c) = std::polar(1.0 / std::sqrt(double(n)), -2.0 * M_PI * r * c / n);
    Eigen::VectorXd lam(n);
    lam << 10, 9, 8, 7, 6, 5, 0.4, 0.3, 0.2, 0.1;
    Eigen::MatrixXcd s = f * lam.asDiagonal() * f.adjoint();
    return 0.5 * (s + s.adjoint());
}

inline Eigen::VectorXcd vec3(double r0, double i0, double r1, double i1, double r2, double i2)
{
    Eigen::VectorXcd v(3);
    v << cd(r0, i0), cd(r1, i1), cd(r2, i2);
    return v;
}

// Random full-column-rank complex matrix for randomized identity checks.
inline Eigen::MatrixXcd random_matrix(spoofsim::rng_stream& rng, int rows, int cols)
{
    Eigen::MatrixXcd m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r)
            m(r, c) = rng.cgaussian();
    return m;
}

namespace frozen
{

// Closed forms at the reference scenario, user 1, SNR_B = 30 dB, SSR = 0 dB.
inline constexpr double bmse_ls = 4.1323055025246083;
inline constexpr double ls_floor = 4.0570052615521819;
inline constexpr double ls_lower = 0.0;
inline constexpr double ls_upper = 32.464187853798052;
inline constexpr double bmse_ml = 0.090887270864536102;
inline constexpr double ml_expansion = 0.090887270864536435;
inline constexpr double bmse_mmse = 0.084042391593256077;
inline constexpr double mmse_cross = 0.084042391593251331;
inline constexpr double mmse_floor = 8.8817841970012523e-16;
inline constexpr double ls_passive = 0.075300240972426463;
inline constexpr double mmse_passive = 0.070620997141746189;

// Estimates on the fixed user-1 realization.
inline const Eigen::VectorXcd lse_hat = vec3(
    1.5636833795071652, -0.13087597863504552, -0.064799606729805892, 1.8178829224017872,
    0.68762657336528987, -0.24278837231644909);
inline const Eigen::VectorXcd mle_hat = vec3(
    1.0964768722673861, 0.63506882141361642, -0.34909859565500095, 0.88169182592092932,
    0.75948817963290172, -0.5192689574686602);
inline const Eigen::VectorXcd mmse_hat = vec3(
    1.031912464531147, 0.62039056066237286, -0.28683741875633573, 0.84897190299378589,
    0.77414880286352139, -0.50484948858768164);
inline const Eigen::VectorXcd naive_hat = vec3(
    0.75765353384177381, 0.31965897452428971, 0.18836720333150847, 0.9333966099910409,
    0.79382618223035362, -0.33225682400321332);
inline const Eigen::VectorXcd improved_hat = vec3(
    0.84106981253119106, 0.50276449335884821, 0.018275861294749812, 0.80842456225498638,
    0.86101391040526021, -0.38536067428938992);
inline const Eigen::VectorXcd smi_hat = vec3(
    29.588296498119341, 74.893486722396787, 121.07515031913937, 103.65413454057139,
    68.117494795534242, -41.857755371609962);
inline const Eigen::VectorXcd sub_hat = vec3(
    29.588296498118979, 74.89348672239656, 61.228657992506342, 62.697496324399253,
    66.945199277900983, -29.305252864913154);

// Knowledge fixture used for the LMMSE estimates above: AoA offsets
// (+0.01, -0.02, +0.005) and a power estimate of P e^{0.1}.
inline spoofsim::eve_knowledge knowledge_fixture()
{
    spoofsim::eve_knowledge k;
    k.aoa_estimates = {M_PI / 5.0 + M_PI / 10.0 + 0.01, 2.0 * M_PI / 5.0 - 0.02,
                       M_PI / 2.0 + 0.005};
    k.power_estimate = 1000.0 * std::exp(0.1);
    k.hyper = spoofsim::eve_uncertainty{};
    return k;
}

inline constexpr double naive_cond_base = 0.080868002936949956;
inline constexpr double naive_cond_delta = 0.23329050582677036;
inline constexpr double naive_cond_value = 0.31415850876372031;

// Appendix-level statistics at the reference hyperparameters.
inline constexpr double elog_reference = 1.0115911474364625; // sigma 0.1727, bound 0.3454
inline constexpr double tlm_05_10 = 1.1004817119438932;      // sigma 0.5, bound 1.0
inline constexpr double tlm_02_03 = 1.0110736070381554;      // sigma 0.2, bound 0.3
inline constexpr double secmom_theta = 0.0017078134036252798; // sigma pi/75, bound pi/25
inline constexpr double secmom_05_10 = 0.1934353258874808;

inline constexpr cd raa_01{0.056101489423842334, 0.081858120783038502};
inline constexpr cd raa_09{-0.029089966519733581, 0.024853767919428782};

// Downlink rates with perfect estimates on the fixed realization (user 1,
// both users' fixed channels, downlink SNR equal to the uplink 30 dB).
inline constexpr double rate_bob_fix = 7.3038952230813985;
inline constexpr double rate_eve_fix = 2.230648991253446;
inline const Eigen::VectorXcd h_b2_fix = [] {
    Eigen::VectorXcd v(2);
    v << cd(0.3, 0.4), cd(-1.1, 0.2);
    return v;
}();

inline constexpr double erf_one = 0.8427007929497149;

} // namespace frozen

} // namespace fixtures
