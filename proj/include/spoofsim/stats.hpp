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
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"
#include "scenario.hpp"

namespace spoofsim
{

// Gaussian with location mu and shape sigma, truncated to [a, b]. The
// symmetric zero-mean case (the only one the presets exercise) has the
// two-argument constructor.
struct truncated_gaussian
{
    double mu = 0.0;
    double sigma = 1.0;
    double a = -1.0;
    double b = 1.0;

    truncated_gaussian(double sigma_, double bound_)
        : truncated_gaussian(0.0, sigma_, -bound_, bound_)
    {
    }

    truncated_gaussian(double mu_, double sigma_, double a_, double b_)
        : mu(mu_), sigma(sigma_), a(a_), b(b_)
    {
        if (!(sigma > 0.0) || !(a < b))
            throw std::invalid_argument("truncated_gaussian: need sigma > 0 and a < b");
    }

    bool symmetric() const { return mu == 0.0 && a == -b; }

    // Mass kept by the truncation, in (0, 1].
    double normalization() const
    {
        const double s2 = std::sqrt(2.0) * sigma;
        return 0.5 * (std::erf((b - mu) / s2) - std::erf((a - mu) / s2));
    }

    double pdf(double x) const
    {
        if (x < a || x > b)
            return 0.0;
        const double z = (x - mu) / sigma;
        const double g = std::exp(-0.5 * z * z) / (std::sqrt(2.0 * M_PI) * sigma);
        return g / normalization();
    }

    // E[X^2] = sigma^2 (1 - 2 b p(b)); follows from integrating x^2 p(x) by
    // parts over the symmetric support. Only valid in the symmetric case.
    double second_moment() const
    {
        if (!symmetric())
            throw std::invalid_argument("truncated_gaussian: second_moment needs the symmetric form");
        return sigma * sigma * (1.0 - 2.0 * b * pdf(b));
    }

    // Rejection from the parent Gaussian. Acceptance probability equals the
    // truncation mass, which stays above 0.95 for every preset in this
    // project; an inverse-CDF sampler would be the fallback if a pathologically
    // narrow window were ever configured.
    double sample(rng_stream& rng) const
    {
        for (;;)
        {
            const double x = mu + sigma * rng.gaussian();
            if (x >= a && x <= b)
                return x;
        }
    }
};

// Mean of exp(X) for X truncated-Gaussian as above. By symmetry this also
// equals E[exp(-X)].
inline double trunc_lognormal_mean(double sigma, double bound)
{
    const double s2 = std::sqrt(2.0) * sigma;
    const double c = std::exp(sigma * sigma / 2.0) / (2.0 * std::erf(bound / s2));
    return c * (std::erf((bound - sigma * sigma) / s2) + std::erf((bound + sigma * sigma) / s2));
}

// Second-order approximation of E[a(theta_hat + e) a(theta_hat + e)^H] for a
// unit-norm ULA response and a truncated-Gaussian angle error e. With
// beta = 2 pi D (d/lambda), D = n1 - n2, and kappa = E[e^2] / 2:
//
//   R(n1, n2) = (1/N) [1 - (beta^2 sin^2(th) - j beta cos(th)) kappa] e^{-j beta cos(th)}
//
// Hermitian with unit trace. The approximation degrades like (beta sigma)^4,
// so the far-off-diagonal entries are the least accurate ones.
inline Eigen::MatrixXcd raa_matrix(int n_antennas, double spacing_over_wavelength,
                                   double aoa_estimate, double sigma_theta,
                                   double delta_theta_max)
{
    const truncated_gaussian err(sigma_theta, delta_theta_max);
    const double kappa = err.second_moment() / 2.0;
    const double ct = std::cos(aoa_estimate);
    const double st = std::sin(aoa_estimate);
    const double n = static_cast<double>(n_antennas);

    Eigen::MatrixXcd r(n_antennas, n_antennas);
    for (int n1 = 0; n1 < n_antennas; ++n1)
    {
        for (int n2 = 0; n2 < n_antennas; ++n2)
        {
            const double beta = 2.0 * M_PI * (n1 - n2) * spacing_over_wavelength;
            const std::complex<double> corr =
                1.0 - (beta * beta * st * st - std::complex<double>(0.0, beta * ct)) * kappa;
            const std::complex<double> phase(std::cos(-beta * ct), std::sin(-beta * ct));
            r(n1, n2) = corr * phase / n;
        }
    }
    return r;
}

// Nearest positive-semidefinite matrix in Frobenius norm: eigenvalue clamp of
// the hermitized input.
inline Eigen::MatrixXcd psd_project(const Eigen::MatrixXcd& h)
{
    const Eigen::MatrixXcd sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sym);
    Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();
}

// Alice's noisy view of the Eve parameters. Draw order is pinned: for each
// user pair, every AoA estimate in path order, then the power estimate.
inline std::vector<eve_knowledge> sample_eve_knowledge(const scenario_config& cfg,
                                                       rng_stream& rng)
{
    const truncated_gaussian aoa_err(cfg.eve_know.sigma_theta, cfg.eve_know.delta_theta_max);
    const truncated_gaussian pow_err(cfg.eve_know.sigma_power, cfg.eve_know.delta_power_max);
    std::vector<eve_knowledge> out;
    out.reserve(cfg.eves.size());
    for (const auto& eve : cfg.eves)
    {
        eve_knowledge k;
        k.hyper = cfg.eve_know;
        k.aoa_estimates.reserve(eve.aoas.size());
        for (double aoa : eve.aoas)
            k.aoa_estimates.push_back(aoa + aoa_err.sample(rng));
        k.power_estimate = eve.power * std::exp(pow_err.sample(rng));
        out.push_back(std::move(k));
    }
    return out;
}

} // namespace spoofsim
