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
// Estimators of a single user's legitimate channel from the pilot-correlated
// observation y = K_B h_B + K_E h_E + v. Each estimator's signature admits
// only the side information the corresponding receiver is assumed to hold:
// the exact-statistics estimators take the true disturbance model, the
// sample-correlation ones take snapshots, and the LMMSE pair takes Alice's
// noisy Eve parameters and nothing else.

#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "array_channel.hpp"
#include "scenario.hpp"
#include "stats.hpp"

namespace spoofsim
{

struct estimator_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// K_B is numerically rank deficient, so h_B is not identifiable.
struct non_identifiable_error : estimator_error
{
    using estimator_error::estimator_error;
};

// The sample correlation is singular (for instance, fewer snapshots than
// antennas). No regularization is applied; the caller decides what to do.
struct singular_correlation_error : estimator_error
{
    using estimator_error::estimator_error;
};

struct model_error : estimator_error
{
    using estimator_error::estimator_error;
};

inline constexpr double rank_rel_tol = 1e-10;

// Exact disturbance statistics: spoofed component plus receiver noise.
struct disturbance_model
{
    Eigen::MatrixXcd k_e;
    double sigma_v2 = 1.0;

    Eigen::MatrixXcd r_dd() const
    {
        Eigen::MatrixXcd r = k_e * k_e.adjoint();
        r += sigma_v2 * Eigen::MatrixXcd::Identity(k_e.rows(), k_e.rows());
        return 0.5 * (r + r.adjoint());
    }
};

namespace detail
{

inline void check_obs(const Eigen::MatrixXcd& k_b, const Eigen::VectorXcd& y, const char* who)
{
    if (k_b.rows() != y.size() || k_b.cols() < 1)
        throw model_error(std::string(who) + ": K_B and y dimensions do not match");
    if (k_b.cols() > k_b.rows())
        throw non_identifiable_error(std::string(who) + ": more paths than antennas");
}

// Thin SVD with the identifiability check folded in.
inline Eigen::JacobiSVD<Eigen::MatrixXcd> checked_svd(const Eigen::MatrixXcd& k_b,
                                                      const char* who)
{
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(k_b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (!(s(0) > 0.0) || s(s.size() - 1) < rank_rel_tol * s(0))
        throw non_identifiable_error(std::string(who) + ": K_B is rank deficient");
    return svd;
}

inline Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& m)
{
    return 0.5 * (m + m.adjoint());
}

} // namespace detail

// Least squares, (K_B^H K_B)^{-1} K_B^H y. Solved through the normal
// equations; this follows the same numerical path as mle with a white
// disturbance of unit variance, so the two coincide exactly in that case.
inline Eigen::VectorXcd lse(const Eigen::MatrixXcd& k_b, const Eigen::VectorXcd& y)
{
    detail::check_obs(k_b, y, "lse");
    detail::checked_svd(k_b, "lse");
    const Eigen::MatrixXcd kh = k_b.adjoint();
    const Eigen::MatrixXcd m = detail::hermitize(kh * k_b);
    return Eigen::LLT<Eigen::MatrixXcd>(m).solve(kh * y);
}

// Maximum likelihood under Gaussian disturbance with known correlation,
// (K_B^H R_dd^{-1} K_B)^{-1} K_B^H R_dd^{-1} y.
inline Eigen::VectorXcd mle(const Eigen::MatrixXcd& k_b, const disturbance_model& dist,
                            const Eigen::VectorXcd& y)
{
    detail::check_obs(k_b, y, "mle");
    detail::checked_svd(k_b, "mle"); // R_dd is PD, so identifiability is K_B's rank
    Eigen::LLT<Eigen::MatrixXcd> rdd(dist.r_dd());
    if (rdd.info() != Eigen::Success)
        throw estimator_error("mle: disturbance correlation is not positive definite");
    const Eigen::MatrixXcd g = rdd.solve(k_b).adjoint(); // K_B^H R_dd^{-1}
    const Eigen::MatrixXcd m = detail::hermitize(g * k_b);
    return Eigen::LLT<Eigen::MatrixXcd>(m).solve(g * y);
}

// Bayesian MMSE with exact statistics. Evaluated in the information form
// (I + K_B^H R_dd^{-1} K_B)^{-1} K_B^H R_dd^{-1} y, which equals
// K_B^H R_yy^{-1} y and avoids forming the N x N inverse.
inline Eigen::VectorXcd mmse(const Eigen::MatrixXcd& k_b, const disturbance_model& dist,
                             const Eigen::VectorXcd& y)
{
    detail::check_obs(k_b, y, "mmse");
    Eigen::LLT<Eigen::MatrixXcd> rdd(dist.r_dd());
    if (rdd.info() != Eigen::Success)
        throw estimator_error("mmse: disturbance correlation is not positive definite");
    const Eigen::MatrixXcd g = rdd.solve(k_b).adjoint();
    Eigen::MatrixXcd m = detail::hermitize(g * k_b);
    m += Eigen::MatrixXcd::Identity(m.rows(), m.cols());
    return Eigen::LLT<Eigen::MatrixXcd>(m).solve(g * y);
}

// S_yy = (1/Q) sum_q y^(q) y^(q)H from an N x Q snapshot block.
inline Eigen::MatrixXcd estimate_sample_correlation(const Eigen::MatrixXcd& snapshots)
{
    if (snapshots.cols() < 1)
        throw model_error("estimate_sample_correlation: no snapshots");
    Eigen::MatrixXcd s = snapshots * snapshots.adjoint() / double(snapshots.cols());
    return detail::hermitize(s);
}

namespace detail
{

// Eigendecomposition with a hard singularity gate shared by SMI and the
// subspace variant.
inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>
checked_evd(const Eigen::MatrixXcd& s_yy, const char* who)
{
    if (s_yy.rows() != s_yy.cols() || s_yy.rows() < 1)
        throw model_error(std::string(who) + ": sample correlation must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hermitize(s_yy));
    if (eig.info() != Eigen::Success)
        throw estimator_error(std::string(who) + ": eigendecomposition failed");
    return eig;
}

} // namespace detail

// Sample-matrix-inversion form, K_B^H S_yy^{-1} y.
inline Eigen::VectorXcd mmse_smi(const Eigen::MatrixXcd& k_b, const Eigen::MatrixXcd& s_yy,
                                 const Eigen::VectorXcd& y)
{
    detail::check_obs(k_b, y, "mmse_smi");
    auto eig = detail::checked_evd(s_yy, "mmse_smi");
    const Eigen::VectorXd lam = eig.eigenvalues();
    const double lmax = lam(lam.size() - 1);
    if (!(lmax > 0.0) || lam(0) <= rank_rel_tol * lmax)
        throw singular_correlation_error("mmse_smi: sample correlation is singular");
    const Eigen::VectorXcd z = eig.eigenvectors() *
                               lam.cwiseInverse().cast<std::complex<double>>().asDiagonal() *
                               (eig.eigenvectors().adjoint() * y);
    return k_b.adjoint() * z;
}

// Dominant eigenpairs of the sample correlation, eigenvalues descending.
struct signal_subspace
{
    Eigen::MatrixXcd u;     // N x r
    Eigen::VectorXd lambda; // length r
};

inline signal_subspace eigendecompose_signal_subspace(const Eigen::MatrixXcd& s_yy, int rank)
{
    auto eig = detail::checked_evd(s_yy, "eigendecompose_signal_subspace");
    const int n = static_cast<int>(s_yy.rows());
    if (rank < 1 || rank > n)
        throw model_error("eigendecompose_signal_subspace: rank out of range");
    signal_subspace sub;
    sub.u.resize(n, rank);
    sub.lambda.resize(rank);
    for (int i = 0; i < rank; ++i)
    {
        sub.u.col(i) = eig.eigenvectors().col(n - 1 - i);
        sub.lambda(i) = eig.eigenvalues()(n - 1 - i);
    }
    if (sub.lambda(rank - 1) <= rank_rel_tol * std::max(sub.lambda(0), 0.0) ||
        !(sub.lambda(0) > 0.0))
        throw singular_correlation_error(
            "eigendecompose_signal_subspace: requested rank exceeds the numerical rank");
    return sub;
}

// Subspace form, K_B^H U_s diag(1/lambda) U_s^H y. With rank
// r = L_B + L_E this keeps the structured part of S_yy and discards the
// noise-dominated complement, so it is not the same map as mmse_smi.
inline Eigen::VectorXcd mmse_subspace(const Eigen::MatrixXcd& k_b, const signal_subspace& sub,
                                      const Eigen::VectorXcd& y)
{
    detail::check_obs(k_b, y, "mmse_subspace");
    if (sub.u.rows() != k_b.rows())
        throw model_error("mmse_subspace: subspace dimension mismatch");
    const Eigen::VectorXcd z =
        sub.u * sub.lambda.cwiseInverse().cast<std::complex<double>>().asDiagonal() *
        (sub.u.adjoint() * y);
    return k_b.adjoint() * z;
}

inline Eigen::VectorXcd mmse_subspace(const Eigen::MatrixXcd& k_b, const Eigen::MatrixXcd& s_yy,
                                      const Eigen::VectorXcd& y, int rank)
{
    return mmse_subspace(k_b, eigendecompose_signal_subspace(s_yy, rank), y);
}

// Alice's surrogate correlation when she plugs her Eve parameter estimates in
// as if they were exact.
inline Eigen::MatrixXcd lmmse_naive_correlation(const Eigen::MatrixXcd& k_b,
                                                const array_config& arr,
                                                const eve_knowledge& know, double sigma_v2)
{
    const Eigen::MatrixXcd a_hat = steering_matrix(arr, know.aoa_estimates);
    const Eigen::MatrixXcd k_e_hat = std::sqrt(know.power_estimate) * a_hat;
    Eigen::MatrixXcd r = k_b * k_b.adjoint() + k_e_hat * k_e_hat.adjoint();
    r += sigma_v2 * Eigen::MatrixXcd::Identity(r.rows(), r.cols());
    return detail::hermitize(r);
}

inline Eigen::VectorXcd lmmse_naive(const Eigen::MatrixXcd& k_b, const array_config& arr,
                                    const eve_knowledge& know, double sigma_v2,
                                    const Eigen::VectorXcd& y)
{
    detail::check_obs(k_b, y, "lmmse_naive");
    Eigen::LLT<Eigen::MatrixXcd> ryy(lmmse_naive_correlation(k_b, arr, know, sigma_v2));
    if (ryy.info() != Eigen::Success)
        throw estimator_error("lmmse_naive: surrogate correlation is not positive definite");
    return k_b.adjoint() * ryy.solve(y);
}

// Surrogate correlation that integrates the AoA and power errors out instead
// of ignoring them: per-path second-order steering correlations, a
// multiplicative debias of the power estimate, and a projection of the
// averaged correlation onto the PSD cone. The projection step matters: the
// second-order expansion has small negative eigenvalues, and without it the
// assembled matrix can turn indefinite for closely spaced estimates.
inline Eigen::MatrixXcd lmmse_improved_correlation(const Eigen::MatrixXcd& k_b,
                                                   const array_config& arr,
                                                   const eve_knowledge& know, double sigma_v2)
{
    const int n = static_cast<int>(k_b.rows());
    const int l_e = static_cast<int>(know.aoa_estimates.size());
    if (l_e < 1)
        throw model_error("lmmse_improved_correlation: no Eve AoA estimates");
    Eigen::MatrixXcd r_bar = Eigen::MatrixXcd::Zero(n, n);
    for (double aoa_hat : know.aoa_estimates)
        r_bar += raa_matrix(n, arr.spacing_over_wavelength, aoa_hat, know.hyper.sigma_theta,
                            know.hyper.delta_theta_max);
    r_bar = psd_project(r_bar / double(l_e));
    const double p_debiased =
        know.power_estimate *
        trunc_lognormal_mean(know.hyper.sigma_power, know.hyper.delta_power_max);
    Eigen::MatrixXcd r = k_b * k_b.adjoint() + p_debiased * r_bar;
    r += sigma_v2 * Eigen::MatrixXcd::Identity(n, n);
    return detail::hermitize(r);
}

inline Eigen::VectorXcd lmmse_improved(const Eigen::MatrixXcd& k_b, const array_config& arr,
                                       const eve_knowledge& know, double sigma_v2,
                                       const Eigen::VectorXcd& y)
{
    detail::check_obs(k_b, y, "lmmse_improved");
    Eigen::LLT<Eigen::MatrixXcd> ryy(lmmse_improved_correlation(k_b, arr, know, sigma_v2));
    if (ryy.info() != Eigen::Success)
        throw estimator_error("lmmse_improved: surrogate correlation is not positive definite");
    return k_b.adjoint() * ryy.solve(y);
}

} // namespace spoofsim
