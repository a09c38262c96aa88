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
// Closed-form performance expressions and downlink rate bookkeeping. The
// BMSE values here are per-user Bayesian mean-square errors E||h_hat - h||^2
// under h ~ CN(0, I); each report optionally carries an independent
// cross-check expression, a high-power floor, and bounds where available.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "array_channel.hpp"
#include "estimators.hpp"
#include "scenario.hpp"

namespace spoofsim
{

struct bmse_report
{
    double value = 0.0;
    std::optional<double> cross_check; // same quantity through an independent algebraic route
    std::optional<double> floor;       // limit for noise -> 0 at fixed power ratio, when defined
    std::optional<double> lower_bound; // singular-value bounds on the floor (least squares only)
    std::optional<double> upper_bound;
    std::optional<double> base_term;    // presumed-model part (naive LMMSE split)
    std::optional<double> delta_term;   // mismatch excess (naive LMMSE split)
    std::optional<double> approximation; // matched-model MMSE + mean mismatch excess
};

namespace detail
{

inline Eigen::MatrixXcd pinv(const Eigen::MatrixXcd& k, const char* who)
{
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (!(s(0) > 0.0) || s(s.size() - 1) < rank_rel_tol * s(0))
        throw non_identifiable_error(std::string(who) + ": matrix is rank deficient");
    return svd.matrixV() * s.cwiseInverse().cast<std::complex<double>>().asDiagonal() *
           svd.matrixU().adjoint();
}

inline Eigen::MatrixXcd small_inverse(const Eigen::MatrixXcd& m, const char* who)
{
    Eigen::LLT<Eigen::MatrixXcd> llt(hermitize(m));
    if (llt.info() != Eigen::Success)
        throw non_identifiable_error(std::string(who) + ": Gram matrix is not positive definite");
    // An exactly singular Gram matrix can still slip through the Cholesky
    // pivots as a tiny positive rounding residue; gate on their spread so the
    // closed form reports "undefined" instead of a garbage inverse.
    const Eigen::VectorXd d = llt.matrixLLT().diagonal().real();
    if (d.minCoeff() <= std::sqrt(rank_rel_tol) * d.maxCoeff())
        throw non_identifiable_error(std::string(who) + ": Gram matrix is numerically singular");
    return llt.solve(Eigen::MatrixXcd::Identity(m.rows(), m.cols()));
}

inline std::vector<double> singular_values_sq(const Eigen::MatrixXcd& a)
{
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    std::vector<double> s2(svd.singularValues().size());
    for (int i = 0; i < svd.singularValues().size(); ++i)
        s2[i] = svd.singularValues()(i) * svd.singularValues()(i);
    return s2; // descending, Eigen's native order
}

} // namespace detail

// Singular-value sandwich for the least-squares floor: with the spectrum of
// A_B ascending and the spectrum of A_E descending and zero padded to the
// antenna count,
//   lower = (1/SSR) sum_l s^2_{N-l+1}(A_E) / s^2_l(A_B),
//   upper = (1/SSR) sum_l s^2_l(A_E) / s^2_l(A_B).
// The lower bound degenerates to zero whenever L_B + L_E <= N.
inline std::pair<double, double> lemma1_bounds(const Eigen::MatrixXcd& a_b,
                                               const Eigen::MatrixXcd& a_e, double ssr)
{
    if (!(ssr > 0.0))
        throw model_error("lemma1_bounds: ssr must be > 0");
    const int n = static_cast<int>(a_b.rows());
    const int l_b = static_cast<int>(a_b.cols());
    std::vector<double> sb2 = detail::singular_values_sq(a_b); // descending
    if (!(sb2.front() > 0.0) || sb2.back() < rank_rel_tol * rank_rel_tol * sb2.front())
        throw non_identifiable_error("lemma1_bounds: A_B is rank deficient");
    std::reverse(sb2.begin(), sb2.end());
    std::vector<double> se2 = detail::singular_values_sq(a_e);
    se2.resize(n, 0.0);
    double lo = 0.0, hi = 0.0;
    for (int l = 0; l < l_b; ++l)
    {
        lo += se2[n - 1 - l] / sb2[l];
        hi += se2[l] / sb2[l];
    }
    return {lo / ssr, hi / ssr};
}

// Least squares: noise term plus a spoofing term that survives at high SNR.
// The floor's bounds come from lemma1_bounds; they are loose when the
// steering matrices are far from square.
inline bmse_report bmse_lse_closed_form(const Eigen::MatrixXcd& a_b, const Eigen::MatrixXcd& a_e,
                                        double p_b, double p_e, double sigma_v2)
{
    if (!(p_b > 0.0))
        throw model_error("bmse_lse_closed_form: p_b must be > 0");
    const Eigen::MatrixXcd gi = detail::small_inverse(a_b.adjoint() * a_b, "bmse_lse_closed_form");
    const Eigen::MatrixXcd x = a_b.adjoint() * a_e; // L_B x L_E
    const double ratio = p_e / p_b;                 // 1 / SSR

    bmse_report rep;
    const double floor_term = ratio * (gi * gi * x * x.adjoint()).trace().real();
    rep.floor = floor_term;
    rep.value = floor_term + (sigma_v2 / p_b) * gi.trace().real();
    if (p_e > 0.0)
    {
        const auto [lo, hi] = lemma1_bounds(a_b, a_e, p_b / p_e);
        rep.lower_bound = lo;
        rep.upper_bound = hi;
    }
    else
    {
        rep.lower_bound = 0.0;
        rep.upper_bound = 0.0;
    }
    return rep;
}

inline bmse_report bmse_lse_closed_form(const scenario_config& cfg, int user)
{
    return bmse_lse_closed_form(steering_matrix(cfg.array, cfg.bobs.at(user).aoas),
                                steering_matrix(cfg.array, cfg.eves.at(user).aoas),
                                cfg.bobs.at(user).power, cfg.eves.at(user).power,
                                cfg.noise_variance);
}

// Maximum likelihood: tr[(K_B^H R_dd^{-1} K_B)^{-1}], cross-checked through
// the matrix-inversion-lemma expansion
//   sigma_v^2 tr[(K_B^H K_B)^{-1}]
//   + sigma_v^2 tr[K_B^+ K_E (K_E^H P K_E + sigma_v^2 I)^{-1} K_E^H K_B^+H]
// with P the projector onto the orthogonal complement of range(K_B). The
// high-power floor is zero when K_E^H P K_E is nonsingular (ranges only meet
// at the origin) and tr[K_B^+ K_E K_E^H K_B^+H] when range(K_E) is contained
// in range(K_B); it is left unset for partial overlap.
inline bmse_report bmse_mle_closed_form(const Eigen::MatrixXcd& k_b,
                                        const disturbance_model& dist)
{
    Eigen::LLT<Eigen::MatrixXcd> rdd(dist.r_dd());
    if (rdd.info() != Eigen::Success)
        throw estimator_error("bmse_mle_closed_form: R_dd not positive definite");
    const Eigen::MatrixXcd fim = detail::hermitize(k_b.adjoint() * rdd.solve(k_b));
    bmse_report rep;
    rep.value = detail::small_inverse(fim, "bmse_mle_closed_form").trace().real();

    const Eigen::MatrixXcd k_b_pinv = detail::pinv(k_b, "bmse_mle_closed_form");
    const Eigen::MatrixXcd proj =
        Eigen::MatrixXcd::Identity(k_b.rows(), k_b.rows()) - k_b * k_b_pinv;
    const Eigen::MatrixXcd b = k_b_pinv * dist.k_e; // L_B x L_E
    const Eigen::MatrixXcd pk = proj * dist.k_e;
    Eigen::MatrixXcd mid = detail::hermitize(dist.k_e.adjoint() * pk);
    mid += dist.sigma_v2 * Eigen::MatrixXcd::Identity(mid.rows(), mid.cols());
    rep.cross_check =
        dist.sigma_v2 * (detail::small_inverse(k_b.adjoint() * k_b, "bmse_mle_closed_form")
                             .trace()
                             .real() +
                         (b * Eigen::LLT<Eigen::MatrixXcd>(mid).solve(b.adjoint())).trace().real());

    const double ke_norm = dist.k_e.norm();
    if (pk.norm() <= 1e-10 * std::max(ke_norm, 1.0))
        rep.floor = (b * b.adjoint()).trace().real(); // contained: spoofing never resolves
    else
    {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(detail::hermitize(dist.k_e.adjoint() * pk));
        const auto& s = svd.singularValues();
        if (s(s.size() - 1) > rank_rel_tol * s(0))
            rep.floor = 0.0; // disjoint: the spoofed component is fully separable
    }

    // The two routes are algebraically identical; disagreement means a
    // regression in one of them.
    if (std::abs(rep.value - *rep.cross_check) > 1e-9 * std::max(1.0, std::abs(rep.value)))
        throw estimator_error("bmse_mle_closed_form: expansion disagrees with the direct form");
    return rep;
}

// MMSE: tr[(I + K_B^H R_dd^{-1} K_B)^{-1}], cross-checked as
// L_B - tr[K_B^H R_yy^{-1} K_B]. High-power floor (noise -> 0):
// L_B - tr of the leading L_B x L_B block of the projector K^+ K with
// K = [K_B K_E]; zero exactly when K has full column rank.
inline bmse_report bmse_mmse_closed_form(const Eigen::MatrixXcd& k_b,
                                         const disturbance_model& dist)
{
    Eigen::LLT<Eigen::MatrixXcd> rdd(dist.r_dd());
    if (rdd.info() != Eigen::Success)
        throw estimator_error("bmse_mmse_closed_form: R_dd not positive definite");
    const int l_b = static_cast<int>(k_b.cols());
    Eigen::MatrixXcd bim = detail::hermitize(k_b.adjoint() * rdd.solve(k_b));
    bim += Eigen::MatrixXcd::Identity(l_b, l_b);
    Eigen::LLT<Eigen::MatrixXcd> bim_llt(bim);
    if (bim_llt.info() != Eigen::Success)
        throw estimator_error("bmse_mmse_closed_form: information matrix not positive definite");
    bmse_report rep;
    rep.value = bim_llt.solve(Eigen::MatrixXcd::Identity(l_b, l_b)).trace().real();

    Eigen::MatrixXcd r_yy = detail::hermitize(k_b * k_b.adjoint() + dist.k_e * dist.k_e.adjoint());
    r_yy += dist.sigma_v2 * Eigen::MatrixXcd::Identity(r_yy.rows(), r_yy.cols());
    rep.cross_check =
        l_b - (k_b.adjoint() * Eigen::LLT<Eigen::MatrixXcd>(r_yy).solve(k_b)).trace().real();

    Eigen::MatrixXcd k(k_b.rows(), l_b + dist.k_e.cols());
    k << k_b, dist.k_e;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(k, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rank_rel_tol * s(0))
            ++rank;
    const Eigen::MatrixXcd vr = svd.matrixV().leftCols(rank);
    rep.floor = l_b - (vr.topRows(l_b) * vr.topRows(l_b).adjoint()).trace().real();

    if (std::abs(rep.value - *rep.cross_check) > 1e-9 * std::max(1.0, std::abs(rep.value)))
        throw estimator_error("bmse_mmse_closed_form: inversion-lemma route disagrees");
    return rep;
}

// Conditional BMSE of the naive LMMSE filter for one draw of Alice's Eve
// parameters, taken over channels and noise with the true statistics. The
// split is
//   base  = tr[(I + K_B^H Rhat_dd^{-1} K_B)^{-1}]   (the filter's presumed BMSE)
//   delta = tr[K_B^H Rhat^{-1} (R_yy Rhat^{-1} - I) K_B]  (model-mismatch excess)
// and base + delta equals E||W y - h_B||^2 for W = Rhat^{-1} K_B exactly.
inline bmse_report bmse_lmmse_naive_conditional(const Eigen::MatrixXcd& k_b,
                                                const array_config& arr,
                                                const eve_knowledge& know,
                                                const disturbance_model& dist)
{
    const Eigen::MatrixXcd rhat_yy = lmmse_naive_correlation(k_b, arr, know, dist.sigma_v2);
    Eigen::LLT<Eigen::MatrixXcd> rhat(rhat_yy);
    if (rhat.info() != Eigen::Success)
        throw estimator_error("bmse_lmmse_naive_conditional: surrogate not positive definite");
    Eigen::MatrixXcd r_yy = detail::hermitize(k_b * k_b.adjoint() + dist.k_e * dist.k_e.adjoint());
    r_yy += dist.sigma_v2 * Eigen::MatrixXcd::Identity(r_yy.rows(), r_yy.cols());
    const int l_b = static_cast<int>(k_b.cols());

    const Eigen::MatrixXcd ri_k = rhat.solve(k_b); // Rhat^{-1} K_B
    bmse_report rep;
    rep.base_term = l_b - (k_b.adjoint() * ri_k).trace().real();
    rep.delta_term = (k_b.adjoint() * rhat.solve(r_yy * ri_k - k_b)).trace().real();
    rep.value = *rep.base_term + *rep.delta_term;
    return rep;
}

// Outer expectation over the Eve-parameter errors, sampled with the same
// truncated distributions the estimator assumes; the inner expectation over
// channels and noise stays in closed form, so the Monte Carlo dimension is
// only the knowledge error. Also reports the two-term approximation
// (matched-model MMSE plus mean mismatch excess) for comparison.
inline bmse_report bmse_lmmse_naive_semianalytic(const Eigen::MatrixXcd& k_b,
                                                 const array_config& arr,
                                                 const user_link& true_eve,
                                                 const eve_uncertainty& hyper,
                                                 const disturbance_model& dist,
                                                 int error_samples, rng_stream& rng)
{
    if (error_samples < 1)
        throw model_error("bmse_lmmse_naive_semianalytic: error_samples must be >= 1");
    const truncated_gaussian aoa_err(hyper.sigma_theta, hyper.delta_theta_max);
    const truncated_gaussian pow_err(hyper.sigma_power, hyper.delta_power_max);
    double value = 0.0, base = 0.0, delta = 0.0;
    for (int s = 0; s < error_samples; ++s)
    {
        eve_knowledge know;
        know.hyper = hyper;
        know.aoa_estimates.reserve(true_eve.aoas.size());
        for (double aoa : true_eve.aoas)
            know.aoa_estimates.push_back(aoa + aoa_err.sample(rng));
        know.power_estimate = true_eve.power * std::exp(pow_err.sample(rng));
        const bmse_report one = bmse_lmmse_naive_conditional(k_b, arr, know, dist);
        value += one.value;
        base += *one.base_term;
        delta += *one.delta_term;
    }
    bmse_report rep;
    rep.value = value / error_samples;
    rep.base_term = base / error_samples;
    rep.delta_term = delta / error_samples;
    rep.approximation = bmse_mmse_closed_form(k_b, dist).value + *rep.delta_term;
    return rep;
}

// ---- downlink rates --------------------------------------------------------

// Matched filter from the estimated antenna-domain channels, normalized by
// the Frobenius norm of the stacked estimate.
inline Eigen::MatrixXcd matched_filter_precoder(const std::vector<Eigen::VectorXcd>& g_hat)
{
    if (g_hat.empty())
        throw model_error("matched_filter_precoder: no users");
    Eigen::MatrixXcd w(g_hat[0].size(), g_hat.size());
    for (std::size_t m = 0; m < g_hat.size(); ++m)
        w.col(m) = g_hat[m].conjugate();
    const double f = w.norm();
    if (!(f > 0.0))
        throw estimator_error("matched_filter_precoder: zero channel estimate");
    return w / f;
}

struct downlink_rates
{
    double rate_bob = 0.0; // log2(1 + SINR) at the intended user
    double rate_eve = 0.0; // same signal overheard by the paired Eve
};

// Downlink demodulation uses the transposed (unconjugated) channel, so the
// gain of beam w at channel g is |g^T w|^2.
inline downlink_rates downlink_user_rates(const Eigen::MatrixXcd& w,
                                          const std::vector<Eigen::VectorXcd>& g_bobs,
                                          const Eigen::VectorXcd& g_eve, double p_dl,
                                          double sigma2, int user)
{
    auto gain = [](const Eigen::VectorXcd& g, const Eigen::VectorXcd& beam) {
        return std::norm(g.cwiseProduct(beam).sum());
    };
    const int m_users = static_cast<int>(w.cols());
    double intf_b = 0.0, intf_e = 0.0;
    for (int m = 0; m < m_users; ++m)
    {
        if (m == user)
            continue;
        intf_b += gain(g_bobs.at(user), w.col(m));
        intf_e += gain(g_eve, w.col(m));
    }
    downlink_rates out;
    const double sinr_b = p_dl * gain(g_bobs.at(user), w.col(user)) / (p_dl * intf_b + sigma2);
    const double sinr_e = p_dl * gain(g_eve, w.col(user)) / (p_dl * intf_e + sigma2);
    out.rate_bob = std::log2(1.0 + sinr_b);
    out.rate_eve = std::log2(1.0 + sinr_e);
    return out;
}

} // namespace spoofsim
