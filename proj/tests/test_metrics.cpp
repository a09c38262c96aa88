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

#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace spoofsim;
using fixtures::cd;
namespace frozen = fixtures::frozen;

TEST_CASE("closed forms reproduce the pinned reference values", "[metrics]")
{
    const auto m = fixtures::make_user1();

    const auto ls = bmse_lse_closed_form(m.cfg, 0);
    CHECK(ls.value == Catch::Approx(frozen::bmse_ls).epsilon(1e-12));
    REQUIRE(ls.floor.has_value());
    CHECK(*ls.floor == Catch::Approx(frozen::ls_floor).epsilon(1e-12));
    REQUIRE(ls.lower_bound.has_value());
    REQUIRE(ls.upper_bound.has_value());
    CHECK(*ls.lower_bound == frozen::ls_lower);
    CHECK(*ls.upper_bound == Catch::Approx(frozen::ls_upper).epsilon(1e-12));

    const auto ml = bmse_mle_closed_form(m.k_b, m.dist);
    CHECK(ml.value == Catch::Approx(frozen::bmse_ml).epsilon(1e-12));
    REQUIRE(ml.cross_check.has_value());
    CHECK(*ml.cross_check == Catch::Approx(frozen::ml_expansion).epsilon(1e-12));
    REQUIRE(ml.floor.has_value()); // ranges only meet at the origin here
    CHECK(*ml.floor == 0.0);

    const auto mm = bmse_mmse_closed_form(m.k_b, m.dist);
    CHECK(mm.value == Catch::Approx(frozen::bmse_mmse).epsilon(1e-12));
    REQUIRE(mm.cross_check.has_value());
    CHECK(*mm.cross_check == Catch::Approx(frozen::mmse_cross).epsilon(1e-10));
    REQUIRE(mm.floor.has_value());
    CHECK(std::abs(*mm.floor) < 1e-12);

    // Passive baselines: Eve silent, same geometry.
    disturbance_model quiet{Eigen::MatrixXcd::Zero(10, 0), 1.0};
    const auto ls_passive = bmse_lse_closed_form(m.a_b, m.a_e, 1000.0, 0.0, 1.0);
    CHECK(ls_passive.value == Catch::Approx(frozen::ls_passive).epsilon(1e-12));
    CHECK(*ls_passive.floor == 0.0);
    const auto mm_passive = bmse_mmse_closed_form(m.k_b, quiet);
    CHECK(mm_passive.value == Catch::Approx(frozen::mmse_passive).epsilon(1e-12));
}

TEST_CASE("least-squares floor bounds sandwich the floor", "[metrics]")
{
    const auto m = fixtures::make_user1();
    const auto [lo, hi] = lemma1_bounds(m.a_b, m.a_e, 1.0);
    const auto ls = bmse_lse_closed_form(m.cfg, 0);
    CHECK(lo <= *ls.floor + 1e-12);
    CHECK(*ls.floor <= hi + 1e-12);
    // 3 + 3 paths fit into 10 antennas, so the lower bound degenerates.
    CHECK(lo == 0.0);

    // Randomized geometries, including overloaded ones where the lower bound
    // is strictly positive.
    rng_stream rng(909, 0, 0, stream_purpose::generic);
    int active_lower = 0;
    for (int rep = 0; rep < 100; ++rep)
    {
        const int n = 4 + int(rng.uniform() * 5.0);   // 4..8 antennas
        const int l_b = 2 + int(rng.uniform() * 2.0); // 2..3 paths
        const int l_e = 2 + int(rng.uniform() * 3.0); // 2..4 paths
        std::vector<double> bob_aoas, eve_aoas;
        for (int l = 0; l < l_b; ++l)
            bob_aoas.push_back(0.05 + 0.9 * M_PI * rng.uniform());
        for (int l = 0; l < l_e; ++l)
            eve_aoas.push_back(0.05 + 0.9 * M_PI * rng.uniform());
        const array_config arr{n, 0.5};
        const auto a_b = steering_matrix(arr, bob_aoas);
        const auto a_e = steering_matrix(arr, eve_aoas);
        const double ssr = std::pow(10.0, -1.0 + 2.0 * rng.uniform());

        double lo_r, hi_r;
        try
        {
            std::tie(lo_r, hi_r) = lemma1_bounds(a_b, a_e, ssr);
        }
        catch (const non_identifiable_error&)
        {
            --rep; // nearly coherent draw; take another
            continue;
        }
        const auto rep_ls = bmse_lse_closed_form(a_b, a_e, ssr, 1.0, 1.0);
        REQUIRE(lo_r <= *rep_ls.floor * (1.0 + 1e-9) + 1e-12);
        REQUIRE(*rep_ls.floor <= hi_r * (1.0 + 1e-9) + 1e-12);
        if (l_b + l_e > n && lo_r > 0.0)
            ++active_lower;
    }
    CHECK(active_lower > 0);

    Eigen::MatrixXcd flat = m.a_b;
    flat.col(1) = flat.col(0);
    CHECK_THROWS_AS(lemma1_bounds(flat, m.a_e, 1.0), non_identifiable_error);
}

TEST_CASE("orthonormal self-spoofing floor has a hand value", "[metrics]")
{
    // A_B^H A_B = I and A_E = A_B make the floor (1/SSR) tr[I] = L_B / SSR.
    // A unitary (square) A_B also makes both bounds collapse onto it.
    rng_stream rng(910, 0, 0, stream_purpose::generic);
    const Eigen::MatrixXcd q = fixtures::random_matrix(rng, 3, 3);
    const Eigen::MatrixXcd orth =
        Eigen::HouseholderQR<Eigen::MatrixXcd>(q).householderQ();
    const double ssr = 4.0;
    const auto rep = bmse_lse_closed_form(orth, orth, ssr, 1.0, 1.0);
    CHECK(*rep.floor == Catch::Approx(3.0 / ssr).epsilon(1e-10));
    const auto [lo, hi] = lemma1_bounds(orth, orth, ssr);
    CHECK(lo == Catch::Approx(3.0 / ssr).epsilon(1e-10));
    CHECK(hi == Catch::Approx(3.0 / ssr).epsilon(1e-10));
}

TEST_CASE("ML floor detection distinguishes containment from separation", "[metrics]")
{
    const auto m = fixtures::make_user1();
    rng_stream rng(911, 0, 0, stream_purpose::generic);

    // Contained: K_E = K_B C never leaves range(K_B); the floor equals the
    // pseudoinverse trace expression evaluated directly here.
    const Eigen::MatrixXcd c = fixtures::random_matrix(rng, 3, 2);
    disturbance_model contained{m.k_b * c, 1.0};
    const auto rep = bmse_mle_closed_form(m.k_b, contained);
    REQUIRE(rep.floor.has_value());
    const Eigen::MatrixXcd pinv_kb =
        m.k_b.completeOrthogonalDecomposition().pseudoInverse();
    const double want = (pinv_kb * contained.k_e * contained.k_e.adjoint() *
                         pinv_kb.adjoint())
                            .trace()
                            .real();
    CHECK(*rep.floor == Catch::Approx(want).epsilon(1e-9));

    // Partial overlap: one contained column, one generic column. Neither
    // branch applies, so no floor is reported.
    Eigen::MatrixXcd mixed(10, 2);
    mixed.col(0) = m.k_b.col(0);
    mixed.col(1) = fixtures::random_matrix(rng, 10, 1);
    const auto rep_mixed = bmse_mle_closed_form(m.k_b, disturbance_model{mixed, 1.0});
    CHECK(!rep_mixed.floor.has_value());

    CHECK_THROWS_AS(bmse_mle_closed_form(Eigen::MatrixXcd::Zero(10, 3), m.dist),
                    non_identifiable_error);
}

TEST_CASE("MMSE closed form is safe for degenerate inputs", "[metrics]")
{
    const auto m = fixtures::make_user1();

    // No pilot power at all: the estimator returns the prior mean and the
    // BMSE equals the prior trace.
    const auto rep = bmse_mmse_closed_form(Eigen::MatrixXcd::Zero(10, 3), m.dist);
    CHECK(rep.value == Catch::Approx(3.0).epsilon(1e-12));
    CHECK(*rep.floor == Catch::Approx(3.0).epsilon(1e-12));

    // Coherent Bob paths keep the closed form finite.
    Eigen::MatrixXcd dup = m.k_b;
    dup.col(2) = dup.col(0);
    const auto rep_dup = bmse_mmse_closed_form(dup, m.dist);
    CHECK(std::isfinite(rep_dup.value));
    CHECK(rep_dup.value > 0.0);

    // Rank-deficient stacked matrix: floor is the unresolvable prior mass.
    disturbance_model clone{m.k_b, 1.0}; // Eve replays Bob's exact directions
    const auto rep_clone = bmse_mmse_closed_form(m.k_b, clone);
    REQUIRE(rep_clone.floor.has_value());
    CHECK(*rep_clone.floor == Catch::Approx(1.5).epsilon(1e-9)); // half of L_B
}

TEST_CASE("estimator ordering and SNR monotonicity", "[metrics]")
{
    rng_stream rng(912, 0, 0, stream_purpose::generic);
    for (int rep = 0; rep < 100; ++rep)
    {
        const auto k_b = fixtures::random_matrix(rng, 8, 3);
        const auto k_e = fixtures::random_matrix(rng, 8, 2);
        const disturbance_model dist{k_e, 0.5 + rng.uniform()};
        const double ls = bmse_lse_closed_form(k_b / std::sqrt(10.0), k_e, 10.0,
                                               1.0, dist.sigma_v2)
                              .value;
        const double ml = bmse_mle_closed_form(k_b, dist).value;
        const double mm = bmse_mmse_closed_form(k_b, dist).value;
        REQUIRE(mm <= ml * (1.0 + 1e-12)); // prior information can only help
        REQUIRE(ml <= ls * (1.0 + 1e-9));  // whitening is the best unbiased choice
        REQUIRE(mm > 0.0);
    }

    // The reference geometry orders all three, and each closed form improves
    // monotonically with SNR at fixed power ratio.
    auto cfg = fixtures::preset();
    const auto geom = fixtures::make_user1();
    double prev_ls = 1e300, prev_ml = 1e300, prev_mm = 1e300;
    for (double snr = 0.0; snr <= 34.0; snr += 2.0)
    {
        set_snr_b_db(cfg, snr);
        const Eigen::MatrixXcd k_b = std::sqrt(cfg.bobs[0].power) * geom.a_b;
        const disturbance_model dist{std::sqrt(cfg.eves[0].power) * geom.a_e, 1.0};
        const double ls = bmse_lse_closed_form(cfg, 0).value;
        const double ml = bmse_mle_closed_form(k_b, dist).value;
        const double mm = bmse_mmse_closed_form(k_b, dist).value;
        REQUIRE(mm <= ml * (1.0 + 1e-12));
        REQUIRE(ml <= ls * (1.0 + 1e-12));
        REQUIRE(ls <= prev_ls * (1.0 + 1e-12));
        REQUIRE(ml <= prev_ml * (1.0 + 1e-12));
        REQUIRE(mm <= prev_mm * (1.0 + 1e-12));
        prev_ls = ls;
        prev_ml = ml;
        prev_mm = mm;
    }
}

TEST_CASE("naive LMMSE conditional split is pinned and consistent", "[metrics]")
{
    const auto m = fixtures::make_user1();
    const auto know = frozen::knowledge_fixture();
    const auto rep = bmse_lmmse_naive_conditional(m.k_b, m.cfg.array, know, m.dist);
    REQUIRE(rep.base_term.has_value());
    REQUIRE(rep.delta_term.has_value());
    CHECK(*rep.base_term == Catch::Approx(frozen::naive_cond_base).epsilon(1e-10));
    CHECK(*rep.delta_term == Catch::Approx(frozen::naive_cond_delta).epsilon(1e-10));
    CHECK(rep.value == Catch::Approx(frozen::naive_cond_value).epsilon(1e-10));
    CHECK(rep.value == Catch::Approx(*rep.base_term + *rep.delta_term).epsilon(1e-12));

    // Perfect knowledge: the conditional BMSE collapses onto the exact MMSE
    // closed form and the mismatch excess vanishes.
    eve_knowledge exact;
    exact.aoa_estimates = m.cfg.eves[0].aoas;
    exact.power_estimate = m.cfg.eves[0].power;
    exact.hyper = m.cfg.eve_know;
    const auto rep0 = bmse_lmmse_naive_conditional(m.k_b, m.cfg.array, exact, m.dist);
    CHECK(rep0.value == Catch::Approx(frozen::bmse_mmse).epsilon(1e-9));
    CHECK(std::abs(*rep0.delta_term) < 1e-9);

    // Monte Carlo cross-check of the conditional trace formula: average the
    // squared error of the actual filter over channel and noise draws.
    rng_stream rng(913, 0, 0, stream_purpose::generic);
    const int trials = 20000;
    double acc = 0.0;
    for (int t = 0; t < trials; ++t)
    {
        const auto h_b = draw_cgaussian_vector(rng, 3);
        const auto h_e = draw_cgaussian_vector(rng, 3);
        const auto v = draw_cgaussian_vector(rng, 10);
        const Eigen::VectorXcd y = m.k_b * h_b + m.k_e * h_e + v;
        acc += (lmmse_naive(m.k_b, m.cfg.array, know, 1.0, y) - h_b).squaredNorm();
    }
    CHECK(acc / trials == Catch::Approx(rep.value).epsilon(0.05));
}

TEST_CASE("semianalytic naive LMMSE averages only the knowledge error", "[metrics]")
{
    const auto m = fixtures::make_user1();
    rng_stream rng(914, 0, 0, stream_purpose::eve_knowledge);
    const auto rep = bmse_lmmse_naive_semianalytic(m.k_b, m.cfg.array, m.cfg.eves[0],
                                                   m.cfg.eve_know, m.dist, 400, rng);
    REQUIRE(rep.base_term.has_value());
    REQUIRE(rep.delta_term.has_value());
    REQUIRE(rep.approximation.has_value());
    CHECK(rep.value == Catch::Approx(*rep.base_term + *rep.delta_term).epsilon(1e-12));
    // At 30 dB the mismatch excess dominates the gap to the matched bound.
    CHECK(rep.value > frozen::bmse_mmse);
    CHECK(*rep.delta_term > 0.5 * (rep.value - frozen::bmse_mmse));
    CHECK(*rep.approximation ==
          Catch::Approx(frozen::bmse_mmse + *rep.delta_term).epsilon(1e-9));

    // Identical stream, identical output: the outer loop is the only
    // stochastic part.
    rng_stream rng2(914, 0, 0, stream_purpose::eve_knowledge);
    const auto rep2 = bmse_lmmse_naive_semianalytic(m.k_b, m.cfg.array, m.cfg.eves[0],
                                                    m.cfg.eve_know, m.dist, 400, rng2);
    CHECK(rep.value == rep2.value);

    CHECK_THROWS_AS(bmse_lmmse_naive_semianalytic(m.k_b, m.cfg.array, m.cfg.eves[0],
                                                  m.cfg.eve_know, m.dist, 0, rng),
                    model_error);
}

TEST_CASE("matched filter precoder is unit norm and scale invariant", "[metrics]")
{
    const auto m = fixtures::make_user1();
    const Eigen::VectorXcd g1 = m.a_b * m.h_b;
    Eigen::VectorXcd g2(10);
    g2 = steering_matrix(m.cfg.array, m.cfg.bobs[1].aoas) * frozen::h_b2_fix;

    const auto w = matched_filter_precoder({g1, g2});
    REQUIRE(w.rows() == 10);
    REQUIRE(w.cols() == 2);
    CHECK(w.norm() == Catch::Approx(1.0).epsilon(1e-12));

    const auto w_scaled = matched_filter_precoder({3.7 * g1, 3.7 * g2});
    CHECK((w - w_scaled).norm() < 1e-12);

    CHECK_THROWS_AS(matched_filter_precoder({Eigen::VectorXcd::Zero(10)}), estimator_error);
    CHECK_THROWS_AS(matched_filter_precoder({}), model_error);
}

TEST_CASE("downlink rates match the pinned fixture", "[metrics]")
{
    const auto m = fixtures::make_user1();
    const Eigen::VectorXcd g1 = m.a_b * m.h_b;
    const Eigen::VectorXcd g2 = steering_matrix(m.cfg.array, m.cfg.bobs[1].aoas) *
                                frozen::h_b2_fix;
    const Eigen::VectorXcd ge = m.a_e * m.h_e;

    const auto w = matched_filter_precoder({g1, g2});
    const auto rates = downlink_user_rates(w, {g1, g2}, ge, 1000.0, 1.0, 0);
    CHECK(rates.rate_bob == Catch::Approx(frozen::rate_bob_fix).epsilon(1e-12));
    CHECK(rates.rate_eve == Catch::Approx(frozen::rate_eve_fix).epsilon(1e-12));

    // Single user: no interference term, pure SNR scaling.
    const auto w1 = matched_filter_precoder({g1});
    const auto solo = downlink_user_rates(w1, {g1}, ge, 100.0, 1.0, 0);
    const double sinr = 100.0 * std::norm(g1.cwiseProduct(w1.col(0)).sum());
    CHECK(solo.rate_bob == Catch::Approx(std::log2(1.0 + sinr)).epsilon(1e-12));

    // A user whose channel is orthogonal to its own beam gets rate zero.
    Eigen::VectorXcd g_perp = Eigen::VectorXcd::Zero(10);
    g_perp(0) = w1(1, 0);
    g_perp(1) = -w1(0, 0); // unconjugated product cancels pairwise
    const auto dead = downlink_user_rates(w1, {g_perp}, ge, 100.0, 1.0, 0);
    CHECK(dead.rate_bob < 1e-12);
}
