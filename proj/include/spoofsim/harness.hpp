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
// Monte Carlo driver. Results are bit-identical for a given master seed
// regardless of thread count: every trial owns counter-based streams keyed by
// (seed, trial, grid point, purpose), per-trial metrics land in preallocated
// slots, and the final reduction runs sequentially in trial order with
// compensated summation.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "array_channel.hpp"
#include "estimators.hpp"
#include "metrics.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "stats.hpp"

namespace spoofsim
{

enum class estimator_tag
{
    lse,
    mle,
    mmse,
    mmse_smi,
    mmse_sub,
    lmmse_naive,
    lmmse_improved,
    lse_passive,
    mle_passive,
    mmse_passive,
};

inline const std::vector<estimator_tag>& all_estimator_tags()
{
    static const std::vector<estimator_tag> tags = {
        estimator_tag::lse,         estimator_tag::mle,
        estimator_tag::mmse,        estimator_tag::mmse_smi,
        estimator_tag::mmse_sub,    estimator_tag::lmmse_naive,
        estimator_tag::lmmse_improved, estimator_tag::lse_passive,
        estimator_tag::mle_passive, estimator_tag::mmse_passive,
    };
    return tags;
}

inline std::string to_string(estimator_tag tag)
{
    switch (tag)
    {
    case estimator_tag::lse: return "lse";
    case estimator_tag::mle: return "mle";
    case estimator_tag::mmse: return "mmse";
    case estimator_tag::mmse_smi: return "mmse-smi";
    case estimator_tag::mmse_sub: return "mmse-sub";
    case estimator_tag::lmmse_naive: return "lmmse-naive";
    case estimator_tag::lmmse_improved: return "lmmse-improved";
    case estimator_tag::lse_passive: return "lse-passive";
    case estimator_tag::mle_passive: return "mle-passive";
    case estimator_tag::mmse_passive: return "mmse-passive";
    }
    throw std::logic_error("to_string: bad estimator tag");
}

inline estimator_tag parse_estimator_tag(const std::string& name)
{
    for (estimator_tag tag : all_estimator_tags())
        if (to_string(tag) == name)
            return tag;
    throw config_error("unknown estimator: " + name);
}

inline bool is_passive(estimator_tag tag)
{
    return tag == estimator_tag::lse_passive || tag == estimator_tag::mle_passive ||
           tag == estimator_tag::mmse_passive;
}

inline std::vector<estimator_tag> default_estimators(figure_preset preset)
{
    using t = estimator_tag;
    switch (preset)
    {
    case figure_preset::fig3:
    case figure_preset::fig4:
        return {t::lse, t::mle, t::mmse, t::lse_passive, t::mle_passive, t::mmse_passive};
    case figure_preset::fig5:
        return {t::mmse, t::mmse_smi, t::mmse_sub};
    case figure_preset::fig8:
    case figure_preset::fig9:
        return {t::lse, t::mle, t::mmse, t::lmmse_naive, t::lmmse_improved};
    case figure_preset::fig10:
        return {t::mmse, t::lmmse_naive, t::lmmse_improved};
    }
    throw std::logic_error("default_estimators: bad preset");
}

struct run_plan
{
    scenario_config base;
    sweep_spec sweep;
    std::vector<estimator_tag> estimators;
    long n_trials = 1000;
    std::uint64_t master_seed = 1;
    int q_snapshots = 512;            // fig5 sweeps override this per point
    std::optional<double> snr_dl_db;  // downlink SNR; defaults to the uplink SNR_B
    int threads = 1;
};

struct sweep_row
{
    std::string sweep_var;
    double sweep_value = 0.0;
    std::string estimator;
    double nbmse = std::numeric_limits<double>::quiet_NaN();
    double bmse = std::numeric_limits<double>::quiet_NaN();
    double closed_form_bmse = std::numeric_limits<double>::quiet_NaN();
    double secrecy_rate = std::numeric_limits<double>::quiet_NaN();
    double rate_bob = std::numeric_limits<double>::quiet_NaN();
    double rate_eve = std::numeric_limits<double>::quiet_NaN();
    long trials = 0;
    long failures = 0;
};

struct sweep_result
{
    std::vector<sweep_row> rows;
};

namespace detail
{

// Neumaier-compensated accumulator; the reduction order is pinned by the caller.
struct kahan_sum
{
    double s = 0.0;
    double c = 0.0;
    void add(double x)
    {
        const double t = s + x;
        c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
        s = t;
    }
    double get() const { return s + c; }
};

struct trial_metrics
{
    double bmse = 0.0;
    double nbmse = 0.0;
    double rate_bob = 0.0;
    double rate_eve = 0.0;
    bool ok = false;
};

inline void apply_sweep_value(scenario_config& cfg, int& q_snapshots, const std::string& variable,
                              double value)
{
    if (variable == "snr_b_db")
        set_snr_b_db(cfg, value);
    else if (variable == "ssr_db")
        set_ssr_db(cfg, value);
    else if (variable == "q_snapshots")
    {
        if (!(value >= 1.0))
            throw config_error("q_snapshots sweep values must be >= 1");
        q_snapshots = static_cast<int>(value);
    }
    else if (variable == "psi_rad")
        set_psi(cfg, value);
    else if (variable == "phi_rad")
        set_phi(cfg, value);
    else if (variable == "sigma_theta_e_rad")
    {
        if (!(value > 0.0))
            throw config_error("sigma_theta_e_rad sweep values must be > 0");
        cfg.eve_know.sigma_theta = value;
    }
    else
        throw config_error("unknown sweep variable: " + variable);
}

// Everything that is fixed at one grid point.
struct point_model
{
    scenario_config cfg;
    scenario_config cfg_passive;
    std::vector<Eigen::VectorXcd> pilots;
    std::vector<Eigen::MatrixXcd> a_b, a_e; // per user, unit-power steering
    std::vector<Eigen::MatrixXcd> k_b, k_e; // per user, power weighted
    std::vector<disturbance_model> dist;
    std::vector<disturbance_model> dist_passive;
    double p_dl = 1.0;
    int q_snapshots = 512;

    explicit point_model(const scenario_config& c, int q, std::optional<double> snr_dl_db)
        : cfg(c), cfg_passive(c), q_snapshots(q)
    {
        for (auto& eve : cfg_passive.eves)
            eve.power = 0.0;
        pilots = make_dft_pilots(cfg.pilot_length, cfg.n_users());
        for (int m = 0; m < cfg.n_users(); ++m)
        {
            a_b.push_back(steering_matrix(cfg.array, cfg.bobs[m].aoas));
            a_e.push_back(steering_matrix(cfg.array, cfg.eves[m].aoas));
            k_b.push_back(std::sqrt(cfg.bobs[m].power) * a_b[m]);
            k_e.push_back(std::sqrt(cfg.eves[m].power) * a_e[m]);
            dist.push_back({k_e[m], cfg.noise_variance});
            dist_passive.push_back({Eigen::MatrixXcd::Zero(a_e[m].rows(), a_e[m].cols()),
                                    cfg.noise_variance});
        }
        p_dl = snr_dl_db ? cfg.noise_variance * std::pow(10.0, *snr_dl_db / 10.0)
                         : cfg.bobs[0].power;
    }
};

inline double closed_form_for(const point_model& pm, estimator_tag tag)
{
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try
    {
        switch (tag)
        {
        case estimator_tag::lse:
            return bmse_lse_closed_form(pm.cfg, 0).value;
        case estimator_tag::lse_passive:
            return bmse_lse_closed_form(pm.cfg_passive, 0).value;
        case estimator_tag::mle:
            return bmse_mle_closed_form(pm.k_b[0], pm.dist[0]).value;
        case estimator_tag::mle_passive:
            return bmse_mle_closed_form(pm.k_b[0], pm.dist_passive[0]).value;
        case estimator_tag::mmse:
            return bmse_mmse_closed_form(pm.k_b[0], pm.dist[0]).value;
        case estimator_tag::mmse_passive:
            return bmse_mmse_closed_form(pm.k_b[0], pm.dist_passive[0]).value;
        default:
            return nan; // sample-correlation and mismatched-knowledge estimators
        }
    }
    catch (const estimator_error&)
    {
        return nan; // e.g. coinciding legitimate paths make the Gram matrix singular
    }
}

} // namespace detail

// Training protocol for the sample correlation: q coherence intervals, each
// with fresh fading and noise, every user re-sending its pilot; the receiver
// correlates each interval with the target user's pilot and averages the
// outer products.
inline Eigen::MatrixXcd estimate_syy_protocol(const scenario_config& cfg,
                                              const std::vector<Eigen::VectorXcd>& pilots,
                                              int user, int q, rng_stream& rng)
{
    if (q < 1)
        throw config_error("estimate_syy_protocol: q must be >= 1");
    Eigen::MatrixXcd block(cfg.array.n_antennas, q);
    for (int i = 0; i < q; ++i)
    {
        const channel_draw draw = sample_channel_draw(cfg, rng);
        block.col(i) = correlate(synthesize_received(cfg, pilots, draw), pilots.at(user));
    }
    return estimate_sample_correlation(block);
}

namespace detail
{

inline Eigen::VectorXcd estimate_user(const point_model& pm, estimator_tag tag, int m,
                                      const std::vector<Eigen::VectorXcd>& y_act,
                                      const std::vector<Eigen::VectorXcd>& y_pas,
                                      const std::vector<Eigen::MatrixXcd>& s_yy,
                                      const std::vector<eve_knowledge>& know)
{
    switch (tag)
    {
    case estimator_tag::lse:
        return lse(pm.k_b[m], y_act[m]);
    case estimator_tag::mle:
        return mle(pm.k_b[m], pm.dist[m], y_act[m]);
    case estimator_tag::mmse:
        return mmse(pm.k_b[m], pm.dist[m], y_act[m]);
    case estimator_tag::mmse_smi:
        return mmse_smi(pm.k_b[m], s_yy[m], y_act[m]);
    case estimator_tag::mmse_sub:
        return mmse_subspace(pm.k_b[m], s_yy[m], y_act[m],
                             static_cast<int>(pm.cfg.bobs[m].aoas.size() +
                                              pm.cfg.eves[m].aoas.size()));
    case estimator_tag::lmmse_naive:
        return lmmse_naive(pm.k_b[m], pm.cfg.array, know[m], pm.cfg.noise_variance, y_act[m]);
    case estimator_tag::lmmse_improved:
        return lmmse_improved(pm.k_b[m], pm.cfg.array, know[m], pm.cfg.noise_variance, y_act[m]);
    case estimator_tag::lse_passive:
        return lse(pm.k_b[m], y_pas[m]);
    case estimator_tag::mle_passive:
        return mle(pm.k_b[m], pm.dist_passive[m], y_pas[m]);
    case estimator_tag::mmse_passive:
        return mmse(pm.k_b[m], pm.dist_passive[m], y_pas[m]);
    }
    throw std::logic_error("estimate_user: bad estimator tag");
}

inline bool needs_snapshots(const std::vector<estimator_tag>& tags)
{
    for (estimator_tag t : tags)
        if (t == estimator_tag::mmse_smi || t == estimator_tag::mmse_sub)
            return true;
    return false;
}

inline bool needs_passive(const std::vector<estimator_tag>& tags)
{
    return std::any_of(tags.begin(), tags.end(), [](estimator_tag t) { return is_passive(t); });
}

inline bool needs_knowledge(const std::vector<estimator_tag>& tags)
{
    for (estimator_tag t : tags)
        if (t == estimator_tag::lmmse_naive || t == estimator_tag::lmmse_improved)
            return true;
    return false;
}

// One Monte Carlo trial: one channel and noise realization shared by every
// estimator (the passive rows reuse it with the Eves silenced), one knowledge
// draw shared by both LMMSE variants, and one snapshot block shared by SMI
// and the subspace variant.
inline void run_trial(const point_model& pm, const run_plan& plan, long trial,
                      std::uint32_t grid_index, std::vector<std::vector<trial_metrics>>& out)
{
    rng_stream rng_ch(plan.master_seed, static_cast<std::uint32_t>(trial), grid_index,
                      stream_purpose::channel);
    const channel_draw draw = sample_channel_draw(pm.cfg, rng_ch);

    std::vector<eve_knowledge> know;
    if (needs_knowledge(plan.estimators))
    {
        rng_stream rng_know(plan.master_seed, static_cast<std::uint32_t>(trial), grid_index,
                            stream_purpose::eve_knowledge);
        know = sample_eve_knowledge(pm.cfg, rng_know);
    }

    std::vector<Eigen::MatrixXcd> s_yy;
    if (needs_snapshots(plan.estimators))
    {
        rng_stream rng_snap(plan.master_seed, static_cast<std::uint32_t>(trial), grid_index,
                            stream_purpose::snapshots);
        for (int m = 0; m < pm.cfg.n_users(); ++m)
            s_yy.push_back(estimate_syy_protocol(pm.cfg, pm.pilots, m, pm.q_snapshots, rng_snap));
    }

    const int m_users = pm.cfg.n_users();
    const Eigen::MatrixXcd y_rx = synthesize_received(pm.cfg, pm.pilots, draw);
    std::vector<Eigen::VectorXcd> y_act(m_users);
    for (int m = 0; m < m_users; ++m)
        y_act[m] = correlate(y_rx, pm.pilots[m]);

    std::vector<Eigen::VectorXcd> y_pas;
    if (needs_passive(plan.estimators))
    {
        const Eigen::MatrixXcd y_rx_pas = synthesize_received(pm.cfg_passive, pm.pilots, draw);
        y_pas.resize(m_users);
        for (int m = 0; m < m_users; ++m)
            y_pas[m] = correlate(y_rx_pas, pm.pilots[m]);
    }

    // True antenna-domain channels for the downlink phase.
    std::vector<Eigen::VectorXcd> g_b(m_users);
    for (int m = 0; m < m_users; ++m)
        g_b[m] = pm.a_b[m] * draw.h_b[m];
    const Eigen::VectorXcd g_e = pm.a_e[0] * draw.h_e[0];

    for (std::size_t ti = 0; ti < plan.estimators.size(); ++ti)
    {
        const estimator_tag tag = plan.estimators[ti];
        trial_metrics& tm = out[ti][trial];
        try
        {
            std::vector<Eigen::VectorXcd> h_hat(m_users), g_hat(m_users);
            for (int m = 0; m < m_users; ++m)
            {
                h_hat[m] = estimate_user(pm, tag, m, y_act, y_pas, s_yy, know);
                g_hat[m] = pm.a_b[m] * h_hat[m];
            }
            const double err = (h_hat[0] - draw.h_b[0]).squaredNorm();
            tm.bmse = err;
            tm.nbmse = err / draw.h_b[0].squaredNorm();
            const Eigen::MatrixXcd w = matched_filter_precoder(g_hat);
            const downlink_rates rates =
                downlink_user_rates(w, g_b, g_e, pm.p_dl, pm.cfg.noise_variance, 0);
            tm.rate_bob = rates.rate_bob;
            tm.rate_eve = rates.rate_eve;
            tm.ok = true;
        }
        catch (const estimator_error&)
        {
            tm.ok = false;
        }
    }
}

} // namespace detail

inline sweep_result run_sweep(const run_plan& plan)
{
    if (plan.sweep.values.empty())
        throw config_error("run_sweep: empty sweep grid");
    if (plan.estimators.empty())
        throw config_error("run_sweep: no estimators requested");
    if (plan.n_trials < 1)
        throw config_error("run_sweep: n_trials must be >= 1");

    sweep_result result;
    for (std::size_t g = 0; g < plan.sweep.values.size(); ++g)
    {
        scenario_config cfg = plan.base;
        int q = plan.q_snapshots;
        detail::apply_sweep_value(cfg, q, plan.sweep.variable, plan.sweep.values[g]);
        validate(cfg);
        const detail::point_model pm(cfg, q, plan.snr_dl_db);

        std::vector<std::vector<detail::trial_metrics>> metrics(
            plan.estimators.size(), std::vector<detail::trial_metrics>(plan.n_trials));

        const int n_threads = std::max(1, plan.threads);
        auto worker = [&](long lo, long hi) {
            for (long t = lo; t < hi; ++t)
                detail::run_trial(pm, plan, t, static_cast<std::uint32_t>(g), metrics);
        };
        if (n_threads == 1)
            worker(0, plan.n_trials);
        else
        {
            std::vector<std::thread> pool;
            const long chunk = (plan.n_trials + n_threads - 1) / n_threads;
            for (int w = 0; w < n_threads; ++w)
            {
                const long lo = w * chunk;
                const long hi = std::min<long>(plan.n_trials, lo + chunk);
                if (lo < hi)
                    pool.emplace_back(worker, lo, hi);
            }
            for (auto& th : pool)
                th.join();
        }

        for (std::size_t ti = 0; ti < plan.estimators.size(); ++ti)
        {
            sweep_row row;
            row.sweep_var = plan.sweep.variable;
            row.sweep_value = plan.sweep.values[g];
            row.estimator = to_string(plan.estimators[ti]);
            row.trials = plan.n_trials;
            row.closed_form_bmse = detail::closed_form_for(pm, plan.estimators[ti]);

            detail::kahan_sum bmse, nbmse, rb, re;
            long ok_count = 0;
            for (long t = 0; t < plan.n_trials; ++t) // pinned reduction order
            {
                const auto& tm = metrics[ti][t];
                if (!tm.ok)
                    continue;
                ++ok_count;
                bmse.add(tm.bmse);
                nbmse.add(tm.nbmse);
                rb.add(tm.rate_bob);
                re.add(tm.rate_eve);
            }
            row.failures = plan.n_trials - ok_count;
            if (ok_count > 0)
            {
                row.bmse = bmse.get() / ok_count;
                row.nbmse = nbmse.get() / ok_count;
                row.rate_bob = rb.get() / ok_count;
                row.rate_eve = re.get() / ok_count;
                row.secrecy_rate = std::max(row.rate_bob - row.rate_eve, 0.0);
            }
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

// ---- CSV + plot script ------------------------------------------------------

inline std::string csv_header()
{
    return "sweep_var,sweep_value,estimator,nbmse,bmse,closed_form_bmse,secrecy_rate,"
           "rate_bob,rate_eve,trials,failures";
}

namespace detail
{

inline std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace detail

inline std::string to_csv(const sweep_result& result)
{
    std::string out = csv_header() + "\n";
    for (const auto& r : result.rows)
    {
        out += r.sweep_var + ',' + detail::format_double(r.sweep_value) + ',' + r.estimator +
               ',' + detail::format_double(r.nbmse) + ',' + detail::format_double(r.bmse) + ',' +
               detail::format_double(r.closed_form_bmse) + ',' +
               detail::format_double(r.secrecy_rate) + ',' + detail::format_double(r.rate_bob) +
               ',' + detail::format_double(r.rate_eve) + ',' + std::to_string(r.trials) + ',' +
               std::to_string(r.failures) + '\n';
    }
    return out;
}

inline void write_csv(const sweep_result& result, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open output file: " + path);
    f << to_csv(result);
    if (!f.good())
        throw std::runtime_error("failed writing output file: " + path);
}

// Gnuplot companion for a CSV written by write_csv; saved next to the data.
inline std::string make_plot_script(const sweep_result& result, const std::string& csv_path)
{
    std::vector<std::string> tags;
    for (const auto& r : result.rows)
        if (std::find(tags.begin(), tags.end(), r.estimator) == tags.end())
            tags.push_back(r.estimator);
    const std::string var = result.rows.empty() ? "x" : result.rows.front().sweep_var;

    std::string s;
    s += "set datafile separator ','\n";
    s += "set key outside right\n";
    s += "set logscale y\n";
    s += "set xlabel '" + var + "'\n";
    s += "set ylabel 'NBMSE'\n";
    s += "set grid\n";
    s += "plot ";
    for (std::size_t i = 0; i < tags.size(); ++i)
    {
        if (i)
            s += ", \\\n     ";
        s += "'" + csv_path + "' using 2:(strcol(3) eq '" + tags[i] +
             "' ? column(4) : NaN) with linespoints title '" + tags[i] + "'";
    }
    s += "\n";
    return s;
}

inline std::string write_plot_script(const sweep_result& result, const std::string& csv_path)
{
    const std::string gp_path = csv_path + ".gp";
    std::ofstream f(gp_path);
    if (!f)
        throw std::runtime_error("cannot open plot script: " + gp_path);
    f << make_plot_script(result, csv_path);
    return gp_path;
}

} // namespace spoofsim
