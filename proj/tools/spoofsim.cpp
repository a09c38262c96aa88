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
// Command line front end. `spoofsim run` executes one Monte Carlo sweep,
// either from a named preset (--figure) or from a JSON scenario file
// (--config), and writes one CSV row per (grid point, estimator).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <spoofsim/harness.hpp>
#include <spoofsim/scenario.hpp>

namespace
{

spoofsim::run_plan build_plan(const std::string& figure, const std::string& config_path,
                              const std::vector<std::string>& estimator_names, long trials,
                              std::uint64_t seed, int q_snapshots, int threads,
                              bool have_snr_dl, double snr_dl_db)
{
    spoofsim::run_plan plan;
    bool have_sweep = false;

    if (!figure.empty())
    {
        const auto preset = spoofsim::parse_figure_preset(figure);
        const auto ref = spoofsim::build_reference_scenario(preset);
        plan.base = ref.config;
        plan.sweep = ref.sweep;
        plan.estimators = spoofsim::default_estimators(preset);
        have_sweep = true;
    }

    if (!config_path.empty())
    {
        std::ifstream f(config_path);
        if (!f)
            throw spoofsim::config_error("cannot open config file: " + config_path);
        nlohmann::json j;
        try
        {
            f >> j;
        }
        catch (const nlohmann::json::exception& e)
        {
            throw spoofsim::config_error(std::string("cannot parse config file: ") + e.what());
        }
        plan.base = spoofsim::scenario_from_json(j);
        if (auto sweep = spoofsim::sweep_from_json(j))
        {
            plan.sweep = *sweep;
            have_sweep = true;
        }
    }

    if (!have_sweep)
        throw spoofsim::config_error("no sweep selected: pass --figure, or a config with a sweep section");

    if (!estimator_names.empty())
    {
        plan.estimators.clear();
        for (const auto& name : estimator_names)
            plan.estimators.push_back(spoofsim::parse_estimator_tag(name));
    }
    if (plan.estimators.empty())
        throw spoofsim::config_error("no estimators selected: pass --estimators with --config runs");

    plan.n_trials = trials;
    plan.master_seed = seed;
    plan.q_snapshots = q_snapshots;
    plan.threads = threads;
    if (have_snr_dl)
        plan.snr_dl_db = snr_dl_db;
    return plan;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"spoofsim: uplink channel estimation under pilot spoofing attacks"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a Monte Carlo sweep and write a CSV");
    std::string figure, config_path, out_path;
    std::vector<std::string> estimator_names;
    long trials = 1000;
    std::uint64_t seed = 1;
    int q_snapshots = 512;
    int threads = 1;
    double snr_dl_db = 0.0;
    bool emit_plot = false;

    run->add_option("--figure", figure, "preset sweep: fig3, fig4, fig5, fig8, fig9 or fig10")
        ->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig8", "fig9", "fig10"}));
    run->add_option("--config", config_path, "JSON scenario file (overrides the preset scenario)");
    run->add_option("--trials", trials, "Monte Carlo trials per grid point")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run->add_option("--seed", seed, "master seed; results are bit-reproducible for a fixed seed")
        ->capture_default_str();
    run->add_option("--estimators", estimator_names,
                    "comma separated subset of: lse, mle, mmse, mmse-smi, mmse-sub, "
                    "lmmse-naive, lmmse-improved, lse-passive, mle-passive, mmse-passive")
        ->delimiter(',');
    auto* snr_dl_opt =
        run->add_option("--snr-dl", snr_dl_db, "downlink SNR in dB (default: tracks SNR_B)");
    run->add_option("--q-snapshots", q_snapshots,
                    "snapshots for the sample-correlation estimators (fig5 sweeps this)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run->add_option("--threads", threads, "worker threads; does not change the results")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run->add_option("--out", out_path, "output CSV path")->required();
    run->add_flag("--emit-plot-script", emit_plot, "also write a gnuplot script next to the CSV");

    CLI11_PARSE(app, argc, argv);

    try
    {
        const spoofsim::run_plan plan =
            build_plan(figure, config_path, estimator_names, trials, seed, q_snapshots, threads,
                       snr_dl_opt->count() > 0, snr_dl_db);
        const spoofsim::sweep_result result = spoofsim::run_sweep(plan);
        spoofsim::write_csv(result, out_path);
        std::cout << "wrote " << out_path << " (" << result.rows.size() << " rows, "
                  << plan.sweep.values.size() << " grid points, " << plan.n_trials
                  << " trials per point)\n";
        if (emit_plot)
            std::cout << "wrote " << spoofsim::write_plot_script(result, out_path) << "\n";
    }
    catch (const spoofsim::config_error& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
