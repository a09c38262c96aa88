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
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace spoofsim
{

struct config_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct array_config
{
    int n_antennas = 10;
    double spacing_over_wavelength = 0.5; // d / lambda_c

    bool operator==(const array_config&) const = default;
};

// One transmitter-to-Alice link: a set of arrival angles and the average
// transmit power per symbol (linear scale). power == 0 encodes a passive Eve.
struct user_link
{
    std::vector<double> aoas; // radians, each in [0, pi]
    double power = 1.0;

    bool operator==(const user_link&) const = default;
};

// Hyperparameters of Alice's knowledge of the Eves: truncated-Gaussian AoA
// error (radians) and truncated-Gaussian log-power error.
struct eve_uncertainty
{
    double sigma_theta = M_PI / 75.0;
    double delta_theta_max = M_PI / 25.0;
    double sigma_power = 0.3454 / 2.0; // natural-log domain
    double delta_power_max = 0.3454;

    bool operator==(const eve_uncertainty&) const = default;
};

// One sampled realization of Alice's imperfect Eve parameters for a single
// user pair, as consumed by the LMMSE estimators.
struct eve_knowledge
{
    std::vector<double> aoa_estimates; // theta_hat per spoofing path
    double power_estimate = 0.0;       // P_hat, linear scale
    eve_uncertainty hyper;
};

struct scenario_config
{
    array_config array;
    std::vector<user_link> bobs;
    std::vector<user_link> eves; // paired with bobs by index
    double noise_variance = 1.0; // sigma_v^2
    int pilot_length = 8;        // K
    eve_uncertainty eve_know;

    // Reference-family knobs: psi is Bob-1's second AoA, phi offsets Eve-1's
    // first AoA from pi/5. Present only for configs built from the reference
    // scenario (or declared in a config file); sweeps over them require it.
    std::optional<double> psi;
    std::optional<double> phi;

    bool operator==(const scenario_config&) const = default;

    int n_users() const { return static_cast<int>(bobs.size()); }
};

struct sweep_spec
{
    std::string variable; // snr_b_db, ssr_db, q_snapshots, psi_rad, phi_rad, sigma_theta_e_rad
    std::vector<double> values;

    bool operator==(const sweep_spec&) const = default;
};

struct reference_scenario
{
    scenario_config config;
    sweep_spec sweep;
};

enum class figure_preset
{
    fig3,
    fig4,
    fig5,
    fig8,
    fig9,
    fig10,
};

inline void validate(const scenario_config& cfg)
{
    if (cfg.array.n_antennas < 1)
        throw config_error("array.n_antennas must be >= 1");
    if (!(cfg.array.spacing_over_wavelength > 0.0))
        throw config_error("array.spacing_over_wavelength must be > 0");
    if (cfg.bobs.empty() || cfg.bobs.size() != cfg.eves.size())
        throw config_error("bobs and eves must be non-empty and paired by index");
    if (cfg.pilot_length < static_cast<int>(cfg.bobs.size()))
        throw config_error("pilot_length must be >= number of users");
    if (!(cfg.noise_variance > 0.0))
        throw config_error("noise.variance must be > 0");
    auto check_link = [](const user_link& link, const char* who) {
        if (link.aoas.empty())
            throw config_error(std::string(who) + ": at least one AoA required");
        for (double a : link.aoas)
            if (!(a >= 0.0 && a <= M_PI)) // rejected, not wrapped: the ULA response is ambiguous outside [0, pi]
                throw config_error(std::string(who) + ": AoA outside [0, pi]");
        if (!(link.power >= 0.0))
            throw config_error(std::string(who) + ": power must be >= 0");
    };
    for (const auto& b : cfg.bobs)
        check_link(b, "bob");
    for (const auto& e : cfg.eves)
        check_link(e, "eve");
    if (!(cfg.eve_know.sigma_theta > 0.0) || !(cfg.eve_know.delta_theta_max > 0.0) ||
        !(cfg.eve_know.sigma_power > 0.0) || !(cfg.eve_know.delta_power_max > 0.0))
        throw config_error("eve_knowledge parameters must be > 0");
}

// M distinct columns of the unitary K-point DFT matrix. Any two distinct
// columns are orthogonal; columns 0..M-1 are used (the specific choice is
// arbitrary and fixed project-wide).
inline std::vector<Eigen::VectorXcd> make_dft_pilots(int pilot_length, int user_count)
{
    if (user_count < 1 || pilot_length < user_count)
        throw config_error("cannot allocate orthogonal pilots: need K >= M >= 1");
    const double k = static_cast<double>(pilot_length);
    std::vector<Eigen::VectorXcd> pilots(user_count);
    for (int m = 0; m < user_count; ++m)
    {
        Eigen::VectorXcd p(pilot_length);
        for (int i = 0; i < pilot_length; ++i)
        {
            const double phase = -2.0 * M_PI * i * m / k;
            p(i) = std::complex<double>(std::cos(phase), std::sin(phase)) / std::sqrt(k);
        }
        pilots[m] = p;
    }
    return pilots;
}

inline void set_psi(scenario_config& cfg, double value)
{
    if (!cfg.psi.has_value())
        throw config_error("psi sweep requires a reference-family scenario (psi field present)");
    cfg.psi = value;
    cfg.bobs.at(0).aoas.at(1) = value;
}

inline void set_phi(scenario_config& cfg, double value)
{
    if (!cfg.phi.has_value())
        throw config_error("phi sweep requires a reference-family scenario (phi field present)");
    cfg.phi = value;
    cfg.eves.at(0).aoas.at(0) = M_PI / 5.0 + value;
}

inline void set_snr_b_db(scenario_config& cfg, double snr_db)
{
    const double p_b = cfg.noise_variance * std::pow(10.0, snr_db / 10.0);
    for (std::size_t m = 0; m < cfg.bobs.size(); ++m)
    {
        const double ratio =
            cfg.bobs[m].power > 0.0 ? cfg.eves[m].power / cfg.bobs[m].power : 0.0;
        cfg.bobs[m].power = p_b;
        cfg.eves[m].power = ratio * p_b; // preserves each pair's SSR
    }
}

inline void set_ssr_db(scenario_config& cfg, double ssr_db)
{
    const double ratio = std::pow(10.0, -ssr_db / 10.0); // P_E = P_B / SSR
    for (std::size_t m = 0; m < cfg.bobs.size(); ++m)
        cfg.eves[m].power = cfg.bobs[m].power * ratio;
}

namespace detail
{

inline scenario_config reference_base()
{
    scenario_config cfg;
    cfg.array = {10, 0.5};
    cfg.noise_variance = 1.0;
    cfg.pilot_length = 8;
    cfg.psi = M_PI / 10.0;
    cfg.phi = M_PI / 10.0;
    const double p = std::pow(10.0, 30.0 / 10.0); // SNR_B 30 dB, SSR 0 dB
    cfg.bobs = {
        {{0.0, *cfg.psi, M_PI / 5.0}, p},
        {{3.0 * M_PI / 5.0, 7.0 * M_PI / 10.0}, p},
    };
    cfg.eves = {
        {{M_PI / 5.0 + *cfg.phi, 2.0 * M_PI / 5.0, M_PI / 2.0}, p},
        {{4.0 * M_PI / 5.0, 9.0 * M_PI / 10.0}, p},
    };
    cfg.eve_know = {};
    return cfg;
}

inline std::vector<double> linear_grid(double from, double to, double step)
{
    std::vector<double> v;
    for (double x = from; x <= to + 1e-9; x += step)
        v.push_back(x);
    return v;
}

} // namespace detail

inline reference_scenario build_reference_scenario(
    figure_preset preset, const std::map<std::string, double>& overrides = {})
{
    scenario_config cfg = detail::reference_base();
    for (const auto& [key, value] : overrides)
    {
        if (key == "snr_b_db")
            set_snr_b_db(cfg, value);
        else if (key == "ssr_db")
            set_ssr_db(cfg, value);
        else if (key == "psi")
            set_psi(cfg, value);
        else if (key == "phi")
            set_phi(cfg, value);
        else if (key == "sigma_theta_e")
            cfg.eve_know.sigma_theta = value;
        else if (key == "delta_theta_max")
            cfg.eve_know.delta_theta_max = value;
        else if (key == "sigma_power_e")
            cfg.eve_know.sigma_power = value;
        else if (key == "delta_power_max")
            cfg.eve_know.delta_power_max = value;
        else if (key == "n_antennas")
            cfg.array.n_antennas = static_cast<int>(value);
        else if (key == "spacing_over_wavelength")
            cfg.array.spacing_over_wavelength = value;
        else if (key == "pilot_length")
            cfg.pilot_length = static_cast<int>(value);
        else if (key == "noise_variance")
            cfg.noise_variance = value;
        else if (key == "m_users")
        {
            const auto m = static_cast<std::size_t>(value);
            if (m < 1 || m > cfg.bobs.size())
                throw config_error("m_users override out of range");
            cfg.bobs.resize(m);
            cfg.eves.resize(m);
        }
        else
            throw config_error("unknown override key: " + key);
    }

    sweep_spec sweep;
    switch (preset)
    {
    case figure_preset::fig3:
        sweep = {"snr_b_db", detail::linear_grid(0.0, 34.0, 2.0)};
        break;
    case figure_preset::fig4:
        sweep = {"ssr_db", detail::linear_grid(-10.0, 20.0, 2.0)};
        break;
    case figure_preset::fig5:
        sweep = {"q_snapshots", {16, 32, 64, 128, 256, 512, 1024, 2048, 4096}};
        break;
    case figure_preset::fig8:
        sweep = {"psi_rad", {0.0, M_PI / 80.0, M_PI / 40.0, M_PI / 20.0, M_PI / 10.0}};
        break;
    case figure_preset::fig9:
        sweep = {"phi_rad", {0.0, M_PI / 80.0, M_PI / 40.0, M_PI / 20.0, M_PI / 10.0}};
        break;
    case figure_preset::fig10:
        sweep = {"sigma_theta_e_rad",
                 {M_PI / 300.0, M_PI / 150.0, M_PI / 75.0, M_PI / 50.0, 2.0 * M_PI / 75.0,
                  M_PI / 25.0}};
        break;
    }
    validate(cfg);
    return {cfg, sweep};
}

inline figure_preset parse_figure_preset(const std::string& name)
{
    if (name == "fig3")
        return figure_preset::fig3;
    if (name == "fig4")
        return figure_preset::fig4;
    if (name == "fig5")
        return figure_preset::fig5;
    if (name == "fig8")
        return figure_preset::fig8;
    if (name == "fig9")
        return figure_preset::fig9;
    if (name == "fig10")
        return figure_preset::fig10;
    throw config_error("unknown figure preset: " + name);
}

// ---- config file (JSON) ---------------------------------------------------

inline nlohmann::json to_json(const scenario_config& cfg)
{
    nlohmann::json j;
    j["array"] = {{"n_antennas", cfg.array.n_antennas},
                  {"spacing_over_wavelength", cfg.array.spacing_over_wavelength}};
    j["bobs"] = nlohmann::json::array();
    for (const auto& b : cfg.bobs)
        j["bobs"].push_back({{"aoas", b.aoas}, {"power", b.power}});
    j["eves"] = nlohmann::json::array();
    for (const auto& e : cfg.eves)
        j["eves"].push_back({{"aoas", e.aoas}, {"power", e.power}});
    j["noise"] = {{"variance", cfg.noise_variance}};
    j["pilot_length"] = cfg.pilot_length;
    j["eve_knowledge"] = {{"sigma_theta", cfg.eve_know.sigma_theta},
                          {"delta_theta_max", cfg.eve_know.delta_theta_max},
                          {"sigma_power", cfg.eve_know.sigma_power},
                          {"delta_power_max", cfg.eve_know.delta_power_max}};
    if (cfg.psi)
        j["psi"] = *cfg.psi;
    if (cfg.phi)
        j["phi"] = *cfg.phi;
    return j;
}

inline scenario_config scenario_from_json(const nlohmann::json& j)
{
    try
    {
        scenario_config cfg;
        cfg.array.n_antennas = j.at("array").at("n_antennas").get<int>();
        cfg.array.spacing_over_wavelength =
            j.at("array").at("spacing_over_wavelength").get<double>();
        cfg.bobs.clear();
        for (const auto& b : j.at("bobs"))
            cfg.bobs.push_back({b.at("aoas").get<std::vector<double>>(), b.at("power").get<double>()});
        cfg.eves.clear();
        for (const auto& e : j.at("eves"))
            cfg.eves.push_back({e.at("aoas").get<std::vector<double>>(), e.at("power").get<double>()});
        cfg.noise_variance = j.at("noise").at("variance").get<double>();
        cfg.pilot_length = j.at("pilot_length").get<int>();
        const auto& ek = j.at("eve_knowledge");
        cfg.eve_know = {ek.at("sigma_theta").get<double>(),
                        ek.at("delta_theta_max").get<double>(),
                        ek.at("sigma_power").get<double>(),
                        ek.at("delta_power_max").get<double>()};
        if (j.contains("psi"))
            cfg.psi = j.at("psi").get<double>();
        if (j.contains("phi"))
            cfg.phi = j.at("phi").get<double>();
        validate(cfg);
        return cfg;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw config_error(std::string("malformed scenario config: ") + e.what());
    }
}

inline std::optional<sweep_spec> sweep_from_json(const nlohmann::json& j)
{
    if (!j.contains("sweep"))
        return std::nullopt;
    try
    {
        sweep_spec s;
        s.variable = j.at("sweep").at("variable").get<std::string>();
        s.values = j.at("sweep").at("values").get<std::vector<double>>();
        if (s.values.empty())
            throw config_error("sweep.values must be non-empty");
        return s;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw config_error(std::string("malformed sweep section: ") + e.what());
    }
}

} // namespace spoofsim
