// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cffd/nafd.hpp"
#include "cffd/scenario.hpp"

namespace cffd {

enum class ExperimentKind { mse_vs_power, mse_vs_tau, dlse_vs_power, ulse_vs_power, fd_vs_hd, nafd_ee, custom };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_from_string(const std::string& name);

enum class AllocationKind { maxmin, equal };

/// Scalar power-model settings; expanded per AP by to_params().
struct PowerModelSettings {
    double amp_efficiency = 0.4;
    double chi = 0.3;
    double P_cdl = 0.2;
    double P_cul = 0.2;
    double P_fdl = 0.825;
    double P_ful = 0.825;
    double P_bt = 0.25e-9;
    double P_U_fixed = 0.4;
    FronthaulGate gate = FronthaulGate::as_printed;

    PowerModelParams to_params(const Scenario& scenario) const;
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    ExperimentKind experiment = ExperimentKind::custom;
    std::string sweep_key;  // a scenario key, e.g. p_t_dbm or tau_p; empty = preset default
    std::vector<double> sweep_values;
    int n_drops = 100;
    int n_blocks = 200;
    std::string output_path;
    PowerModelSettings power_model;

    // Link-level presets
    AllocationKind allocation = AllocationKind::maxmin;
    bool monte_carlo = false;
    double w_d = 1.0;
    double w_u = 1.0;
    double epsilon = 1e-3;
    int max_iters = 200;

    // NAFD preset
    double qos_dl = 0.0;
    double qos_ul = 0.0;
    P2Method p2_method = P2Method::exhaustive;
    bool allow_fd = false;

    void validate() const;
};

/// Strict INI reader with sections [scenario], [experiment], [power_model].
/// Unknown keys and sections are rejected by name; bare power keys must carry
/// a `_dbm` or `_w` suffix. Throws ParseError with the offending line.
ExperimentConfig parse_config(const std::string& text);

/// Canonical INI text of every effective setting; parse_config(echo_config(c)) reproduces c.
std::string echo_config(const ExperimentConfig& config);

/// Applies `key = value` of the [scenario] section (used by sweeps). Throws ParseError(0, ...) on bad keys.
void set_scenario_key(ScenarioConfig& sc, const std::string& key, const std::string& value);
void set_scenario_value(ScenarioConfig& sc, const std::string& key, double value);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace cffd
