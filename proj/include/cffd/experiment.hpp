// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cffd/config.hpp"
#include "cffd/power_control.hpp"

namespace cffd {

inline constexpr const char* kVersion = "0.1.0";

/// Numeric table with ordered `# key: value` metadata lines.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;

    void add_row(std::vector<double> row);
    /// First value stored under `key`, or empty.
    std::string meta(const std::string& key) const;
    /// Every value stored under `key`, in order.
    std::vector<std::string> meta_all(const std::string& key) const;

    void write_csv(std::ostream& os) const;
    std::string to_csv() const;
    static ResultTable read_csv(std::istream& is);
};

/// Adds seed, version, config hash and the config echo (one `config` entry per line).
void attach_metadata(ResultTable& t, const ExperimentConfig& config);

/// Rebuilds the configuration from a table's `config` metadata lines.
ExperimentConfig config_from_metadata(const ResultTable& t);

/// Seed of drop `drop` under `master` (also the scenario rng_seed of that drop).
std::uint64_t drop_seed(std::uint64_t master, int drop);

/// Preset sweep used when the config names none.
std::pair<std::string, std::vector<double>> default_sweep(ExperimentKind kind);

/// Defaults of each preset (e.g. the NAFD power levels and bandwidth); CLI
/// subcommands start from these when no config file is given.
ExperimentConfig preset_config(ExperimentKind kind);

/// Runs the configured preset and returns its table with metadata attached.
/// Output does not depend on the OpenMP thread count.
ResultTable run_experiment(const ExperimentConfig& config);

/// Writes `t` to `path`; throws std::runtime_error when the file cannot be written.
void write_table(const ResultTable& t, const std::string& path);

/// Per-iteration bisection log (iter, lambda_lo, lambda_hi, feasible) and final allocation
/// (kind, index0, index1, value; kind 0 = eta_mk, 1 = varsigma_l) for one drop.
std::pair<ResultTable, ResultTable> run_power_control(const ExperimentConfig& config);

/// Every evaluated (a, b) candidate of one drop plus a summary row (kind = 1).
ResultTable run_nafd_candidates(const ExperimentConfig& config);

}  // namespace cffd
