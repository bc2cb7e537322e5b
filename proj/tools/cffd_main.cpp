// SPDX-License-Identifier: Apache-2.0
// Command-line front end: preset sweeps, single-drop solvers and the self-test.
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cffd/config.hpp"
#include "cffd/errors.hpp"
#include "cffd/experiment.hpp"
#include "cffd/parallel.hpp"
#include "cffd/scenario.hpp"
#include "cffd/self_test.hpp"

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    int threads = 0;
    std::string out;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

cffd::ExperimentConfig load(const std::string& path, cffd::ExperimentKind kind, const Globals& g) {
    cffd::ExperimentConfig c = path.empty() ? cffd::preset_config(kind) : cffd::parse_config(read_file(path));
    if (kind != cffd::ExperimentKind::custom) c.experiment = kind;
    if (g.seed) c.scenario.rng_seed = *g.seed;
    if (!g.out.empty()) c.output_path = g.out;
    return c;
}

void emit(const cffd::ResultTable& t, const std::string& path) {
    if (path.empty() || path == "-") {
        t.write_csv(std::cout);
    } else {
        cffd::write_table(t, path);
        std::cerr << "wrote " << t.rows.size() << " rows to " << path << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cell-free full-duplex massive MIMO simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "master seed (overrides rng_seed)");
    app.add_option("--threads", g.threads, "OpenMP worker count (0 = runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", g.out, "output CSV path (default stdout)");

    std::string config_path;
    int n_drops = 0, n_blocks = 0;

    auto* simulate = app.add_subcommand("simulate", "run the experiment named in a config file");
    simulate->add_option("config", config_path, "INI config")->required()->check(CLI::ExistingFile);

    auto* self_test = app.add_subcommand("self-test", "fast consistency checks; nonzero exit on failure");

    auto* dump = app.add_subcommand("dump-scenario", "write the large-scale map of one drop");
    dump->add_option("config", config_path, "INI config")->check(CLI::ExistingFile);

    struct Preset {
        const char* name;
        cffd::ExperimentKind kind;
        const char* help;
    };
    const Preset presets[] = {
        {"mse-vs-power", cffd::ExperimentKind::mse_vs_power, "normalized MSE against pilot power"},
        {"mse-vs-tau", cffd::ExperimentKind::mse_vs_tau, "normalized MSE against pilot length"},
        {"dlse-vs-power", cffd::ExperimentKind::dlse_vs_power, "SE against DL power"},
        {"ulse-vs-power", cffd::ExperimentKind::ulse_vs_power, "SE against UL power"},
        {"fd-vs-hd", cffd::ExperimentKind::fd_vs_hd, "FD and HD sum SE against SI suppression"},
    };
    std::vector<std::pair<CLI::App*, cffd::ExperimentKind>> preset_cmds;
    for (const auto& p : presets) {
        auto* cmd = app.add_subcommand(p.name, p.help);
        cmd->add_option("config", config_path, "optional INI config")->check(CLI::ExistingFile);
        cmd->add_option("--n-drops", n_drops, "drops per sweep point")->check(CLI::PositiveNumber);
        cmd->add_option("--n-blocks", n_blocks, "blocks per drop")->check(CLI::PositiveNumber);
        preset_cmds.emplace_back(cmd, p.kind);
    }

    std::vector<double> weights;
    std::optional<double> epsilon;
    std::optional<int> max_iters;
    std::string alloc_out;
    auto* pc = app.add_subcommand("power-control", "max-min power control on one drop");
    pc->add_option("config", config_path, "optional INI config")->check(CLI::ExistingFile);
    pc->add_option("--weights", weights, "w_d,w_u")->delimiter(',')->expected(2);
    pc->add_option("--epsilon", epsilon, "bisection tolerance")->check(CLI::PositiveNumber);
    pc->add_option("--max-iters", max_iters, "bisection step limit")->check(CLI::PositiveNumber);
    pc->add_option("--alloc-out", alloc_out, "allocation CSV path (default stdout)");

    std::optional<double> qos_dl, qos_ul;
    std::string method, gate;
    bool allow_fd = false, candidates = false;
    auto* nafd = app.add_subcommand("nafd-ee", "energy efficiency of network-assisted duplex mode assignment");
    nafd->add_option("config", config_path, "optional INI config")->check(CLI::ExistingFile);
    nafd->add_option("--qos-dl", qos_dl, "per-user DL SE target")->check(CLI::NonNegativeNumber);
    nafd->add_option("--qos-ul", qos_ul, "per-user UL SE target")->check(CLI::NonNegativeNumber);
    nafd->add_option("--method", method, "exhaustive or greedy")->check(CLI::IsMember({"exhaustive", "greedy"}));
    nafd->add_flag("--allow-fd", allow_fd, "admit full-duplex APs");
    nafd->add_option("--fronthaul-gate", gate, "as_printed or natural")
        ->check(CLI::IsMember({"as_printed", "natural"}));
    nafd->add_option("--n-drops", n_drops, "drops per sweep point")->check(CLI::PositiveNumber);
    nafd->add_flag("--candidates", candidates, "list every candidate of one drop instead of the sweep");

    CLI11_PARSE(app, argc, argv);

    try {
        cffd::set_thread_count(g.threads);
        if (simulate->parsed()) {
            const auto c = load(config_path, cffd::ExperimentKind::custom, g);
            emit(cffd::run_experiment(c), c.output_path);
            return 0;
        }
        if (self_test->parsed()) {
            const auto r = cffd::run_self_test(g.seed.value_or(1));
            cffd::print_report(std::cout, r);
            return r.passed() ? 0 : 1;
        }
        if (dump->parsed()) {
            const auto c = load(config_path, cffd::ExperimentKind::custom, g);
            const cffd::Scenario s = cffd::build_scenario(c.scenario);
            if (c.output_path.empty() || c.output_path == "-") {
                cffd::write_scenario_csv(std::cout, s);
            } else {
                std::ofstream f(c.output_path);
                if (!f) throw std::runtime_error("cannot open '" + c.output_path + "' for writing");
                cffd::write_scenario_csv(f, s);
            }
            return 0;
        }
        for (const auto& [cmd, kind] : preset_cmds) {
            if (!cmd->parsed()) continue;
            auto c = load(config_path, kind, g);
            if (n_drops > 0) c.n_drops = n_drops;
            if (n_blocks > 0) c.n_blocks = n_blocks;
            emit(cffd::run_experiment(c), c.output_path);
            return 0;
        }
        if (pc->parsed()) {
            auto c = load(config_path, cffd::ExperimentKind::custom, g);
            if (weights.size() == 2) {
                c.w_d = weights[0];
                c.w_u = weights[1];
            }
            if (epsilon) c.epsilon = *epsilon;
            if (max_iters) c.max_iters = *max_iters;
            const auto [log, alloc] = cffd::run_power_control(c);
            emit(log, c.output_path);
            emit(alloc, alloc_out);
            return 0;
        }
        if (nafd->parsed()) {
            auto c = load(config_path, cffd::ExperimentKind::nafd_ee, g);
            if (qos_dl) c.qos_dl = *qos_dl;
            if (qos_ul) c.qos_ul = *qos_ul;
            if (!method.empty()) c.p2_method = method == "greedy" ? cffd::P2Method::greedy : cffd::P2Method::exhaustive;
            if (allow_fd) c.allow_fd = true;
            if (!gate.empty())
                c.power_model.gate = gate == "natural" ? cffd::FronthaulGate::natural : cffd::FronthaulGate::as_printed;
            if (n_drops > 0) c.n_drops = n_drops;
            emit(candidates ? cffd::run_nafd_candidates(c) : cffd::run_experiment(c), c.output_path);
            return 0;
        }
    } catch (const cffd::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
