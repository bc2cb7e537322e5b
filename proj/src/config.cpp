// SPDX-License-Identifier: Apache-2.0
#include "cffd/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cffd/errors.hpp"
#include "cffd/format.hpp"

namespace cffd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
    const std::string t = trim(v);
    double out = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ParseError(line, "key '" + key + "' expects a number, got '" + t + "'");
    return out;
}

long long parse_int(const std::string& v, const std::string& key, int line) {
    const std::string t = trim(v);
    long long out = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ParseError(line, "key '" + key + "' expects an integer, got '" + t + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& v, const std::string& key, int line) {
    const std::string t = trim(v);
    std::uint64_t out = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ParseError(line, "key '" + key + "' expects a non-negative integer, got '" + t + "'");
    return out;
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ParseError(line, "key '" + key + "' expects true or false, got '" + t + "'");
}

// Power-valued keys; the base name alone is rejected.
constexpr std::array<const char*, 3> kScenarioPowers = {"p_t", "p_d", "p_u"};
constexpr std::array<const char*, 5> kModelPowers = {"p_cdl", "p_cul", "p_fdl", "p_ful", "p_u_fixed"};

template <std::size_t N>
bool is_bare_power(const std::string& key, const std::array<const char*, N>& names) {
    return std::any_of(names.begin(), names.end(), [&](const char* n) { return key == n; });
}

// Returns watts for key = base + "_w" / base + "_dbm"; false if key is not of that form.
bool power_value(const std::string& key, const std::string& base, const std::string& value, int line,
                 double& watts) {
    if (key == base + "_w") {
        watts = parse_double(value, key, line);
        return true;
    }
    if (key == base + "_dbm") {
        watts = dbm_to_w(parse_double(value, key, line));
        return true;
    }
    return false;
}

void set_scenario_key_at(ScenarioConfig& sc, const std::string& key, const std::string& value, int line) {
    auto as_int = [&] { return static_cast<int>(parse_int(value, key, line)); };
    auto as_dbl = [&] { return parse_double(value, key, line); };
    double w = 0.0;
    if (key == "M") sc.num_aps = as_int();
    else if (key == "Nt") sc.tx_antennas = as_int();
    else if (key == "Nr") sc.rx_antennas = as_int();
    else if (key == "K") sc.num_dl_users = as_int();
    else if (key == "L") sc.num_ul_users = as_int();
    else if (key == "area_side") sc.area_side_m = as_dbl();
    else if (key == "fc") sc.carrier_ghz = as_dbl();
    else if (key == "bandwidth") sc.bandwidth_hz = as_dbl();
    else if (key == "noise_figure_db") sc.noise_figure_db = as_dbl();
    else if (key == "shadow_sigma_db") sc.shadow_sigma_db = as_dbl();
    else if (key == "tau_c") sc.coherence_symbols = as_int();
    else if (key == "tau_p") sc.pilot_symbols = as_int();
    else if (key == "theta_si") sc.theta_si = as_dbl();
    else if (key == "theta_si_db") sc.theta_si = db_to_linear(as_dbl());
    else if (key == "rng_seed") sc.rng_seed = parse_u64(value, key, line);
    else if (power_value(key, "p_t", value, line, w)) sc.pilot_power_w = w;
    else if (power_value(key, "p_d", value, line, w)) sc.dl_power_w = w;
    else if (power_value(key, "p_u", value, line, w)) sc.ul_power_w = w;
    else if (is_bare_power(key, kScenarioPowers))
        throw ParseError(line, "key '" + key + "' needs an explicit unit suffix: use '" + key + "_dbm' or '" + key +
                                   "_w'");
    else
        throw ParseError(line, "unknown key '" + key + "' in [scenario]");
}

void set_experiment_key(ExperimentConfig& c, const std::string& key, const std::string& value, int line) {
    const std::string v = trim(value);
    if (key == "name") {
        try {
            c.experiment = experiment_from_string(v);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line, e.what());
        }
    } else if (key == "sweep") {
        const auto colon = v.find(':');
        if (colon == std::string::npos) throw ParseError(line, "sweep expects '<scenario key>: v1, v2, ...'");
        c.sweep_key = trim(v.substr(0, colon));
        ScenarioConfig probe = c.scenario;
        c.sweep_values.clear();
        std::stringstream ss(v.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const std::string t = trim(item);
            if (t.empty()) continue;
            set_scenario_key_at(probe, c.sweep_key, t, line);  // rejects fields that do not exist
            c.sweep_values.push_back(parse_double(t, "sweep", line));
        }
        if (c.sweep_values.empty()) throw ParseError(line, "sweep needs at least one value");
    } else if (key == "n_drops") c.n_drops = static_cast<int>(parse_int(v, key, line));
    else if (key == "n_blocks") c.n_blocks = static_cast<int>(parse_int(v, key, line));
    else if (key == "output") c.output_path = v;
    else if (key == "allocation") {
        if (v == "maxmin") c.allocation = AllocationKind::maxmin;
        else if (v == "equal") c.allocation = AllocationKind::equal;
        else throw ParseError(line, "allocation must be maxmin or equal");
    } else if (key == "se_method") {
        if (v == "closed_form") c.monte_carlo = false;
        else if (v == "monte_carlo") c.monte_carlo = true;
        else throw ParseError(line, "se_method must be closed_form or monte_carlo");
    } else if (key == "w_d") c.w_d = parse_double(v, key, line);
    else if (key == "w_u") c.w_u = parse_double(v, key, line);
    else if (key == "epsilon") c.epsilon = parse_double(v, key, line);
    else if (key == "max_iters") c.max_iters = static_cast<int>(parse_int(v, key, line));
    else if (key == "qos_dl") c.qos_dl = parse_double(v, key, line);
    else if (key == "qos_ul") c.qos_ul = parse_double(v, key, line);
    else if (key == "p2_method") {
        if (v == "exhaustive") c.p2_method = P2Method::exhaustive;
        else if (v == "greedy") c.p2_method = P2Method::greedy;
        else throw ParseError(line, "p2_method must be exhaustive or greedy");
    } else if (key == "allow_fd") c.allow_fd = parse_bool(v, key, line);
    else throw ParseError(line, "unknown key '" + key + "' in [experiment]");
}

void set_power_model_key(PowerModelSettings& p, const std::string& key, const std::string& value, int line) {
    double w = 0.0;
    if (key == "amp_efficiency") p.amp_efficiency = parse_double(value, key, line);
    else if (key == "chi") p.chi = parse_double(value, key, line);
    else if (power_value(key, "p_cdl", value, line, w)) p.P_cdl = w;
    else if (power_value(key, "p_cul", value, line, w)) p.P_cul = w;
    else if (power_value(key, "p_fdl", value, line, w)) p.P_fdl = w;
    else if (power_value(key, "p_ful", value, line, w)) p.P_ful = w;
    else if (power_value(key, "p_u_fixed", value, line, w)) p.P_U_fixed = w;
    else if (key == "p_bt_w_per_bps") p.P_bt = parse_double(value, key, line);
    else if (key == "fronthaul_gate") {
        const std::string v = trim(value);
        if (v == "as_printed" || v == "swapped") p.gate = FronthaulGate::as_printed;
        else if (v == "natural") p.gate = FronthaulGate::natural;
        else throw ParseError(line, "fronthaul_gate must be as_printed or natural");
    } else if (is_bare_power(key, kModelPowers))
        throw ParseError(line, "key '" + key + "' needs an explicit unit suffix: use '" + key + "_dbm' or '" + key +
                                   "_w'");
    else
        throw ParseError(line, "unknown key '" + key + "' in [power_model]");
}

}  // namespace

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::mse_vs_power: return "mse_vs_power";
        case ExperimentKind::mse_vs_tau: return "mse_vs_tau";
        case ExperimentKind::dlse_vs_power: return "dlse_vs_power";
        case ExperimentKind::ulse_vs_power: return "ulse_vs_power";
        case ExperimentKind::fd_vs_hd: return "fd_vs_hd";
        case ExperimentKind::nafd_ee: return "nafd_ee";
        default: return "custom";
    }
}

ExperimentKind experiment_from_string(const std::string& name) {
    for (auto k : {ExperimentKind::mse_vs_power, ExperimentKind::mse_vs_tau, ExperimentKind::dlse_vs_power,
                   ExperimentKind::ulse_vs_power, ExperimentKind::fd_vs_hd, ExperimentKind::nafd_ee,
                   ExperimentKind::custom})
        if (name == to_string(k)) return k;
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

PowerModelParams PowerModelSettings::to_params(const Scenario& s) const {
    PowerModelParams p = default_power_model(s);
    p.zeta_amp.setConstant(amp_efficiency);
    p.chi = chi;
    p.P_cdl = P_cdl;
    p.P_cul = P_cul;
    p.P_fdl = P_fdl;
    p.P_ful = P_ful;
    p.P_bt = P_bt;
    p.P_U_fixed = P_U_fixed;
    p.gate = gate;
    return p;
}

void ExperimentConfig::validate() const {
    scenario.validate();
    if (n_drops < 1 || n_blocks < 1) throw InvalidConfig("n_drops and n_blocks must be >= 1");
    if (!(w_d > 0.0) || !(w_u > 0.0)) throw InvalidConfig("weights must be > 0");
    if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be > 0");
    if (max_iters < 1) throw InvalidConfig("max_iters must be >= 1");
    if (qos_dl < 0.0 || qos_ul < 0.0) throw InvalidConfig("QoS targets must be >= 0");
    if (!(power_model.amp_efficiency > 0.0 && power_model.amp_efficiency <= 1.0) ||
        !(power_model.chi > 0.0 && power_model.chi <= 1.0))
        throw InvalidConfig("amplifier efficiencies must lie in (0, 1]");
    if (!sweep_key.empty()) {
        ScenarioConfig probe = scenario;
        for (double v : sweep_values) set_scenario_value(probe, sweep_key, v);
    }
}

void set_scenario_key(ScenarioConfig& sc, const std::string& key, const std::string& value) {
    set_scenario_key_at(sc, key, value, 0);
}

void set_scenario_value(ScenarioConfig& sc, const std::string& key, double value) {
    // Integer-valued keys must receive integral sweep values.
    static const std::array<const char*, 8> ints = {"M", "Nt", "Nr", "K", "L", "tau_c", "tau_p", "rng_seed"};
    const bool integral = std::any_of(ints.begin(), ints.end(), [&](const char* k) { return key == k; });
    if (integral) {
        if (value != std::floor(value)) throw ParseError(0, "sweep value for '" + key + "' must be an integer");
        set_scenario_key_at(sc, key, std::to_string(static_cast<long long>(value)), 0);
    } else {
        set_scenario_key_at(sc, key, format_double(value), 0);
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    std::vector<std::pair<int, std::string>> deferred_sweep;  // applied after [scenario] is complete
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        const auto hash = s.find_first_of("#;");
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError(line, "malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "scenario" && section != "experiment" && section != "power_model")
                throw ParseError(line, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError(line, "expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ParseError(line, "missing key before '='");
        if (section.empty()) throw ParseError(line, "key '" + key + "' appears before any section header");
        if (section == "scenario") {
            set_scenario_key_at(c.scenario, key, value, line);
        } else if (section == "experiment") {
            if (key == "sweep")
                deferred_sweep.emplace_back(line, value);
            else
                set_experiment_key(c, key, value, line);
        } else {
            set_power_model_key(c.power_model, key, value, line);
        }
    }
    for (const auto& [ln, value] : deferred_sweep) set_experiment_key(c, "sweep", value, ln);
    try {
        c.validate();
    } catch (const ParseError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ParseError(0, e.what());
    }
    return c;
}

std::string echo_config(const ExperimentConfig& c) {
    std::ostringstream os;
    const auto& s = c.scenario;
    auto d = [](double v) { return format_double(v); };
    os << "[scenario]\n"
       << "M = " << s.num_aps << "\n"
       << "Nt = " << s.tx_antennas << "\n"
       << "Nr = " << s.rx_antennas << "\n"
       << "K = " << s.num_dl_users << "\n"
       << "L = " << s.num_ul_users << "\n"
       << "area_side = " << d(s.area_side_m) << "\n"
       << "fc = " << d(s.carrier_ghz) << "\n"
       << "bandwidth = " << d(s.bandwidth_hz) << "\n"
       << "noise_figure_db = " << d(s.noise_figure_db) << "\n"
       << "shadow_sigma_db = " << d(s.shadow_sigma_db) << "\n"
       << "tau_c = " << s.coherence_symbols << "\n"
       << "tau_p = " << s.pilot_symbols << "\n"
       << "p_t_w = " << d(s.pilot_power_w) << "\n"
       << "p_d_w = " << d(s.dl_power_w) << "\n"
       << "p_u_w = " << d(s.ul_power_w) << "\n"
       << "theta_si = " << d(s.theta_si) << "\n"
       << "rng_seed = " << s.rng_seed << "\n";
    os << "[experiment]\n"
       << "name = " << to_string(c.experiment) << "\n";
    if (!c.sweep_key.empty()) {
        os << "sweep = " << c.sweep_key << ":";
        for (std::size_t i = 0; i < c.sweep_values.size(); ++i) os << (i ? ", " : " ") << d(c.sweep_values[i]);
        os << "\n";
    }
    os << "n_drops = " << c.n_drops << "\n"
       << "n_blocks = " << c.n_blocks << "\n";
    if (!c.output_path.empty()) os << "output = " << c.output_path << "\n";
    os << "allocation = " << (c.allocation == AllocationKind::maxmin ? "maxmin" : "equal") << "\n"
       << "se_method = " << (c.monte_carlo ? "monte_carlo" : "closed_form") << "\n"
       << "w_d = " << d(c.w_d) << "\n"
       << "w_u = " << d(c.w_u) << "\n"
       << "epsilon = " << d(c.epsilon) << "\n"
       << "max_iters = " << c.max_iters << "\n"
       << "qos_dl = " << d(c.qos_dl) << "\n"
       << "qos_ul = " << d(c.qos_ul) << "\n"
       << "p2_method = " << (c.p2_method == P2Method::exhaustive ? "exhaustive" : "greedy") << "\n"
       << "allow_fd = " << (c.allow_fd ? "true" : "false") << "\n";
    const auto& p = c.power_model;
    os << "[power_model]\n"
       << "amp_efficiency = " << d(p.amp_efficiency) << "\n"
       << "chi = " << d(p.chi) << "\n"
       << "p_cdl_w = " << d(p.P_cdl) << "\n"
       << "p_cul_w = " << d(p.P_cul) << "\n"
       << "p_fdl_w = " << d(p.P_fdl) << "\n"
       << "p_ful_w = " << d(p.P_ful) << "\n"
       << "p_bt_w_per_bps = " << d(p.P_bt) << "\n"
       << "p_u_fixed_w = " << d(p.P_U_fixed) << "\n"
       << "fronthaul_gate = " << (p.gate == FronthaulGate::as_printed ? "as_printed" : "natural") << "\n";
    return os.str();
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cffd
