// SPDX-License-Identifier: Apache-2.0
#include "cffd/experiment.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cffd/cf_fd_link.hpp"
#include "cffd/errors.hpp"
#include "cffd/estimation.hpp"
#include "cffd/format.hpp"
#include "cffd/nafd.hpp"
#include "cffd/parallel.hpp"
#include "cffd/rng.hpp"

namespace cffd {

namespace {

enum : std::uint64_t {
    kTagDrop = 401,
    kTagDropMc = 402,
};

std::vector<double> linspace_step(double lo, double hi, double step) {
    std::vector<double> v;
    for (double x = lo; x <= hi + 1e-9; x += step) v.push_back(x);
    return v;
}

struct Sweep {
    std::string key;
    std::vector<double> values;
};

Sweep effective_sweep(const ExperimentConfig& c) {
    if (!c.sweep_key.empty()) return {c.sweep_key, c.sweep_values};
    auto [k, v] = default_sweep(c.experiment);
    return {k, v};
}

ScenarioConfig point_config(const ExperimentConfig& c, const Sweep& sw, std::size_t point, int drop) {
    ScenarioConfig sc = c.scenario;
    if (!sw.key.empty()) set_scenario_value(sc, sw.key, sw.values[point]);
    sc.rng_seed = drop_seed(c.scenario.rng_seed, drop);
    return sc;
}

// Mean over drops of equally sized rows, accumulated in drop order.
std::vector<double> mean_rows(const std::vector<std::vector<double>>& per_drop) {
    std::vector<double> acc(per_drop.front().size(), 0.0);
    for (const auto& r : per_drop)
        for (std::size_t i = 0; i < r.size(); ++i) acc[i] += r[i];
    for (double& x : acc) x /= static_cast<double>(per_drop.size());
    return acc;
}

ResultTable run_mse(const ExperimentConfig& c) {
    const Sweep sw = effective_sweep(c);
    ResultTable t;
    t.columns = {sw.key, "dl_nmse", "ul_nmse", "dl_nmse_analytic", "ul_nmse_analytic"};
    for (std::size_t p = 0; p < sw.values.size(); ++p) {
        std::vector<std::vector<double>> per(static_cast<std::size_t>(c.n_drops));
        parallel_for_indexed(c.n_drops, [&](std::int64_t d) {
            const Scenario s = build_scenario(point_config(c, sw, p, static_cast<int>(d)));
            const auto st = estimation_statistics(s, c.n_blocks, stream_key(s.config.rng_seed, kTagDropMc));
            const auto emp = st.pooled_nmse();
            const auto ana = pooled_nmse_analytic(s);
            per[static_cast<std::size_t>(d)] = {emp.dl, emp.ul, ana.dl, ana.ul};
        });
        auto row = mean_rows(per);
        row.insert(row.begin(), sw.values[p]);
        t.add_row(std::move(row));
    }
    return t;
}

PowerAllocation allocate(const ExperimentConfig& c, const Scenario& s, const EstimateVariances& g, DuplexMode mode) {
    if (c.allocation == AllocationKind::equal) return equal_power_allocation(s, g.gamma_dl);
    MaxMinProblem p = make_maxmin_problem(s, c.w_d, c.w_u);
    p.epsilon = c.epsilon;
    p.max_iters = c.max_iters;
    p.link.duplex = mode;
    return solve_p1_maxmin(p).alloc;
}

ResultTable run_link(const ExperimentConfig& c) {
    const Sweep sw = effective_sweep(c);
    const int K = c.scenario.num_dl_users, L = c.scenario.num_ul_users;
    ResultTable t;
    t.columns = {sw.key.empty() ? "point" : sw.key};
    for (int k = 0; k < K; ++k) t.columns.push_back("dl_se_" + std::to_string(k));
    for (int l = 0; l < L; ++l) t.columns.push_back("ul_se_" + std::to_string(l));
    t.columns.insert(t.columns.end(), {"sum_se", "hd_sum_se", "monte_carlo"});
    const std::size_t n_points = sw.values.empty() ? 1 : sw.values.size();
    for (std::size_t p = 0; p < n_points; ++p) {
        std::vector<std::vector<double>> per(static_cast<std::size_t>(c.n_drops));
        parallel_for_indexed(c.n_drops, [&](std::int64_t d) {
            const Scenario s = build_scenario(point_config(c, sw, p, static_cast<int>(d)));
            const EstimateVariances g = estimate_variances(s);
            const PowerAllocation fd = allocate(c, s, g, DuplexMode::full);
            const PowerAllocation hd = allocate(c, s, g, DuplexMode::half);
            LinkOptions opts;
            opts.check = CheckMode::permissive;
            const SeReport r =
                se_report(s, g, fd, c.monte_carlo ? SeMethod::monte_carlo : SeMethod::closed_form, opts, c.n_blocks,
                          stream_key(s.config.rng_seed, kTagDropMc));
            std::vector<double> row(r.dl_se.data(), r.dl_se.data() + r.dl_se.size());
            row.insert(row.end(), r.ul_se.data(), r.ul_se.data() + r.ul_se.size());
            row.push_back(r.sum_se);
            row.push_back(hd_baseline_sum_se(s, g, hd, hd, opts));
            per[static_cast<std::size_t>(d)] = std::move(row);
        });
        auto row = mean_rows(per);
        row.insert(row.begin(), sw.values.empty() ? 0.0 : sw.values[p]);
        row.push_back(c.monte_carlo ? 1.0 : 0.0);
        t.add_row(std::move(row));
    }
    return t;
}

// Fixed all-FD and half/half assignments with the same inner optimizer.
NafdPerformance fixed_assignment(const Scenario& s, const EstimateVariances& g, const PowerModelParams& params,
                                 const QosTargets& qos, const std::vector<ApMode>& modes) {
    const ModeAssignment shell = assignment_from_modes(modes, s.K(), s.L());
    const ModeAssignment x = optimize_inner(s, g, shell.a, shell.b, params, qos);
    return evaluate_nafd(x, s, g, params);
}

ResultTable run_nafd_sweep(const ExperimentConfig& c) {
    const Sweep sw = effective_sweep(c);
    ResultTable t;
    t.columns = {sw.key,      "ee_nafd", "sum_se_nafd", "p_total_nafd", "feasible_fraction",
                 "ee_all_fd", "ee_half_half"};
    const QosTargets qos{c.qos_dl, c.qos_ul};
    for (std::size_t p = 0; p < sw.values.size(); ++p) {
        std::vector<std::vector<double>> per(static_cast<std::size_t>(c.n_drops));
        parallel_for_indexed(c.n_drops, [&](std::int64_t d) {
            const Scenario s = build_scenario(point_config(c, sw, p, static_cast<int>(d)));
            const EstimateVariances g = estimate_variances(s);
            const PowerModelParams params = c.power_model.to_params(s);
            P2Options o;
            o.qos = qos;
            o.method = c.p2_method;
            o.allow_fd = c.allow_fd;
            const P2Result r = solve_p2(s, g, params, o);
            std::vector<ApMode> all_fd(static_cast<std::size_t>(s.M()), ApMode::fd), half(all_fd.size());
            for (std::size_t m = 0; m < half.size(); ++m) half[m] = m % 2 == 0 ? ApMode::dl : ApMode::ul;
            per[static_cast<std::size_t>(d)] = {r.perf.ee,
                                                r.perf.sum_se,
                                                r.perf.p_total,
                                                r.feasible ? 1.0 : 0.0,
                                                fixed_assignment(s, g, params, qos, all_fd).ee,
                                                fixed_assignment(s, g, params, qos, half).ee};
        });
        auto row = mean_rows(per);
        row.insert(row.begin(), sw.values[p]);
        t.add_row(std::move(row));
    }
    return t;
}

}  // namespace

void ResultTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size()) throw std::invalid_argument("row width does not match the column count");
    rows.push_back(std::move(row));
}

std::string ResultTable::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata)
        if (k == key) return v;
    return {};
}

std::vector<std::string> ResultTable::meta_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : metadata)
        if (k == key) out.push_back(v);
    return out;
}

void ResultTable::write_csv(std::ostream& os) const {
    for (const auto& [k, v] : metadata) os << "# " << k << ": " << v << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
        os << "\n";
    }
}

std::string ResultTable::to_csv() const {
    std::ostringstream os;
    write_csv(os);
    return os.str();
}

ResultTable ResultTable::read_csv(std::istream& is) {
    ResultTable t;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto sep = line.find(": ", 2);
            if (sep == std::string::npos) {
                t.metadata.emplace_back(line.substr(2), "");
            } else {
                t.metadata.emplace_back(line.substr(2, sep - 2), line.substr(sep + 2));
            }
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!header) {
            t.columns = cells;
            header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) {
            double v = 0.0;
            const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                throw std::runtime_error("non-numeric cell '" + c + "'");
            row.push_back(v);
        }
        t.add_row(std::move(row));
    }
    return t;
}

void attach_metadata(ResultTable& t, const ExperimentConfig& c) {
    const std::string echo = echo_config(c);
    t.metadata.emplace_back("experiment", to_string(c.experiment));
    t.metadata.emplace_back("seed", std::to_string(c.scenario.rng_seed));
    t.metadata.emplace_back("version", kVersion);
    t.metadata.emplace_back("config_hash", fnv1a_hex(echo));
    std::istringstream in(echo);
    std::string line;
    while (std::getline(in, line)) t.metadata.emplace_back("config", line);
}

ExperimentConfig config_from_metadata(const ResultTable& t) {
    std::string text;
    for (const auto& l : t.meta_all("config")) text += l + "\n";
    if (text.empty()) throw std::runtime_error("table carries no config echo");
    return parse_config(text);
}

std::uint64_t drop_seed(std::uint64_t master, int drop) {
    return stream_key(master, kTagDrop, static_cast<std::uint64_t>(drop));
}

std::pair<std::string, std::vector<double>> default_sweep(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::mse_vs_power: return {"p_t_dbm", linspace_step(-10, 30, 5)};
        case ExperimentKind::mse_vs_tau: return {"tau_p", {4, 5, 10, 15, 20, 25, 30}};
        case ExperimentKind::dlse_vs_power: return {"p_d_dbm", linspace_step(-10, 30, 5)};
        case ExperimentKind::ulse_vs_power: return {"p_u_dbm", linspace_step(-10, 30, 5)};
        case ExperimentKind::fd_vs_hd: return {"theta_si_db", linspace_step(-80, -10, 10)};
        case ExperimentKind::nafd_ee: return {"M", {2, 4, 6, 8}};
        default: return {"", {}};
    }
}

ExperimentConfig preset_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.experiment = kind;
    if (kind == ExperimentKind::nafd_ee) {
        c.scenario.num_aps = 6;
        c.scenario.dl_power_w = 1.0;
        c.scenario.ul_power_w = 0.2;
        c.scenario.bandwidth_hz = 50e6;
        c.scenario.theta_si = db_to_linear(-67.0);
        c.qos_dl = 0.5;
        c.qos_ul = 0.5;
        c.n_drops = 10;
    }
    return c;
}

ResultTable run_experiment(const ExperimentConfig& c) {
    c.validate();
    ResultTable t;
    switch (c.experiment) {
        case ExperimentKind::mse_vs_power:
        case ExperimentKind::mse_vs_tau: t = run_mse(c); break;
        case ExperimentKind::nafd_ee: t = run_nafd_sweep(c); break;
        default: t = run_link(c); break;
    }
    attach_metadata(t, c);
    return t;
}

void write_table(const ResultTable& t, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    t.write_csv(f);
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::pair<ResultTable, ResultTable> run_power_control(const ExperimentConfig& c) {
    c.validate();
    ScenarioConfig sc = c.scenario;
    sc.rng_seed = drop_seed(c.scenario.rng_seed, 0);
    const Scenario s = build_scenario(sc);
    MaxMinProblem p = make_maxmin_problem(s, c.w_d, c.w_u);
    p.epsilon = c.epsilon;
    p.max_iters = c.max_iters;
    const MaxMinResult r = solve_p1_maxmin(p);

    ResultTable log;
    log.columns = {"iter", "lambda_lo", "lambda_hi", "feasible"};
    for (const auto& step : r.log)
        log.add_row({static_cast<double>(step.iter), step.lambda_lo, step.lambda_hi,
                     step.status == FeasibilityStatus::feasible ? 1.0 : 0.0});
    attach_metadata(log, c);
    log.metadata.emplace_back("lambda_star", format_double(r.lambda_star));

    ResultTable alloc;
    alloc.columns = {"kind", "index0", "index1", "value"};
    for (int m = 0; m < s.M(); ++m)
        for (int k = 0; k < s.K(); ++k) alloc.add_row({0.0, double(m), double(k), r.alloc.eta(m, k)});
    for (int l = 0; l < s.L(); ++l) alloc.add_row({1.0, double(l), 0.0, r.alloc.varsigma(l)});
    attach_metadata(alloc, c);
    return {log, alloc};
}

ResultTable run_nafd_candidates(const ExperimentConfig& c) {
    c.validate();
    ScenarioConfig sc = c.scenario;
    sc.rng_seed = drop_seed(c.scenario.rng_seed, 0);
    const Scenario s = build_scenario(sc);
    const EstimateVariances g = estimate_variances(s);
    P2Options o;
    o.qos = {c.qos_dl, c.qos_ul};
    o.method = c.p2_method;
    o.allow_fd = c.allow_fd;
    const P2Result r = solve_p2(s, g, c.power_model.to_params(s), o);
    ResultTable t;
    t.columns = {"kind", "a_mask", "b_mask", "feasible", "ee", "sum_se", "p_total"};
    auto add = [&](double kind, const CandidateRow& row) {
        t.add_row({kind, double(row.a_mask), double(row.b_mask), row.feasible ? 1.0 : 0.0, row.ee, row.sum_se,
                   row.p_total});
    };
    for (const auto& row : r.log) add(0.0, row);
    add(1.0, r.best_row);
    attach_metadata(t, c);
    return t;
}

}  // namespace cffd
