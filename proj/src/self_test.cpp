// SPDX-License-Identifier: Apache-2.0
#include "cffd/self_test.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "cffd/estimation.hpp"
#include "cffd/nafd.hpp"
#include "cffd/power_control.hpp"
#include "cffd/rng.hpp"

namespace cffd {

namespace {

enum : std::uint64_t {
    kTagTiny = 501,
    kTagSelf = 502,
};

SelfTestCheck timed(const std::string& name, const std::function<bool(std::ostringstream&)>& body) {
    SelfTestCheck c;
    c.name = name;
    std::ostringstream detail;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        c.passed = body(detail);
    } catch (const std::exception& e) {
        c.passed = false;
        detail << "exception: " << e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.detail = detail.str();
    return c;
}

bool estimator_identities(std::uint64_t seed, std::ostringstream& out) {
    ScenarioConfig sc;
    sc.num_aps = 4;
    sc.tx_antennas = sc.rx_antennas = 2;
    sc.rng_seed = stream_key(seed, kTagSelf, 1);
    const Scenario s = build_scenario(sc);
    const EstimateVariances v = estimate_variances(s);
    const EstimationStats st = estimation_statistics(s, 4000, stream_key(seed, kTagSelf, 2));
    double worst_var = 0.0, worst_nmse = 0.0, worst_cross = 0.0;
    auto scan = [&](const Eigen::MatrixXd& hat2, const Eigen::MatrixXd& err2, const Eigen::MatrixXd& true2,
                    const Eigen::MatrixXcd& cross, const Eigen::MatrixXd& gamma, const Eigen::MatrixXd& zeta,
                    double n) {
        for (Eigen::Index i = 0; i < gamma.size(); ++i) {
            const double g = gamma(i), z = zeta(i);
            worst_var = std::max(worst_var, std::abs(hat2(i) / n / g - 1.0));
            worst_nmse = std::max(worst_nmse, std::abs((err2(i) / true2(i)) / (1.0 - g / z) - 1.0));
            worst_cross = std::max(worst_cross, std::abs(cross(i)) / n / std::sqrt(g * (z - g)) * std::sqrt(n));
        }
    };
    scan(st.dl_hat2, st.dl_err2, st.dl_true2, st.dl_cross, v.gamma_dl, s.zeta_f, st.samples_dl());
    scan(st.ul_hat2, st.ul_err2, st.ul_true2, st.ul_cross, v.gamma_ul, s.zeta_g, st.samples_ul());
    out << "max rel err var " << worst_var << ", nmse " << worst_nmse << ", max cross z " << worst_cross;
    return worst_var < 0.06 && worst_nmse < 0.06 && worst_cross < 4.5;
}

bool oracle_tiny(std::uint64_t seed, std::ostringstream& out) {
    int failures = 0;
    double max_z = 0.0;
    for (int i = 0; i < 3; ++i) {
        const Scenario s = build_scenario(tiny_scenario_config(seed, i));
        const TermComparison c = oracle_check(s, 20000, stream_key(seed, kTagSelf, 3, i));
        failures += static_cast<int>(c.mismatches.size());
        max_z = std::max(max_z, c.max_z);
    }
    out << "3 tiny networks, mismatches " << failures << ", max z " << max_z;
    return failures == 0;
}

bool mutation_caught(std::uint64_t seed, std::ostringstream& out) {
    ScenarioConfig sc = tiny_scenario_config(seed, 0);
    sc.theta_si = db_to_linear(-20.0);
    const Scenario s = build_scenario(sc);
    const TermComparison c = oracle_check(s, 20000, stream_key(seed, kTagSelf, 4), 3.0, true);
    out << "flipped UL SI term, mismatches " << c.mismatches.size();
    return !c.ok();
}

bool bisection_converges(std::uint64_t seed, std::ostringstream& out) {
    ScenarioConfig sc;
    sc.num_aps = 4;
    sc.tx_antennas = sc.rx_antennas = 2;
    sc.rng_seed = stream_key(seed, kTagSelf, 5);
    const Scenario s = build_scenario(sc);
    const MaxMinProblem p = make_maxmin_problem(s);
    const MaxMinResult r = solve_p1_maxmin(p);
    const double spread_dl = (r.sinr_dl.maxCoeff() - r.sinr_dl.minCoeff()) / r.sinr_dl.maxCoeff();
    const double spread_ul = (r.sinr_ul.maxCoeff() - r.sinr_ul.minCoeff()) / r.sinr_ul.maxCoeff();
    const FeasibilityCertificate above = feasibility_check(p, r.lambda_star + 5.0 * p.epsilon);
    const bool valid = validate_allocation(r.alloc, s, p.gammas.gamma_dl, 1e-7).valid;
    out << "lambda* " << r.lambda_star << " after " << r.iterations << " steps, spread dl " << spread_dl << " ul "
        << spread_ul << ", lambda*+5eps " << to_string(above.status);
    return valid && spread_dl < 0.01 && spread_ul < 0.01 && above.status == FeasibilityStatus::infeasible;
}

bool lsfd_optimal(std::uint64_t seed, std::ostringstream& out) {
    ScenarioConfig sc;
    sc.num_aps = 6;
    sc.rng_seed = stream_key(seed, kTagSelf, 6);
    const Scenario s = build_scenario(sc);
    const EstimateVariances g = estimate_variances(s);
    std::vector<ApMode> modes;
    for (int m = 0; m < s.M(); ++m) modes.push_back(m % 2 == 0 ? ApMode::dl : ApMode::ul);
    const ModeAssignment shell = assignment_from_modes(modes, s.K(), s.L());
    const ModeAssignment x = optimize_inner(s, g, shell.a, shell.b, default_power_model(s), {});
    SplitMix64 rng(stream_key(seed, kTagSelf, 7));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int beaten = 0;
    for (int l = 0; l < s.L(); ++l) {
        const LsfdTerms t = lsfd_terms(s, g, x, l);
        const double best = lsfd_sinr(t, x.alpha.col(l));
        for (int d = 0; d < 200; ++d) {
            Eigen::VectorXd a(s.M());
            for (int m = 0; m < s.M(); ++m) a(m) = u(rng);
            if (lsfd_sinr(t, a) > best * (1.0 + 1e-9)) ++beaten;
        }
    }
    out << "random weights beating the closed form: " << beaten;
    return beaten == 0;
}

}  // namespace

ScenarioConfig tiny_scenario_config(std::uint64_t seed, int index) {
    SplitMix64 rng(stream_key(seed, kTagTiny, static_cast<std::uint64_t>(index)));
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    ScenarioConfig sc;
    sc.num_aps = pick(1, 4);
    sc.tx_antennas = sc.rx_antennas = pick(1, 2);
    sc.num_dl_users = pick(1, 2);
    sc.num_ul_users = pick(1, 2);
    sc.pilot_symbols = sc.num_dl_users + sc.num_ul_users;
    sc.area_side_m = 200.0;
    sc.theta_si = db_to_linear(std::uniform_real_distribution<double>(-50.0, -10.0)(rng));
    sc.rng_seed = rng();
    return sc;
}

TermComparison oracle_check(const Scenario& s, std::int64_t n_blocks, std::uint64_t seed, double n_se,
                            bool flip_ul_si) {
    const EstimateVariances g = estimate_variances(s);
    const PowerAllocation alloc = equal_power_allocation(s, g.gamma_dl);
    LinkTerms closed = closed_form_terms(s, g, alloc);
    if (flip_ul_si) closed.ul.col(kTermCross) *= -1.0;
    const MonteCarloTerms mc = monte_carlo_terms(s, alloc, n_blocks, seed);
    return compare_terms(closed, mc, n_se);
}

bool SelfTestReport::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return !checks.empty();
}

SelfTestReport run_self_test(std::uint64_t seed) {
    SelfTestReport r;
    r.checks.push_back(timed("estimator identities", [&](auto& o) { return estimator_identities(seed, o); }));
    r.checks.push_back(timed("oracle equivalence", [&](auto& o) { return oracle_tiny(seed, o); }));
    r.checks.push_back(timed("mutation detection", [&](auto& o) { return mutation_caught(seed, o); }));
    r.checks.push_back(timed("bisection convergence", [&](auto& o) { return bisection_converges(seed, o); }));
    r.checks.push_back(timed("lsfd optimality", [&](auto& o) { return lsfd_optimal(seed, o); }));
    return r;
}

void print_report(std::ostream& os, const SelfTestReport& r) {
    for (const auto& c : r.checks)
        os << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.seconds << " s): " << c.detail << "\n";
    os << (r.passed() ? "self-test passed" : "self-test FAILED") << "\n";
}

}  // namespace cffd
