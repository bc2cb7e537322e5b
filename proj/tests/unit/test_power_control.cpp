// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cffd/errors.hpp"
#include "cffd/power_control.hpp"

using namespace cffd;

namespace {

Scenario make(int M, int N, int K, int L, std::uint64_t seed = 1) {
    ScenarioConfig c;
    c.num_aps = M;
    c.tx_antennas = c.rx_antennas = N;
    c.num_dl_users = K;
    c.num_ul_users = L;
    c.pilot_symbols = K + L;
    c.rng_seed = seed;
    return build_scenario(c);
}

}  // namespace

TEST_SUITE("power_control") {
    TEST_CASE("problem validation") {
        MaxMinProblem p = make_maxmin_problem(make(2, 1, 1, 1));
        CHECK_NOTHROW(p.validate());
        p.w_d = 0.0;
        CHECK_THROWS_AS(p.validate(), InvalidConfig);
        p = make_maxmin_problem(make(2, 1, 1, 1));
        p.epsilon = -1.0;
        CHECK_THROWS_AS(p.validate(), InvalidConfig);
    }

    TEST_CASE("feasibility check separates easy and impossible targets") {
        const MaxMinProblem p = make_maxmin_problem(make(4, 2, 2, 2));
        const double ub = single_user_bound(p);
        CHECK(ub > 0.0);
        const auto easy = feasibility_check(p, 1e-4 * ub);
        CHECK(easy.status == FeasibilityStatus::feasible);
        CHECK(easy.min_margin >= -1e-6);
        CHECK(validate_allocation(easy.allocation(), p.scenario, p.gammas.gamma_dl, 1e-9).valid);
        const auto hard = feasibility_check(p, 1.5 * ub);
        CHECK(hard.status == FeasibilityStatus::infeasible);
        CHECK_FALSE(hard.feasible);
    }

    TEST_CASE("bisection equalizes users and brackets the optimum") {
        const MaxMinProblem p = make_maxmin_problem(make(4, 2, 2, 2, 3));
        const MaxMinResult r = solve_p1_maxmin(p);
        CHECK(r.lambda_star > 0.0);
        CHECK(r.iterations > 0);
        CHECK(r.log.size() == static_cast<std::size_t>(r.iterations));
        CHECK(r.sinr_dl.minCoeff() >= r.lambda_star * (1.0 - 1e-6));
        CHECK(r.sinr_ul.minCoeff() >= r.lambda_star * (1.0 - 1e-6));
        CHECK((r.sinr_dl.maxCoeff() - r.sinr_dl.minCoeff()) / r.sinr_dl.maxCoeff() < 0.01);
        CHECK(feasibility_check(p, r.lambda_star + 5.0 * p.epsilon).status == FeasibilityStatus::infeasible);
        const auto& last = r.log.back();
        CHECK(last.lambda_hi - last.lambda_lo < 2.0 * p.epsilon);
    }

    TEST_CASE("weights trade DL against UL") {
        const Scenario s = make(4, 2, 1, 1, 5);
        MaxMinProblem p = make_maxmin_problem(s, 1.0, 1.0);
        const MaxMinResult even = solve_p1_maxmin(p);
        p.w_d = 2.0;
        const MaxMinResult dl_heavy = solve_p1_maxmin(p);
        // SINR_dl >= lambda^2 and SINR_ul >= lambda at the optimum.
        CHECK(dl_heavy.sinr_dl(0) >= std::pow(dl_heavy.lambda_star, 2.0) * (1.0 - 1e-6));
        CHECK(dl_heavy.sinr_ul(0) >= dl_heavy.lambda_star * (1.0 - 1e-6));
        CHECK(dl_heavy.sinr_dl(0) / dl_heavy.sinr_ul(0) != doctest::Approx(even.sinr_dl(0) / even.sinr_ul(0)));
    }

    TEST_CASE("trimming never lowers the weighted minimum") {
        const MaxMinProblem p = make_maxmin_problem(make(4, 2, 2, 2, 7));
        const double lam = 0.5 * solve_p1_maxmin(p).lambda_star;
        const auto c = feasibility_check(p, lam);
        REQUIRE(c.feasible);
        const PowerAllocation a = c.allocation();
        const PowerAllocation t = trim_to_targets(p, a, lam);
        CHECK(maxmin_objective(p, t) >= std::min(maxmin_objective(p, a), lam) * (1.0 - 1e-9));
        CHECK(validate_allocation(t, p.scenario, p.gammas.gamma_dl, 1e-9).valid);
    }

    TEST_CASE("an unreachable floor is reported as infeasible") {
        MaxMinProblem p = make_maxmin_problem(make(2, 1, 1, 1));
        p.lambda_min = 10.0 * single_user_bound(p);
        p.lambda_max = 20.0 * single_user_bound(p);
        CHECK_THROWS_AS(solve_p1_maxmin(p), InfeasibleProblem);
    }

    TEST_CASE("normalized amplitudes map back to the per-AP budget") {
        const MaxMinProblem p = make_maxmin_problem(make(3, 2, 2, 1));
        Eigen::MatrixXd x = Eigen::MatrixXd::Constant(3, 2, std::sqrt(0.5));
        Eigen::VectorXd al = Eigen::VectorXd::Constant(1, 0.5);
        const PowerAllocation a = allocation_from_normalized(p, x, al);
        const AllocationSlack sl = allocation_slack(a, p.scenario, p.gammas.gamma_dl);
        CHECK(sl.ap.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(a.varsigma(0) == doctest::Approx(0.25));
    }
}
