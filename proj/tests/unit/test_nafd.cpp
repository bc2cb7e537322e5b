// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "cffd/errors.hpp"
#include "cffd/nafd.hpp"
#include "cffd/rng.hpp"

using namespace cffd;

namespace {

Scenario make(int M, std::uint64_t seed = 1) {
    ScenarioConfig c;
    c.num_aps = M;
    c.dl_power_w = 1.0;
    c.ul_power_w = 0.2;
    c.bandwidth_hz = 50e6;
    c.theta_si = db_to_linear(-67.0);
    c.rng_seed = seed;
    return build_scenario(c);
}

std::vector<ApMode> alternating(int M) {
    std::vector<ApMode> m;
    for (int i = 0; i < M; ++i) m.push_back(i % 2 == 0 ? ApMode::dl : ApMode::ul);
    return m;
}

}  // namespace

TEST_SUITE("nafd") {
    TEST_CASE("mode indices decode base-n digits, AP 0 first") {
        const auto m = modes_from_index(5, 3, 3);  // 5 = 2 + 1*3
        CHECK(m[0] == ApMode::ul);
        CHECK(m[1] == ApMode::dl);
        CHECK(m[2] == ApMode::off);
        const ModeAssignment x = assignment_from_modes({ApMode::fd, ApMode::off, ApMode::ul}, 2, 2);
        CHECK(mask_of(x.a) == 1u);
        CHECK(mask_of(x.b) == 5u);
    }

    TEST_CASE("full-duplex APs are only admitted when allowed") {
        const Scenario s = make(3);
        const EstimateVariances g = estimate_variances(s);
        ModeAssignment x = assignment_from_modes({ApMode::fd, ApMode::dl, ApMode::ul}, s.K(), s.L());
        CHECK_FALSE(check_assignment(x, s, g, false).empty());
        CHECK(check_assignment(x, s, g, true).empty());
        CHECK_THROWS(nafd_dl_se(s, g, x, NafdCheck::strict, false));
        CHECK_NOTHROW(nafd_dl_se(s, g, x, NafdCheck::permissive, false));
        x.varsigma(0) = 2.0;
        CHECK_FALSE(check_assignment(x, s, g, true).empty());
    }

    TEST_CASE("inter-AP gains carry theta on the diagonal") {
        const Scenario s = make(4);
        const Eigen::MatrixXd q = nafd_inter_ap_gain(s);
        for (int m = 0; m < 4; ++m) {
            CHECK(q(m, m) == doctest::Approx(s.config.theta_si));
            for (int n = 0; n < 4; ++n)
                if (n != m) CHECK(q(m, n) == doctest::Approx(s.ap_gain(m, n)));
        }
    }

    TEST_CASE("closed-form LSFD beats random weights") {
        const Scenario s = make(6, 4);
        const EstimateVariances g = estimate_variances(s);
        const ModeAssignment shell = assignment_from_modes(alternating(6), s.K(), s.L());
        const ModeAssignment x = optimize_inner(s, g, shell.a, shell.b, default_power_model(s), {});
        CHECK(x.alpha.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
        SplitMix64 rng(3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int l = 0; l < s.L(); ++l) {
            const LsfdTerms t = lsfd_terms(s, g, x, l);
            const double best = lsfd_sinr(t, x.alpha.col(l));
            CHECK(best > 0.0);
            CHECK(lsfd_sinr(t, 0.3 * x.alpha.col(l)) == doctest::Approx(best));
            for (int d = 0; d < 500; ++d) {
                Eigen::VectorXd a(6);
                for (int m = 0; m < 6; ++m) a(m) = u(rng);
                CHECK(lsfd_sinr(t, a) <= best * (1.0 + 1e-12));
            }
            CHECK(nafd_ul_sinr(s, g, x)(l) == doctest::Approx(best));
        }
    }

    TEST_CASE("fronthaul gates swap the DL and UL sums") {
        ModeAssignment x = assignment_from_modes({ApMode::dl, ApMode::ul}, 1, 1);
        Eigen::VectorXd d(1), u(1);
        d << 2.0;
        u << 3.0;
        const Eigen::VectorXd printed = fronthaul_rate(x, d, u, 10.0, FronthaulGate::as_printed);
        const Eigen::VectorXd natural = fronthaul_rate(x, d, u, 10.0, FronthaulGate::natural);
        CHECK(printed(0) == doctest::Approx(30.0));
        CHECK(printed(1) == doctest::Approx(20.0));
        CHECK(natural(0) == doctest::Approx(20.0));
        CHECK(natural(1) == doctest::Approx(30.0));
    }

    TEST_CASE("power model charges circuit power per active mode") {
        const Scenario s = make(2);
        const EstimateVariances g = estimate_variances(s);
        const PowerModelParams p = default_power_model(s);
        const ModeAssignment off = assignment_from_modes({ApMode::off, ApMode::off}, s.K(), s.L());
        const Eigen::VectorXd z = Eigen::VectorXd::Zero(2);
        CHECK(total_power(off, s, g, z, z, p) == doctest::Approx(p.P_U_fixed));
        const ModeAssignment one = assignment_from_modes({ApMode::dl, ApMode::off}, s.K(), s.L());
        CHECK(total_power(one, s, g, z, z, p) == doctest::Approx(p.P_U_fixed + s.Nt() * p.P_cdl + p.P_fdl));
        PowerModelParams bad = p;
        bad.chi = 0.0;
        CHECK_THROWS(bad.validate());
    }

    TEST_CASE("single-direction assignments miss a two-sided QoS") {
        const Scenario s = make(4, 2);
        const EstimateVariances g = estimate_variances(s);
        const PowerModelParams p = default_power_model(s);
        const QosTargets q{0.1, 0.1};
        for (ApMode only : {ApMode::dl, ApMode::ul}) {
            const ModeAssignment shell = assignment_from_modes(std::vector<ApMode>(4, only), s.K(), s.L());
            const ModeAssignment x = optimize_inner(s, g, shell.a, shell.b, p, q);
            CHECK_FALSE(candidate_row(x, evaluate_nafd(x, s, g, p), q).feasible);
        }
    }

    TEST_CASE("ranking prefers feasibility, then EE, then smaller shortfall") {
        CandidateRow a, b;
        a.feasible = true;
        a.ee = 1.0;
        b.feasible = false;
        b.ee = 5.0;
        CHECK(better(a, b));
        b.feasible = true;
        CHECK(better(b, a));
        a.feasible = b.feasible = false;
        a.shortfall = 0.1;
        b.shortfall = 0.2;
        CHECK(better(a, b));
    }

    TEST_CASE("exhaustive search dominates greedy and logs every candidate") {
        const Scenario s = make(4, 5);
        const EstimateVariances g = estimate_variances(s);
        const PowerModelParams p = default_power_model(s);
        P2Options o;
        o.qos = {0.2, 0.2};
        const P2Result ex = solve_p2(s, g, p, o);
        CHECK(ex.log.size() == 81);
        for (const auto& row : ex.log) CHECK_FALSE(better(row, ex.best_row));
        o.method = P2Method::greedy;
        const P2Result gr = solve_p2(s, g, p, o);
        CHECK_FALSE(better(gr.best_row, ex.best_row));
        CHECK(gr.log.size() < ex.log.size());
        o.method = P2Method::exhaustive;
        o.allow_fd = true;
        CHECK(solve_p2(s, g, p, o).log.size() == 256);
    }

    TEST_CASE("exhaustive search refuses oversized networks") {
        const Scenario s = make(15);
        const EstimateVariances g = estimate_variances(s);
        CHECK_THROWS_AS(solve_p2(s, g, default_power_model(s), {}), InvalidConfig);
    }
}
