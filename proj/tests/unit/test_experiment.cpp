// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <sstream>

#include "cffd/experiment.hpp"
#include "cffd/parallel.hpp"

using namespace cffd;

namespace {

ExperimentConfig quick(ExperimentKind kind) {
    ExperimentConfig c = preset_config(kind);
    c.scenario.num_aps = 4;
    c.n_drops = 2;
    c.n_blocks = 40;
    return c;
}

std::vector<std::string> columns_of(ExperimentKind kind, const std::string& key, std::vector<double> values) {
    ExperimentConfig c = quick(kind);
    c.sweep_key = key;
    c.sweep_values = std::move(values);
    return run_experiment(c).columns;
}

}  // namespace

TEST_SUITE("experiment") {
    TEST_CASE("CSV round-trips columns, rows and metadata") {
        ResultTable t;
        t.columns = {"x", "y"};
        t.add_row({1.0, 0.1});
        t.add_row({2.0, 1e-300});
        t.metadata = {{"seed", "7"}, {"config", "[scenario]"}, {"config", "M = 4"}};
        std::istringstream in(t.to_csv());
        const ResultTable back = ResultTable::read_csv(in);
        CHECK(back.columns == t.columns);
        CHECK(back.rows == t.rows);
        CHECK(back.metadata == t.metadata);
        CHECK(back.meta_all("config").size() == 2);
        CHECK_THROWS(t.add_row({1.0}));
    }

    TEST_CASE("preset schemas are stable") {
        using V = std::vector<std::string>;
        CHECK(columns_of(ExperimentKind::mse_vs_power, "p_t_dbm", {0}) ==
              V{"p_t_dbm", "dl_nmse", "ul_nmse", "dl_nmse_analytic", "ul_nmse_analytic"});
        CHECK(columns_of(ExperimentKind::fd_vs_hd, "theta_si_db", {-40}) ==
              V{"theta_si_db", "dl_se_0", "dl_se_1", "ul_se_0", "ul_se_1", "sum_se", "hd_sum_se", "monte_carlo"});
        CHECK(columns_of(ExperimentKind::nafd_ee, "M", {2}) ==
              V{"M", "ee_nafd", "sum_se_nafd", "p_total_nafd", "feasible_fraction", "ee_all_fd", "ee_half_half"});
    }

    TEST_CASE("default sweeps cover the documented ranges") {
        const auto [key, v] = default_sweep(ExperimentKind::fd_vs_hd);
        CHECK(key == "theta_si_db");
        CHECK(v.front() == -80.0);
        CHECK(v.back() == -10.0);
        CHECK(v.size() == 8);
        CHECK(default_sweep(ExperimentKind::mse_vs_tau).second.front() == 4.0);
        CHECK(default_sweep(ExperimentKind::mse_vs_power).second.size() == 9);
    }

    TEST_CASE("NMSE decreases with pilot power") {
        ExperimentConfig c = quick(ExperimentKind::mse_vs_power);
        const ResultTable t = run_experiment(c);
        REQUIRE(t.rows.size() == 9);
        for (std::size_t i = 1; i < t.rows.size(); ++i) {
            CHECK(t.rows[i][1] < t.rows[i - 1][1]);
            CHECK(t.rows[i][2] < t.rows[i - 1][2]);
        }
    }

    TEST_CASE("metadata reconstructs the configuration") {
        ExperimentConfig c = quick(ExperimentKind::mse_vs_tau);
        c.sweep_key = "tau_p";
        c.sweep_values = {4, 8};
        const ResultTable t = run_experiment(c);
        CHECK(t.meta("seed") == "1");
        CHECK(t.meta("version") == kVersion);
        CHECK(t.meta("config_hash") == fnv1a_hex(echo_config(c)));
        const ExperimentConfig back = config_from_metadata(t);
        CHECK(echo_config(back) == echo_config(c));
    }

    TEST_CASE("repeated runs give identical bytes for any thread count") {
        ExperimentConfig c = quick(ExperimentKind::fd_vs_hd);
        c.sweep_key = "theta_si_db";
        c.sweep_values = {-70, -20};
        set_thread_count(1);
        const std::string one = run_experiment(c).to_csv();
        set_thread_count(3);
        const std::string three = run_experiment(c).to_csv();
        CHECK(one == three);
        CHECK(run_experiment(c).to_csv() == three);
    }

    TEST_CASE("drop seeds are distinct and stable") {
        CHECK(drop_seed(1, 0) != drop_seed(1, 1));
        CHECK(drop_seed(1, 0) != drop_seed(2, 0));
        CHECK(drop_seed(5, 3) == drop_seed(5, 3));
    }

    TEST_CASE("unwritable output is an I/O error") {
        ResultTable t;
        t.columns = {"x"};
        CHECK_THROWS_AS(write_table(t, "/nonexistent-dir/out.csv"), std::runtime_error);
    }

    TEST_CASE("single-drop solvers produce logs and allocations") {
        ExperimentConfig c = quick(ExperimentKind::custom);
        const auto [log, alloc] = run_power_control(c);
        CHECK(log.columns.size() == 4);
        CHECK_FALSE(log.rows.empty());
        CHECK_FALSE(log.meta("lambda_star").empty());
        CHECK(alloc.rows.size() == static_cast<std::size_t>(4 * 2 + 2));
        ExperimentConfig n = quick(ExperimentKind::nafd_ee);
        n.qos_dl = n.qos_ul = 0.1;
        const ResultTable cand = run_nafd_candidates(n);
        CHECK(cand.rows.size() == 81 + 1);
        CHECK(cand.rows.back()[0] == 1.0);
    }
}
