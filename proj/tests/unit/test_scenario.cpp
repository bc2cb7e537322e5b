// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cffd/errors.hpp"
#include "cffd/scenario.hpp"

using namespace cffd;

TEST_SUITE("scenario") {
    TEST_CASE("unit conversions round-trip") {
        CHECK(dbm_to_w(30.0) == doctest::Approx(1.0));
        CHECK(dbm_to_w(20.0) == doctest::Approx(0.1));
        CHECK(w_to_dbm(dbm_to_w(-7.5)) == doctest::Approx(-7.5));
        CHECK(db_to_linear(-70.0) == doctest::Approx(1e-7));
        CHECK(linear_to_db(db_to_linear(13.0)) == doctest::Approx(13.0));
    }

    TEST_CASE("noise floor for 10 MHz and 10 dB noise figure") {
        CHECK(w_to_dbm(noise_power_w(10e6, 10.0)) == doctest::Approx(-94.0));
        CHECK_THROWS_AS(noise_power_w(0.0, 10.0), InvalidConfig);
    }

    TEST_CASE("path loss grows with distance and rejects zero distance") {
        CHECK(path_loss_db(100.0, 3.0) > path_loss_db(10.0, 3.0));
        CHECK(path_loss_db(20.0, 3.0) - path_loss_db(10.0, 3.0) == doctest::Approx(36.7 * std::log10(2.0)));
        CHECK_THROWS_AS(path_loss_db(0.0, 3.0), InvalidGeometry);
    }

    TEST_CASE("square AP counts sit on cell centers") {
        const auto pts = place_aps(16, 400.0, 1);
        REQUIRE(pts.size() == 16);
        CHECK(pts[0].x == doctest::Approx(50.0));
        CHECK(pts[0].y == doctest::Approx(50.0));
        CHECK(pts[15].x == doctest::Approx(350.0));
    }

    TEST_CASE("non-square AP counts stay inside the area") {
        for (int m : {2, 3, 5, 6, 7, 8}) {
            const auto pts = place_aps(m, 400.0, 9);
            REQUIRE(static_cast<int>(pts.size()) == m);
            for (const auto& p : pts) {
                CHECK(p.x >= 0.0);
                CHECK(p.x <= 400.0);
                CHECK(p.y >= 0.0);
                CHECK(p.y <= 400.0);
            }
        }
    }

    TEST_CASE("build_scenario fills consistent maps") {
        ScenarioConfig c;
        c.num_aps = 9;
        c.theta_si = 1e-5;
        const Scenario s = build_scenario(c);
        CHECK(s.zeta_f.rows() == 9);
        CHECK(s.zeta_f.cols() == 2);
        CHECK(s.zeta_h.rows() == 2);
        CHECK((s.zeta_f.array() > 0.0).all());
        CHECK((s.zeta_f.array() < 1.0).all());
        for (int m = 0; m < 9; ++m) {
            CHECK(s.zeta_q(m, m) == doctest::Approx(1e-5));
            CHECK(s.ap_gain(m, m) == 0.0);
            for (int n = 0; n < 9; ++n) {
                CHECK(s.zeta_q(m, n) == doctest::Approx(s.zeta_q(n, m)));
                if (m != n) CHECK(s.zeta_q(m, n) == doctest::Approx(1e-5 * s.ap_gain(m, n)));
            }
        }
        CHECK_NOTHROW(validate(s));
        CHECK(s.prelog() == doctest::Approx(196.0 / 200.0));
    }

    TEST_CASE("same seed gives the same drop, other seeds differ") {
        ScenarioConfig c;
        const Scenario a = build_scenario(c), b = build_scenario(c);
        CHECK(a.zeta_f == b.zeta_f);
        CHECK(a.zeta_g == b.zeta_g);
        c.rng_seed = 2;
        CHECK(build_scenario(c).zeta_f != a.zeta_f);
    }

    TEST_CASE("invalid configs are rejected") {
        ScenarioConfig c;
        c.num_aps = 0;
        CHECK_THROWS_AS(build_scenario(c), InvalidConfig);
        c = {};
        c.pilot_symbols = c.coherence_symbols;
        CHECK_THROWS_AS(build_scenario(c), InvalidConfig);
        c = {};
        c.dl_power_w = -1.0;
        CHECK_THROWS_AS(build_scenario(c), InvalidConfig);
    }

    TEST_CASE("scenario csv lists every link") {
        ScenarioConfig c;
        c.num_aps = 4;
        const Scenario s = build_scenario(c);
        std::ostringstream os;
        write_scenario_csv(os, s);
        std::istringstream in(os.str());
        std::string line;
        int n = 0;
        while (std::getline(in, line)) ++n;
        CHECK(n == 1 + 4 * 2 + 4 * 2 + 2 * 2 + 4 * 4);
        CHECK(os.str().rfind("link_class,m,k,distance_m,zeta_linear\n", 0) == 0);
    }
}
