// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "cffd/errors.hpp"
#include "cffd/estimation.hpp"

using namespace cffd;

namespace {

Scenario small(int tau = 4) {
    ScenarioConfig c;
    c.num_aps = 4;
    c.tx_antennas = c.rx_antennas = 2;
    c.pilot_symbols = tau;
    return build_scenario(c);
}

}  // namespace

TEST_SUITE("estimation") {
    TEST_CASE("pilots are orthonormal and disjoint across directions") {
        const PilotBook p = assign_pilots(2, 3, 6);
        Eigen::MatrixXcd all(6, 5);
        all << p.phi_dl, p.phi_ul;
        const Eigen::MatrixXcd gram = all.adjoint() * all;
        CHECK((gram - Eigen::MatrixXcd::Identity(5, 5)).norm() < 1e-12);
        CHECK_THROWS_AS(assign_pilots(2, 3, 4), InsufficientPilots);
    }

    TEST_CASE("MMSE variance formulas") {
        const Scenario s = small();
        const EstimateVariances v = estimate_variances(s);
        const double tp = s.config.pilot_symbols * s.config.pilot_power_w;
        for (int m = 0; m < s.M(); ++m)
            for (int k = 0; k < s.K(); ++k) {
                const double z = s.zeta_f(m, k);
                CHECK(v.gamma_dl(m, k) == doctest::Approx(tp * z * z / (tp * z + s.noise_w)).epsilon(1e-12));
                CHECK(v.gamma_dl(m, k) < z);
                CHECK(1.0 - v.gamma_dl(m, k) / z ==
                      doctest::Approx(normalized_mse_analytic(z, s.config.pilot_power_w, 4, s.noise_w)));
            }
    }

    TEST_CASE("noiseless observations give exact estimates up to MMSE scaling") {
        ScenarioConfig c;
        c.num_aps = 2;
        c.tx_antennas = c.rx_antennas = 2;
        c.noise_figure_db = -200.0;  // vanishing noise
        const Scenario s = build_scenario(c);
        const auto r = draw_channels(s, 9);
        const PilotBook p = assign_pilots(2, 2, 4);
        const auto est = mmse_estimate(pilot_observations(r, p, s, 10), p, s);
        for (int m = 0; m < 2; ++m)
            for (int k = 0; k < 2; ++k) CHECK((est.f(m, k) - r.f(m, k)).norm() < 1e-6 * r.f(m, k).norm());
    }

    TEST_CASE("empirical statistics agree with the analytic moments") {
        const Scenario s = small();
        const EstimationStats st = estimation_statistics(s, 3000, 17);
        const EstimateVariances v = estimate_variances(s);
        for (int m = 0; m < s.M(); ++m)
            for (int k = 0; k < s.K(); ++k) {
                CHECK(st.dl_hat2(m, k) / st.samples_dl() == doctest::Approx(v.gamma_dl(m, k)).epsilon(0.08));
                CHECK(st.dl_true2(m, k) / st.samples_dl() == doctest::Approx(s.zeta_f(m, k)).epsilon(0.08));
            }
        const NmsePair emp = st.pooled_nmse(), ana = pooled_nmse_analytic(s);
        CHECK(emp.dl == doctest::Approx(ana.dl).epsilon(0.05));
        CHECK(emp.ul == doctest::Approx(ana.ul).epsilon(0.05));
    }

    TEST_CASE("parallel and serial reductions are bit-identical") {
        const Scenario s = small();
        const auto a = estimation_statistics(s, 300, 4, ExecPolicy::serial);
        const auto b = estimation_statistics(s, 300, 4, ExecPolicy::parallel);
        CHECK(a.blocks == b.blocks);
        // Chunked merge changes summation order, so compare to rounding.
        CHECK((a.dl_err2 - b.dl_err2).norm() <= 1e-12 * a.dl_err2.norm());
        CHECK((a.ul_hat2 - b.ul_hat2).norm() <= 1e-12 * a.ul_hat2.norm());
        const auto c = estimation_statistics(s, 300, 4, ExecPolicy::parallel);
        CHECK(b.dl_err2 == c.dl_err2);
    }

    TEST_CASE("pooled empirical NMSE from explicit realizations") {
        const Scenario s = small();
        const PilotBook p = assign_pilots(2, 2, 4);
        std::vector<ChannelEstimates> est;
        std::vector<ChannelRealization> real;
        for (int b = 0; b < 200; ++b) {
            real.push_back(draw_channels(s, block_channel_seed(5, b)));
            est.push_back(mmse_estimate(pilot_observations(real.back(), p, s, block_noise_seed(5, b)), p, s));
        }
        const NmsePair e = normalized_mse_empirical(est, real), a = pooled_nmse_analytic(s);
        CHECK(e.dl == doctest::Approx(a.dl).epsilon(0.15));
        CHECK(e.ul == doctest::Approx(a.ul).epsilon(0.15));
        CHECK_THROWS(normalized_mse_empirical({}, {}));
    }

    TEST_CASE("longer pilots lower the analytic NMSE") {
        CHECK(pooled_nmse_analytic(small(30)).ul < pooled_nmse_analytic(small(5)).ul);
    }
}
