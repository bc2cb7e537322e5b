// SPDX-License-Identifier: Apache-2.0
#include "cffd/scenario.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <string>

#include "cffd/errors.hpp"
#include "cffd/format.hpp"
#include "cffd/rng.hpp"

namespace cffd {

namespace {

// Stream tags for the geometry draws.
enum : std::uint64_t {
    kTagApJitter = 1,
    kTagDlPos = 2,
    kTagUlPos = 3,
    kTagShadowF = 4,
    kTagShadowG = 5,
    kTagShadowH = 6,
    kTagShadowQ = 7,
};

void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidConfig(what);
}

double large_scale_gain(double d, const ScenarioConfig& cfg, double shadow_db) {
    const double pl = path_loss_db(std::max(d, kMinDistanceM), cfg.carrier_ghz);
    return db_to_linear(-(pl + shadow_db));
}

}  // namespace

void ScenarioConfig::validate() const {
    require(num_aps >= 1, "M must be >= 1");
    require(tx_antennas >= 1 && rx_antennas >= 1, "Nt and Nr must be >= 1");
    require(num_dl_users >= 0 && num_ul_users >= 0, "K and L must be >= 0");
    require(pilot_symbols >= num_dl_users + num_ul_users,
            "tau_p must be >= K + L for orthogonal pilots");
    require(pilot_symbols > 0 && pilot_symbols < coherence_symbols, "need 0 < tau_p < tau_c");
    require(area_side_m > 0.0, "area_side must be > 0");
    require(carrier_ghz > 0.0, "fc must be > 0");
    require(bandwidth_hz > 0.0, "bandwidth must be > 0");
    require(shadow_sigma_db >= 0.0, "shadow_sigma must be >= 0");
    require(pilot_power_w > 0.0 && dl_power_w > 0.0 && ul_power_w > 0.0, "powers must be > 0");
    require(theta_si > 0.0 && theta_si <= 1.0, "theta_si must lie in (0, 1]");
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double w_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

double noise_power_w(double bandwidth_hz, double noise_figure_db) {
    if (!(bandwidth_hz > 0.0)) throw InvalidConfig("bandwidth must be > 0");
    return dbm_to_w(-174.0 + 10.0 * std::log10(bandwidth_hz) + noise_figure_db);
}

double path_loss_db(double distance_m, double carrier_ghz) {
    if (!(distance_m > 0.0)) throw InvalidGeometry("distance must be > 0");
    return 36.7 * std::log10(distance_m) + 22.7 + 26.0 * std::log10(carrier_ghz);
}

std::vector<Point> place_aps(int num_aps, double area_side_m, std::uint64_t seed) {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(num_aps));
    const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(num_aps))));
    if (root * root == num_aps) {
        const double cell = area_side_m / root;
        for (int i = 0; i < root; ++i)
            for (int j = 0; j < root; ++j) out.push_back({(i + 0.5) * cell, (j + 0.5) * cell});
        return out;
    }
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_aps))));
    const int rows = (num_aps + cols - 1) / cols;
    const double cw = area_side_m / cols;
    const double ch = area_side_m / rows;
    SplitMix64 eng(stream_key(seed, kTagApJitter));
    std::uniform_real_distribution<double> jitter(-0.25, 0.25);
    for (int n = 0; n < num_aps; ++n) {
        const int c = n % cols;
        const int r = n / cols;
        const double jx = jitter(eng);
        const double jy = jitter(eng);
        out.push_back({(c + 0.5 + jx) * cw, (r + 0.5 + jy) * ch});
    }
    return out;
}

Scenario build_scenario(const ScenarioConfig& config) {
    config.validate();
    Scenario s;
    s.config = config;
    const int M = config.num_aps;
    const int K = config.num_dl_users;
    const int L = config.num_ul_users;
    const double side = config.area_side_m;

    s.ap_positions = place_aps(M, side, config.rng_seed);

    auto drop_users = [&](int n, std::uint64_t tag) {
        SplitMix64 eng(stream_key(config.rng_seed, tag));
        std::uniform_real_distribution<double> u(0.0, side);
        std::vector<Point> pts;
        for (int i = 0; i < n; ++i) {
            const double x = u(eng);
            const double y = u(eng);
            pts.push_back({x, y});
        }
        return pts;
    };
    s.dl_positions = drop_users(K, kTagDlPos);
    s.ul_positions = drop_users(L, kTagUlPos);

    auto shadow = [&](std::uint64_t tag, int i, int j) {
        SplitMix64 eng(stream_key(config.rng_seed, tag, static_cast<std::uint64_t>(i),
                                  static_cast<std::uint64_t>(j)));
        std::normal_distribution<double> n(0.0, config.shadow_sigma_db);
        return config.shadow_sigma_db > 0.0 ? n(eng) : 0.0;
    };

    s.zeta_f.resize(M, K);
    s.zeta_g.resize(M, L);
    s.zeta_h.resize(K, L);
    s.zeta_q.resize(M, M);
    s.ap_gain.resize(M, M);
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k)
            s.zeta_f(m, k) = large_scale_gain(distance(s.ap_positions[m], s.dl_positions[k]),
                                              config, shadow(kTagShadowF, m, k));
        for (int l = 0; l < L; ++l)
            s.zeta_g(m, l) = large_scale_gain(distance(s.ap_positions[m], s.ul_positions[l]),
                                              config, shadow(kTagShadowG, m, l));
    }
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < L; ++l)
            s.zeta_h(k, l) = large_scale_gain(distance(s.dl_positions[k], s.ul_positions[l]),
                                              config, shadow(kTagShadowH, k, l));
    for (int m = 0; m < M; ++m) {
        s.ap_gain(m, m) = 0.0;
        s.zeta_q(m, m) = config.theta_si;
        for (int n = m + 1; n < M; ++n) {
            const double gain = large_scale_gain(distance(s.ap_positions[m], s.ap_positions[n]),
                                                 config, shadow(kTagShadowQ, m, n));
            s.ap_gain(m, n) = s.ap_gain(n, m) = gain;
            s.zeta_q(m, n) = s.zeta_q(n, m) = config.theta_si * gain;
        }
    }
    s.noise_w = noise_power_w(config.bandwidth_hz, config.noise_figure_db);
    return s;
}

void validate(const Scenario& s) {
    s.config.validate();
    const auto M = s.M(), K = s.K(), L = s.L();
    auto dims = [](const Eigen::MatrixXd& x, int r, int c) { return x.rows() == r && x.cols() == c; };
    if (!dims(s.zeta_f, M, K) || !dims(s.zeta_g, M, L) || !dims(s.zeta_h, K, L) ||
        !dims(s.zeta_q, M, M))
        throw InvalidConfig("large-scale map dimensions do not match the config");
    auto nonneg = [](const Eigen::MatrixXd& x) { return x.allFinite() && (x.array() >= 0.0).all(); };
    if (!nonneg(s.zeta_f) || !nonneg(s.zeta_g) || !nonneg(s.zeta_h) || !nonneg(s.zeta_q))
        throw InvalidConfig("large-scale coefficients must be finite and non-negative");
    if (!(s.noise_w > 0.0)) throw InvalidConfig("noise power must be > 0");
}

void write_scenario_csv(std::ostream& os, const Scenario& s) {
    os << "link_class,m,k,distance_m,zeta_linear\n";
    auto row = [&](const char* cls, int a, int b, double d, double z) {
        os << cls << ',' << a << ',' << b << ',' << format_double(d) << ',' << format_double(z)
           << '\n';
    };
    for (int m = 0; m < s.M(); ++m)
        for (int k = 0; k < s.K(); ++k)
            row("ap_dl", m, k, distance(s.ap_positions[m], s.dl_positions[k]), s.zeta_f(m, k));
    for (int m = 0; m < s.M(); ++m)
        for (int l = 0; l < s.L(); ++l)
            row("ap_ul", m, l, distance(s.ap_positions[m], s.ul_positions[l]), s.zeta_g(m, l));
    for (int k = 0; k < s.K(); ++k)
        for (int l = 0; l < s.L(); ++l)
            row("ul_dl", k, l, distance(s.dl_positions[k], s.ul_positions[l]), s.zeta_h(k, l));
    for (int m = 0; m < s.M(); ++m)
        for (int n = 0; n < s.M(); ++n)
            row("ap_ap", m, n, distance(s.ap_positions[m], s.ap_positions[n]), s.zeta_q(m, n));
}

}  // namespace cffd
