// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace cffd {

/// Static network description. Powers are linear (W), theta_si is linear.
struct ScenarioConfig {
    int num_aps = 16;           // M
    int tx_antennas = 4;        // Nt
    int rx_antennas = 4;        // Nr
    int num_dl_users = 2;       // K
    int num_ul_users = 2;       // L
    double area_side_m = 400.0;
    double carrier_ghz = 3.0;
    double bandwidth_hz = 10e6;
    double noise_figure_db = 10.0;
    double shadow_sigma_db = 4.0;
    int coherence_symbols = 200;  // tau_c
    int pilot_symbols = 4;        // tau_p
    double pilot_power_w = 0.1;   // p_t
    double dl_power_w = 0.2;      // p_d, per AP
    double ul_power_w = 0.1;      // p_u, per UE
    double theta_si = 1e-7;       // residual SI after suppression
    std::uint64_t rng_seed = 1;

    /// Throws InvalidConfig naming the first violated invariant.
    void validate() const;
};

/// Any AP-UE, AP-AP or UE-UE distance is clamped to at least this value.
inline constexpr double kMinDistanceM = 1.0;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point& a, const Point& b);

/// Large-scale state of one network drop. Immutable after build_scenario.
struct Scenario {
    ScenarioConfig config;
    std::vector<Point> ap_positions;
    std::vector<Point> dl_positions;
    std::vector<Point> ul_positions;
    Eigen::MatrixXd zeta_f;   // M x K, AP <-> DL UE
    Eigen::MatrixXd zeta_g;   // M x L, AP <-> UL UE
    Eigen::MatrixXd zeta_h;   // K x L, UL UE -> DL UE
    Eigen::MatrixXd zeta_q;   // M x M, variance of inter-AP channel entries; diag = theta_si
    Eigen::MatrixXd ap_gain;  // M x M, AP <-> AP path gain without SI suppression; diag 0
    double noise_w = 0.0;     // sigma_w^2

    int M() const { return config.num_aps; }
    int K() const { return config.num_dl_users; }
    int L() const { return config.num_ul_users; }
    int Nt() const { return config.tx_antennas; }
    int Nr() const { return config.rx_antennas; }
    double prelog() const {
        return static_cast<double>(config.coherence_symbols - config.pilot_symbols) /
               static_cast<double>(config.coherence_symbols);
    }
};

/// Thermal noise power in W for -174 dBm/Hz, the bandwidth and the noise figure.
double noise_power_w(double bandwidth_hz, double noise_figure_db);

/// UMi NLoS single-slope path loss in dB.
double path_loss_db(double distance_m, double carrier_ghz);

double db_to_linear(double db);
double linear_to_db(double lin);
double dbm_to_w(double dbm);
double w_to_dbm(double w);

/// AP placement: a sqrt(M) x sqrt(M) grid at cell centers when M is a
/// perfect square, otherwise a ceil(sqrt(M))-column grid with each AP
/// jittered by up to a quarter cell (seeded, deterministic).
std::vector<Point> place_aps(int num_aps, double area_side_m, std::uint64_t seed);

Scenario build_scenario(const ScenarioConfig& config);

/// Checks dimensions and positivity of every large-scale map.
void validate(const Scenario& scenario);

/// One row per link: link_class,m,k,distance_m,zeta_linear.
void write_scenario_csv(std::ostream& os, const Scenario& scenario);

}  // namespace cffd
