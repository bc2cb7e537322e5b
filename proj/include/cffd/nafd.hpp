// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cffd/estimation.hpp"
#include "cffd/scenario.hpp"

namespace cffd {

/// Per-AP duplex modes and the continuous variables of one NAFD operating point.
struct ModeAssignment {
    Eigen::VectorXi a;         // M, DL flags
    Eigen::VectorXi b;         // M, UL flags
    Eigen::MatrixXd mu;        // M x K
    Eigen::VectorXd varsigma;  // L
    Eigen::MatrixXd alpha;     // M x L LSFD weights

    int M() const { return static_cast<int>(a.size()); }
};

enum class ApMode : int { off = 0, dl = 1, ul = 2, fd = 3 };

/// Modes packed as one base-3 (or base-4 with fd) digit per AP, AP 0 least significant.
ModeAssignment assignment_from_modes(const std::vector<ApMode>& modes, int K, int L);
std::vector<ApMode> modes_from_index(std::uint64_t index, int M, int n_modes);
std::uint32_t mask_of(const Eigen::VectorXi& flags);

/// Checks binary flags, the duplex rule, the per-AP budget sum_k Nt gamma mu^2 <= a_m,
/// varsigma in [0, 1] and |alpha| <= 1. Returns the violations (empty when valid).
std::vector<std::string> check_assignment(const ModeAssignment& x, const Scenario& scenario,
                                          const EstimateVariances& gammas, bool allow_fd, double tol = 1e-9);

/// AP-AP large-scale gains seen by NAFD: path gain between distinct APs, theta_si on the diagonal.
Eigen::MatrixXd nafd_inter_ap_gain(const Scenario& scenario);

enum class NafdCheck { strict, permissive };

Eigen::VectorXd nafd_dl_sinr(const Scenario& scenario, const EstimateVariances& gammas, const ModeAssignment& x);
Eigen::VectorXd nafd_ul_sinr(const Scenario& scenario, const EstimateVariances& gammas, const ModeAssignment& x);

Eigen::VectorXd nafd_dl_se(const Scenario& scenario, const EstimateVariances& gammas, const ModeAssignment& x,
                           NafdCheck check = NafdCheck::strict, bool allow_fd = false);
Eigen::VectorXd nafd_ul_se(const Scenario& scenario, const EstimateVariances& gammas, const ModeAssignment& x,
                           NafdCheck check = NafdCheck::strict, bool allow_fd = false);

/// UL SINR of user l as (c'alpha)^2 / (alpha' diag(D) alpha).
struct LsfdTerms {
    Eigen::VectorXd c;  // M
    Eigen::VectorXd D;  // M
};

LsfdTerms lsfd_terms(const Scenario& scenario, const EstimateVariances& gammas, const ModeAssignment& x, int l);
double lsfd_sinr(const LsfdTerms& t, const Eigen::VectorXd& alpha);

/// alpha_ml proportional to c_ml / D_ml, scaled so max_m |alpha_ml| = 1; M x L.
Eigen::MatrixXd optimal_lsfd(const Scenario& scenario, const EstimateVariances& gammas, const Eigen::VectorXi& a,
                             const Eigen::VectorXi& b, const Eigen::MatrixXd& mu, const Eigen::VectorXd& varsigma);

enum class FronthaulGate {
    as_printed,  // R_m = B (a_m sum UL SE + b_m sum DL SE)
    natural,     // R_m = B (a_m sum DL SE + b_m sum UL SE)
};

struct PowerModelParams {
    Eigen::VectorXd zeta_amp;  // M AP amplifier efficiencies
    double chi = 0.3;          // UE amplifier efficiency
    double P_cdl = 0.2;        // W per DL antenna
    double P_cul = 0.2;        // W per UL antenna
    double P_fdl = 0.825;      // W fixed fronthaul, DL mode
    double P_ful = 0.825;      // W fixed fronthaul, UL mode
    double P_bt = 0.25e-9;     // W per bit/s of fronthaul traffic
    double P_U_fixed = 0.4;    // W, all UEs together
    double B = 50e6;           // Hz
    double sigma_n2 = 0.0;     // W
    FronthaulGate gate = FronthaulGate::as_printed;

    void validate() const;
};

/// Defaults with zeta_amp = 0.4 per AP, B and sigma_n2 taken from the scenario.
PowerModelParams default_power_model(const Scenario& scenario);

Eigen::VectorXd fronthaul_rate(const ModeAssignment& x, const Eigen::VectorXd& dl_se, const Eigen::VectorXd& ul_se,
                               double B, FronthaulGate gate = FronthaulGate::as_printed);

struct NafdPerformance {
    Eigen::VectorXd dl_se, ul_se;
    double sum_se = 0.0;
    double p_total = 0.0;
    double ee = 0.0;  // bit/J
};

double total_power(const ModeAssignment& x, const Scenario& scenario, const EstimateVariances& gammas,
                   const Eigen::VectorXd& dl_se, const Eigen::VectorXd& ul_se, const PowerModelParams& params);

double energy_efficiency(const ModeAssignment& x, const Scenario& scenario, const EstimateVariances& gammas,
                         const PowerModelParams& params);

NafdPerformance evaluate_nafd(const ModeAssignment& x, const Scenario& scenario, const EstimateVariances& gammas,
                              const PowerModelParams& params);

struct QosTargets {
    double dl = 0.0;  // bit/s/Hz per DL user
    double ul = 0.0;  // bit/s/Hz per UL user
};

enum class P2Method { exhaustive, greedy };

struct P2Options {
    QosTargets qos;
    P2Method method = P2Method::exhaustive;
    bool allow_fd = false;
    int rounds = 3;
};

struct CandidateRow {
    std::uint32_t a_mask = 0;
    std::uint32_t b_mask = 0;
    bool feasible = false;
    double ee = 0.0;
    double sum_se = 0.0;
    double p_total = 0.0;
    double shortfall = 0.0;  // total QoS deficit
};

struct P2Result {
    bool feasible = false;
    ModeAssignment best;  // best feasible, or least-violating when infeasible
    NafdPerformance perf;
    CandidateRow best_row;
    std::vector<CandidateRow> log;  // every evaluated candidate, in evaluation order
};

/// Inner optimization for fixed modes: full-power uniform mu, varsigma = 1, then
/// `rounds` passes of per-user grid line searches with the optimal LSFD.
ModeAssignment optimize_inner(const Scenario& scenario, const EstimateVariances& gammas, const Eigen::VectorXi& a,
                              const Eigen::VectorXi& b, const PowerModelParams& params, const QosTargets& qos,
                              int rounds = 3);

CandidateRow candidate_row(const ModeAssignment& x, const NafdPerformance& perf, const QosTargets& qos);

/// True when `x` ranks strictly above `y`: feasible first, then EE; infeasible ones by least shortfall.
bool better(const CandidateRow& x, const CandidateRow& y);

P2Result solve_p2(const Scenario& scenario, const EstimateVariances& gammas, const PowerModelParams& params,
                  const P2Options& opts);

}  // namespace cffd
