// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cffd/estimation.hpp"
#include "cffd/parallel.hpp"
#include "cffd/scenario.hpp"

namespace cffd {

/// eta: M x K DL coefficients, varsigma: L UL coefficients in [0, 1].
struct PowerAllocation {
    Eigen::MatrixXd eta;
    Eigen::VectorXd varsigma;
};

enum class EqualPowerRule {
    full_budget,  // eta_mk = 1 / (Nt sum_k' gamma_mk'), every AP at its budget
    one_over_k,   // eta_mk = 1 / K as literally stated; may break the per-AP budget
};

/// varsigma = 1 for every UL user.
PowerAllocation equal_power_allocation(const Scenario& scenario, const Eigen::MatrixXd& gamma_dl,
                                       EqualPowerRule rule = EqualPowerRule::full_budget);

/// Per-constraint slack: 1 - Nt sum_k eta_mk gamma_mk per AP, and varsigma_l, 1 - varsigma_l per UE.
/// Negative values are violations.
struct AllocationSlack {
    Eigen::VectorXd ap;        // M
    Eigen::VectorXd ue_lower;  // L
    Eigen::VectorXd ue_upper;  // L
    double eta_min = 0.0;      // smallest eta entry (must be >= 0)
    bool valid(double tol = 1e-9) const;
};

AllocationSlack allocation_slack(const PowerAllocation& alloc, const Scenario& scenario,
                                 const Eigen::MatrixXd& gamma_dl);

enum class DuplexMode { full, half };

/// `exact` carries the Nr combining gain on the inter-AP and noise terms of the
/// UL denominator (what the signal model yields); `unscaled` omits it.
enum class UlSinrForm { exact, unscaled };

enum class CheckMode { strict, permissive };

struct LinkOptions {
    DuplexMode duplex = DuplexMode::full;
    UlSinrForm ul_form = UlSinrForm::exact;
    CheckMode check = CheckMode::strict;
};

/// Term columns of LinkTerms::dl / ::ul.
enum TermIndex : int {
    kTermDesired = 0,    // |DS|^2
    kTermBeamUnc = 1,    // beamforming / combining gain uncertainty
    kTermMultiUser = 2,  // other users of the same direction
    kTermCross = 3,      // DL: UL-to-DL interference; UL: residual inter-AP interference
    kTermNoise = 4,
    kNumTerms = 5,
};

const char* term_name(bool downlink, int term);

/// Per-user expected powers of each SINR term.
struct LinkTerms {
    Eigen::MatrixXd dl;  // K x kNumTerms
    Eigen::MatrixXd ul;  // L x kNumTerms
    std::vector<std::string> warnings;

    Eigen::VectorXd sinr_dl() const;
    Eigen::VectorXd sinr_ul() const;
};

/// Closed-form expectations of every term. Strict mode throws ConstraintViolation
/// when `alloc` breaks a constraint; permissive mode records a warning instead.
LinkTerms closed_form_terms(const Scenario& scenario, const EstimateVariances& gammas,
                            const PowerAllocation& alloc, const LinkOptions& opts = {});

Eigen::VectorXd dl_sinr_closed_form(const Scenario& scenario, const EstimateVariances& gammas,
                                    const PowerAllocation& alloc, const LinkOptions& opts = {});
Eigen::VectorXd ul_sinr_closed_form(const Scenario& scenario, const EstimateVariances& gammas,
                                    const PowerAllocation& alloc, const LinkOptions& opts = {});

/// Sample estimates of each term over fresh channels, pilot noise and data noise.
///
/// Desired terms are estimated through the real part of the mean amplitude
/// (`*_amp`), the uncertainty terms through the variance of the amplitude using
/// disjoint block pairs, the others as plain sample means.
struct MonteCarloTerms {
    LinkTerms mean;
    LinkTerms se;
    Eigen::VectorXd dl_amp, dl_amp_se;  // K
    Eigen::VectorXd ul_amp, ul_amp_se;  // L
    std::int64_t blocks = 0;
};

/// n_blocks is rounded up to an even count.
MonteCarloTerms monte_carlo_terms(const Scenario& scenario, const PowerAllocation& alloc,
                                  std::int64_t n_blocks, std::uint64_t seed,
                                  DuplexMode duplex = DuplexMode::full,
                                  ExecPolicy policy = ExecPolicy::parallel);

struct TermMismatch {
    bool downlink = true;
    int user = 0;
    int term = 0;
    double closed = 0.0;
    double estimate = 0.0;
    double se = 0.0;
};

struct TermComparison {
    int checked = 0;
    double max_z = 0.0;
    std::vector<TermMismatch> mismatches;
    bool ok() const { return mismatches.empty(); }
};

/// Checks |closed - estimate| <= n_se * se for every term of every user
/// (desired terms compared in amplitude).
TermComparison compare_terms(const LinkTerms& closed, const MonteCarloTerms& mc, double n_se = 3.0);

struct SeReport {
    Eigen::VectorXd dl_se, ul_se;
    Eigen::VectorXd sinr_dl, sinr_ul;
    double sum_se = 0.0;
    double prelog = 0.0;
};

SeReport make_se_report(const Eigen::VectorXd& sinr_dl, const Eigen::VectorXd& sinr_ul, double prelog);

enum class SeMethod { closed_form, monte_carlo };

SeReport se_report(const Scenario& scenario, const EstimateVariances& gammas, const PowerAllocation& alloc,
                   SeMethod method = SeMethod::closed_form, const LinkOptions& opts = {},
                   std::int64_t mc_blocks = 20000, std::uint64_t mc_seed = 1);

/// TDD half-duplex reference: no inter-AP or UL-to-DL terms, each direction
/// gets half of the data symbols.
double hd_baseline_sum_se(const Scenario& scenario, const EstimateVariances& gammas,
                          const PowerAllocation& alloc_dl, const PowerAllocation& alloc_ul,
                          const LinkOptions& opts = {});

}  // namespace cffd
