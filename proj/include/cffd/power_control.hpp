// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cffd/cf_fd_link.hpp"
#include "cffd/estimation.hpp"
#include "cffd/scenario.hpp"
#include "cffd/socp.hpp"

namespace cffd {

/// Weighted max-min SINR problem over DL (eta = mu^2) and UL (varsigma = alpha^2).
///
/// The solver works in normalized DL amplitudes x_mk = mu_mk sqrt(Nt gamma_mk),
/// so the per-AP budget reads ||x_m.|| <= 1 and each x_mk lies in [0, 1].
struct MaxMinProblem {
    Scenario scenario;
    EstimateVariances gammas;
    double w_d = 1.0;
    double w_u = 1.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;  // <= lambda_min selects the automatic initialization
    double epsilon = 1e-3;
    int max_iters = 200;
    LinkOptions link;  // duplex mode and UL form used by the cones and the verification

    void validate() const;
};

MaxMinProblem make_maxmin_problem(const Scenario& scenario, double w_d = 1.0, double w_u = 1.0);

enum class FeasibilityStatus { feasible, infeasible, inconclusive };

const char* to_string(FeasibilityStatus s);

struct FeasibilityCertificate {
    FeasibilityStatus status = FeasibilityStatus::inconclusive;
    bool feasible = false;
    Eigen::MatrixXd mu;           // M x K
    Eigen::VectorXd alpha_slack;  // L
    double max_violation = 0.0;   // optimal common slack t (normalized units); > 0 when infeasible
    double min_margin = 0.0;      // min over users of SINR / target - 1 at the returned point
    int newton_steps = 0;

    PowerAllocation allocation() const;
};

/// Per-user targets implied by a common lambda.
double dl_target(const MaxMinProblem& p, double lambda_c);
double ul_target(const MaxMinProblem& p, double lambda_c);

/// Cones of the slack problem for lambda_c; variables are (x row-major m*K + k, alpha).
SlackProblem build_feasibility_problem(const MaxMinProblem& p, double lambda_c);

FeasibilityCertificate feasibility_check(const MaxMinProblem& p, double lambda_c);

/// Largest SINR any single user can reach alone with the whole budget (no interference).
double single_user_bound(const MaxMinProblem& p);

struct BisectionStep {
    int iter = 0;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    double lambda_c = 0.0;
    FeasibilityStatus status = FeasibilityStatus::inconclusive;
};

struct MaxMinResult {
    PowerAllocation alloc;
    double lambda_star = 0.0;
    double lambda_max0 = 0.0;  // initial infeasible bound after doubling
    int doublings = 0;
    int iterations = 0;  // bisection steps
    std::vector<BisectionStep> log;
    Eigen::VectorXd sinr_dl, sinr_ul;
};

/// Bisection on the common target. Throws InfeasibleProblem when no target above
/// lambda_min is feasible.
MaxMinResult solve_p1_maxmin(const MaxMinProblem& p);

/// Scales down every user above its direction target until all sit at the target.
/// Never lowers the minimum weighted SINR.
PowerAllocation trim_to_targets(const MaxMinProblem& p, const PowerAllocation& alloc, double lambda_c,
                                int max_passes = 500);

/// Weighted max-min objective min(min_k SINR_k^(1/w_d), min_l SINR_l^(1/w_u)).
double maxmin_objective(const MaxMinProblem& p, const PowerAllocation& alloc);

/// Normalized amplitudes <-> allocation.
PowerAllocation allocation_from_normalized(const MaxMinProblem& p, const Eigen::MatrixXd& x,
                                           const Eigen::VectorXd& alpha);

struct AllocationReport {
    AllocationSlack slack;
    bool valid = false;
    std::vector<std::string> violations;
};

AllocationReport validate_allocation(const PowerAllocation& alloc, const Scenario& scenario,
                                     const Eigen::MatrixXd& gamma_dl, double tol = 1e-9);

}  // namespace cffd
