// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cffd {

/// Second-order cone in Gram form over variables (z, t):
///   z'Gz + 2h'z + beta <= (c'z + d + e t)^2,  c'z + d + e t >= 0.
/// With G = A'A, h = A'b, beta = b'b this is ||Az + b|| <= c'z + d + e t.
struct GramCone {
    Eigen::MatrixXd G;
    Eigen::VectorXd h;
    double beta = 0.0;
    Eigen::VectorXd c;
    double d = 0.0;
    double e = 0.0;
};

/// minimize t  subject to every cone and lo < z < hi.
struct SlackProblem {
    std::vector<GramCone> cones;
    Eigen::VectorXd lo, hi;
    Eigen::VectorXd z0;  // strictly inside the box and every cone with e == 0
};

enum class SlackStatus {
    negative,      // found (z, t) with t < 0
    positive,      // certified optimum t* > 0
    inconclusive,  // neither decided before the barrier weight cap
};

struct SlackResult {
    SlackStatus status = SlackStatus::inconclusive;
    Eigen::VectorXd z;
    double t = 0.0;
    double lower_bound = 0.0;  // t - barrier gap at the last centered point
    int newton_steps = 0;
};

struct SlackOptions {
    double s0 = 1.0;
    double s_growth = 8.0;
    double s_max = 1e12;
    int max_newton = 60;
    double newton_tol = 1e-10;
};

/// Dense log-barrier path following. Stops as soon as t < 0 or the gap bound
/// proves t* > 0.
SlackResult solve_slack(const SlackProblem& problem, const SlackOptions& opts = {});

}  // namespace cffd
