// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "cffd/socp.hpp"

using namespace cffd;

namespace {

// ||z - center|| <= 1 + t
GramCone ball(double x, double y) {
    GramCone c;
    c.G = Eigen::Matrix2d::Identity();
    c.h = -Eigen::Vector2d(x, y);
    c.beta = x * x + y * y;
    c.c = Eigen::Vector2d::Zero();
    c.d = 1.0;
    c.e = 1.0;
    return c;
}

SlackProblem two_balls(double gap) {
    SlackProblem p;
    p.cones = {ball(0.0, 0.0), ball(gap, 0.0)};
    p.lo = Eigen::Vector2d::Constant(-10.0);
    p.hi = Eigen::Vector2d::Constant(10.0);
    p.z0 = Eigen::Vector2d(3.0, 3.0);
    return p;
}

double residual(const GramCone& c, const Eigen::VectorXd& z, double t) {
    const double lhs = std::sqrt(std::max(0.0, z.dot(c.G * z) + 2.0 * c.h.dot(z) + c.beta));
    return lhs - (c.c.dot(z) + c.d + c.e * t);
}

}  // namespace

TEST_SUITE("socp") {
    TEST_CASE("overlapping balls give a negative slack with a valid point") {
        const SlackProblem p = two_balls(1.0);
        const SlackResult r = solve_slack(p);
        REQUIRE(r.status == SlackStatus::negative);
        CHECK(r.t < 0.0);
        for (const auto& c : p.cones) CHECK(residual(c, r.z, r.t) <= 1e-9);
    }

    TEST_CASE("disjoint balls are certified positive with a sound lower bound") {
        const SlackResult r = solve_slack(two_balls(4.0));
        REQUIRE(r.status == SlackStatus::positive);
        CHECK(r.lower_bound > 0.0);
        // exact optimum t* = 1 lies between the certified bound and the iterate
        CHECK(r.lower_bound <= 1.0 + 1e-9);
        CHECK(r.t >= 1.0 - 1e-9);
    }

    TEST_CASE("touching balls sit on the boundary and stay undecided or barely negative") {
        const SlackResult r = solve_slack(two_balls(2.0));
        CHECK(r.status != SlackStatus::positive);
    }

    TEST_CASE("box bounds are honoured") {
        SlackProblem p = two_balls(1.0);
        p.lo = Eigen::Vector2d(5.0, -1.0);  // keeps z away from both balls
        p.hi = Eigen::Vector2d(6.0, 1.0);
        p.z0 = Eigen::Vector2d(5.5, 0.0);
        const SlackResult r = solve_slack(p);
        REQUIRE(r.status == SlackStatus::positive);
        CHECK(r.z(0) >= 5.0);
        CHECK(r.lower_bound <= 4.0 + 1e-9);
        CHECK(r.t >= 4.0 - 1e-9);
    }
}
