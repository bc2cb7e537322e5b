// SPDX-License-Identifier: Apache-2.0
#include "cffd/socp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cffd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Barrier {
    const SlackProblem& p;
    int n;

    // Value of s*t + barrier at y = (z, t); +inf outside the domain.
    double value(const Eigen::VectorXd& y, double s) const {
        const auto z = y.head(n);
        const double t = y(n);
        double f = s * t;
        for (int j = 0; j < n; ++j) {
            const double a = z(j) - p.lo(j), b = p.hi(j) - z(j);
            if (!(a > 0.0) || !(b > 0.0)) return kInf;
            f -= std::log(a) + std::log(b);
        }
        for (const auto& c : p.cones) {
            const double u = c.c.dot(z) + c.d + c.e * t;
            const double q = z.dot(c.G * z) + 2.0 * c.h.dot(z) + c.beta;
            const double r = u * u - q;
            if (!(u > 0.0) || !(r > 0.0)) return kInf;
            f -= std::log(r);
        }
        return f;
    }

    void derivatives(const Eigen::VectorXd& y, double s, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
        const auto z = y.head(n);
        const double t = y(n);
        g = Eigen::VectorXd::Zero(n + 1);
        H = Eigen::MatrixXd::Zero(n + 1, n + 1);
        g(n) = s;
        for (int j = 0; j < n; ++j) {
            const double a = z(j) - p.lo(j), b = p.hi(j) - z(j);
            g(j) += -1.0 / a + 1.0 / b;
            H(j, j) += 1.0 / (a * a) + 1.0 / (b * b);
        }
        Eigen::VectorXd grad_u(n + 1), grad_r(n + 1);
        for (const auto& c : p.cones) {
            const Eigen::VectorXd Gz = c.G * z;
            const double u = c.c.dot(z) + c.d + c.e * t;
            const double q = z.dot(Gz) + 2.0 * c.h.dot(z) + c.beta;
            const double r = u * u - q;
            grad_u.head(n) = c.c;
            grad_u(n) = c.e;
            grad_r = 2.0 * u * grad_u;
            grad_r.head(n) -= 2.0 * (Gz + c.h);
            g -= grad_r / r;
            // Hessian of -log r: grad_r grad_r' / r^2 - (2 grad_u grad_u' - 2 [G 0; 0 0]) / r
            H.noalias() += grad_r * grad_r.transpose() / (r * r);
            H.noalias() -= 2.0 * grad_u * grad_u.transpose() / r;
            H.topLeftCorner(n, n) += 2.0 * c.G / r;
        }
    }
};

}  // namespace

SlackResult solve_slack(const SlackProblem& p, const SlackOptions& opts) {
    const int n = static_cast<int>(p.z0.size());
    if (p.lo.size() != n || p.hi.size() != n) throw std::invalid_argument("box dimensions mismatch");
    for (const auto& c : p.cones)
        if (c.G.rows() != n || c.G.cols() != n || c.h.size() != n || c.c.size() != n)
            throw std::invalid_argument("cone dimensions mismatch");

    SlackResult res;
    Eigen::VectorXd y(n + 1);
    y.head(n) = p.z0;

    // Smallest t making every slack-carrying cone strictly feasible at z0, plus margin.
    double t0 = -kInf;
    for (const auto& c : p.cones) {
        const double q = p.z0.dot(c.G * p.z0) + 2.0 * c.h.dot(p.z0) + c.beta;
        const double lhs = std::sqrt(std::max(q, 0.0));
        const double u0 = c.c.dot(p.z0) + c.d;
        if (c.e > 0.0) {
            t0 = std::max(t0, (lhs - u0) / c.e);
        } else if (!(u0 > lhs)) {
            throw std::invalid_argument("z0 is not strictly inside a fixed cone");
        }
    }
    if (t0 == -kInf) {  // no slack cones: the answer is t = -inf
        res.status = SlackStatus::negative;
        res.z = p.z0;
        res.t = -kInf;
        return res;
    }
    y(n) = t0 + std::max(1.0, std::abs(t0));

    const Barrier bar{p, n};
    // Self-concordance parameter: 2 per cone, 2 per boxed coordinate.
    const double nu = 2.0 * static_cast<double>(p.cones.size()) + 2.0 * n;

    auto done_negative = [&] {
        res.status = SlackStatus::negative;
        res.z = y.head(n);
        res.t = y(n);
        return res;
    };

    Eigen::VectorXd g;
    Eigen::MatrixXd H;
    for (double s = opts.s0; s <= opts.s_max; s *= opts.s_growth) {
        double f = bar.value(y, s);
        bool centered = false;
        for (int it = 0; it < opts.max_newton; ++it) {
            bar.derivatives(y, s, g, H);
            const Eigen::VectorXd dy = H.ldlt().solve(-g);
            const double dec2 = -g.dot(dy);
            if (!std::isfinite(dec2) || dec2 < 0.0) break;
            if (0.5 * dec2 < opts.newton_tol) {
                centered = true;
                break;
            }
            double step = 1.0;
            Eigen::VectorXd trial;
            double ft = kInf;
            for (int bt = 0; bt < 60; ++bt) {
                trial = y + step * dy;
                ft = bar.value(trial, s);
                if (ft <= f - 0.25 * step * dec2) break;
                step *= 0.5;
            }
            if (!std::isfinite(ft) || ft > f) break;
            y = trial;
            f = ft;
            ++res.newton_steps;
            if (y(n) < 0.0) return done_negative();
        }
        res.lower_bound = y(n) - nu / s;
        if (y(n) < 0.0) return done_negative();
        // The gap bound only holds at a centered point.
        if (centered && res.lower_bound > 0.0) {
            res.status = SlackStatus::positive;
            res.z = y.head(n);
            res.t = y(n);
            return res;
        }
    }
    res.status = SlackStatus::inconclusive;
    res.z = y.head(n);
    res.t = y(n);
    return res;
}

}  // namespace cffd
