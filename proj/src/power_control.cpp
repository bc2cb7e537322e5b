// SPDX-License-Identifier: Apache-2.0
#include "cffd/power_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cffd/errors.hpp"

namespace cffd {

namespace {

// One stacked vector: entries that are a variable times a coefficient, or constants.
struct Stacked {
    int n;
    Eigen::VectorXd var_coef2;  // sum of squared coefficients per variable
    double const2 = 0.0;

    explicit Stacked(int dim) : n(dim), var_coef2(Eigen::VectorXd::Zero(dim)) {}
    void var(int idx, double coef) { var_coef2(idx) += coef * coef; }
    void constant(double v) { const2 += v * v; }
};

GramCone slack_cone(const Stacked& v, Eigen::VectorXd c) {
    GramCone cone;
    const double cn = c.norm();
    const double scale = cn > 0.0 ? 1.0 / cn : 1.0;
    cone.G = (v.var_coef2 * (scale * scale)).asDiagonal();
    cone.h = Eigen::VectorXd::Zero(v.n);
    cone.beta = v.const2 * scale * scale;
    cone.c = c * scale;
    cone.d = 0.0;
    cone.e = 1.0;
    return cone;
}

int x_index(int m, int k, int K) { return m * K + k; }

}  // namespace

void MaxMinProblem::validate() const {
    cffd::validate(scenario);
    if (!(w_d > 0.0) || !(w_u > 0.0)) throw InvalidConfig("weights must be > 0");
    if (!(epsilon > 0.0)) throw InvalidConfig("epsilon must be > 0");
    if (lambda_min < 0.0) throw InvalidConfig("lambda_min must be >= 0");
    if (max_iters < 1) throw InvalidConfig("max_iters must be >= 1");
    if (gammas.gamma_dl.rows() != scenario.M() || gammas.gamma_dl.cols() != scenario.K() ||
        gammas.gamma_ul.rows() != scenario.M() || gammas.gamma_ul.cols() != scenario.L())
        throw InvalidConfig("gamma dimensions do not match the scenario");
}

MaxMinProblem make_maxmin_problem(const Scenario& s, double w_d, double w_u) {
    MaxMinProblem p;
    p.scenario = s;
    p.gammas = estimate_variances(s);
    p.w_d = w_d;
    p.w_u = w_u;
    return p;
}

const char* to_string(FeasibilityStatus s) {
    switch (s) {
        case FeasibilityStatus::feasible: return "feasible";
        case FeasibilityStatus::infeasible: return "infeasible";
        default: return "inconclusive";
    }
}

PowerAllocation FeasibilityCertificate::allocation() const {
    return {mu.array().square().matrix(), alpha_slack.array().square().matrix()};
}

double dl_target(const MaxMinProblem& p, double lambda_c) { return std::pow(lambda_c, p.w_d); }
double ul_target(const MaxMinProblem& p, double lambda_c) { return std::pow(lambda_c, p.w_u); }

SlackProblem build_feasibility_problem(const MaxMinProblem& p, double lambda_c) {
    const Scenario& s = p.scenario;
    const int M = s.M(), K = s.K(), L = s.L();
    const int n = M * K + L;
    const double Nt = s.Nt(), Nr = s.Nr();
    const double pd = s.config.dl_power_w, pu = s.config.ul_power_w;
    const double sigma = std::sqrt(s.noise_w);
    const bool full = p.link.duplex == DuplexMode::full;
    const bool exact = p.link.ul_form == UlSinrForm::exact;
    const auto& gd = p.gammas.gamma_dl;
    const auto& gu = p.gammas.gamma_ul;
    const double td = dl_target(p, lambda_c), tu = ul_target(p, lambda_c);

    SlackProblem sp;
    sp.lo = Eigen::VectorXd::Zero(n);
    sp.hi = Eigen::VectorXd::Ones(n);
    sp.z0.resize(n);
    for (int i = 0; i < M * K; ++i) sp.z0(i) = 0.5 / std::sqrt(static_cast<double>(K));
    for (int l = 0; l < L; ++l) sp.z0(M * K + l) = 0.5;

    // DL: ||[x_mi sqrt(zeta_f,mk); sqrt(pu/pd) alpha_l sqrt(zeta_h,kl); sigma/sqrt(pd)]||
    //     <= sqrt(Nt / td) sum_m x_mk sqrt(gamma_mk)
    for (int k = 0; k < K; ++k) {
        Stacked v(n);
        for (int m = 0; m < M; ++m)
            for (int i = 0; i < K; ++i) v.var(x_index(m, i, K), std::sqrt(s.zeta_f(m, k)));
        if (full)
            for (int l = 0; l < L; ++l) v.var(M * K + l, std::sqrt(pu / pd * s.zeta_h(k, l)));
        v.constant(sigma / std::sqrt(pd));
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        for (int m = 0; m < M; ++m) c(x_index(m, k, K)) = std::sqrt(Nt / td * gd(m, k));
        sp.cones.push_back(slack_cone(v, c));
    }

    // UL: ||[sqrt(Nr zeta_g,mj gamma_ml) alpha_j; sqrt(pd Nr zeta_Q,mn gamma_ml / pu) x_nk;
    //        sigma sqrt(Nr gamma_ml / pu)]|| <= alpha_l Nr sum_m gamma_ml / sqrt(tu)
    // (the Nr on the last two blocks is dropped for the unscaled form)
    const double rx_gain = exact ? Nr : 1.0;
    for (int l = 0; l < L; ++l) {
        Stacked v(n);
        for (int m = 0; m < M; ++m)
            for (int j = 0; j < L; ++j) v.var(M * K + j, std::sqrt(Nr * s.zeta_g(m, j) * gu(m, l)));
        if (full)
            for (int m = 0; m < M; ++m)
                for (int nn = 0; nn < M; ++nn)
                    for (int k = 0; k < K; ++k)
                        v.var(x_index(nn, k, K), std::sqrt(pd * rx_gain * s.zeta_q(m, nn) * gu(m, l) / pu));
        for (int m = 0; m < M; ++m) v.constant(sigma * std::sqrt(rx_gain * gu(m, l) / pu));
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        c(M * K + l) = Nr * gu.col(l).sum() / std::sqrt(tu);
        sp.cones.push_back(slack_cone(v, c));
    }

    // Per-AP budget ||x_m.|| <= 1.
    for (int m = 0; m < M && K > 0; ++m) {
        GramCone cone;
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
        for (int k = 0; k < K; ++k) diag(x_index(m, k, K)) = 1.0;
        cone.G = diag.asDiagonal();
        cone.h = Eigen::VectorXd::Zero(n);
        cone.c = Eigen::VectorXd::Zero(n);
        cone.d = 1.0;
        cone.e = 0.0;
        sp.cones.push_back(std::move(cone));
    }
    return sp;
}

PowerAllocation allocation_from_normalized(const MaxMinProblem& p, const Eigen::MatrixXd& x,
                                           const Eigen::VectorXd& alpha) {
    const Scenario& s = p.scenario;
    PowerAllocation a;
    a.eta = Eigen::MatrixXd::Zero(s.M(), s.K());
    for (int m = 0; m < s.M(); ++m)
        for (int k = 0; k < s.K(); ++k) {
            const double g = p.gammas.gamma_dl(m, k);
            if (g > 0.0) a.eta(m, k) = x(m, k) * x(m, k) / (s.Nt() * g);
        }
    a.varsigma = alpha.array().square().matrix();
    return a;
}

namespace {

double min_margin(const MaxMinProblem& p, const LinkTerms& t, double lambda_c) {
    const double td = dl_target(p, lambda_c), tu = ul_target(p, lambda_c);
    double m = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd sd = t.sinr_dl(), su = t.sinr_ul();
    for (Eigen::Index k = 0; k < sd.size(); ++k) m = std::min(m, sd(k) / td - 1.0);
    for (Eigen::Index l = 0; l < su.size(); ++l) m = std::min(m, su(l) / tu - 1.0);
    return m;
}

LinkOptions permissive(const LinkOptions& o) {
    LinkOptions r = o;
    r.check = CheckMode::permissive;
    return r;
}

}  // namespace

FeasibilityCertificate feasibility_check(const MaxMinProblem& p, double lambda_c) {
    if (!(lambda_c > 0.0)) throw std::invalid_argument("lambda_c must be > 0");
    const Scenario& s = p.scenario;
    const int M = s.M(), K = s.K(), L = s.L();
    FeasibilityCertificate cert;

    const SlackProblem sp = build_feasibility_problem(p, lambda_c);
    const SlackResult r = solve_slack(sp);
    cert.newton_steps = r.newton_steps;
    cert.max_violation = r.t;

    Eigen::MatrixXd x(M, K);
    for (int m = 0; m < M; ++m)
        for (int k = 0; k < K; ++k) x(m, k) = r.z(m * K + k);
    const Eigen::VectorXd alpha = r.z.tail(L);
    const PowerAllocation alloc = allocation_from_normalized(p, x, alpha);
    cert.mu = alloc.eta.array().sqrt().matrix();
    cert.alpha_slack = alpha;
    const LinkTerms terms = closed_form_terms(s, p.gammas, alloc, permissive(p.link));
    cert.min_margin = min_margin(p, terms, lambda_c);

    switch (r.status) {
        case SlackStatus::negative:
            // Accept only what the closed-form SINRs confirm.
            cert.status = cert.min_margin >= -1e-6 && allocation_slack(alloc, s, p.gammas.gamma_dl).valid(1e-9)
                              ? FeasibilityStatus::feasible
                              : FeasibilityStatus::inconclusive;
            break;
        case SlackStatus::positive: cert.status = FeasibilityStatus::infeasible; break;
        default: cert.status = FeasibilityStatus::inconclusive; break;
    }
    cert.feasible = cert.status == FeasibilityStatus::feasible;
    return cert;
}

double single_user_bound(const MaxMinProblem& p) {
    const Scenario& s = p.scenario;
    const double pd = s.config.dl_power_w, pu = s.config.ul_power_w, nv = s.noise_w;
    const double rx_gain = p.link.ul_form == UlSinrForm::exact ? 1.0 : static_cast<double>(s.Nr());
    double best = 0.0;
    for (int k = 0; k < s.K(); ++k) {
        const double a = p.gammas.gamma_dl.col(k).array().sqrt().sum();
        best = std::max(best, std::pow(pd * s.Nt() * a * a / nv, 1.0 / p.w_d));
    }
    for (int l = 0; l < s.L(); ++l) {
        const double g = p.gammas.gamma_ul.col(l).sum();
        best = std::max(best, std::pow(pu * s.Nr() * rx_gain * g / nv, 1.0 / p.w_u));
    }
    return best;
}

double maxmin_objective(const MaxMinProblem& p, const PowerAllocation& alloc) {
    const LinkTerms t = closed_form_terms(p.scenario, p.gammas, alloc, permissive(p.link));
    double v = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd sd = t.sinr_dl(), su = t.sinr_ul();
    for (Eigen::Index k = 0; k < sd.size(); ++k) v = std::min(v, std::pow(sd(k), 1.0 / p.w_d));
    for (Eigen::Index l = 0; l < su.size(); ++l) v = std::min(v, std::pow(su(l), 1.0 / p.w_u));
    return v;
}

PowerAllocation trim_to_targets(const MaxMinProblem& p, const PowerAllocation& in, double lambda_c,
                                int max_passes) {
    const double td = dl_target(p, lambda_c), tu = ul_target(p, lambda_c);
    const LinkOptions opts = permissive(p.link);
    PowerAllocation a = in;
    for (int pass = 0; pass < max_passes; ++pass) {
        const LinkTerms t = closed_form_terms(p.scenario, p.gammas, a, opts);
        double worst_excess = 0.0;
        // SINR(f) = f A / (f B + C) for a scaling f of the user's own power.
        auto factor = [&](const Eigen::MatrixXd& terms, Eigen::Index u, double target) {
            const double A = terms(u, kTermDesired), B = terms(u, kTermBeamUnc);
            const double C = terms.row(u).tail(kNumTerms - 2).sum();
            if (!(A > 0.0)) return 1.0;
            const double sinr = A / (B + C);
            if (sinr <= target) return 1.0;
            worst_excess = std::max(worst_excess, sinr / target - 1.0);
            const double den = A - target * B;
            return den > 0.0 ? std::clamp(target * C / den, 0.0, 1.0) : 1.0;
        };
        for (Eigen::Index k = 0; k < t.dl.rows(); ++k) a.eta.col(k) *= factor(t.dl, k, td);
        for (Eigen::Index l = 0; l < t.ul.rows(); ++l) a.varsigma(l) *= factor(t.ul, l, tu);
        if (worst_excess < 1e-10) break;
    }
    return a;
}

MaxMinResult solve_p1_maxmin(const MaxMinProblem& p) {
    p.validate();
    const Scenario& s = p.scenario;
    MaxMinResult res;
    if (s.K() + s.L() == 0) throw InvalidConfig("max-min needs at least one user");

    double lo = p.lambda_min;
    double hi = p.lambda_max;
    FeasibilityCertificate best;
    bool have = false;

    if (!(hi > lo)) {
        hi = std::max(2.0 * single_user_bound(p), lo + p.epsilon);
        for (; res.doublings < 20; ++res.doublings) {
            const auto c = feasibility_check(p, hi);
            if (!c.feasible) break;
            lo = hi;
            best = c;
            have = true;
            hi *= 2.0;
        }
    }
    res.lambda_max0 = hi;

    while (hi - lo >= p.epsilon && res.iterations < p.max_iters) {
        const double mid = 0.5 * (lo + hi);
        const auto c = feasibility_check(p, mid);
        ++res.iterations;
        res.log.push_back({res.iterations, lo, hi, mid, c.status});
        if (c.feasible) {
            lo = mid;
            best = c;
            have = true;
        } else {
            hi = mid;
        }
    }

    if (!have) {
        // Only the floor remains; it must be feasible for a meaningful answer.
        const double floor = lo > 0.0 ? lo : std::min(p.epsilon, hi) * 1e-6;
        const auto c = feasibility_check(p, floor);
        if (!c.feasible) throw InfeasibleProblem("no feasible target above the lambda floor");
        best = c;
        lo = floor;
    }

    res.lambda_star = lo;
    res.alloc = trim_to_targets(p, best.allocation(), lo);
    const LinkTerms t = closed_form_terms(s, p.gammas, res.alloc, permissive(p.link));
    res.sinr_dl = t.sinr_dl();
    res.sinr_ul = t.sinr_ul();
    return res;
}

AllocationReport validate_allocation(const PowerAllocation& alloc, const Scenario& s,
                                     const Eigen::MatrixXd& gamma_dl, double tol) {
    AllocationReport r;
    r.slack = allocation_slack(alloc, s, gamma_dl);
    for (Eigen::Index m = 0; m < r.slack.ap.size(); ++m)
        if (r.slack.ap(m) < -tol) {
            std::ostringstream os;
            os << "AP " << m << " exceeds its power budget by " << -r.slack.ap(m);
            r.violations.push_back(os.str());
        }
    for (Eigen::Index l = 0; l < r.slack.ue_lower.size(); ++l)
        if (r.slack.ue_lower(l) < -tol || r.slack.ue_upper(l) < -tol) {
            std::ostringstream os;
            os << "UL user " << l << " coefficient " << alloc.varsigma(l) << " outside [0, 1]";
            r.violations.push_back(os.str());
        }
    if (r.slack.eta_min < -tol) r.violations.push_back("negative DL coefficient");
    r.valid = r.violations.empty();
    return r;
}

}  // namespace cffd
