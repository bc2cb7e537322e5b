// SPDX-License-Identifier: Apache-2.0
#include "cffd/nafd.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "cffd/errors.hpp"

namespace cffd {

namespace {

double rho_d(const Scenario& s) { return s.config.dl_power_w / s.noise_w; }
double rho_u(const Scenario& s) { return s.config.ul_power_w / s.noise_w; }

Eigen::VectorXd se_from_sinr(const Eigen::VectorXd& sinr, double prelog) {
    return (prelog * (1.0 + sinr.array()).log() / std::log(2.0)).matrix();
}

void enforce(const ModeAssignment& x, const Scenario& s, const EstimateVariances& g, NafdCheck check, bool allow_fd) {
    if (check != NafdCheck::strict) return;
    const auto v = check_assignment(x, s, g, allow_fd);
    if (!v.empty()) throw ConstraintViolation(v.front());
}

// Per transmitting AP i: sum_q mu_iq^2 gamma_iq, gated by a_i.
Eigen::VectorXd dl_load(const ModeAssignment& x, const EstimateVariances& g) {
    Eigen::VectorXd load = (x.mu.array().square() * g.gamma_dl.array()).rowwise().sum().matrix();
    for (Eigen::Index i = 0; i < load.size(); ++i) load(i) *= x.a(i);
    return load;
}

// Line-search grid for per-user power scalings.
constexpr std::array<double, 8> kScaleGrid = {1.0, 0.75, 0.5, 0.35, 0.25, 0.15, 0.08, 0.04};

}  // namespace

ModeAssignment assignment_from_modes(const std::vector<ApMode>& modes, int K, int L) {
    const int M = static_cast<int>(modes.size());
    ModeAssignment x;
    x.a = Eigen::VectorXi::Zero(M);
    x.b = Eigen::VectorXi::Zero(M);
    for (int m = 0; m < M; ++m) {
        const ApMode md = modes[static_cast<std::size_t>(m)];
        x.a(m) = md == ApMode::dl || md == ApMode::fd;
        x.b(m) = md == ApMode::ul || md == ApMode::fd;
    }
    x.mu = Eigen::MatrixXd::Zero(M, K);
    x.varsigma = Eigen::VectorXd::Zero(L);
    x.alpha = Eigen::MatrixXd::Zero(M, L);
    return x;
}

std::vector<ApMode> modes_from_index(std::uint64_t index, int M, int n_modes) {
    std::vector<ApMode> modes(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        modes[static_cast<std::size_t>(m)] = static_cast<ApMode>(index % static_cast<std::uint64_t>(n_modes));
        index /= static_cast<std::uint64_t>(n_modes);
    }
    return modes;
}

std::uint32_t mask_of(const Eigen::VectorXi& flags) {
    std::uint32_t m = 0;
    for (Eigen::Index i = 0; i < flags.size(); ++i)
        if (flags(i)) m |= 1u << i;
    return m;
}

std::vector<std::string> check_assignment(const ModeAssignment& x, const Scenario& s, const EstimateVariances& g,
                                          bool allow_fd, double tol) {
    std::vector<std::string> out;
    const int M = s.M(), K = s.K(), L = s.L();
    if (x.a.size() != M || x.b.size() != M || x.mu.rows() != M || x.mu.cols() != K || x.varsigma.size() != L ||
        x.alpha.rows() != M || x.alpha.cols() != L) {
        out.push_back("assignment dimensions do not match the scenario");
        return out;
    }
    for (int m = 0; m < M; ++m) {
        std::ostringstream os;
        if ((x.a(m) != 0 && x.a(m) != 1) || (x.b(m) != 0 && x.b(m) != 1)) {
            os << "AP " << m << " mode flags must be binary";
        } else if (!allow_fd && x.a(m) + x.b(m) > 1) {
            os << "AP " << m << " is in both DL and UL mode without FD emulation";
        } else {
            const double used = s.Nt() * (x.mu.row(m).array().square() * g.gamma_dl.row(m).array()).sum();
            if (used > x.a(m) + tol) os << "AP " << m << " exceeds its DL power budget (" << used << ")";
        }
        if (!os.str().empty()) out.push_back(os.str());
    }
    for (int l = 0; l < L; ++l)
        if (x.varsigma(l) < -tol || x.varsigma(l) > 1.0 + tol) out.push_back("UL coefficient outside [0, 1]");
    if (x.alpha.size() > 0 && x.alpha.cwiseAbs().maxCoeff() > 1.0 + tol) out.push_back("LSFD weight above 1");
    if (x.mu.size() > 0 && x.mu.minCoeff() < -tol) out.push_back("negative DL coefficient");
    return out;
}

Eigen::MatrixXd nafd_inter_ap_gain(const Scenario& s) {
    Eigen::MatrixXd q = s.ap_gain;
    q.diagonal().setConstant(s.config.theta_si);
    return q;
}

Eigen::VectorXd nafd_dl_sinr(const Scenario& s, const EstimateVariances& g, const ModeAssignment& x) {
    const int M = s.M(), K = s.K(), L = s.L();
    const double Nt = s.Nt(), rd = rho_d(s), ru = rho_u(s);
    const Eigen::VectorXd load = dl_load(x, g);
    Eigen::VectorXd out(K);
    for (int k = 0; k < K; ++k) {
        double amp = 0.0, den = 1.0;
        for (int m = 0; m < M; ++m) {
            amp += Nt * x.a(m) * x.mu(m, k) * g.gamma_dl(m, k);
            den += rd * Nt * s.zeta_f(m, k) * load(m);
        }
        for (int l = 0; l < L; ++l) den += ru * x.varsigma(l) * s.zeta_h(k, l);
        out(k) = rd * amp * amp / den;
    }
    return out;
}

LsfdTerms lsfd_terms(const Scenario& s, const EstimateVariances& g, const ModeAssignment& x, int l) {
    const int M = s.M(), L = s.L();
    const double Nt = s.Nt(), Nr = s.Nr(), rd = rho_d(s), ru = rho_u(s);
    const Eigen::MatrixXd zq = nafd_inter_ap_gain(s);
    const Eigen::VectorXd inter = zq * dl_load(x, g);  // sum_i a_i zeta_Q,mi sum_q mu_iq^2 gamma_iq
    LsfdTerms t;
    t.c = Eigen::VectorXd::Zero(M);
    t.D = Eigen::VectorXd::Zero(M);
    for (int m = 0; m < M; ++m) {
        if (!x.b(m)) continue;
        const double gml = g.gamma_ul(m, l);
        double ul_int = 0.0;
        for (int j = 0; j < L; ++j) ul_int += x.varsigma(j) * s.zeta_g(m, j);
        t.c(m) = std::sqrt(ru * x.varsigma(l)) * Nr * gml;
        t.D(m) = Nr * gml * (ru * ul_int + 1.0 + rd * Nt * inter(m));
    }
    return t;
}

double lsfd_sinr(const LsfdTerms& t, const Eigen::VectorXd& alpha) {
    const double num = t.c.dot(alpha);
    const double den = (alpha.array().square() * t.D.array()).sum();
    return den > 0.0 ? num * num / den : 0.0;
}

Eigen::VectorXd nafd_ul_sinr(const Scenario& s, const EstimateVariances& g, const ModeAssignment& x) {
    Eigen::VectorXd out(s.L());
    for (int l = 0; l < s.L(); ++l) out(l) = lsfd_sinr(lsfd_terms(s, g, x, l), x.alpha.col(l));
    return out;
}

Eigen::VectorXd nafd_dl_se(const Scenario& s, const EstimateVariances& g, const ModeAssignment& x, NafdCheck check,
                           bool allow_fd) {
    enforce(x, s, g, check, allow_fd);
    return se_from_sinr(nafd_dl_sinr(s, g, x), s.prelog());
}

Eigen::VectorXd nafd_ul_se(const Scenario& s, const EstimateVariances& g, const ModeAssignment& x, NafdCheck check,
                           bool allow_fd) {
    enforce(x, s, g, check, allow_fd);
    return se_from_sinr(nafd_ul_sinr(s, g, x), s.prelog());
}

Eigen::MatrixXd optimal_lsfd(const Scenario& s, const EstimateVariances& g, const Eigen::VectorXi& a,
                             const Eigen::VectorXi& b, const Eigen::MatrixXd& mu, const Eigen::VectorXd& varsigma) {
    ModeAssignment x;
    x.a = a;
    x.b = b;
    x.mu = mu;
    x.varsigma = varsigma;
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(s.M(), s.L());
    for (int l = 0; l < s.L(); ++l) {
        const LsfdTerms t = lsfd_terms(s, g, x, l);
        for (int m = 0; m < s.M(); ++m)
            if (t.D(m) > 0.0) alpha(m, l) = t.c(m) / t.D(m);
        const double peak = alpha.col(l).cwiseAbs().maxCoeff();
        if (peak > 0.0) alpha.col(l) /= peak;
    }
    return alpha;
}

void PowerModelParams::validate() const {
    if (zeta_amp.size() == 0 || (zeta_amp.array() <= 0.0).any() || (zeta_amp.array() > 1.0).any())
        throw InvalidConfig("AP amplifier efficiencies must lie in (0, 1]");
    if (!(chi > 0.0 && chi <= 1.0)) throw InvalidConfig("UE amplifier efficiency must lie in (0, 1]");
    if (P_cdl < 0 || P_cul < 0 || P_fdl < 0 || P_ful < 0 || P_bt < 0 || P_U_fixed < 0)
        throw InvalidConfig("power model constants must be >= 0");
    if (B < 0.0) throw InvalidConfig("bandwidth must be >= 0");
    if (!(sigma_n2 > 0.0)) throw InvalidConfig("sigma_n2 must be > 0");
}

PowerModelParams default_power_model(const Scenario& s) {
    PowerModelParams p;
    p.zeta_amp = Eigen::VectorXd::Constant(s.M(), 0.4);
    p.B = s.config.bandwidth_hz;
    p.sigma_n2 = s.noise_w;
    return p;
}

Eigen::VectorXd fronthaul_rate(const ModeAssignment& x, const Eigen::VectorXd& dl_se, const Eigen::VectorXd& ul_se,
                               double B, FronthaulGate gate) {
    const double sdl = dl_se.sum(), sul = ul_se.sum();
    Eigen::VectorXd r(x.M());
    for (int m = 0; m < x.M(); ++m)
        r(m) = gate == FronthaulGate::as_printed ? B * (x.a(m) * sul + x.b(m) * sdl) : B * (x.a(m) * sdl + x.b(m) * sul);
    return r;
}

double total_power(const ModeAssignment& x, const Scenario& s, const EstimateVariances& g, const Eigen::VectorXd& dl_se,
                   const Eigen::VectorXd& ul_se, const PowerModelParams& p) {
    const double Nt = s.Nt(), Nr = s.Nr();
    const double rd = rho_d(s), ru = rho_u(s);
    double total = p.P_U_fixed;
    // DL transmit power, linear in mu.
    for (int m = 0; m < x.M(); ++m)
        total += Nt * rd * p.sigma_n2 / p.zeta_amp(m) * (g.gamma_dl.row(m).array() * x.mu.row(m).array()).sum();
    total += ru * p.sigma_n2 / p.chi * x.varsigma.sum();
    total += p.P_bt * fronthaul_rate(x, dl_se, ul_se, p.B, p.gate).sum();
    for (int m = 0; m < x.M(); ++m) total += x.a(m) * (Nt * p.P_cdl + p.P_fdl) + x.b(m) * (Nr * p.P_cul + p.P_ful);
    return total;
}

NafdPerformance evaluate_nafd(const ModeAssignment& x, const Scenario& s, const EstimateVariances& g,
                              const PowerModelParams& p) {
    NafdPerformance r;
    r.dl_se = se_from_sinr(nafd_dl_sinr(s, g, x), s.prelog());
    r.ul_se = se_from_sinr(nafd_ul_sinr(s, g, x), s.prelog());
    r.sum_se = r.dl_se.sum() + r.ul_se.sum();
    r.p_total = total_power(x, s, g, r.dl_se, r.ul_se, p);
    r.ee = r.p_total > 0.0 ? p.B * r.sum_se / r.p_total : 0.0;
    return r;
}

double energy_efficiency(const ModeAssignment& x, const Scenario& s, const EstimateVariances& g,
                         const PowerModelParams& p) {
    return evaluate_nafd(x, s, g, p).ee;
}

CandidateRow candidate_row(const ModeAssignment& x, const NafdPerformance& perf, const QosTargets& qos) {
    CandidateRow r;
    r.a_mask = mask_of(x.a);
    r.b_mask = mask_of(x.b);
    r.ee = perf.ee;
    r.sum_se = perf.sum_se;
    r.p_total = perf.p_total;
    for (Eigen::Index k = 0; k < perf.dl_se.size(); ++k) r.shortfall += std::max(0.0, qos.dl - perf.dl_se(k));
    for (Eigen::Index l = 0; l < perf.ul_se.size(); ++l) r.shortfall += std::max(0.0, qos.ul - perf.ul_se(l));
    r.feasible = r.shortfall == 0.0;
    return r;
}

bool better(const CandidateRow& x, const CandidateRow& y) {
    if (x.feasible != y.feasible) return x.feasible;
    if (x.feasible) return x.ee > y.ee;
    if (x.shortfall != y.shortfall) return x.shortfall < y.shortfall;
    return x.ee > y.ee;
}

ModeAssignment optimize_inner(const Scenario& s, const EstimateVariances& g, const Eigen::VectorXi& a,
                              const Eigen::VectorXi& b, const PowerModelParams& p, const QosTargets& qos, int rounds) {
    const int M = s.M(), K = s.K(), L = s.L();
    ModeAssignment x;
    x.a = a;
    x.b = b;
    Eigen::MatrixXd mu0 = Eigen::MatrixXd::Zero(M, K);
    for (int m = 0; m < M; ++m) {
        const double load = s.Nt() * g.gamma_dl.row(m).sum();
        if (a(m) && load > 0.0) mu0.row(m).setConstant(std::sqrt(1.0 / load));
    }
    x.mu = mu0;
    x.varsigma = Eigen::VectorXd::Ones(L);
    x.alpha = optimal_lsfd(s, g, a, b, x.mu, x.varsigma);

    auto score = [&](const ModeAssignment& y) { return candidate_row(y, evaluate_nafd(y, s, g, p), qos); };
    CandidateRow cur = score(x);
    Eigen::VectorXd col_scale = Eigen::VectorXd::Ones(K);

    for (int r = 0; r < rounds; ++r) {
        for (int l = 0; l < L; ++l) {
            const double keep = x.varsigma(l);
            double best_v = keep;
            for (double v : kScaleGrid) {
                if (v == keep) continue;
                x.varsigma(l) = v;
                x.alpha = optimal_lsfd(s, g, a, b, x.mu, x.varsigma);
                const CandidateRow row = score(x);
                if (better(row, cur)) {
                    cur = row;
                    best_v = v;
                }
            }
            x.varsigma(l) = best_v;
            x.alpha = optimal_lsfd(s, g, a, b, x.mu, x.varsigma);
        }
        for (int k = 0; k < K; ++k) {
            const double keep = col_scale(k);
            double best_f = keep;
            for (double f : kScaleGrid) {
                if (f == keep) continue;
                x.mu.col(k) = f * mu0.col(k);
                x.alpha = optimal_lsfd(s, g, a, b, x.mu, x.varsigma);
                const CandidateRow row = score(x);
                if (better(row, cur)) {
                    cur = row;
                    best_f = f;
                }
            }
            col_scale(k) = best_f;
            x.mu.col(k) = best_f * mu0.col(k);
            x.alpha = optimal_lsfd(s, g, a, b, x.mu, x.varsigma);
        }
    }
    return x;
}

P2Result solve_p2(const Scenario& s, const EstimateVariances& g, const PowerModelParams& params, const P2Options& opts) {
    params.validate();
    const int M = s.M();
    const int n_modes = opts.allow_fd ? 4 : 3;
    P2Result res;

    auto eval_modes = [&](const std::vector<ApMode>& modes, ModeAssignment& x, NafdPerformance& perf) {
        const ModeAssignment shell = assignment_from_modes(modes, s.K(), s.L());
        x = optimize_inner(s, g, shell.a, shell.b, params, opts.qos, opts.rounds);
        perf = evaluate_nafd(x, s, g, params);
        return candidate_row(x, perf, opts.qos);
    };

    std::vector<ApMode> best_modes;
    if (opts.method == P2Method::exhaustive) {
        if (M > 14) throw InvalidConfig("exhaustive search needs M <= 14");
        std::uint64_t total = 1;
        for (int m = 0; m < M; ++m) total *= static_cast<std::uint64_t>(n_modes);
        res.log.resize(total);
#pragma omp parallel for schedule(dynamic, 16)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(total); ++i) {
            ModeAssignment x;
            NafdPerformance perf;
            res.log[static_cast<std::size_t>(i)] =
                eval_modes(modes_from_index(static_cast<std::uint64_t>(i), M, n_modes), x, perf);
        }
        std::size_t arg = 0;
        for (std::size_t i = 1; i < res.log.size(); ++i)
            if (better(res.log[i], res.log[arg])) arg = i;
        best_modes = modes_from_index(arg, M, n_modes);
    } else {
        std::vector<ApMode> modes(static_cast<std::size_t>(M), ApMode::off);
        ModeAssignment x;
        NafdPerformance perf;
        CandidateRow cur = eval_modes(modes, x, perf);
        res.log.push_back(cur);
        for (int step = 0; step < M * n_modes; ++step) {
            int best_m = -1;
            ApMode best_mode = ApMode::off;
            CandidateRow best_row = cur;
            for (int m = 0; m < M; ++m)
                for (int md = 0; md < n_modes; ++md) {
                    if (static_cast<ApMode>(md) == modes[static_cast<std::size_t>(m)]) continue;
                    std::vector<ApMode> trial = modes;
                    trial[static_cast<std::size_t>(m)] = static_cast<ApMode>(md);
                    const CandidateRow row = eval_modes(trial, x, perf);
                    res.log.push_back(row);
                    if (better(row, best_row)) {
                        best_row = row;
                        best_m = m;
                        best_mode = static_cast<ApMode>(md);
                    }
                }
            if (best_m < 0) break;
            modes[static_cast<std::size_t>(best_m)] = best_mode;
            cur = best_row;
        }
        best_modes = modes;
    }

    res.best_row = eval_modes(best_modes, res.best, res.perf);
    res.feasible = res.best_row.feasible;
    return res;
}

}  // namespace cffd
