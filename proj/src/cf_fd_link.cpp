// SPDX-License-Identifier: Apache-2.0
#include "cffd/cf_fd_link.hpp"

#include <cmath>
#include <sstream>

#include "cffd/channel.hpp"
#include "cffd/errors.hpp"
#include "cffd/rng.hpp"

namespace cffd {

namespace {

enum : std::uint64_t {
    kTagDlDataNoise = 301,
    kTagUlDataNoise = 302,
};

Eigen::VectorXd ratio(const Eigen::MatrixXd& t) {
    Eigen::VectorXd out(t.rows());
    for (Eigen::Index u = 0; u < t.rows(); ++u) {
        const double den = t.row(u).tail(kNumTerms - 1).sum();
        out(u) = t(u, kTermDesired) > 0.0 ? t(u, kTermDesired) / den : 0.0;
    }
    return out;
}

}  // namespace

const char* term_name(bool downlink, int term) {
    switch (term) {
        case kTermDesired: return "desired";
        case kTermBeamUnc: return "beam_uncertainty";
        case kTermMultiUser: return "multi_user";
        case kTermCross: return downlink ? "ul_to_dl" : "inter_ap";
        case kTermNoise: return "noise";
        default: return "?";
    }
}

PowerAllocation equal_power_allocation(const Scenario& s, const Eigen::MatrixXd& gamma_dl,
                                       EqualPowerRule rule) {
    const int M = s.M(), K = s.K();
    PowerAllocation a;
    a.eta = Eigen::MatrixXd::Zero(M, K);
    a.varsigma = Eigen::VectorXd::Ones(s.L());
    for (int m = 0; m < M && K > 0; ++m) {
        if (rule == EqualPowerRule::one_over_k) {
            a.eta.row(m).setConstant(1.0 / K);
            continue;
        }
        const double load = s.Nt() * gamma_dl.row(m).sum();
        if (load > 0.0) a.eta.row(m).setConstant(1.0 / load);
    }
    return a;
}

bool AllocationSlack::valid(double tol) const {
    return eta_min >= -tol && (ap.size() == 0 || ap.minCoeff() >= -tol) &&
           (ue_lower.size() == 0 || ue_lower.minCoeff() >= -tol) &&
           (ue_upper.size() == 0 || ue_upper.minCoeff() >= -tol);
}

AllocationSlack allocation_slack(const PowerAllocation& alloc, const Scenario& s,
                                 const Eigen::MatrixXd& gamma_dl) {
    if (alloc.eta.rows() != s.M() || alloc.eta.cols() != s.K() || alloc.varsigma.size() != s.L())
        throw std::invalid_argument("allocation dimensions do not match the scenario");
    AllocationSlack r;
    r.ap = Eigen::VectorXd::Ones(s.M()) -
           s.Nt() * (alloc.eta.array() * gamma_dl.array()).rowwise().sum().matrix();
    r.ue_lower = alloc.varsigma;
    r.ue_upper = Eigen::VectorXd::Ones(s.L()) - alloc.varsigma;
    r.eta_min = alloc.eta.size() > 0 ? alloc.eta.minCoeff() : 0.0;
    return r;
}

Eigen::VectorXd LinkTerms::sinr_dl() const { return ratio(dl); }
Eigen::VectorXd LinkTerms::sinr_ul() const { return ratio(ul); }

LinkTerms closed_form_terms(const Scenario& s, const EstimateVariances& g, const PowerAllocation& alloc,
                            const LinkOptions& opts) {
    const int K = s.K(), L = s.L();
    const double Nt = s.Nt(), Nr = s.Nr();
    const double pd = s.config.dl_power_w, pu = s.config.ul_power_w, nv = s.noise_w;
    const bool full = opts.duplex == DuplexMode::full;

    LinkTerms t;
    const AllocationSlack slack = allocation_slack(alloc, s, g.gamma_dl);
    if (!slack.valid(1e-9)) {
        std::ostringstream msg;
        msg << "allocation violates constraints (min per-AP slack "
            << (slack.ap.size() ? slack.ap.minCoeff() : 0.0) << ")";
        if (opts.check == CheckMode::strict) throw ConstraintViolation(msg.str());
        t.warnings.push_back(msg.str());
    }

    const Eigen::ArrayXXd eta = alloc.eta.array();
    const Eigen::ArrayXXd sq_eta = eta.sqrt();
    const Eigen::ArrayXXd gd = g.gamma_dl.array();
    const Eigen::ArrayXXd gu = g.gamma_ul.array();

    t.dl = Eigen::MatrixXd::Zero(K, kNumTerms);
    for (int k = 0; k < K; ++k) {
        const double amp = Nt * (sq_eta.col(k) * gd.col(k)).sum();
        t.dl(k, kTermDesired) = pd * amp * amp;
        t.dl(k, kTermBeamUnc) = pd * Nt * (eta.col(k) * s.zeta_f.array().col(k) * gd.col(k)).sum();
        double mui = 0.0;
        for (int i = 0; i < K; ++i)
            if (i != k) mui += (eta.col(i) * s.zeta_f.array().col(k) * gd.col(i)).sum();
        t.dl(k, kTermMultiUser) = pd * Nt * mui;
        if (full && L > 0) t.dl(k, kTermCross) = pu * (alloc.varsigma.array() * s.zeta_h.row(k).transpose().array()).sum();
        t.dl(k, kTermNoise) = nv;
    }

    // Per transmitting AP n: sum_k eta_nk gamma_nk (DL power radiated into the inter-AP channels).
    const Eigen::VectorXd tx_load = (eta * gd).rowwise().sum().matrix();
    const double si_scale = opts.ul_form == UlSinrForm::exact ? Nt * Nr : Nt;
    const double noise_scale = opts.ul_form == UlSinrForm::exact ? Nr : 1.0;

    t.ul = Eigen::MatrixXd::Zero(L, kNumTerms);
    for (int l = 0; l < L; ++l) {
        const double vs = alloc.varsigma(l);
        const double gsum = gu.col(l).sum();
        t.ul(l, kTermDesired) = pu * vs * Nr * Nr * gsum * gsum;
        t.ul(l, kTermBeamUnc) = pu * vs * Nr * (s.zeta_g.array().col(l) * gu.col(l)).sum();
        double mui = 0.0;
        for (int j = 0; j < L; ++j)
            if (j != l) mui += alloc.varsigma(j) * (s.zeta_g.array().col(j) * gu.col(l)).sum();
        t.ul(l, kTermMultiUser) = pu * Nr * mui;
        if (full && K > 0) {
            // sum_m gamma_ml sum_n zeta_Q[m][n] sum_k eta_nk gamma_nk
            const double si = gu.col(l).matrix().dot(s.zeta_q * tx_load);
            t.ul(l, kTermCross) = pd * si_scale * si;
        }
        t.ul(l, kTermNoise) = nv * noise_scale * gsum;
    }
    return t;
}

Eigen::VectorXd dl_sinr_closed_form(const Scenario& s, const EstimateVariances& g, const PowerAllocation& a,
                                    const LinkOptions& opts) {
    return closed_form_terms(s, g, a, opts).sinr_dl();
}

Eigen::VectorXd ul_sinr_closed_form(const Scenario& s, const EstimateVariances& g, const PowerAllocation& a,
                                    const LinkOptions& opts) {
    return closed_form_terms(s, g, a, opts).sinr_ul();
}

namespace {

// Running sums for one direction: amplitude (sum, sum of squares) and, per
// term column >= 1, (sum, sum of squares, sample count).
struct DirAcc {
    Eigen::ArrayXd amp, amp2;
    Eigen::ArrayXXd s, s2;

    DirAcc() = default;
    explicit DirAcc(int users)
        : amp(Eigen::ArrayXd::Zero(users)),
          amp2(Eigen::ArrayXd::Zero(users)),
          s(Eigen::ArrayXXd::Zero(users, kNumTerms)),
          s2(Eigen::ArrayXXd::Zero(users, kNumTerms)) {}

    void add(int u, int term, double v) {
        s(u, term) += v;
        s2(u, term) += v * v;
    }
    void add_amp(int u, double a) {
        amp(u) += a;
        amp2(u) += a * a;
    }
    void merge(const DirAcc& o) {
        amp += o.amp;
        amp2 += o.amp2;
        s += o.s;
        s2 += o.s2;
    }
};

struct McAcc {
    DirAcc dl, ul;
    std::int64_t pairs = 0;
    // scratch
    ChannelRealization r;
    ChannelEstimates e;
    void merge(const McAcc& o) {
        dl.merge(o.dl);
        ul.merge(o.ul);
        pairs += o.pairs;
    }
};

void mean_se(double sum, double sum2, double n, double& mean, double& se) {
    mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sum2 - n * mean * mean) / (n - 1)) : 0.0;
    se = std::sqrt(var / n);
}

}  // namespace

MonteCarloTerms monte_carlo_terms(const Scenario& s, const PowerAllocation& alloc, std::int64_t n_blocks,
                                  std::uint64_t seed, DuplexMode duplex, ExecPolicy policy) {
    if (n_blocks < 2) throw std::invalid_argument("n_blocks must be >= 2");
    const int M = s.M(), K = s.K(), L = s.L(), Nr = s.Nr();
    const double pd = s.config.dl_power_w, pu = s.config.ul_power_w, nv = s.noise_w;
    const bool full = duplex == DuplexMode::full;
    const std::int64_t n_pairs = (n_blocks + 1) / 2;
    const PilotBook pilots = assign_pilots(K, L, s.config.pilot_symbols);
    const EstimateVariances var = estimate_variances(s);
    const Eigen::MatrixXd sq_eta = alloc.eta.array().sqrt().matrix();
    const unsigned classes = full ? kAllClasses : (kDlTx | kDlRx | kUlRx | kUlTx);

    auto make = [&] {
        McAcc a;
        a.dl = DirAcc(K);
        a.ul = DirAcc(L);
        return a;
    };

    // One block: returns the desired amplitudes (unscaled) so the caller can pair them.
    auto one_block = [&](McAcc& acc, std::int64_t b, Eigen::VectorXcd& a_dl, Eigen::VectorXcd& a_ul) {
        auto& r = acc.r;
        auto& e = acc.e;
        draw_channels_into(r, s, block_channel_seed(seed, b), classes);
        const auto obs = pilot_observations(r, pilots, s, block_noise_seed(seed, b));
        mmse_estimate_into(e, obs, pilots, var);

        // Downlink
        for (int k = 0; k < K; ++k) {
            std::complex<double> own = 0.0;
            double mui = 0.0;
            for (int i = 0; i < K; ++i) {
                std::complex<double> c = 0.0;
                for (int m = 0; m < M; ++m) c += sq_eta(m, i) * r.f(m, k).dot(e.f(m, i));
                if (i == k)
                    own = c;
                else
                    mui += std::norm(c);
            }
            a_dl(k) = own;
            acc.dl.add_amp(k, std::sqrt(pd) * own.real());
            acc.dl.add(k, kTermMultiUser, pd * mui);
            double udi = 0.0;
            if (full)
                for (int l = 0; l < L; ++l) udi += alloc.varsigma(l) * std::norm(r.ue_ue(k, l));
            acc.dl.add(k, kTermCross, pu * udi);
            ComplexGaussian w(stream_key(seed, kTagDlDataNoise, static_cast<std::uint64_t>(b),
                                         static_cast<std::uint64_t>(k)));
            acc.dl.add(k, kTermNoise, std::norm(w(nv)));
        }

        // Uplink
        Eigen::MatrixXcd v;  // Nr x (M*K): sum_n sqrt(eta_nk) Q_mn f_hat_nk, column m*K + k
        if (full && K > 0 && L > 0) {
            v = Eigen::MatrixXcd::Zero(Nr, static_cast<Eigen::Index>(M) * K);
            for (int m = 0; m < M; ++m)
                for (int n = 0; n < M; ++n) {
                    const auto q = r.q(m, n);
                    for (int k = 0; k < K; ++k) v.col(m * K + k).noalias() += sq_eta(n, k) * (q * e.f(n, k));
                }
        }
        Eigen::MatrixXcd wr(Nr, M);
        {
            ComplexGaussian w(stream_key(seed, kTagUlDataNoise, static_cast<std::uint64_t>(b)));
            for (int m = 0; m < M; ++m)
                for (int a = 0; a < Nr; ++a) wr(a, m) = w(nv);
        }
        for (int l = 0; l < L; ++l) {
            std::complex<double> own = 0.0;
            double mui = 0.0;
            for (int j = 0; j < L; ++j) {
                std::complex<double> c = 0.0;
                for (int m = 0; m < M; ++m) c += e.g(m, l).dot(r.g(m, j));
                if (j == l)
                    own = c;
                else
                    mui += alloc.varsigma(j) * std::norm(c);
            }
            a_ul(l) = own;
            acc.ul.add_amp(l, std::sqrt(pu * alloc.varsigma(l)) * own.real());
            acc.ul.add(l, kTermMultiUser, pu * mui);
            double si = 0.0;
            if (v.size() > 0)
                for (int k = 0; k < K; ++k) {
                    std::complex<double> c = 0.0;
                    for (int m = 0; m < M; ++m) c += e.g(m, l).dot(v.col(m * K + k));
                    si += std::norm(c);
                }
            acc.ul.add(l, kTermCross, pd * si);
            std::complex<double> nz = 0.0;
            for (int m = 0; m < M; ++m) nz += e.g(m, l).dot(wr.col(m));
            acc.ul.add(l, kTermNoise, std::norm(nz));
        }
    };

    auto pair_fn = [&](McAcc& acc, std::int64_t p) {
        Eigen::VectorXcd d1(K), d2(K), u1(L), u2(L);
        one_block(acc, 2 * p, d1, u1);
        one_block(acc, 2 * p + 1, d2, u2);
        for (int k = 0; k < K; ++k) acc.dl.add(k, kTermBeamUnc, 0.5 * pd * std::norm(d1(k) - d2(k)));
        for (int l = 0; l < L; ++l)
            acc.ul.add(l, kTermBeamUnc, 0.5 * pu * alloc.varsigma(l) * std::norm(u1(l) - u2(l)));
        ++acc.pairs;
    };

    const McAcc acc = reduce_blocks<McAcc>(n_pairs, policy, make, pair_fn);

    MonteCarloTerms out;
    out.blocks = 2 * n_pairs;
    const double nb = static_cast<double>(out.blocks);
    const double np = static_cast<double>(n_pairs);
    auto finish = [&](const DirAcc& d, int users, Eigen::MatrixXd& mean, Eigen::MatrixXd& se,
                      Eigen::VectorXd& amp, Eigen::VectorXd& amp_se) {
        mean = Eigen::MatrixXd::Zero(users, kNumTerms);
        se = Eigen::MatrixXd::Zero(users, kNumTerms);
        amp.resize(users);
        amp_se.resize(users);
        for (int u = 0; u < users; ++u) {
            mean_se(d.amp(u), d.amp2(u), nb, amp(u), amp_se(u));
            mean(u, kTermDesired) = amp(u) * amp(u);
            se(u, kTermDesired) = 2.0 * std::abs(amp(u)) * amp_se(u);
            mean_se(d.s(u, kTermBeamUnc), d.s2(u, kTermBeamUnc), np, mean(u, kTermBeamUnc), se(u, kTermBeamUnc));
            for (int t = kTermMultiUser; t < kNumTerms; ++t) mean_se(d.s(u, t), d.s2(u, t), nb, mean(u, t), se(u, t));
        }
    };
    finish(acc.dl, K, out.mean.dl, out.se.dl, out.dl_amp, out.dl_amp_se);
    finish(acc.ul, L, out.mean.ul, out.se.ul, out.ul_amp, out.ul_amp_se);
    return out;
}

TermComparison compare_terms(const LinkTerms& closed, const MonteCarloTerms& mc, double n_se) {
    TermComparison cmp;
    auto check = [&](bool dl, int u, int term, double c, double est, double se) {
        ++cmp.checked;
        const double diff = std::abs(c - est);
        // Exactly-zero or deterministic terms have se == 0; allow rounding only.
        const double tol = n_se * se + 1e-9 * std::max(std::abs(c), std::abs(est));
        const double z = se > 0.0 ? diff / se : (diff > tol ? INFINITY : 0.0);
        cmp.max_z = std::max(cmp.max_z, z);
        if (diff > tol) cmp.mismatches.push_back({dl, u, term, c, est, se});
    };
    auto dir = [&](bool dl, const Eigen::MatrixXd& c, const Eigen::MatrixXd& m, const Eigen::MatrixXd& se,
                   const Eigen::VectorXd& amp, const Eigen::VectorXd& amp_se) {
        for (Eigen::Index u = 0; u < c.rows(); ++u) {
            const double cd = c(u, kTermDesired);
            // A negative closed-form power cannot come from a real amplitude; compare signed root.
            const double c_amp = cd >= 0.0 ? std::sqrt(cd) : -std::sqrt(-cd);
            check(dl, static_cast<int>(u), kTermDesired, c_amp, amp(u), amp_se(u));
            for (int t = kTermBeamUnc; t < kNumTerms; ++t)
                check(dl, static_cast<int>(u), t, c(u, t), m(u, t), se(u, t));
        }
    };
    dir(true, closed.dl, mc.mean.dl, mc.se.dl, mc.dl_amp, mc.dl_amp_se);
    dir(false, closed.ul, mc.mean.ul, mc.se.ul, mc.ul_amp, mc.ul_amp_se);
    return cmp;
}

SeReport make_se_report(const Eigen::VectorXd& sinr_dl, const Eigen::VectorXd& sinr_ul, double prelog) {
    SeReport r;
    r.prelog = prelog;
    r.sinr_dl = sinr_dl;
    r.sinr_ul = sinr_ul;
    r.dl_se = (prelog * (1.0 + sinr_dl.array()).log() / std::log(2.0)).matrix();
    r.ul_se = (prelog * (1.0 + sinr_ul.array()).log() / std::log(2.0)).matrix();
    r.sum_se = r.dl_se.sum() + r.ul_se.sum();
    return r;
}

SeReport se_report(const Scenario& s, const EstimateVariances& g, const PowerAllocation& alloc,
                   SeMethod method, const LinkOptions& opts, std::int64_t mc_blocks, std::uint64_t mc_seed) {
    if (method == SeMethod::closed_form) {
        const LinkTerms t = closed_form_terms(s, g, alloc, opts);
        return make_se_report(t.sinr_dl(), t.sinr_ul(), s.prelog());
    }
    const MonteCarloTerms mc = monte_carlo_terms(s, alloc, mc_blocks, mc_seed, opts.duplex);
    return make_se_report(mc.mean.sinr_dl(), mc.mean.sinr_ul(), s.prelog());
}

double hd_baseline_sum_se(const Scenario& s, const EstimateVariances& g, const PowerAllocation& alloc_dl,
                          const PowerAllocation& alloc_ul, const LinkOptions& opts) {
    LinkOptions hd = opts;
    hd.duplex = DuplexMode::half;
    const double prelog = 0.5 * s.prelog();
    const LinkTerms tdl = closed_form_terms(s, g, alloc_dl, hd);
    const LinkTerms tul = closed_form_terms(s, g, alloc_ul, hd);
    return make_se_report(tdl.sinr_dl(), tul.sinr_ul(), prelog).sum_se;
}

}  // namespace cffd
