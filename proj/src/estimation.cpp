// SPDX-License-Identifier: Apache-2.0
#include "cffd/estimation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cffd/errors.hpp"
#include "cffd/rng.hpp"

namespace cffd {

namespace {

enum : std::uint64_t {
    kTagNoiseT = 201,
    kTagNoiseR = 202,
    kTagBlockChannel = 203,
    kTagBlockNoise = 204,
};

constexpr unsigned kTrainingClasses = kDlTx | kDlRx | kUlRx | kUlTx;

}  // namespace

PilotBook assign_pilots(int K, int L, int tau_p) {
    if (K < 0 || L < 0 || tau_p < 1) throw InvalidConfig("need K, L >= 0 and tau_p >= 1");
    if (tau_p < K + L) throw InsufficientPilots("tau_p must be >= K + L");
    PilotBook pb;
    pb.phi_dl.resize(tau_p, K);
    pb.phi_ul.resize(tau_p, L);
    const double scale = 1.0 / std::sqrt(static_cast<double>(tau_p));
    auto row = [&](int j, auto col) {
        for (int t = 0; t < tau_p; ++t) {
            // Reduce j*t mod tau_p first so the angle stays exact for large indices.
            const double ang = -2.0 * std::numbers::pi * static_cast<double>((j * t) % tau_p) / tau_p;
            col(t) = std::polar(scale, ang);
        }
    };
    for (int k = 0; k < K; ++k) row(k, pb.phi_dl.col(k));
    for (int l = 0; l < L; ++l) row(K + l, pb.phi_ul.col(l));
    return pb;
}

PilotObservations pilot_observations(const ChannelRealization& r, const PilotBook& pilots,
                                     const Scenario& s, std::uint64_t noise_seed) {
    const int M = r.M, K = r.K, L = r.L;
    const int tau = static_cast<int>(std::max(pilots.phi_dl.rows(), pilots.phi_ul.rows()));
    const double amp = std::sqrt(tau * s.config.pilot_power_w);
    const double nv = s.noise_w;
    PilotObservations obs;
    obs.y_t.resize(static_cast<std::size_t>(M));
    obs.y_r.resize(static_cast<std::size_t>(M));
    const Eigen::MatrixXcd dl_h = pilots.phi_dl.adjoint();  // K x tau
    const Eigen::MatrixXcd ul_h = pilots.phi_ul.adjoint();  // L x tau
    for (int m = 0; m < M; ++m) {
        Eigen::MatrixXcd yt = Eigen::MatrixXcd::Zero(r.Nt, tau);
        Eigen::MatrixXcd yr = Eigen::MatrixXcd::Zero(r.Nr, tau);
        if (K > 0) {
            yt.noalias() += amp * r.dl_tx.middleCols(m * K, K) * dl_h;
            yr.noalias() += amp * r.dl_rx.middleCols(m * K, K) * dl_h;
        }
        if (L > 0) {
            yt.noalias() += amp * r.ul_tx.middleCols(m * L, L) * ul_h;
            yr.noalias() += amp * r.ul_rx.middleCols(m * L, L) * ul_h;
        }
        ComplexGaussian wt(stream_key(noise_seed, kTagNoiseT, static_cast<std::uint64_t>(m)));
        ComplexGaussian wr(stream_key(noise_seed, kTagNoiseR, static_cast<std::uint64_t>(m)));
        for (int t = 0; t < tau; ++t) {
            for (int a = 0; a < r.Nt; ++a) yt(a, t) += wt(nv);
            for (int a = 0; a < r.Nr; ++a) yr(a, t) += wr(nv);
        }
        obs.y_t[static_cast<std::size_t>(m)] = std::move(yt);
        obs.y_r[static_cast<std::size_t>(m)] = std::move(yr);
    }
    return obs;
}

EstimateVariances estimate_variances(const Scenario& s) {
    const double tp = s.config.pilot_symbols * s.config.pilot_power_w;
    const double sq = std::sqrt(tp);
    const double nv = s.noise_w;
    EstimateVariances v;
    auto fill = [&](const Eigen::MatrixXd& zeta, Eigen::MatrixXd& c, Eigen::MatrixXd& gamma) {
        const Eigen::ArrayXXd den = tp * zeta.array() + nv;
        c = (sq * zeta.array() / den).matrix();
        gamma = (tp * zeta.array().square() / den).matrix();
    };
    fill(s.zeta_f, v.c_dl, v.gamma_dl);
    fill(s.zeta_g, v.c_ul, v.gamma_ul);
    return v;
}

void mmse_estimate_into(ChannelEstimates& e, const PilotObservations& obs, const PilotBook& pilots,
                        const EstimateVariances& var) {
    const int M = static_cast<int>(obs.y_t.size());
    const int K = static_cast<int>(pilots.phi_dl.cols());
    const int L = static_cast<int>(pilots.phi_ul.cols());
    const int Nt = M > 0 ? static_cast<int>(obs.y_t[0].rows()) : 0;
    const int Nr = M > 0 ? static_cast<int>(obs.y_r[0].rows()) : 0;
    e.M = M;
    e.K = K;
    e.L = L;
    e.f_hat.resize(Nt, static_cast<Eigen::Index>(M) * K);
    e.g_hat.resize(Nr, static_cast<Eigen::Index>(M) * L);
    for (int m = 0; m < M; ++m) {
        const auto& yt = obs.y_t[static_cast<std::size_t>(m)];
        const auto& yr = obs.y_r[static_cast<std::size_t>(m)];
        for (int k = 0; k < K; ++k) e.f_hat.col(m * K + k) = var.c_dl(m, k) * (yt * pilots.phi_dl.col(k));
        for (int l = 0; l < L; ++l) e.g_hat.col(m * L + l) = var.c_ul(m, l) * (yr * pilots.phi_ul.col(l));
    }
    e.gamma_dl = var.gamma_dl;
    e.gamma_ul = var.gamma_ul;
    e.c_dl = var.c_dl;
    e.c_ul = var.c_ul;
}

ChannelEstimates mmse_estimate(const PilotObservations& obs, const PilotBook& pilots, const Scenario& s) {
    ChannelEstimates e;
    mmse_estimate_into(e, obs, pilots, estimate_variances(s));
    return e;
}

double normalized_mse_analytic(double zeta, double p_t, int tau_p, double sigma2) {
    return sigma2 / (tau_p * p_t * zeta + sigma2);
}

NmsePair normalized_mse_empirical(const std::vector<ChannelEstimates>& estimates,
                                  const std::vector<ChannelRealization>& realizations) {
    if (estimates.empty() || estimates.size() != realizations.size())
        throw std::invalid_argument("need one estimate per realization and at least one block");
    double dl_err = 0, dl_ref = 0, ul_err = 0, ul_ref = 0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const auto& e = estimates[i];
        const auto& r = realizations[i];
        dl_err += (r.dl_tx - e.f_hat).squaredNorm();
        dl_ref += r.dl_tx.squaredNorm();
        ul_err += (r.ul_rx - e.g_hat).squaredNorm();
        ul_ref += r.ul_rx.squaredNorm();
    }
    return {dl_ref > 0 ? dl_err / dl_ref : 0.0, ul_ref > 0 ? ul_err / ul_ref : 0.0};
}

NmsePair pooled_nmse_analytic(const Scenario& s) {
    const auto v = estimate_variances(s);
    const double zf = s.zeta_f.sum(), zg = s.zeta_g.sum();
    return {zf > 0 ? (zf - v.gamma_dl.sum()) / zf : 0.0, zg > 0 ? (zg - v.gamma_ul.sum()) / zg : 0.0};
}

std::uint64_t block_channel_seed(std::uint64_t seed, std::int64_t block) {
    return stream_key(seed, kTagBlockChannel, static_cast<std::uint64_t>(block));
}

std::uint64_t block_noise_seed(std::uint64_t seed, std::int64_t block) {
    return stream_key(seed, kTagBlockNoise, static_cast<std::uint64_t>(block));
}

EstimationStats::EstimationStats(int M, int K, int L, int Nt, int Nr)
    : n_dl(Nt),
      n_ul(Nr),
      dl_hat2(Eigen::MatrixXd::Zero(M, K)),
      dl_err2(Eigen::MatrixXd::Zero(M, K)),
      dl_true2(Eigen::MatrixXd::Zero(M, K)),
      dl_cross(Eigen::MatrixXcd::Zero(M, K)),
      ul_hat2(Eigen::MatrixXd::Zero(M, L)),
      ul_err2(Eigen::MatrixXd::Zero(M, L)),
      ul_true2(Eigen::MatrixXd::Zero(M, L)),
      ul_cross(Eigen::MatrixXcd::Zero(M, L)) {}

void EstimationStats::merge(const EstimationStats& o) {
    blocks += o.blocks;
    dl_hat2 += o.dl_hat2;
    dl_err2 += o.dl_err2;
    dl_true2 += o.dl_true2;
    dl_cross += o.dl_cross;
    ul_hat2 += o.ul_hat2;
    ul_err2 += o.ul_err2;
    ul_true2 += o.ul_true2;
    ul_cross += o.ul_cross;
}

NmsePair EstimationStats::pooled_nmse() const {
    const double dr = dl_true2.sum(), ur = ul_true2.sum();
    return {dr > 0 ? dl_err2.sum() / dr : 0.0, ur > 0 ? ul_err2.sum() / ur : 0.0};
}

EstimationStats estimation_statistics(const Scenario& s, std::int64_t n_blocks, std::uint64_t seed,
                                      ExecPolicy policy) {
    const int M = s.M(), K = s.K(), L = s.L();
    const PilotBook pilots = assign_pilots(K, L, s.config.pilot_symbols);
    const EstimateVariances var = estimate_variances(s);

    struct Acc {
        EstimationStats st;
        ChannelRealization r;
        ChannelEstimates e;
        void merge(const Acc& o) { st.merge(o.st); }
    };
    auto make = [&] { return Acc{EstimationStats(M, K, L, s.Nt(), s.Nr()), {}, {}}; };
    auto block = [&](Acc& acc, std::int64_t b) {
        draw_channels_into(acc.r, s, block_channel_seed(seed, b), kTrainingClasses);
        const auto obs = pilot_observations(acc.r, pilots, s, block_noise_seed(seed, b));
        mmse_estimate_into(acc.e, obs, pilots, var);
        auto& st = acc.st;
        for (int m = 0; m < M; ++m) {
            for (int k = 0; k < K; ++k) {
                const auto a = acc.r.f(m, k);
                const auto ah = acc.e.f(m, k);
                const Eigen::VectorXcd err = a - ah;
                st.dl_hat2(m, k) += ah.squaredNorm();
                st.dl_err2(m, k) += err.squaredNorm();
                st.dl_true2(m, k) += a.squaredNorm();
                st.dl_cross(m, k) += ah.dot(err);  // sum err * conj(a_hat)
            }
            for (int l = 0; l < L; ++l) {
                const auto a = acc.r.g(m, l);
                const auto ah = acc.e.g(m, l);
                const Eigen::VectorXcd err = a - ah;
                st.ul_hat2(m, l) += ah.squaredNorm();
                st.ul_err2(m, l) += err.squaredNorm();
                st.ul_true2(m, l) += a.squaredNorm();
                st.ul_cross(m, l) += ah.dot(err);
            }
        }
        ++st.blocks;
    };
    return reduce_blocks<Acc>(n_blocks, policy, make, block).st;
}

}  // namespace cffd
