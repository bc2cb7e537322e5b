// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cffd/channel.hpp"
#include "cffd/parallel.hpp"
#include "cffd/scenario.hpp"

namespace cffd {

/// Orthonormal pilot sequences stored as columns (tau_p x K and tau_p x L).
struct PilotBook {
    Eigen::MatrixXcd phi_dl;
    Eigen::MatrixXcd phi_ul;
};

/// Rows of the tau_p-point DFT matrix: DL users take rows 0..K-1, UL users K..K+L-1.
/// Throws InsufficientPilots when tau_p < K + L.
PilotBook assign_pilots(int K, int L, int tau_p);

/// Training-phase received signals, one matrix per AP.
struct PilotObservations {
    std::vector<Eigen::MatrixXcd> y_t;  // M of Nt x tau_p
    std::vector<Eigen::MatrixXcd> y_r;  // M of Nr x tau_p
};

/// Needs the dl_tx, dl_rx, ul_rx and ul_tx classes of `r`.
/// Noise is drawn from per-AP sub-streams of `noise_seed` with variance scenario.noise_w.
PilotObservations pilot_observations(const ChannelRealization& r, const PilotBook& pilots,
                                     const Scenario& scenario, std::uint64_t noise_seed);

/// Per-link MMSE scaling and estimate variance (pure functions of the large-scale state).
struct EstimateVariances {
    Eigen::MatrixXd c_dl, gamma_dl;  // M x K
    Eigen::MatrixXd c_ul, gamma_ul;  // M x L
};

EstimateVariances estimate_variances(const Scenario& scenario);

struct ChannelEstimates {
    int M = 0, K = 0, L = 0;
    Eigen::MatrixXcd f_hat;  // Nt x (M*K), column m*K + k
    Eigen::MatrixXcd g_hat;  // Nr x (M*L), column m*L + l
    Eigen::MatrixXd gamma_dl, gamma_ul, c_dl, c_ul;

    auto f(int m, int k) const { return f_hat.col(m * K + k); }
    auto g(int m, int l) const { return g_hat.col(m * L + l); }
};

ChannelEstimates mmse_estimate(const PilotObservations& obs, const PilotBook& pilots,
                               const Scenario& scenario);

/// Same estimate with precomputed variances (Monte Carlo inner loops).
void mmse_estimate_into(ChannelEstimates& out, const PilotObservations& obs, const PilotBook& pilots,
                        const EstimateVariances& var);

/// sigma^2 / (tau_p p_t zeta + sigma^2), i.e. 1 - gamma/zeta.
double normalized_mse_analytic(double zeta, double p_t, int tau_p, double sigma2);

struct NmsePair {
    double dl = 0.0;
    double ul = 0.0;
};

/// Pooled sum ||a - a_hat||^2 / sum ||a||^2 over every link and block, per class.
/// `estimates[i]` must belong to `realizations[i]`. Throws on empty input.
NmsePair normalized_mse_empirical(const std::vector<ChannelEstimates>& estimates,
                                  const std::vector<ChannelRealization>& realizations);

/// Expected value of the pooled metric: sum (zeta - gamma) / sum zeta.
NmsePair pooled_nmse_analytic(const Scenario& scenario);

/// Block seeds used by every Monte Carlo loop: channel draw and pilot noise.
std::uint64_t block_channel_seed(std::uint64_t seed, std::int64_t block);
std::uint64_t block_noise_seed(std::uint64_t seed, std::int64_t block);

/// Per-link sums over blocks and antennas of |a_hat|^2, |a - a_hat|^2, |a|^2,
/// (a - a_hat) conj(a_hat).
struct EstimationStats {
    std::int64_t blocks = 0;
    int n_dl = 0, n_ul = 0;  // antennas per sample (Nt, Nr)
    Eigen::MatrixXd dl_hat2, dl_err2, dl_true2;
    Eigen::MatrixXcd dl_cross;
    Eigen::MatrixXd ul_hat2, ul_err2, ul_true2;
    Eigen::MatrixXcd ul_cross;

    EstimationStats() = default;
    EstimationStats(int M, int K, int L, int Nt, int Nr);
    void merge(const EstimationStats& o);

    /// Number of scalar samples per link.
    double samples_dl() const { return static_cast<double>(blocks) * n_dl; }
    double samples_ul() const { return static_cast<double>(blocks) * n_ul; }
    NmsePair pooled_nmse() const;
};

/// Runs n_blocks independent training phases (fresh channels and pilot noise).
EstimationStats estimation_statistics(const Scenario& scenario, std::int64_t n_blocks,
                                      std::uint64_t seed, ExecPolicy policy = ExecPolicy::parallel);

}  // namespace cffd
