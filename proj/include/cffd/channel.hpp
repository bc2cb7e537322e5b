// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

#include "cffd/scenario.hpp"

namespace cffd {

/// Link classes of one coherence block. Each class has its own RNG sub-stream
/// per (block_seed, class, index pair), so drawing a subset of classes yields
/// exactly the same values for those classes as drawing all of them.
enum ChannelClass : unsigned {
    kDlTx = 1u << 0,  // f:     AP transmit antennas <-> DL UE (Nt)
    kDlRx = 1u << 1,  // f_bar: AP receive antennas <-> DL UE (Nr)
    kUlRx = 1u << 2,  // g:     AP receive antennas <-> UL UE (Nr)
    kUlTx = 1u << 3,  // g_bar: AP transmit antennas <-> UL UE (Nt)
    kUeUe = 1u << 4,  // h:     UL UE -> DL UE (scalar)
    kApAp = 1u << 5,  // Q:     AP tx -> AP rx (Nr x Nt), diagonal = SI
    kAllClasses = 0x3fu,
};

/// Small-scale x large-scale channels of one block.
///
/// Vector classes are stored column-per-link: column m*K + k of `dl_tx`
/// is f_mk. `ap_ap` holds M*M blocks of Nr x Nt; block (rx, tx) starts at
/// column (rx*M + tx)*Nt.
struct ChannelRealization {
    int M = 0, K = 0, L = 0, Nt = 0, Nr = 0;
    Eigen::MatrixXcd dl_tx;  // Nt x (M*K)
    Eigen::MatrixXcd dl_rx;  // Nr x (M*K)
    Eigen::MatrixXcd ul_rx;  // Nr x (M*L)
    Eigen::MatrixXcd ul_tx;  // Nt x (M*L)
    Eigen::MatrixXcd ue_ue;  // K x L
    Eigen::MatrixXcd ap_ap;  // Nr x (M*M*Nt)

    auto f(int m, int k) const { return dl_tx.col(m * K + k); }
    auto f_bar(int m, int k) const { return dl_rx.col(m * K + k); }
    auto g(int m, int l) const { return ul_rx.col(m * L + l); }
    auto g_bar(int m, int l) const { return ul_tx.col(m * L + l); }
    auto q(int rx, int tx) const { return ap_ap.block(0, (rx * M + tx) * Nt, Nr, Nt); }
};

/// Each entry is an independent CN(0, zeta) draw; deterministic in (scenario, block_seed).
ChannelRealization draw_channels(const Scenario& scenario, std::uint64_t block_seed,
                                 unsigned classes = kAllClasses);

/// In-place variant for Monte Carlo loops; reuses the buffers in `out`.
void draw_channels_into(ChannelRealization& out, const Scenario& scenario,
                        std::uint64_t block_seed, unsigned classes = kAllClasses);

/// Largest relative error |E{|entry|^2} / zeta - 1| across all links with zeta > 0,
/// estimated from n_draws blocks. Links with zeta == 0 contribute |E{|entry|^2}|.
double empirical_moment_check(const Scenario& scenario, int n_draws, std::uint64_t seed = 7);

/// Flat little-endian dump: "CFFDCHN1", five uint32 dims (M, K, L, Nt, Nr), then
/// f, f_bar, g, g_bar, h, Q as row-major (re, im) float64 pairs.
void write_realization(std::ostream& os, const ChannelRealization& r);
ChannelRealization read_realization(std::istream& is);

}  // namespace cffd
