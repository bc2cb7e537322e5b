// SPDX-License-Identifier: Apache-2.0
#include "cffd/channel.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "cffd/rng.hpp"

namespace cffd {

namespace {

// Sub-stream tags; distinct from the geometry tags by construction of stream_key.
enum : std::uint64_t {
    kTagF = 101,
    kTagFBar = 102,
    kTagG = 103,
    kTagGBar = 104,
    kTagH = 105,
    kTagQ = 106,
};

void fill_vectors(Eigen::MatrixXcd& dst, int rows, int M, int n_users, const Eigen::MatrixXd& zeta,
                  std::uint64_t block_seed, std::uint64_t tag) {
    dst.resize(rows, static_cast<Eigen::Index>(M) * n_users);
    for (int m = 0; m < M; ++m) {
        for (int u = 0; u < n_users; ++u) {
            ComplexGaussian cn(stream_key(block_seed, tag, static_cast<std::uint64_t>(m),
                                          static_cast<std::uint64_t>(u)));
            const double var = zeta(m, u);
            auto col = dst.col(m * n_users + u);
            for (int a = 0; a < rows; ++a) col(a) = cn(var);
        }
    }
}

}  // namespace

void draw_channels_into(ChannelRealization& r, const Scenario& s, std::uint64_t block_seed,
                        unsigned classes) {
    r.M = s.M();
    r.K = s.K();
    r.L = s.L();
    r.Nt = s.Nt();
    r.Nr = s.Nr();
    if (classes & kDlTx) fill_vectors(r.dl_tx, r.Nt, r.M, r.K, s.zeta_f, block_seed, kTagF);
    if (classes & kDlRx) fill_vectors(r.dl_rx, r.Nr, r.M, r.K, s.zeta_f, block_seed, kTagFBar);
    if (classes & kUlRx) fill_vectors(r.ul_rx, r.Nr, r.M, r.L, s.zeta_g, block_seed, kTagG);
    if (classes & kUlTx) fill_vectors(r.ul_tx, r.Nt, r.M, r.L, s.zeta_g, block_seed, kTagGBar);
    if (classes & kUeUe) {
        r.ue_ue.resize(r.K, r.L);
        for (int k = 0; k < r.K; ++k)
            for (int l = 0; l < r.L; ++l) {
                ComplexGaussian cn(stream_key(block_seed, kTagH, static_cast<std::uint64_t>(k),
                                              static_cast<std::uint64_t>(l)));
                r.ue_ue(k, l) = cn(s.zeta_h(k, l));
            }
    }
    if (classes & kApAp) {
        r.ap_ap.resize(r.Nr, static_cast<Eigen::Index>(r.M) * r.M * r.Nt);
        for (int rx = 0; rx < r.M; ++rx)
            for (int tx = 0; tx < r.M; ++tx) {
                ComplexGaussian cn(stream_key(block_seed, kTagQ, static_cast<std::uint64_t>(rx),
                                              static_cast<std::uint64_t>(tx)));
                const double var = s.zeta_q(rx, tx);
                auto blk = r.ap_ap.block(0, (rx * r.M + tx) * r.Nt, r.Nr, r.Nt);
                for (int i = 0; i < r.Nr; ++i)
                    for (int j = 0; j < r.Nt; ++j) blk(i, j) = cn(var);
            }
    }
}

ChannelRealization draw_channels(const Scenario& s, std::uint64_t block_seed, unsigned classes) {
    ChannelRealization r;
    draw_channels_into(r, s, block_seed, classes);
    return r;
}

double empirical_moment_check(const Scenario& s, int n_draws, std::uint64_t seed) {
    if (n_draws < 1) throw std::invalid_argument("n_draws must be >= 1");
    const int M = s.M(), K = s.K(), L = s.L();
    Eigen::MatrixXd pf = Eigen::MatrixXd::Zero(M, K), pfb = pf;
    Eigen::MatrixXd pg = Eigen::MatrixXd::Zero(M, L), pgb = pg;
    Eigen::MatrixXd ph = Eigen::MatrixXd::Zero(K, L);
    Eigen::MatrixXd pq = Eigen::MatrixXd::Zero(M, M);
    ChannelRealization r;
    for (int b = 0; b < n_draws; ++b) {
        draw_channels_into(r, s, mix64(seed + static_cast<std::uint64_t>(b)));
        for (int m = 0; m < M; ++m) {
            for (int k = 0; k < K; ++k) {
                pf(m, k) += r.f(m, k).squaredNorm() / r.Nt;
                pfb(m, k) += r.f_bar(m, k).squaredNorm() / r.Nr;
            }
            for (int l = 0; l < L; ++l) {
                pg(m, l) += r.g(m, l).squaredNorm() / r.Nr;
                pgb(m, l) += r.g_bar(m, l).squaredNorm() / r.Nt;
            }
            for (int n = 0; n < M; ++n) pq(m, n) += r.q(m, n).squaredNorm() / (r.Nr * r.Nt);
        }
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l) ph(k, l) += std::norm(r.ue_ue(k, l));
    }
    double worst = 0.0;
    auto scan = [&](const Eigen::MatrixXd& acc, const Eigen::MatrixXd& zeta) {
        for (Eigen::Index i = 0; i < acc.rows(); ++i)
            for (Eigen::Index j = 0; j < acc.cols(); ++j) {
                const double est = acc(i, j) / n_draws;
                const double err = zeta(i, j) > 0.0 ? std::abs(est / zeta(i, j) - 1.0) : std::abs(est);
                worst = std::max(worst, err);
            }
    };
    scan(pf, s.zeta_f);
    scan(pfb, s.zeta_f);
    scan(pg, s.zeta_g);
    scan(pgb, s.zeta_g);
    scan(ph, s.zeta_h);
    scan(pq, s.zeta_q);
    return worst;
}

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'F', 'F', 'D', 'C', 'H', 'N', '1'};

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::array<unsigned char, sizeof(T)> b;
        std::memcpy(b.data(), &v, sizeof(T));
        std::reverse(b.begin(), b.end());
        std::memcpy(&v, b.data(), sizeof(T));
        return v;
    }
}

void put_u32(std::ostream& os, std::uint32_t v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::ostream& os, double v) {
    std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated realization");
    return to_little(v);
}

double get_f64(std::istream& is) {
    std::uint64_t bits = 0;
    if (!is.read(reinterpret_cast<char*>(&bits), sizeof bits))
        throw std::runtime_error("truncated realization");
    return std::bit_cast<double>(to_little(bits));
}

void put_c(std::ostream& os, std::complex<double> z) {
    put_f64(os, z.real());
    put_f64(os, z.imag());
}

std::complex<double> get_c(std::istream& is) {
    const double re = get_f64(is);
    const double im = get_f64(is);
    return {re, im};
}

// Vector classes: row-major over (link_row, link_col, antenna) == column order of storage.
void put_cols(std::ostream& os, const Eigen::MatrixXcd& x) {
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        for (Eigen::Index a = 0; a < x.rows(); ++a) put_c(os, x(a, c));
}

void get_cols(std::istream& is, Eigen::MatrixXcd& x, Eigen::Index rows, Eigen::Index cols) {
    x.resize(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index a = 0; a < rows; ++a) x(a, c) = get_c(is);
}

}  // namespace

void write_realization(std::ostream& os, const ChannelRealization& r) {
    os.write(kMagic.data(), kMagic.size());
    for (int d : {r.M, r.K, r.L, r.Nt, r.Nr}) put_u32(os, static_cast<std::uint32_t>(d));
    put_cols(os, r.dl_tx);
    put_cols(os, r.dl_rx);
    put_cols(os, r.ul_rx);
    put_cols(os, r.ul_tx);
    for (int k = 0; k < r.K; ++k)
        for (int l = 0; l < r.L; ++l) put_c(os, r.ue_ue(k, l));
    for (int rx = 0; rx < r.M; ++rx)
        for (int tx = 0; tx < r.M; ++tx) {
            auto blk = r.q(rx, tx);
            for (int i = 0; i < r.Nr; ++i)
                for (int j = 0; j < r.Nt; ++j) put_c(os, blk(i, j));
        }
}

ChannelRealization read_realization(std::istream& is) {
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kMagic)
        throw std::runtime_error("not a channel realization file");
    ChannelRealization r;
    r.M = static_cast<int>(get_u32(is));
    r.K = static_cast<int>(get_u32(is));
    r.L = static_cast<int>(get_u32(is));
    r.Nt = static_cast<int>(get_u32(is));
    r.Nr = static_cast<int>(get_u32(is));
    get_cols(is, r.dl_tx, r.Nt, static_cast<Eigen::Index>(r.M) * r.K);
    get_cols(is, r.dl_rx, r.Nr, static_cast<Eigen::Index>(r.M) * r.K);
    get_cols(is, r.ul_rx, r.Nr, static_cast<Eigen::Index>(r.M) * r.L);
    get_cols(is, r.ul_tx, r.Nt, static_cast<Eigen::Index>(r.M) * r.L);
    r.ue_ue.resize(r.K, r.L);
    for (int k = 0; k < r.K; ++k)
        for (int l = 0; l < r.L; ++l) r.ue_ue(k, l) = get_c(is);
    r.ap_ap.resize(r.Nr, static_cast<Eigen::Index>(r.M) * r.M * r.Nt);
    for (int rx = 0; rx < r.M; ++rx)
        for (int tx = 0; tx < r.M; ++tx)
            for (int i = 0; i < r.Nr; ++i)
                for (int j = 0; j < r.Nt; ++j) r.ap_ap(i, (rx * r.M + tx) * r.Nt + j) = get_c(is);
    return r;
}

}  // namespace cffd
