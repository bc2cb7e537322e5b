// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <vector>

#include <omp.h>

namespace cffd {

enum class ExecPolicy { serial, parallel };

/// Blocks per reduction chunk. Chunk boundaries depend only on the block
/// count, so the parallel result is identical for any thread count.
inline constexpr std::int64_t kReduceChunk = 64;

/// Deterministic map-reduce over block indices [0, n).
///
/// `Acc` must be copyable and provide `void merge(const Acc&)`.
/// `fn(Acc&, std::int64_t block)` accumulates one block.
///
/// serial:   one accumulator, blocks visited in order (reference path).
/// parallel: one accumulator per fixed-size chunk, chunks filled by OpenMP
///           workers, then merged in chunk order.
template <class Acc, class MakeAcc, class BlockFn>
Acc reduce_blocks(std::int64_t n, ExecPolicy policy, MakeAcc make_acc, BlockFn fn) {
    if (policy == ExecPolicy::serial || n <= kReduceChunk) {
        Acc acc = make_acc();
        for (std::int64_t b = 0; b < n; ++b) fn(acc, b);
        return acc;
    }
    const std::int64_t n_chunks = (n + kReduceChunk - 1) / kReduceChunk;
    std::vector<Acc> partial;
    partial.reserve(static_cast<std::size_t>(n_chunks));
    for (std::int64_t c = 0; c < n_chunks; ++c) partial.push_back(make_acc());

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < n_chunks; ++c) {
        const std::int64_t lo = c * kReduceChunk;
        const std::int64_t hi = std::min(n, lo + kReduceChunk);
        for (std::int64_t b = lo; b < hi; ++b) fn(partial[static_cast<std::size_t>(c)], b);
    }

    Acc acc = std::move(partial.front());
    for (std::int64_t c = 1; c < n_chunks; ++c) acc.merge(partial[static_cast<std::size_t>(c)]);
    return acc;
}

/// Runs fn(i) for i in [0, n) across OpenMP workers. Results must be written to
/// per-index slots; the first exception (lowest index) is rethrown afterwards.
template <class Fn>
void parallel_for_indexed(std::int64_t n, Fn fn) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline void set_thread_count(int threads) {
    if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace cffd
