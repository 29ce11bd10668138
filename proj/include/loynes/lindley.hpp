#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "loynes/errors.hpp"
#include "loynes/trace.hpp"

namespace loynes {

// Sums of consecutive non-overlapping blocks of increments,
// Y(i) = X((i-1)B+1) + ... + X(iB). The trailing n mod B increments do not
// form a full block and are dropped (and counted) so all blocks share one
// distribution.
struct BlockedTrace {
    std::size_t block_size = 1;
    std::vector<double> blocks;
    std::size_t dropped = 0;
};

// W(k) = [W(k-1) + X(k)]^+ over a raw span, W(0) = w0.
inline std::vector<double> lindley_recursion(std::span<const double> increments, double w0 = 0.0) {
    if (!(w0 >= 0.0))
        throw parameter_error("lindley_recursion: initial value must be >= 0");
    std::vector<double> waits;
    waits.reserve(increments.size());
    double w = w0;
    for (double x : increments) {
        w = std::max(0.0, w + x);
        waits.push_back(w);
    }
    return waits;
}

inline Trace lindley_recursion(const Trace &increments, double w0 = 0.0) {
    if (increments.kind != TraceKind::increments)
        throw parameter_error("lindley_recursion: input trace must hold increments");
    Trace waits;
    waits.values = lindley_recursion(std::span<const double>(increments.values), w0);
    waits.kind = TraceKind::waits;
    waits.origin = increments.origin;
    waits.seed = increments.seed;
    return waits;
}

inline BlockedTrace block_sums(std::span<const double> increments, std::size_t block_size) {
    if (block_size < 1)
        throw parameter_error("block_sums: block size must be >= 1");
    if (increments.size() < block_size)
        throw insufficient_data_error("block_sums: trace of length " +
                                      std::to_string(increments.size()) +
                                      " is shorter than one block of " +
                                      std::to_string(block_size));
    BlockedTrace out;
    out.block_size = block_size;
    const std::size_t n_blocks = increments.size() / block_size;
    out.blocks.reserve(n_blocks);
    for (std::size_t i = 0; i < n_blocks; ++i) {
        double sum = 0.0;
        for (std::size_t j = i * block_size; j < (i + 1) * block_size; ++j) sum += increments[j];
        out.blocks.push_back(sum);
    }
    out.dropped = increments.size() - n_blocks * block_size;
    return out;
}

inline BlockedTrace block_sums(const Trace &increments, std::size_t block_size) {
    if (increments.kind != TraceKind::increments)
        throw parameter_error("block_sums: input trace must hold increments");
    return block_sums(std::span<const double>(increments.values), block_size);
}

// S(k) = X(1) + ... + X(k).
inline std::vector<double> partial_sums(std::span<const double> increments) {
    if (increments.empty())
        throw insufficient_data_error("partial_sums: empty trace");
    std::vector<double> sums;
    sums.reserve(increments.size());
    double acc = 0.0;
    for (double x : increments) {
        acc += x;
        sums.push_back(acc);
    }
    return sums;
}

inline std::vector<double> partial_sums(const Trace &increments) {
    return partial_sums(std::span<const double>(increments.values));
}

} // namespace loynes
