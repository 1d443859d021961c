// blockade.hpp — Franck-Condon blockade experiment: scaling of the maximal
// multi-Franck-Condon factor with the oscillator count M, and the
// least-squares slope of its exponential decay.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "synchrotherm/fock_displacement.hpp"

namespace synchrotherm::blockade {

struct BlockadeConfig {
    std::vector<int> m_values;  // ascending, >= 1
    int n_groups = 6;
    double range_lo = -4.0;     // uniform draw range for the displacements
    double range_hi = 4.0;
    std::uint64_t seed = 0;

    // Nested reuses one draw sequence per group, so factor(g, M+1) extends
    // factor(g, M) by one mode; Redraw samples every M afresh.
    enum class Sampling { Nested, Redraw };
    Sampling sampling = Sampling::Nested;

    int n_threads = 0;  // 0: SYNCHROTHERM_THREADS or hardware concurrency

    void validate() const;
};

struct GroupResult {
    std::vector<double> draws;        // displacement draws, in consumption order
    std::vector<double> log_factors;  // ln of the factor, aligned with m_values
};

struct BlockadeRun {
    BlockadeConfig config;
    fock::FockTruncation trunc;
    std::vector<GroupResult> groups;
};

// For each group g: draw displacements from a counter stream keyed (seed, g)
// and accumulate factor(g, M) = prod_{i <= M} max_fc_element(draw_i) in log
// space. Bit-identical across runs and thread counts.
BlockadeRun run_blockade(const BlockadeConfig& config, const fock::FockTruncation& trunc);

inline BlockadeRun run_blockade(const BlockadeConfig& config) {
    return run_blockade(config,
                        fock::default_truncation(std::max(std::abs(config.range_lo),
                                                          std::abs(config.range_hi))));
}

// Kernel of the nested mode, exposed so tests can force specific draws:
// log_factors[k] = sum_{i < m_values[k]} ln max_fc_element(draws[i]).
std::vector<double> nested_log_factors(std::span<const double> draws,
                                       std::span<const int> m_values,
                                       const fock::FockTruncation& trunc);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Ordinary least squares of log_factors against m_values.
SlopeFit fit_log_slope(std::span<const int> m_values, std::span<const double> log_factors);

}  // namespace synchrotherm::blockade
