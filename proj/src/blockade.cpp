#include "synchrotherm/blockade.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "synchrotherm/rng.hpp"

namespace synchrotherm::blockade {

namespace {

int resolve_thread_count(int requested, int n_jobs) {
    int count = requested;
    if (count <= 0) {
        if (const char* env = std::getenv("SYNCHROTHERM_THREADS")) {
            count = std::atoi(env);
        }
    }
    if (count <= 0) {
        count = static_cast<int>(std::thread::hardware_concurrency());
    }
    return std::clamp(count, 1, std::max(n_jobs, 1));
}

double log_max_fc(double dalpha, const fock::FockTruncation& trunc) {
    return std::log(fock::max_fc_element(dalpha, trunc).value);
}

GroupResult evaluate_group(const BlockadeConfig& config, const fock::FockTruncation& trunc,
                           int group) {
    const rng::CounterStream stream(config.seed, static_cast<std::uint64_t>(group));
    const int max_m = config.m_values.back();

    GroupResult result;
    if (config.sampling == BlockadeConfig::Sampling::Nested) {
        result.draws.reserve(max_m);
        for (int i = 0; i < max_m; ++i) {
            result.draws.push_back(
                stream.uniform_at(static_cast<std::uint64_t>(i), config.range_lo,
                                  config.range_hi));
        }
        result.log_factors = nested_log_factors(result.draws, config.m_values, trunc);
    } else {
        // Redraw: fresh displacements per requested M, on disjoint counter
        // blocks so the draws stay independent of evaluation order.
        result.log_factors.reserve(config.m_values.size());
        for (std::size_t mi = 0; mi < config.m_values.size(); ++mi) {
            const std::uint64_t base = (static_cast<std::uint64_t>(mi) + 1) << 32;
            double log_factor = 0.0;
            for (int i = 0; i < config.m_values[mi]; ++i) {
                const double draw = stream.uniform_at(base + static_cast<std::uint64_t>(i),
                                                      config.range_lo, config.range_hi);
                result.draws.push_back(draw);
                log_factor += log_max_fc(draw, trunc);
            }
            result.log_factors.push_back(log_factor);
        }
    }
    return result;
}

}  // namespace

void BlockadeConfig::validate() const {
    if (m_values.empty()) {
        throw ValidationError("blockade requires a nonempty list of M values");
    }
    for (std::size_t i = 0; i < m_values.size(); ++i) {
        if (m_values[i] < 1 || (i > 0 && m_values[i] <= m_values[i - 1])) {
            throw ValidationError("blockade M values must be ascending and >= 1");
        }
    }
    if (n_groups < 1) {
        throw ValidationError("blockade requires at least one sample group");
    }
    if (!(range_lo < range_hi)) {
        std::ostringstream msg;
        msg << "blockade displacement range (" << range_lo << ", " << range_hi
            << ") must satisfy lo < hi";
        throw ValidationError(msg.str());
    }
}

std::vector<double> nested_log_factors(std::span<const double> draws,
                                       std::span<const int> m_values,
                                       const fock::FockTruncation& trunc) {
    if (m_values.empty() || draws.size() < static_cast<std::size_t>(m_values.back())) {
        throw ValidationError("nested_log_factors requires a draw per mode up to max M");
    }
    std::vector<double> prefix(draws.size() + 1, 0.0);
    for (std::size_t i = 0; i < draws.size(); ++i) {
        prefix[i + 1] = prefix[i] + log_max_fc(draws[i], trunc);
    }
    std::vector<double> out;
    out.reserve(m_values.size());
    for (const int m : m_values) {
        out.push_back(prefix[static_cast<std::size_t>(m)]);
    }
    return out;
}

BlockadeRun run_blockade(const BlockadeConfig& config, const fock::FockTruncation& trunc) {
    config.validate();
    trunc.validate();

    BlockadeRun run;
    run.config = config;
    run.trunc = trunc;
    run.groups.resize(config.n_groups);

    const int n_threads = resolve_thread_count(config.n_threads, config.n_groups);
    if (n_threads == 1) {
        for (int g = 0; g < config.n_groups; ++g) {
            run.groups[g] = evaluate_group(config, trunc, g);
        }
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_threads);
        for (int w = 0; w < n_threads; ++w) {
            workers.emplace_back([&, w] {
                for (int g = w; g < config.n_groups; g += n_threads) {
                    run.groups[g] = evaluate_group(config, trunc, g);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }
    return run;
}

SlopeFit fit_log_slope(std::span<const int> m_values, std::span<const double> log_factors) {
    if (m_values.size() != log_factors.size()) {
        throw ValidationError("fit_log_slope requires matching lengths");
    }
    const std::size_t n = m_values.size();
    if (n < 3) {
        throw ValidationError("fit_log_slope requires at least 3 points");
    }
    double mean_m = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_m += m_values[i];
        mean_y += log_factors[i];
    }
    mean_m /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);

    double var_m = 0.0, cov = 0.0, var_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dm = m_values[i] - mean_m;
        const double dy = log_factors[i] - mean_y;
        var_m += dm * dm;
        cov += dm * dy;
        var_y += dy * dy;
    }

    SlopeFit fit;
    fit.slope = cov / var_m;
    fit.intercept = mean_y - fit.slope * mean_m;
    if (var_y == 0.0) {
        fit.r_squared = 1.0;  // constant data fits its own mean exactly
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double predicted = fit.intercept + fit.slope * m_values[i];
            const double residual = log_factors[i] - predicted;
            ss_res += residual * residual;
        }
        fit.r_squared = 1.0 - ss_res / var_y;
    }
    return fit;
}

}  // namespace synchrotherm::blockade
