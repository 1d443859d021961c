#include "synchrotherm/fock_displacement.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace synchrotherm::fock {

namespace {

constexpr int kSearchCap = 2048;  // dimensions beyond desk scale are out of scope

// Fills entries(n+k, n) and entries(n, n+k) for one diagonal offset k >= 0,
// walking the associated Laguerre recurrence upward in degree:
//   <n+k|D(a)|n> = sqrt(n!/(n+k)!) a^k e^{-x/2} L_n^{(k)}(x),  x = a^2,
//   <n|D(a)|n+k> = (-1)^k <n+k|D(a)|n>.
// Laguerre values are carried with an explicit scale factor so the recurrence
// cannot overflow even at large k and x; the assembled entry is formed in log
// space and clamped to [-1, 1] (overlaps of unit vectors).
void fill_offset_diagonal(Eigen::MatrixXd& entries, double alpha, int k) {
    const int n_max = static_cast<int>(entries.rows()) - 1;
    const double x = alpha * alpha;
    const double sign_a = alpha >= 0.0 ? 1.0 : -1.0;
    const double dir_sign = (k % 2 == 0) ? 1.0 : -1.0;  // D(a) vs D(-a) parity

    double l_prev = 0.0;       // L_{n-1}^{(k)}(x), scaled
    double l_curr = 1.0;       // L_n^{(k)}(x), scaled
    double log_scale = 0.0;    // log of the factor divided out so far

    for (int n = 0; n + k <= n_max; ++n) {
        if (n >= 1) {
            const int i = n - 1;
            const double next =
                ((2.0 * i + k + 1.0 - x) * l_curr - (i + k) * l_prev) / (i + 1.0);
            l_prev = l_curr;
            l_curr = next;
            const double mag = std::max(std::abs(l_curr), std::abs(l_prev));
            if (mag > 1e200) {
                l_curr *= 1e-200;
                l_prev *= 1e-200;
                log_scale += std::log(1e200);
            }
        }
        const int m = n + k;
        double value = 0.0;
        if (l_curr != 0.0) {
            const double log_pref = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)) +
                                    k * std::log(std::abs(alpha)) - 0.5 * x;
            const double log_mag = log_pref + std::log(std::abs(l_curr)) + log_scale;
            const double sign = (sign_a > 0 || k % 2 == 0 ? 1.0 : -1.0) *
                                (l_curr >= 0.0 ? 1.0 : -1.0);
            value = sign * std::exp(log_mag);
            value = std::clamp(value, -1.0, 1.0);
        }
        entries(m, n) = value;
        entries(n, m) = dir_sign * value;
    }
}

Eigen::VectorXd column_leakage(const Eigen::MatrixXd& entries) {
    const Eigen::Index cols = entries.cols();
    Eigen::VectorXd leakage(cols);
    for (Eigen::Index n = 0; n < cols; ++n) {
        leakage(n) = std::max(0.0, 1.0 - entries.col(n).squaredNorm());
    }
    return leakage;
}

void require_certified(const FranckCondonTable& table, int level) {
    if (!table.column_certified(level)) {
        const int needed = required_n_max(table.alpha(), level, table.leakage_tol());
        std::ostringstream msg;
        msg << "Fock level " << level << " is not certified at n_max = " << table.n_max()
            << " for displacement " << table.alpha() << " (leakage "
            << table.leakage()(level) << " > " << table.leakage_tol() << "); requires n_max >= ";
        if (needed >= 0) {
            msg << needed;
        } else {
            msg << "more than the search cap " << kSearchCap;
        }
        throw TruncationError(msg.str());
    }
}

}  // namespace

void FockTruncation::validate() const {
    if (n_max < 1) {
        throw ValidationError("FockTruncation requires n_max >= 1");
    }
    if (!(leakage_tol > 0.0 && leakage_tol < 1.0)) {
        throw ValidationError("FockTruncation requires leakage_tol in (0, 1)");
    }
}

FockTruncation default_truncation(double max_abs_alpha) {
    const double a = std::abs(max_abs_alpha);
    return FockTruncation{static_cast<int>(std::ceil(4.0 * a * a)) + 20, 1e-6};
}

FranckCondonTable::FranckCondonTable(double alpha, Eigen::MatrixXd entries,
                                     Eigen::VectorXd leakage, double leakage_tol)
    : alpha_(alpha),
      entries_(std::move(entries)),
      leakage_(std::move(leakage)),
      leakage_tol_(leakage_tol) {}

FranckCondonTable displacement_matrix(double alpha, const FockTruncation& trunc) {
    trunc.validate();
    const int dim = trunc.n_max + 1;
    if (alpha == 0.0) {
        return FranckCondonTable(alpha, Eigen::MatrixXd::Identity(dim, dim),
                                 Eigen::VectorXd::Zero(dim), trunc.leakage_tol);
    }
    Eigen::MatrixXd entries(dim, dim);
    for (int k = 0; k <= trunc.n_max; ++k) {
        fill_offset_diagonal(entries, alpha, k);
    }
    Eigen::VectorXd leakage = column_leakage(entries);
    return FranckCondonTable(alpha, std::move(entries), std::move(leakage),
                             trunc.leakage_tol);
}

int required_n_max(double dalpha, int level, double leakage_tol) {
    FockTruncation probe{std::max(level + 1, 8), leakage_tol};
    while (probe.n_max <= kSearchCap) {
        const auto table = displacement_matrix(dalpha, probe);
        if (table.column_certified(level)) {
            // Tighten from the probe to the smallest adequate n_max: the column
            // mass inside 0..n is monotone in n, so scan the partial sums.
            double mass = 0.0;
            for (int m = 0; m <= probe.n_max; ++m) {
                mass += table.value(m, level) * table.value(m, level);
                if (1.0 - mass <= leakage_tol) return std::max(m, level);
            }
            return probe.n_max;
        }
        probe.n_max = probe.n_max * 2 + 16;
    }
    return -1;
}

double franck_condon(int n, double alpha_p, int m, double alpha_q,
                     const FockTruncation& trunc) {
    trunc.validate();
    if (n < 0 || m < 0) {
        throw ValidationError("franck_condon requires nonnegative Fock levels");
    }
    if (n > trunc.n_max || m > trunc.n_max) {
        std::ostringstream msg;
        msg << "requested Fock levels (" << n << ", " << m << ") exceed n_max = "
            << trunc.n_max << "; requires n_max >= " << std::max(n, m);
        throw TruncationError(msg.str());
    }
    const double dalpha = alpha_p - alpha_q;
    if (dalpha == 0.0) {
        return n == m ? 1.0 : 0.0;
    }
    const auto table = displacement_matrix(dalpha, trunc);
    // Row mass equals column mass (|<n|D|m>| is swap-symmetric), so certifying
    // both indices as columns certifies the (n, m) query.
    require_certified(table, n);
    require_certified(table, m);
    return table.value(n, m);
}

double multi_fc_factor(std::span<const int> n_vec, std::span<const int> m_vec,
                       std::span<const double> dalpha_vec, const FockTruncation& trunc) {
    if (n_vec.size() != m_vec.size() || n_vec.size() != dalpha_vec.size() ||
        n_vec.empty()) {
        std::ostringstream msg;
        msg << "multi_fc_factor requires equal nonempty lengths, got " << n_vec.size()
            << ", " << m_vec.size() << ", " << dalpha_vec.size();
        throw ValidationError(msg.str());
    }
    double log_product = 0.0;
    for (std::size_t i = 0; i < n_vec.size(); ++i) {
        const double overlap = franck_condon(n_vec[i], dalpha_vec[i], m_vec[i], 0.0, trunc);
        if (overlap == 0.0) return 0.0;
        log_product += 2.0 * std::log(std::abs(overlap));
    }
    return std::exp(log_product);
}

FranckCondonTable certified_displacement_table(double dalpha, int max_level,
                                               double leakage_tol) {
    FockTruncation probe{std::max({max_level + 1,
                                   default_truncation(dalpha).n_max, 8}),
                         leakage_tol};
    while (probe.n_max <= kSearchCap) {
        auto table = displacement_matrix(dalpha, probe);
        bool covered = true;
        for (int n = 0; n <= max_level; ++n) {
            if (!table.column_certified(n)) {
                covered = false;
                break;
            }
        }
        if (covered) return table;
        probe.n_max = probe.n_max * 2 + 16;
    }
    std::ostringstream msg;
    msg << "displacement " << dalpha << " cannot certify Fock levels up to " << max_level
        << " within the search cap " << kSearchCap;
    throw TruncationError(msg.str());
}

MaxFcElement max_fc_element(double dalpha, const FockTruncation& trunc) {
    const auto table = displacement_matrix(dalpha, trunc);
    MaxFcElement best;
    best.value = -1.0;
    for (int m = 0; m <= trunc.n_max; ++m) {
        if (!table.column_certified(m)) continue;
        for (int n = 0; n <= trunc.n_max; ++n) {
            if (!table.column_certified(n)) continue;
            const double v = table.value(m, n) * table.value(m, n);
            if (v > best.value) {
                best = {v, m, n};
            }
        }
    }
    if (best.value < 0.0) {
        throw TruncationError("max_fc_element: no certified columns at this truncation");
    }
    return best;
}

}  // namespace synchrotherm::fock
