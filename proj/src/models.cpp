#include "synchrotherm/models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace synchrotherm::models {

namespace {

constexpr int kMaxEnumeratedLevels = 500000;

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

std::vector<int> index_key(int p, std::span<const int> n) {
    std::vector<int> key;
    key.reserve(n.size() + 1);
    key.push_back(p);
    key.insert(key.end(), n.begin(), n.end());
    return key;
}

void enumerate_box(const NDModelSpec& spec, int p, std::vector<int>& n, int mode,
                   double osc_energy, std::vector<CompositeLevel>& out) {
    const int m_modes = spec.n_modes();
    if (mode == m_modes) {
        CompositeLevel level;
        level.p = p;
        level.n = n;
        level.energy = osc_energy + spec.level_energies(p);
        for (int i = 0; i < m_modes; ++i) {
            const double xi = spec.couplings(p, i);
            level.energy -= xi * xi / spec.osc_freqs(i);
        }
        out.push_back(std::move(level));
        return;
    }
    for (int k = 0; k <= spec.trunc.n_max; ++k) {
        const double e = osc_energy + k * spec.osc_freqs(mode);
        if (spec.energy_cap && e > *spec.energy_cap) break;
        n[mode] = k;
        enumerate_box(spec, p, n, mode + 1, e, out);
    }
    n[mode] = 0;
}

}  // namespace

void NDModelSpec::validate() const {
    if (n_levels() < 2) {
        throw ValidationError("ND model requires at least two levels");
    }
    if (n_modes() < 1) {
        throw ValidationError("ND model requires at least one oscillator");
    }
    for (int i = 0; i < n_modes(); ++i) {
        if (!(osc_freqs(i) > 0.0)) {
            std::ostringstream msg;
            msg << "osc_freqs[" << i << "] must be > 0, got " << osc_freqs(i);
            throw ValidationError(msg.str());
        }
    }
    if (couplings.rows() != n_levels() || couplings.cols() != n_modes()) {
        std::ostringstream msg;
        msg << "couplings must be " << n_levels() << "x" << n_modes() << ", got "
            << couplings.rows() << "x" << couplings.cols();
        throw ValidationError(msg.str());
    }
    trunc.validate();
    const double box = static_cast<double>(n_levels()) *
                       std::pow(trunc.n_max + 1.0, static_cast<double>(n_modes()));
    if (!energy_cap && box > kMaxEnumeratedLevels) {
        std::ostringstream msg;
        msg << "Fock box of " << box << " levels exceeds the enumeration cap "
            << kMaxEnumeratedLevels << "; set an energy_cap";
        throw ValidationError(msg.str());
    }
}

AnalyticEigensystem::AnalyticEigensystem(NDModelSpec spec, std::vector<CompositeLevel> levels,
                                         RealMatrix displacements,
                                         RealVector shifted_energies)
    : spec_(std::move(spec)),
      levels_(std::move(levels)),
      displacements_(std::move(displacements)),
      shifted_energies_(std::move(shifted_energies)) {
    index_.reserve(levels_.size());
    for (int k = 0; k < dim(); ++k) {
        index_.emplace_back(index_key(levels_[k].p, levels_[k].n), k);
    }
    std::sort(index_.begin(), index_.end());
}

RealVector AnalyticEigensystem::energies() const {
    RealVector e(dim());
    for (int k = 0; k < dim(); ++k) e(k) = levels_[k].energy;
    return e;
}

int AnalyticEigensystem::index_of(int p, std::span<const int> n) const {
    const auto key = index_key(p, n);
    const auto it = std::lower_bound(
        index_.begin(), index_.end(), key,
        [](const auto& entry, const std::vector<int>& k) { return entry.first < k; });
    if (it == index_.end() || it->first != key) return -1;
    return it->second;
}

AnalyticEigensystem build_nd_model(const NDModelSpec& spec) {
    spec.validate();
    const int n_levels = spec.n_levels();
    const int m_modes = spec.n_modes();

    RealMatrix displacements(n_levels, m_modes);
    RealVector shifted = spec.level_energies;
    for (int p = 0; p < n_levels; ++p) {
        for (int i = 0; i < m_modes; ++i) {
            const double xi = spec.couplings(p, i);
            displacements(p, i) = xi / spec.osc_freqs(i);
            shifted(p) -= xi * xi / spec.osc_freqs(i);
        }
    }

    std::vector<CompositeLevel> levels;
    std::vector<int> scratch(m_modes, 0);
    for (int p = 0; p < n_levels; ++p) {
        enumerate_box(spec, p, scratch, 0, 0.0, levels);
        if (static_cast<int>(levels.size()) > kMaxEnumeratedLevels) {
            throw ValidationError("Fock box enumeration exceeded the level cap");
        }
    }
    std::stable_sort(levels.begin(), levels.end(),
                     [](const CompositeLevel& a, const CompositeLevel& b) {
                         if (a.energy != b.energy) return a.energy < b.energy;
                         if (a.p != b.p) return a.p < b.p;
                         return a.n < b.n;
                     });
    return AnalyticEigensystem(spec, std::move(levels), std::move(displacements),
                               std::move(shifted));
}

std::vector<EffectiveCoupling> effective_couplings(const AnalyticEigensystem& eig) {
    const auto& spec = eig.spec();
    const auto& levels = eig.levels();
    const int m_modes = spec.n_modes();

    // Highest Fock level actually enumerated, per mode.
    std::vector<int> max_level(m_modes, 0);
    for (const auto& level : levels) {
        for (int i = 0; i < m_modes; ++i) max_level[i] = std::max(max_level[i], level.n[i]);
    }

    // One certified table per (branch pair, mode).
    std::map<std::tuple<int, int, int>, fock::FranckCondonTable> tables;
    for (int p = 0; p < spec.n_levels(); ++p) {
        for (int q = p + 1; q < spec.n_levels(); ++q) {
            for (int i = 0; i < m_modes; ++i) {
                const double dalpha = eig.displacements()(p, i) - eig.displacements()(q, i);
                try {
                    tables.emplace(std::make_tuple(p, q, i),
                                   fock::certified_displacement_table(dalpha, max_level[i],
                                                                      spec.trunc.leakage_tol));
                } catch (const TruncationError& err) {
                    std::ostringstream msg;
                    msg << "effective_couplings: level (p=" << p << ", n_" << i << "="
                        << max_level[i] << ") vs branch q=" << q << ": " << err.what();
                    throw TruncationError(msg.str());
                }
            }
        }
    }

    std::vector<EffectiveCoupling> out;
    const int dim = eig.dim();
    for (int a = 0; a < dim; ++a) {
        for (int b = a + 1; b < dim; ++b) {
            const auto& la = levels[a];
            const auto& lb = levels[b];
            if (la.p == lb.p) continue;
            double weight = 1.0;
            const bool ordered = la.p < lb.p;
            const int p = std::min(la.p, lb.p);
            const int q = std::max(la.p, lb.p);
            for (int i = 0; i < m_modes && weight != 0.0; ++i) {
                const auto& table = tables.at(std::make_tuple(p, q, i));
                // table(n, m) = <n|D(alpha_p - alpha_q)|m>; the reversed branch
                // order is the transpose.
                weight *= ordered ? table.value(la.n[i], lb.n[i])
                                  : table.value(lb.n[i], la.n[i]);
            }
            if (weight != 0.0) {
                out.push_back({a, b, weight});
            }
        }
    }
    return out;
}

void DispersiveSpec::validate() const {
    if (!(resonator_freq > 0.0)) {
        throw ValidationError("dispersive model requires resonator_freq > 0");
    }
    trunc.validate();
}

DispersiveModel build_dispersive(const DispersiveSpec& spec) {
    spec.validate();
    const int n_fock = spec.trunc.n_max + 1;
    const int dim = 2 * n_fock;

    struct Entry {
        int p, n;
        double energy;
    };
    std::vector<Entry> entries;
    entries.reserve(dim);
    for (int p = 0; p < 2; ++p) {
        const double sz = 1.0 - 2.0 * p;  // sigma_z eigenvalue
        for (int n = 0; n < n_fock; ++n) {
            const double energy = -0.5 * spec.qubit_gap * sz + spec.resonator_freq * n +
                                  spec.dispersive_shift * sz * n;
            entries.push_back({p, n, energy});
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.energy != b.energy) return a.energy < b.energy;
        if (a.p != b.p) return a.p < b.p;
        return a.n < b.n;
    });

    DispersiveModel model;
    model.basis.energies.resize(dim);
    model.basis.vectors = ComplexMatrix::Zero(dim, dim);
    model.basis.labels.resize(dim);
    for (int k = 0; k < dim; ++k) {
        model.basis.energies(k) = entries[k].energy;
        model.basis.vectors(entries[k].p * n_fock + entries[k].n, k) = 1.0;
        model.basis.labels[k] = LevelLabel{entries[k].p, {entries[k].n}};
    }

    // sigma_x (x) 1 in the sorted eigenbasis: product states are eigenstates,
    // so the transform is a pure reindexing.
    model.coupling = ComplexMatrix::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) {
        for (int l = 0; l < dim; ++l) {
            if (entries[k].n == entries[l].n && entries[k].p != entries[l].p) {
                model.coupling(k, l) = 1.0;
            }
        }
    }
    return model;
}

std::pair<HermitianOperator, std::vector<HermitianOperator>> build_generic_composite(
    const HermitianOperator& h_a, const HermitianOperator& h_b,
    const HermitianOperator& v_ab, const std::vector<HermitianOperator>& a_ops) {
    const int dim_a = h_a.dim();
    const int dim_b = h_b.dim();
    if (v_ab.dim() != dim_a * dim_b) {
        std::ostringstream msg;
        msg << "V_ab must act on the " << dim_a << "x" << dim_b
            << " product space, got dim " << v_ab.dim();
        throw ValidationError(msg.str());
    }
    const ComplexMatrix eye_a = ComplexMatrix::Identity(dim_a, dim_a);
    const ComplexMatrix eye_b = ComplexMatrix::Identity(dim_b, dim_b);

    ComplexMatrix h_s = kron(h_a.entries(), eye_b) + kron(eye_a, h_b.entries()) +
                        v_ab.entries();
    std::vector<HermitianOperator> channels;
    channels.reserve(a_ops.size());
    for (const auto& a : a_ops) {
        if (a.dim() != dim_a) {
            std::ostringstream msg;
            msg << "coupling operator dim " << a.dim() << " does not match subsystem a dim "
                << dim_a;
            throw ValidationError(msg.str());
        }
        channels.emplace_back(kron(a.entries(), eye_b));
    }
    return {HermitianOperator(std::move(h_s)), std::move(channels)};
}

HermitianOperator nd_level_coupling(int n_levels) {
    if (n_levels < 2) {
        throw ValidationError("nd_level_coupling requires at least two levels");
    }
    ComplexMatrix a = ComplexMatrix::Ones(n_levels, n_levels);
    a.diagonal().setZero();
    return HermitianOperator(std::move(a));
}

std::pair<HermitianOperator, HermitianOperator> nd_dense_composite(const NDModelSpec& spec) {
    spec.validate();
    if (spec.n_modes() != 1) {
        throw ValidationError("nd_dense_composite supports a single oscillator only");
    }
    const int n_levels = spec.n_levels();
    const int n_fock = spec.trunc.n_max + 1;

    ComplexMatrix h_osc = ComplexMatrix::Zero(n_fock, n_fock);
    ComplexMatrix quadrature = ComplexMatrix::Zero(n_fock, n_fock);  // a + adag
    for (int n = 0; n < n_fock; ++n) {
        h_osc(n, n) = spec.osc_freqs(0) * n;
        if (n + 1 < n_fock) {
            const double root = std::sqrt(static_cast<double>(n + 1));
            quadrature(n, n + 1) = root;
            quadrature(n + 1, n) = root;
        }
    }

    ComplexMatrix v = ComplexMatrix::Zero(n_levels * n_fock, n_levels * n_fock);
    for (int p = 0; p < n_levels; ++p) {
        v.block(p * n_fock, p * n_fock, n_fock, n_fock) = spec.couplings(p, 0) * quadrature;
    }

    auto [h_s, channels] = build_generic_composite(
        HermitianOperator::diagonal(spec.level_energies),
        HermitianOperator(std::move(h_osc)), HermitianOperator(std::move(v)),
        {nd_level_coupling(n_levels)});
    return {std::move(h_s), std::move(channels.front())};
}

}  // namespace synchrotherm::models
