// models.hpp — constructors for the composite systems studied here: generic
// tensor-product composites, the non-demolition N-level x oscillators family
// with analytic displaced-Fock eigensystems, and the dispersive
// qubit-resonator example whose level graph is disconnected.

#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "synchrotherm/fock_displacement.hpp"
#include "synchrotherm/spectral_core.hpp"

namespace synchrotherm::models {

struct NDModelSpec {
    RealVector level_energies;        // eps_p, N >= 2
    RealVector osc_freqs;             // Omega_i > 0, M >= 1
    RealMatrix couplings;             // N x M, xi(p, i)
    fock::FockTruncation trunc;       // per-mode Fock cutoff
    std::optional<double> energy_cap; // optional cap on sum_i n_i Omega_i

    int n_levels() const { return static_cast<int>(level_energies.size()); }
    int n_modes() const { return static_cast<int>(osc_freqs.size()); }
    void validate() const;
};

struct CompositeLevel {
    int p = 0;
    std::vector<int> n;  // one quantum number per mode
    double energy = 0.0;
};

// Analytic eigensystem of the non-demolition model:
//   E(p, nvec) = sum_i n_i Omega_i + eps_p - sum_i xi(p,i)^2 / Omega_i,
//   alpha(p, i) = xi(p, i) / Omega_i.
// Levels are sorted ascending in energy, ties broken by (p, nvec).
class AnalyticEigensystem {
public:
    AnalyticEigensystem(NDModelSpec spec, std::vector<CompositeLevel> levels,
                        RealMatrix displacements, RealVector shifted_energies);

    const NDModelSpec& spec() const { return spec_; }
    const std::vector<CompositeLevel>& levels() const { return levels_; }
    const RealMatrix& displacements() const { return displacements_; }
    const RealVector& shifted_energies() const { return shifted_energies_; }

    int dim() const { return static_cast<int>(levels_.size()); }
    RealVector energies() const;
    int index_of(int p, std::span<const int> n) const;  // -1 if absent

private:
    NDModelSpec spec_;
    std::vector<CompositeLevel> levels_;
    RealMatrix displacements_;
    RealVector shifted_energies_;
    std::vector<std::pair<std::vector<int>, int>> index_;  // (p-prefixed key, level)
};

AnalyticEigensystem build_nd_model(const NDModelSpec& spec);

// Franck-Condon weighted coupling between two composite levels with p != q:
//   weight = prod_i <n_i | D(alpha(p,i) - alpha(q,i)) | m_i>.
// Pairs with identical branch index carry no system-bath coupling and are
// absent. Stored once per unordered pair, i < j.
struct EffectiveCoupling {
    int i = 0;
    int j = 0;
    double weight = 0.0;
};

std::vector<EffectiveCoupling> effective_couplings(const AnalyticEigensystem& eig);

struct DispersiveSpec {
    double qubit_gap = 1.0;         // eps_Q
    double resonator_freq = 1.0;    // w_L > 0
    double dispersive_shift = 0.0;  // g
    fock::FockTruncation trunc;

    void validate() const;
};

// Dispersive qubit-resonator model. With sigma_z |p> = (1 - 2p)|p>:
//   E(p, n) = -(eps_Q / 2)(1 - 2p) + w_L n + g (1 - 2p) n.
// The coupling sigma_x (x) 1 connects levels only within a fixed photon
// number n; `coupling` is its matrix in the sorted eigenbasis.
struct DispersiveModel {
    EigenBasis basis;        // labels carry (p, [n])
    ComplexMatrix coupling;
};

DispersiveModel build_dispersive(const DispersiveSpec& spec);

// Kronecker composition with the subsystem-a index slow: returns
// H_S = H_a (x) 1 + 1 (x) H_b + V_ab and every channel promoted as A (x) 1_b.
std::pair<HermitianOperator, std::vector<HermitianOperator>> build_generic_composite(
    const HermitianOperator& h_a, const HermitianOperator& h_b,
    const HermitianOperator& v_ab, const std::vector<HermitianOperator>& a_ops);

// Bath-side coupling of the N-level system: sum_{p > q} |p><q| + |q><p|
// with unit weights (the coupling strength lives in the bath spectrum).
HermitianOperator nd_level_coupling(int n_levels);

// Dense form of the single-oscillator non-demolition model on the truncated
// product space, for cross-checking the analytic eigensystem. M = 1 only.
std::pair<HermitianOperator, HermitianOperator> nd_dense_composite(const NDModelSpec& spec);

}  // namespace synchrotherm::models
