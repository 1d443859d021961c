// spectral_core.hpp — dense Hermitian operators, eigendecomposition, and the
// frequency-resolved decomposition of coupling operators in the eigenbasis.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "synchrotherm/errors.hpp"

namespace synchrotherm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermiticityTol = 1e-12;   // relative Frobenius norm
inline constexpr double kUnitarityTol = 1e-10;
inline constexpr double kEigenResidualTol = 1e-9;  // times ||H||

// Dense Hermitian operator. Energy units with hbar = 1 throughout; all
// frequencies are angular frequencies.
class HermitianOperator {
public:
    // Validates Hermiticity to kHermiticityTol (relative Frobenius norm).
    explicit HermitianOperator(ComplexMatrix entries);

    static HermitianOperator diagonal(const RealVector& energies);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const ComplexMatrix& entries() const { return entries_; }

private:
    ComplexMatrix entries_;
};

// Structured level label (p, n vector) attached by the analytic model builders.
struct LevelLabel {
    int p = 0;
    std::vector<int> n;

    friend bool operator==(const LevelLabel&, const LevelLabel&) = default;
};

// Eigenvalues and eigenvectors of a composite Hamiltonian. Energies ascending,
// eigenvector columns unitary, phases fixed so the first significant component
// of each column is real positive.
struct EigenBasis {
    RealVector energies;
    ComplexMatrix vectors;
    std::vector<LevelLabel> labels;  // empty unless a model attaches them

    int dim() const { return static_cast<int>(energies.size()); }
};

// One frequency-resolved piece of a coupling operator, expressed in the
// eigenbasis: only elements (m, n) with e_n - e_m in this component's bin.
struct SpectralComponent {
    double frequency = 0.0;
    ComplexMatrix op;
};

// System-side coupling operator plus its frequency-resolved components.
struct CouplingChannel {
    HermitianOperator op;                       // original basis
    std::vector<SpectralComponent> components;  // eigenbasis
};

// Dense Hermitian eigendecomposition with deterministic ordering: ascending
// energy, ties broken lexicographically on the phase-fixed eigenvectors.
EigenBasis eigendecompose(const HermitianOperator& H);

// Default binning tolerance for spectral_decompose: 1e-9 * max|e|.
double default_freq_tol(const EigenBasis& basis);

// Groups the eigenbasis matrix elements <m|A|n> of A by Bohr frequency
// w = e_n - e_m. Bins within freq_tol of one another are merged
// (single-linkage), so degenerate gaps land in one component.
std::vector<SpectralComponent> spectral_decompose(const HermitianOperator& A,
                                                  const EigenBasis& basis,
                                                  double freq_tol);

CouplingChannel make_channel(const HermitianOperator& A, const EigenBasis& basis,
                             double freq_tol);

inline CouplingChannel make_channel(const HermitianOperator& A, const EigenBasis& basis) {
    return make_channel(A, basis, default_freq_tol(basis));
}

}  // namespace synchrotherm
