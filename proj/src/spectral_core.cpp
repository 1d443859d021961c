#include "synchrotherm/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace synchrotherm {

namespace {

// Relative scale below which a transformed matrix element is treated as zero
// when assigning it to a frequency bin.
constexpr double kElementDropTol = 1e-13;

void fix_column_phases(ComplexMatrix& vectors) {
    const int dim = static_cast<int>(vectors.rows());
    for (int k = 0; k < dim; ++k) {
        const double col_max = vectors.col(k).cwiseAbs().maxCoeff();
        if (col_max == 0.0) continue;
        for (int i = 0; i < dim; ++i) {
            const Complex v = vectors(i, k);
            if (std::abs(v) > 1e-8 * col_max) {
                vectors.col(k) *= std::conj(v) / std::abs(v);
                break;
            }
        }
    }
}

// Lexicographic comparison of phase-fixed eigenvector columns, used only to
// break exact energy ties deterministically.
bool column_less(const ComplexMatrix& vectors, int a, int b) {
    for (int i = 0; i < vectors.rows(); ++i) {
        const Complex va = vectors(i, a);
        const Complex vb = vectors(i, b);
        if (va.real() != vb.real()) return va.real() < vb.real();
        if (va.imag() != vb.imag()) return va.imag() < vb.imag();
    }
    return false;
}

}  // namespace

HermitianOperator::HermitianOperator(ComplexMatrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
        std::ostringstream msg;
        msg << "HermitianOperator requires a square matrix with dim >= 1, got "
            << entries_.rows() << "x" << entries_.cols();
        throw ValidationError(msg.str());
    }
    const double norm = entries_.norm();
    const double asym_norm = (entries_ - entries_.adjoint().eval()).norm();
    if (asym_norm > kHermiticityTol * std::max(norm, 1.0)) {
        double max_asym = 0.0;
        int max_i = 0, max_j = 0;
        for (int i = 0; i < entries_.rows(); ++i) {
            for (int j = 0; j < entries_.cols(); ++j) {
                const double a = std::abs(entries_(i, j) - std::conj(entries_(j, i)));
                if (a > max_asym) {
                    max_asym = a;
                    max_i = i;
                    max_j = j;
                }
            }
        }
        std::ostringstream msg;
        msg << "matrix is not Hermitian: max asymmetry |A(i,j) - conj(A(j,i))| = "
            << max_asym << " at (" << max_i << ", " << max_j << ")";
        throw ValidationError(msg.str());
    }
    // Symmetrize so downstream algebra sees an exactly Hermitian matrix.
    entries_ = 0.5 * (entries_ + entries_.adjoint().eval());
}

HermitianOperator HermitianOperator::diagonal(const RealVector& energies) {
    ComplexMatrix m = ComplexMatrix::Zero(energies.size(), energies.size());
    for (Eigen::Index i = 0; i < energies.size(); ++i) m(i, i) = energies(i);
    return HermitianOperator(std::move(m));
}

EigenBasis eigendecompose(const HermitianOperator& H) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(H.entries());
    if (solver.info() != Eigen::Success) {
        throw NumericalError("Hermitian eigensolver failed to converge");
    }

    EigenBasis basis;
    basis.energies = solver.eigenvalues();
    basis.vectors = solver.eigenvectors();
    fix_column_phases(basis.vectors);

    // Eigen returns ascending energies; reorder exact ties deterministically.
    const int dim = basis.dim();
    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (basis.energies(a) != basis.energies(b)) return basis.energies(a) < basis.energies(b);
        return column_less(basis.vectors, a, b);
    });
    EigenBasis sorted;
    sorted.energies.resize(dim);
    sorted.vectors.resize(dim, dim);
    for (int k = 0; k < dim; ++k) {
        sorted.energies(k) = basis.energies(order[k]);
        sorted.vectors.col(k) = basis.vectors.col(order[k]);
    }

    const double h_norm = H.entries().norm();
    const double residual =
        (H.entries() * sorted.vectors - sorted.vectors * sorted.energies.asDiagonal().toDenseMatrix().cast<Complex>())
            .cwiseAbs()
            .maxCoeff();
    if (residual > kEigenResidualTol * std::max(h_norm, 1.0)) {
        std::ostringstream msg;
        msg << "eigendecomposition residual " << residual << " exceeds bound "
            << kEigenResidualTol * std::max(h_norm, 1.0);
        throw NumericalError(msg.str());
    }
    return sorted;
}

double default_freq_tol(const EigenBasis& basis) {
    const double max_e = basis.energies.cwiseAbs().maxCoeff();
    return 1e-9 * std::max(max_e, 1.0);
}

std::vector<SpectralComponent> spectral_decompose(const HermitianOperator& A,
                                                  const EigenBasis& basis,
                                                  double freq_tol) {
    if (freq_tol <= 0.0) {
        throw ValidationError("spectral_decompose requires freq_tol > 0");
    }
    if (A.dim() != basis.dim()) {
        std::ostringstream msg;
        msg << "operator dim " << A.dim() << " does not match basis dim " << basis.dim();
        throw ValidationError(msg.str());
    }

    const int dim = basis.dim();
    const ComplexMatrix transformed = basis.vectors.adjoint() * A.entries() * basis.vectors;
    const double drop_tol = kElementDropTol * transformed.cwiseAbs().maxCoeff();

    struct Element {
        double freq;
        int m, n;
    };
    std::vector<Element> elements;
    elements.reserve(static_cast<std::size_t>(dim) * dim);
    for (int m = 0; m < dim; ++m) {
        for (int n = 0; n < dim; ++n) {
            if (std::abs(transformed(m, n)) <= drop_tol) continue;
            elements.push_back({basis.energies(n) - basis.energies(m), m, n});
        }
    }
    if (elements.empty()) return {};

    // Single-linkage clustering on the sorted Bohr frequencies merges all
    // overlapping bins, exactly what union-find over pairwise-close bins gives.
    std::sort(elements.begin(), elements.end(),
              [](const Element& a, const Element& b) { return a.freq < b.freq; });

    std::vector<SpectralComponent> components;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= elements.size(); ++i) {
        if (i == elements.size() || elements[i].freq - elements[i - 1].freq > freq_tol) {
            double mean = 0.0;
            for (std::size_t k = start; k < i; ++k) mean += elements[k].freq;
            mean /= static_cast<double>(i - start);
            SpectralComponent comp;
            comp.frequency = mean;
            comp.op = ComplexMatrix::Zero(dim, dim);
            for (std::size_t k = start; k < i; ++k) {
                comp.op(elements[k].m, elements[k].n) = transformed(elements[k].m, elements[k].n);
            }
            components.push_back(std::move(comp));
            start = i;
        }
    }
    return components;
}

CouplingChannel make_channel(const HermitianOperator& A, const EigenBasis& basis,
                             double freq_tol) {
    return CouplingChannel{A, spectral_decompose(A, basis, freq_tol)};
}

}  // namespace synchrotherm
