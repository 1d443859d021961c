// Composite-system constructors: generic Kronecker composites, the analytic
// non-demolition eigensystem, and the dispersive qubit-resonator model.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "../support/displacement_oracle.hpp"
#include "synchrotherm/models.hpp"

using namespace synchrotherm;
using namespace synchrotherm::models;

namespace {

NDModelSpec two_level_spec(double xi0, double xi1, int n_max) {
    NDModelSpec spec;
    spec.level_energies = RealVector::Zero(2);
    spec.level_energies << 0.0, 1.0;
    spec.osc_freqs = RealVector::Constant(1, 1.0);
    spec.couplings = RealMatrix(2, 1);
    spec.couplings << xi0, xi1;
    spec.trunc = fock::FockTruncation{n_max, 1e-6};
    return spec;
}

}  // namespace

TEST_CASE("build_generic_composite: uncoupled spectrum is all pairwise sums") {
    RealVector ea(2), eb(3);
    ea << 0.0, 1.3;
    eb << 0.0, 0.4, 0.8;
    const auto [h_s, channels] = build_generic_composite(
        HermitianOperator::diagonal(ea), HermitianOperator::diagonal(eb),
        HermitianOperator(ComplexMatrix::Zero(6, 6)), {});
    const auto basis = eigendecompose(h_s);

    std::vector<double> expected;
    for (int p = 0; p < 2; ++p) {
        for (int n = 0; n < 3; ++n) expected.push_back(ea(p) + eb(n));
    }
    std::sort(expected.begin(), expected.end());
    for (int k = 0; k < 6; ++k) {
        CHECK(basis.energies(k) == doctest::Approx(expected[k]).epsilon(1e-12));
    }
    CHECK(channels.empty());
}

TEST_CASE("build_generic_composite: dispersive coupling matches build_dispersive") {
    // Qubit x 3-level resonator with V = g sigma_z (x) n.
    const double eps_q = 0.9, w_l = 2.0, g = 0.15;
    ComplexMatrix h_q(2, 2);
    h_q << -0.5 * eps_q, 0.0, 0.0, 0.5 * eps_q;
    ComplexMatrix h_r = ComplexMatrix::Zero(3, 3);
    h_r.diagonal() << 0.0, w_l, 2.0 * w_l;
    ComplexMatrix v = ComplexMatrix::Zero(6, 6);
    for (int p = 0; p < 2; ++p) {
        const double sz = 1.0 - 2.0 * p;
        for (int n = 0; n < 3; ++n) v(p * 3 + n, p * 3 + n) = g * sz * n;
    }
    const auto [h_s, channels] = build_generic_composite(
        HermitianOperator(h_q), HermitianOperator(h_r), HermitianOperator(v), {});
    const auto dense = eigendecompose(h_s);

    DispersiveSpec spec{eps_q, w_l, g, fock::FockTruncation{2, 1e-6}};
    const auto model = build_dispersive(spec);
    for (int k = 0; k < 6; ++k) {
        CHECK(dense.energies(k) == doctest::Approx(model.basis.energies(k)).epsilon(1e-12));
    }
}

TEST_CASE("build_generic_composite: generic 2x2 matches dense diagonalization") {
    ComplexMatrix ha(2, 2), hb(2, 2), v(4, 4);
    ha << 0.3, Complex(0.1, 0.2), Complex(0.1, -0.2), 1.1;
    hb << -0.2, 0.5, 0.5, 0.9;
    v.setZero();
    v(0, 3) = Complex(0.2, -0.1);
    v(3, 0) = Complex(0.2, 0.1);
    v(1, 2) = 0.3;
    v(2, 1) = 0.3;
    const auto [h_s, channels] = build_generic_composite(
        HermitianOperator(ha), HermitianOperator(hb), HermitianOperator(v), {});

    ComplexMatrix manual = ComplexMatrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            manual.block(i * 2, j * 2, 2, 2) = ha(i, j) * ComplexMatrix::Identity(2, 2);
        }
    }
    manual.block(0, 0, 2, 2) += hb;
    manual.block(2, 2, 2, 2) += hb;
    manual += v;
    const auto a = eigendecompose(h_s);
    const auto b = eigendecompose(HermitianOperator(manual));
    CHECK((a.energies - b.energies).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("build_generic_composite: dimension mismatch is a validation error") {
    RealVector ea(2), eb(2);
    ea << 0.0, 1.0;
    eb << 0.0, 1.0;
    CHECK_THROWS_AS(build_generic_composite(HermitianOperator::diagonal(ea),
                                            HermitianOperator::diagonal(eb),
                                            HermitianOperator(ComplexMatrix::Zero(3, 3)), {}),
                    ValidationError);
}

TEST_CASE("build_nd_model: decoupled limit") {
    auto spec = two_level_spec(0.0, 0.0, 4);
    const auto eig = build_nd_model(spec);
    CHECK(eig.dim() == 10);
    CHECK(eig.displacements().cwiseAbs().maxCoeff() == 0.0);
    for (const auto& level : eig.levels()) {
        CHECK(level.energy ==
              doctest::Approx(spec.level_energies(level.p) + level.n[0]).epsilon(1e-12));
    }
    // All FC factors are Kronecker deltas.
    for (const auto& c : effective_couplings(eig)) {
        const auto& la = eig.levels()[c.i];
        const auto& lb = eig.levels()[c.j];
        CHECK(la.n == lb.n);
        CHECK(c.weight == doctest::Approx(1.0));
    }
}

TEST_CASE("build_nd_model: displacement and energy shift formulas") {
    const auto eig = build_nd_model(two_level_spec(0.0, 0.5, 6));
    CHECK(eig.shifted_energies()(0) == doctest::Approx(0.0));
    CHECK(eig.shifted_energies()(1) == doctest::Approx(1.0 - 0.25).epsilon(1e-12));
    CHECK(eig.displacements()(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    const int k = eig.index_of(1, std::array<int, 1>{3});
    REQUIRE(k >= 0);
    CHECK(eig.levels()[k].energy == doctest::Approx(3.0 + 0.75).epsilon(1e-12));
}

TEST_CASE("build_nd_model: energies match dense diagonalization of the composite") {
    auto spec = two_level_spec(0.3, 0.8, 20);
    const auto eig = build_nd_model(spec);
    // Converged dense reference: pad the Fock box so edge artifacts stay well
    // above the compared window.
    auto padded = spec;
    padded.trunc.n_max += fock::default_truncation(0.8).n_max;
    const auto [h_s, coupling] = nd_dense_composite(padded);
    const auto dense = eigendecompose(h_s);

    for (int k = 0; k < eig.dim(); ++k) {
        const auto& level = eig.levels()[k];
        if (level.n[0] > 10) continue;
        CHECK(eig.levels()[k].energy == doctest::Approx(dense.energies(k)).epsilon(1e-6));
    }
}

TEST_CASE("build_nd_model: sideband count N (n_max + 1)^M") {
    auto spec = two_level_spec(0.1, 0.4, 7);
    CHECK(build_nd_model(spec).dim() == 2 * 8);

    NDModelSpec multi = spec;
    multi.osc_freqs = RealVector::Constant(2, 1.0);
    multi.couplings = RealMatrix::Zero(2, 2);
    multi.couplings << 0.0, 0.1, 0.2, 0.3;
    multi.trunc.n_max = 3;
    CHECK(build_nd_model(multi).dim() == 2 * 16);
}

TEST_CASE("p-branch Hamiltonian spectrum is the displaced ladder") {
    // H_b + <p|V|p> = Omega adag a + xi_p (a + adag) has spectrum
    // n Omega - xi_p^2 / Omega.
    const double omega = 1.0, xi = 0.8;
    const int n_fock = 40;
    ComplexMatrix branch = ComplexMatrix::Zero(n_fock, n_fock);
    for (int n = 0; n < n_fock; ++n) {
        branch(n, n) = omega * n;
        if (n + 1 < n_fock) {
            const double root = std::sqrt(static_cast<double>(n + 1));
            branch(n, n + 1) += xi * root;
            branch(n + 1, n) += xi * root;
        }
    }
    const auto basis = eigendecompose(HermitianOperator(branch));
    for (int n = 0; n <= 10; ++n) {
        CHECK(basis.energies(n) ==
              doctest::Approx(n * omega - xi * xi / omega).epsilon(1e-8));
    }
}

TEST_CASE("effective_couplings: common displacement cancels") {
    // Identical coupling column for both levels: Delta alpha = 0.
    auto spec = two_level_spec(0.7, 0.7, 5);
    const auto eig = build_nd_model(spec);
    for (const auto& c : effective_couplings(eig)) {
        CHECK(eig.levels()[c.i].n == eig.levels()[c.j].n);
        CHECK(c.weight == 1.0);
    }
}

TEST_CASE("effective_couplings: vacuum-vacuum weight at displacement 1.5") {
    auto spec = two_level_spec(0.0, 1.5, 8);  // Omega = 1 so Delta alpha = 1.5
    const auto eig = build_nd_model(spec);
    const int a = eig.index_of(0, std::array<int, 1>{0});
    const int b = eig.index_of(1, std::array<int, 1>{0});
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    const auto couplings = effective_couplings(eig);
    const auto it = std::find_if(couplings.begin(), couplings.end(), [&](const auto& c) {
        return (c.i == std::min(a, b)) && (c.j == std::max(a, b));
    });
    REQUIRE(it != couplings.end());
    CHECK(std::abs(it->weight) == doctest::Approx(std::exp(-1.125)).epsilon(1e-10));

    for (const auto& c : couplings) CHECK(std::abs(c.weight) <= 1.0);
}

TEST_CASE("effective_couplings: weights match the dense pipeline") {
    auto spec = two_level_spec(0.3, 0.8, 20);
    const auto eig = build_nd_model(spec);
    auto padded = spec;
    padded.trunc.n_max += fock::default_truncation(0.8).n_max;
    const auto [h_s, coupling] = nd_dense_composite(padded);
    const auto dense = eigendecompose(h_s);
    const ComplexMatrix transformed =
        dense.vectors.adjoint() * coupling.entries() * dense.vectors;

    // Match analytic levels to dense eigenvalues by energy (the padded box
    // holds more levels than the analytic window, so indices differ).
    std::vector<int> match(eig.dim());
    for (int k = 0; k < eig.dim(); ++k) {
        int best = 0;
        for (int j = 1; j < dense.dim(); ++j) {
            if (std::abs(dense.energies(j) - eig.levels()[k].energy) <
                std::abs(dense.energies(best) - eig.levels()[k].energy)) {
                best = j;
            }
        }
        match[k] = best;
    }

    int compared = 0;
    for (const auto& c : effective_couplings(eig)) {
        const auto& la = eig.levels()[c.i];
        const auto& lb = eig.levels()[c.j];
        if (la.n[0] > 10 || lb.n[0] > 10) continue;
        ++compared;
        CHECK(std::abs(transformed(match[c.i], match[c.j])) ==
              doctest::Approx(std::abs(c.weight)).epsilon(1e-6));
    }
    CHECK(compared > 100);
}

TEST_CASE("build_dispersive: g = 0 energies and labels") {
    DispersiveSpec spec{1.0, 5.0, 0.0, fock::FockTruncation{3, 1e-6}};
    const auto model = build_dispersive(spec);
    REQUIRE(model.basis.dim() == 8);
    for (int k = 0; k < 8; ++k) {
        const auto& label = model.basis.labels[k];
        const double expected = -0.5 * (1.0 - 2.0 * label.p) + 5.0 * label.n[0];
        CHECK(model.basis.energies(k) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("build_dispersive: sideband gap formula") {
    DispersiveSpec spec{1.0, 5.0, 0.1, fock::FockTruncation{6, 1e-6}};
    const auto model = build_dispersive(spec);
    auto energy_of = [&](int p, int n) {
        for (int k = 0; k < model.basis.dim(); ++k) {
            if (model.basis.labels[k].p == p && model.basis.labels[k].n[0] == n) {
                return model.basis.energies(k);
            }
        }
        FAIL("level not found");
        return 0.0;
    };
    CHECK(energy_of(1, 2) - energy_of(0, 2) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(energy_of(1, 0) - energy_of(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("build_dispersive: coupling only within a fixed photon number") {
    DispersiveSpec spec{1.0, 5.0, 0.1, fock::FockTruncation{4, 1e-6}};
    const auto model = build_dispersive(spec);
    const int dim = model.basis.dim();
    for (int k = 0; k < dim; ++k) {
        for (int l = 0; l < dim; ++l) {
            const auto& a = model.basis.labels[k];
            const auto& b = model.basis.labels[l];
            const double expected = (a.n == b.n && a.p != b.p) ? 1.0 : 0.0;
            CHECK(std::abs(model.coupling(k, l)) == doctest::Approx(expected));
        }
    }
    // Unitarity of the sorted product basis.
    CHECK((model.basis.vectors.adjoint() * model.basis.vectors -
           ComplexMatrix::Identity(dim, dim))
              .norm() < 1e-14);
}

TEST_CASE("NDModelSpec validation") {
    auto spec = two_level_spec(0.1, 0.2, 4);
    spec.osc_freqs(0) = -1.0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec = two_level_spec(0.1, 0.2, 4);
    spec.level_energies = RealVector::Zero(1);
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}
