// Bundled invariant suite behind the `validate` subcommand: fast, seeded,
// deterministic checks of the library's cross-module contracts.

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "synchrotherm/cli_io.hpp"
#include "synchrotherm/dynamics.hpp"

namespace synchrotherm::cli {

namespace {

struct Check {
    const char* name;
    bool (*body)(std::ostream&);
};

ComplexMatrix seeded_hermitian(int dim, unsigned seed) {
    std::mt19937 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    ComplexMatrix m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) m(i, j) = Complex(dist(gen), dist(gen));
    }
    return 0.5 * (m + m.adjoint().eval());
}

models::NDModelSpec sample_nd_spec() {
    models::NDModelSpec spec;
    spec.level_energies = RealVector(3);
    spec.level_energies << 0.0, 1.0, 2.0;
    spec.osc_freqs = RealVector::Constant(1, 1.0);
    spec.couplings = RealMatrix(3, 1);
    spec.couplings << 0.0, 0.4, 0.9;
    spec.trunc = fock::FockTruncation{8, 1e-6};
    return spec;
}

bool check_spectral_reconstruction(std::ostream& out) {
    const HermitianOperator h(seeded_hermitian(6, 11));
    const HermitianOperator a(seeded_hermitian(6, 12));
    const auto basis = eigendecompose(h);
    const ComplexMatrix rebuilt = basis.vectors *
                                  basis.energies.asDiagonal().toDenseMatrix().cast<Complex>() *
                                  basis.vectors.adjoint();
    if ((rebuilt - h.entries()).cwiseAbs().maxCoeff() > 1e-9) {
        out << "eigendecomposition does not rebuild H";
        return false;
    }
    const auto comps = spectral_decompose(a, basis, default_freq_tol(basis));
    ComplexMatrix sum = ComplexMatrix::Zero(6, 6);
    for (const auto& c : comps) sum += c.op;
    const ComplexMatrix transformed = basis.vectors.adjoint() * a.entries() * basis.vectors;
    if ((sum - transformed).cwiseAbs().maxCoeff() > 1e-10) {
        out << "spectral components do not reconstruct the operator";
        return false;
    }
    for (const auto& c : comps) {
        bool paired = false;
        for (const auto& d : comps) {
            if (std::abs(d.frequency + c.frequency) <= 1e-8 &&
                (d.op - c.op.adjoint().eval()).cwiseAbs().maxCoeff() < 1e-10) {
                paired = true;
            }
        }
        if (!paired) {
            out << "adjoint pairing missing at frequency " << c.frequency;
            return false;
        }
    }
    return true;
}

bool check_displacement_tables(std::ostream& out) {
    const auto trunc = fock::default_truncation(1.5);
    const auto table = fock::displacement_matrix(1.5, trunc);
    if (table.entries().cwiseAbs().maxCoeff() > 1.0) {
        out << "overlap magnitude above 1";
        return false;
    }
    if (std::abs(table.value(0, 0) - std::exp(-1.125)) > 1e-10) {
        out << "vacuum overlap at alpha = 1.5 is off";
        return false;
    }
    for (int n = 0; n <= trunc.n_max; ++n) {
        if (!table.column_certified(n)) continue;
        if (table.entries().col(n).squaredNorm() < 1.0 - trunc.leakage_tol) {
            out << "certified column " << n << " under-normalized";
            return false;
        }
    }
    const auto a = fock::displacement_matrix(0.7, fock::FockTruncation{64, 1e-6});
    const auto b = fock::displacement_matrix(0.6, fock::FockTruncation{64, 1e-6});
    const auto ab = fock::displacement_matrix(1.3, fock::FockTruncation{64, 1e-6});
    const Eigen::MatrixXd product = a.entries() * b.entries();
    if ((product.topLeftCorner(32, 32) - ab.entries().topLeftCorner(32, 32))
            .cwiseAbs()
            .maxCoeff() > 1e-6) {
        out << "group property D(a)D(b) = D(a+b) violated";
        return false;
    }
    return true;
}

bool check_bath_detailed_balance(std::ostream& out) {
    for (const double beta : {0.2, 1.0, 5.0}) {
        const bath::BathSpec spec{bath::Family::OhmicExpCutoff, 1.0, 10.0, beta};
        for (const double w : {0.1, 0.7, 2.0, 6.0}) {
            const double up = bath::rate(spec, w);
            const double down = bath::rate(spec, -w);
            if (std::abs(down - std::exp(beta * w) * up) >
                1e-12 * std::max(down, 1e-300)) {
                out << "detailed balance off at beta = " << beta << ", w = " << w;
                return false;
            }
        }
    }
    if (bath::rate({bath::Family::Flat, 1.0, 1.0, 1.0}, 0.0) != 0.0) {
        out << "zero-gap rate must vanish";
        return false;
    }
    return true;
}

bool check_rate_graph_fixed_point(std::ostream& out) {
    const auto spec = sample_nd_spec();
    const auto eig = models::build_nd_model(spec);
    const auto rm = rates::build_rate_matrix(
        eig, models::effective_couplings(eig), {bath::Family::OhmicExpCutoff, 1.0, 10.0, 1.0});

    for (const auto& e : rm.edges()) {
        const double reverse = rm.rate(e.from, e.to);
        if (reverse == 0.0) continue;
        const double lhs = std::log(e.rate) - rm.beta() * rm.energies()(e.from);
        const double rhs = std::log(reverse) - rm.beta() * rm.energies()(e.to);
        if (std::abs(lhs - rhs) > 1e-9) {
            out << "edge pair (" << e.from << ", " << e.to << ") violates detailed balance";
            return false;
        }
    }

    const auto report = rates::connectivity(rm);
    if (!report.connected) {
        out << "sample ND graph should be connected";
        return false;
    }
    PopulationVector initial;
    initial.values = RealVector::Zero(rm.n_levels());
    initial.values(0) = 1.0;
    const auto prediction = rates::predict_steady_state(rm, report, initial);
    const auto stationarity = rates::verify_stationarity(rm, prediction.populations);
    if (!stationarity.accepted) {
        out << "Gibbs vector is not in the generator null space (residual "
            << stationarity.residual << ")";
        return false;
    }
    return true;
}

bool check_mixture_degeneracy(std::ostream& out) {
    models::DispersiveSpec spec{1.0, 5.0, 0.05, fock::FockTruncation{3, 1e-6}};
    const auto model = models::build_dispersive(spec);
    const auto rm = rates::build_rate_matrix(model, {bath::Family::Flat, 1.0, 1.0, 1.0});
    const auto report = rates::connectivity(rm);
    if (report.connected) {
        out << "dispersive graph should be disconnected";
        return false;
    }
    PopulationVector first, second;
    first.values = RealVector::Zero(rm.n_levels());
    first.values(0) = 1.0;
    second.values = RealVector::Constant(rm.n_levels(), 1.0 / rm.n_levels());
    for (const auto& initial : {first, second}) {
        const auto prediction = rates::predict_steady_state(rm, report, initial);
        if (!rates::verify_stationarity(rm, prediction.populations).accepted) {
            out << "component reweighting is not stationary";
            return false;
        }
    }
    return true;
}

bool check_dynamics_conservation(std::ostream& out) {
    RealVector e(2);
    e << 0.0, 0.8;
    const auto basis = eigendecompose(HermitianOperator::diagonal(e));
    ComplexMatrix sx(2, 2);
    sx << 0.0, 1.0, 1.0, 0.0;
    const auto rm = rates::build_rate_matrix(
        basis, {make_channel(HermitianOperator(sx), basis)}, {bath::Family::Flat, 1.0, 1.0, 1.1});

    const double up = rm.rate(1, 0), down = rm.rate(0, 1);
    PopulationVector initial;
    initial.values = RealVector(2);
    initial.values << 1.0, 0.0;
    const std::vector<double> times{0.4, 1.2, 3.0};
    for (const auto method :
         {dyn::EvolveOptions::Method::ExactAction, dyn::EvolveOptions::Method::AdaptiveRk}) {
        dyn::EvolveOptions options;
        options.method = method;
        const auto trajectory = dyn::evolve(rm, initial, times, options);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto& sample = trajectory.samples[i];
            if (std::abs(sample.values.sum() - 1.0) > 1e-9 || sample.values.minCoeff() < 0) {
                out << "probability conservation violated";
                return false;
            }
            const double expected =
                up / (up + down) * (1.0 - std::exp(-(up + down) * times[i]));
            if (std::abs(sample.values(1) - expected) > 1e-8) {
                out << "two-level relaxation off the closed form";
                return false;
            }
        }
    }
    return true;
}

bool check_blockade_determinism(std::ostream& out) {
    blockade::BlockadeConfig config;
    config.m_values = {1, 2, 3, 4};
    config.n_groups = 2;
    config.seed = 7;
    config.n_threads = 1;
    const auto first = blockade::run_blockade(config);
    config.n_threads = 2;
    const auto second = blockade::run_blockade(config);
    for (int g = 0; g < config.n_groups; ++g) {
        if (first.groups[g].log_factors != second.groups[g].log_factors) {
            out << "blockade results depend on the thread count";
            return false;
        }
        for (std::size_t k = 1; k < first.groups[g].log_factors.size(); ++k) {
            if (first.groups[g].log_factors[k] > first.groups[g].log_factors[k - 1]) {
                out << "blockade factor is not nonincreasing in M";
                return false;
            }
        }
    }
    return true;
}

bool check_report_round_trip(std::ostream& out) {
    models::DispersiveSpec spec{1.0, 5.0, 0.05, fock::FockTruncation{2, 1e-6}};
    ModelConfig model{spec};
    const bath::BathSpec bath_spec{bath::Family::Flat, 1.0, 1.0, 1.0};
    const auto built = build_model(model, bath_spec);
    const auto report = rates::connectivity(built.rm);
    PopulationVector initial;
    initial.values = RealVector::Zero(built.rm.n_levels());
    initial.values(0) = 1.0;
    const auto prediction = rates::predict_steady_state(built.rm, report, initial);
    const auto stationarity = rates::verify_stationarity(built.rm, prediction.populations);
    const auto j = analyze_report_json(built, report, prediction, stationarity);
    try {
        check_analyze_report_schema(nlohmann::json::parse(j.dump()));
    } catch (const ValidationError& err) {
        out << "report schema round-trip failed: " << err.what();
        return false;
    }
    return true;
}

constexpr Check kChecks[] = {
    {"spectral reconstruction and adjoint pairing", check_spectral_reconstruction},
    {"displacement tables: normalization, bound, group property", check_displacement_tables},
    {"bath detailed-balance identity", check_bath_detailed_balance},
    {"rate graph: detailed balance and Gibbs fixed point", check_rate_graph_fixed_point},
    {"mixture degeneracy on the disconnected graph", check_mixture_degeneracy},
    {"dynamics: conservation and two-level closed form", check_dynamics_conservation},
    {"blockade determinism and monotone nesting", check_blockade_determinism},
    {"analyze report JSON round-trip", check_report_round_trip},
};

}  // namespace

bool run_validate_suite(std::ostream& out) {
    bool all_passed = true;
    for (const auto& check : kChecks) {
        std::ostringstream detail;
        const bool passed = check.body(detail);
        all_passed = all_passed && passed;
        out << (passed ? "PASS" : "FAIL") << "  " << check.name;
        if (!passed && !detail.str().empty()) out << "  (" << detail.str() << ")";
        out << '\n';
    }
    out << (all_passed ? "all invariants hold\n" : "invariant failures detected\n");
    return all_passed;
}

}  // namespace synchrotherm::cli
