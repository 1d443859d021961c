// Acceptance suite: end-to-end checks of the full pipeline at fixed
// tolerances, one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../support/displacement_oracle.hpp"
#include "synchrotherm/cli_io.hpp"
#include "synchrotherm/dynamics.hpp"

using namespace synchrotherm;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int id;
    std::string description;
    double time_limit_seconds;
    std::function<bool(std::ostream&)> body;
};

models::NDModelSpec nd3_spec(int n_max) {
    models::NDModelSpec spec;
    spec.level_energies = RealVector(3);
    spec.level_energies << 0.0, 1.0, 2.0;
    spec.osc_freqs = RealVector::Constant(1, 1.0);
    spec.couplings = RealMatrix(3, 1);
    spec.couplings << 0.0, 0.4, 0.9;
    spec.trunc = fock::FockTruncation{n_max, 1e-6};
    return spec;
}

models::DispersiveSpec dispersive_spec() {
    return {1.0, 5.0, 0.1, fock::FockTruncation{6, 1e-6}};
}

bath::BathSpec flat_bath(double beta) { return {bath::Family::Flat, 1.0, 1.0, beta}; }
bath::BathSpec ohmic_bath(double beta) {
    return {bath::Family::OhmicExpCutoff, 1.0, 10.0, beta};
}

PopulationVector delta_population(int size, int level) {
    PopulationVector p;
    p.values = RealVector::Zero(size);
    p.values(level) = 1.0;
    return p;
}

double tv(const RealVector& a, const RealVector& b) {
    return 0.5 * (a - b).cwiseAbs().sum();
}

// 1. Analytic displacement matrix vs matrix-exponential oracle.
bool criterion_oracle_equivalence(std::ostream& out) {
    for (const double alpha : {0.1, 0.5, 1.5, 3.0}) {
        const auto table = fock::displacement_matrix(alpha, fock::FockTruncation{64, 1e-6});
        const Eigen::MatrixXd reference = testing::oracle_displacement_matrix(alpha, 64);
        const double err = (table.entries().topLeftCorner(32, 32) -
                            reference.topLeftCorner(32, 32))
                               .cwiseAbs()
                               .maxCoeff();
        out << "alpha " << alpha << ": max abs err " << err << "; ";
        if (err > 1e-8) return false;
    }
    return true;
}

// 2. Fig. 3 grid emitted through the fc-table pipeline vs the oracle golden.
bool criterion_fig3_grid(std::ostream& out) {
    const fs::path csv_path =
        fs::temp_directory_path() / ("synchrotherm_accept_fig3_" +
                                     std::to_string(::getpid()) + ".csv");
    cli::RunConfig config;
    config.command = cli::RunConfig::Command::FcTable;
    config.alpha = 1.5;
    config.n_max = 10;
    config.output_path = csv_path.string();
    cli::run(config);

    std::ifstream in(csv_path);
    std::string header;
    std::getline(in, header);
    if (header != "m,n,value") {
        out << "unexpected CSV header '" << header << "'";
        return false;
    }
    const Eigen::MatrixXd golden = testing::oracle_displacement_matrix(1.5, 64);
    const auto exact = fock::displacement_matrix(1.5, fock::FockTruncation{10, 1e-6});
    double max_err = 0.0;
    int rows = 0;
    for (std::string line; std::getline(in, line);) {
        int m = 0, n = 0;
        double value = 0.0;
        std::istringstream fields(line);
        std::string field;
        std::getline(fields, field, ',');
        m = std::stoi(field);
        std::getline(fields, field, ',');
        n = std::stoi(field);
        std::getline(fields, field, ',');
        const auto parse = std::from_chars(field.data(), field.data() + field.size(), value);
        if (parse.ec != std::errc()) {
            out << "CSV value did not parse: '" << field << "'";
            return false;
        }
        // The CSV must round-trip the emitted double exactly...
        if (value != exact.value(m, n)) {
            out << "CSV round-trip not exact at (" << m << ", " << n << ")";
            return false;
        }
        // ...and its magnitude must match the oracle golden.
        max_err = std::max(max_err, std::abs(std::abs(value) - std::abs(golden(m, n))));
        ++rows;
    }
    fs::remove(csv_path);
    out << rows << " grid cells, max |value| err vs oracle " << max_err;
    return rows == 11 * 11 && max_err <= 1e-8;
}

// 3. Detailed-balance identity on every stored edge pair.
bool criterion_detailed_balance(std::ostream& out) {
    const auto eig = models::build_nd_model(nd3_spec(12));
    const auto couplings = models::effective_couplings(eig);
    long checked = 0;
    double worst = 0.0;
    for (const double beta : {0.2, 1.0, 5.0}) {
        for (const auto& bath_spec : {flat_bath(beta), ohmic_bath(beta)}) {
            const auto rm = rates::build_rate_matrix(eig, couplings, bath_spec);
            for (const auto& e : rm.edges()) {
                if (e.to < e.from) continue;
                const double reverse = rm.rate(e.from, e.to);
                if (reverse == 0.0) continue;
                const double lhs = std::log(e.rate) - beta * rm.energies()(e.from);
                const double rhs = std::log(reverse) - beta * rm.energies()(e.to);
                worst = std::max(worst, std::abs(lhs - rhs));
                ++checked;
            }
        }
    }
    out << checked << " edge pairs, worst log-form residual " << worst;
    return checked > 0 && worst <= 1e-9;
}

// 4. Connected ND model thermalizes to the canonical state from any start.
bool criterion_synchro_thermalization(std::ostream& out) {
    const auto eig = models::build_nd_model(nd3_spec(12));
    const auto rm =
        rates::build_rate_matrix(eig, models::effective_couplings(eig), ohmic_bath(1.0));
    const auto report = rates::connectivity(rm);
    if (!report.connected) {
        out << "graph unexpectedly disconnected";
        return false;
    }

    const int ground = eig.index_of(0, std::array<int, 1>{0});
    const auto gibbs =
        rates::predict_steady_state(rm, report, delta_population(eig.dim(), ground));
    const double gap = dyn::relaxation_rate_estimate(rm);
    const std::vector<double> times{50.0 / gap};

    std::vector<PopulationVector> initials;
    initials.push_back(delta_population(eig.dim(), ground));  // level:0 (x) vacuum
    PopulationVector uniform;
    uniform.values = RealVector::Constant(eig.dim(), 1.0 / eig.dim());
    initials.push_back(uniform);
    initials.push_back(
        delta_population(eig.dim(), eig.index_of(2, std::array<int, 1>{3})));

    std::vector<RealVector> finals;
    for (const auto& initial : initials) {
        const auto trajectory = dyn::evolve(rm, initial, times);
        finals.push_back(trajectory.samples.back().values);
    }
    double worst_gibbs = 0.0, worst_pair = 0.0;
    for (const auto& final : finals) {
        worst_gibbs = std::max(worst_gibbs, tv(final, gibbs.populations));
    }
    for (std::size_t i = 0; i < finals.size(); ++i) {
        for (std::size_t j = i + 1; j < finals.size(); ++j) {
            worst_pair = std::max(worst_pair, tv(finals[i], finals[j]));
        }
    }
    out << "t_end = " << times[0] << ", worst TV to Gibbs " << worst_gibbs
        << ", worst pairwise TV " << worst_pair;
    return worst_gibbs <= 1e-6 && worst_pair <= 2e-6;
}

// 5. Dispersive model: sideband components, conserved masses, mixture steady
// state, and preserved initial-state information.
bool criterion_disconnected_case(std::ostream& out) {
    const auto model = models::build_dispersive(dispersive_spec());
    const auto rm = rates::build_rate_matrix(model, flat_bath(1.0));
    const auto report = rates::connectivity(rm);
    const int dim = model.basis.dim();

    if (report.n_components() != 7) {
        out << "(a) expected 7 components, got " << report.n_components();
        return false;
    }

    auto level_of = [&](int p, int n) {
        for (int k = 0; k < dim; ++k) {
            if (model.basis.labels[k].p == p && model.basis.labels[k].n[0] == n) return k;
        }
        return -1;
    };
    auto sideband_mass = [&](const RealVector& v, int n) {
        double mass = 0.0;
        for (int k = 0; k < dim; ++k) {
            if (model.basis.labels[k].n[0] == n) mass += v(k);
        }
        return mass;
    };

    // (b) + (c): evolve a three-sideband initial state and compare against the
    // predicted mixture.
    PopulationVector initial;
    initial.values = RealVector::Zero(dim);
    initial.values(level_of(0, 0)) = 0.5;
    initial.values(level_of(0, 1)) = 0.3;
    initial.values(level_of(1, 2)) = 0.2;

    std::vector<double> times{2.0, 10.0, 25.0};
    const auto trajectory = dyn::evolve(rm, initial, times);
    double mass_drift = 0.0;
    for (const auto& sample : trajectory.samples) {
        for (int n = 0; n <= 6; ++n) {
            mass_drift = std::max(mass_drift,
                                  std::abs(sideband_mass(sample.values, n) -
                                           sideband_mass(initial.values, n)));
        }
    }
    if (mass_drift > 1e-10) {
        out << "(b) sideband mass drift " << mass_drift;
        return false;
    }

    const auto prediction = rates::predict_steady_state(rm, report, initial);
    const double tv_final = tv(trajectory.samples.back().values, prediction.populations);
    if (tv_final > 1e-8) {
        out << "(c) final state vs mixture prediction TV " << tv_final;
        return false;
    }

    // (d) different sideband distributions keep distinct steady states.
    const auto final_a = trajectory.samples.back().values;
    PopulationVector other;
    other.values = RealVector::Zero(dim);
    other.values(level_of(0, 3)) = 0.6;
    other.values(level_of(1, 4)) = 0.4;
    const auto final_b = dyn::evolve(rm, other, times).samples.back().values;
    const double separation = tv(final_a, final_b);
    out << "mass drift " << mass_drift << ", TV to prediction " << tv_final
        << ", TV between steady states " << separation;
    return separation >= 0.1;
}

// 6. Exponential decay of the maximal multi-Franck-Condon factor with M.
bool criterion_blockade_decay(std::ostream& out) {
    blockade::BlockadeConfig config;
    config.m_values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    config.n_groups = 6;
    config.range_lo = -4.0;
    config.range_hi = 4.0;
    config.seed = 42;
    const auto run = blockade::run_blockade(config);

    int good_fits = 0;
    for (const auto& group : run.groups) {
        for (std::size_t k = 1; k < group.log_factors.size(); ++k) {
            if (group.log_factors[k] >= group.log_factors[k - 1]) {
                out << "log factor not strictly decreasing";
                return false;
            }
        }
        const auto fit = blockade::fit_log_slope(config.m_values, group.log_factors);
        if (fit.slope >= 0.0) {
            out << "nonnegative slope " << fit.slope;
            return false;
        }
        if (fit.r_squared > 0.9) ++good_fits;
    }
    out << good_fits << "/6 groups with r^2 > 0.9";
    return good_fits >= 5;
}

// 7. Analytic eigensystem vs the dense generic pipeline.
bool criterion_analytic_numeric(std::ostream& out) {
    models::NDModelSpec spec;
    spec.level_energies = RealVector(2);
    spec.level_energies << 0.0, 1.0;
    spec.osc_freqs = RealVector::Constant(1, 1.0);
    spec.couplings = RealMatrix(2, 1);
    spec.couplings << 0.3, 0.8;
    spec.trunc = fock::FockTruncation{20, 1e-6};
    const auto eig = models::build_nd_model(spec);

    // Converged dense reference: pad the Fock box so its edge artifacts stay
    // far above the compared n <= 10 window.
    auto padded = spec;
    padded.trunc.n_max += fock::default_truncation(0.8).n_max;
    const auto [h_s, coupling] = models::nd_dense_composite(padded);
    const auto dense = eigendecompose(h_s);
    const ComplexMatrix transformed =
        dense.vectors.adjoint() * coupling.entries() * dense.vectors;

    std::vector<int> match(eig.dim());
    double worst_energy = 0.0;
    for (int k = 0; k < eig.dim(); ++k) {
        int best = 0;
        for (int j = 1; j < dense.dim(); ++j) {
            if (std::abs(dense.energies(j) - eig.levels()[k].energy) <
                std::abs(dense.energies(best) - eig.levels()[k].energy)) {
                best = j;
            }
        }
        match[k] = best;
        if (eig.levels()[k].n[0] <= 10) {
            worst_energy = std::max(
                worst_energy, std::abs(dense.energies(best) - eig.levels()[k].energy));
        }
    }

    double worst_coupling = 0.0;
    long compared = 0;
    for (const auto& c : models::effective_couplings(eig)) {
        if (eig.levels()[c.i].n[0] > 10 || eig.levels()[c.j].n[0] > 10) continue;
        worst_coupling =
            std::max(worst_coupling, std::abs(std::abs(transformed(match[c.i], match[c.j])) -
                                              std::abs(c.weight)));
        ++compared;
    }
    out << "energy err " << worst_energy << ", coupling err " << worst_coupling << " over "
        << compared << " pairs";
    return worst_energy <= 1e-6 && worst_coupling <= 1e-6 && compared > 100;
}

// 8. Any reweighting of the disconnected components is stationary.
bool criterion_mixture_degeneracy(std::ostream& out) {
    const auto model = models::build_dispersive(dispersive_spec());
    const auto rm = rates::build_rate_matrix(model, flat_bath(1.0));
    const auto report = rates::connectivity(rm);

    PopulationVector first = delta_population(model.basis.dim(), 0);
    PopulationVector second;
    second.values = RealVector::Constant(model.basis.dim(), 1.0 / model.basis.dim());

    const auto p1 = rates::predict_steady_state(rm, report, first);
    const auto p2 = rates::predict_steady_state(rm, report, second);
    const auto r1 = rates::verify_stationarity(rm, p1.populations);
    const auto r2 = rates::verify_stationarity(rm, p2.populations);
    const double weight_gap = tv(p1.populations, p2.populations);
    out << "residuals " << r1.residual << ", " << r2.residual << " (bound " << r1.bound
        << "), TV between assignments " << weight_gap;
    return r1.accepted && r2.accepted && weight_gap > 0.01;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Franck-Condon oracle equivalence (alpha in {0.1, 0.5, 1.5, 3.0})", 5.0,
         criterion_oracle_equivalence},
        {2, "Fig. 3 grid |<n|D(1.5)|m>| via fc-table, oracle golden", 1.0,
         criterion_fig3_grid},
        {3, "detailed balance on the ND model, flat and ohmic, beta in {0.2, 1, 5}", 5.0,
         criterion_detailed_balance},
        {4, "synchro-thermalization of the connected ND model", 30.0,
         criterion_synchro_thermalization},
        {5, "disconnected dispersive model: components, masses, mixture", 10.0,
         criterion_disconnected_case},
        {6, "Franck-Condon blockade decays exponentially with M", 10.0,
         criterion_blockade_decay},
        {7, "analytic eigensystem matches the dense generic pipeline", 10.0,
         criterion_analytic_numeric},
        {8, "mixture stationarity degeneracy on the dispersive graph", 1.0,
         criterion_mixture_degeneracy},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        std::ostringstream detail;
        bool passed = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            passed = criterion.body(detail);
        } catch (const std::exception& err) {
            detail << "exception: " << err.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > criterion.time_limit_seconds) {
            passed = false;
            detail << " [exceeded " << criterion.time_limit_seconds << " s limit]";
        }
        if (!passed) ++failures;
        std::printf("%s  criterion %d: %s (%.2f s)\n", passed ? "PASS" : "FAIL",
                    criterion.id, criterion.description.c_str(), elapsed);
        if (!detail.str().empty()) std::printf("      %s\n", detail.str().c_str());
    }
    if (failures == 0) {
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    } else {
        std::printf("%d acceptance criteria FAILED\n", failures);
    }
    return failures;
}
