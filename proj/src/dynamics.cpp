#include "synchrotherm/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace synchrotherm::dyn {

namespace {

// Gibbs-weight square roots exp(-beta (E - E_min) / 2); the similarity
// transform by these makes the generator symmetric under detailed balance.
RealVector gibbs_sqrt_weights(const rates::RateMatrix& rm) {
    const double e_min = rm.energies().minCoeff();
    RealVector w(rm.n_levels());
    for (int k = 0; k < rm.n_levels(); ++k) {
        w(k) = std::exp(-0.5 * rm.beta() * (rm.energies()(k) - e_min));
    }
    return w;
}

// Symmetrized generator S = D^{-1/2} G D^{1/2}, entries built per edge so no
// global Boltzmann factor is ever formed. Edge pairs whose weak direction
// fell below the edge threshold leave an asymmetry of at most
// sqrt(edge_threshold * max_rate); anything beyond that bound is a failure.
RealMatrix symmetrized_generator(const rates::RateMatrix& rm) {
    if (std::isinf(rm.beta())) {
        throw ValidationError("the symmetrized generator requires finite beta");
    }
    const int n = rm.n_levels();
    RealMatrix s = RealMatrix::Zero(n, n);
    for (const auto& e : rm.edges()) {
        const double gap = rm.energies()(e.from) - rm.energies()(e.to);
        s(e.to, e.from) += e.rate * std::exp(-0.5 * rm.beta() * gap);
        s(e.from, e.from) -= e.rate;
    }
    const double scale = s.cwiseAbs().maxCoeff();
    const double threshold_slack =
        2.0 * std::sqrt(std::max(rm.edge_threshold() * rm.max_rate(), 0.0));
    const double tol = 1e-9 * std::max(scale, 1e-300) + threshold_slack;
    const double asym = (s - s.transpose().eval()).cwiseAbs().maxCoeff();
    if (asym > tol) {
        std::ostringstream msg;
        msg << "symmetrized generator asymmetry " << asym << " exceeds bound " << tol
            << "; detailed balance does not hold";
        throw NumericalError(msg.str());
    }
    return 0.5 * (s + s.transpose().eval());
}

bool exact_action_feasible(const rates::RateMatrix& rm, const EvolveOptions& options) {
    if (std::isinf(rm.beta())) return false;
    if (rm.n_levels() > options.exact_action_max_dim) return false;
    const double spread = rm.energies().maxCoeff() - rm.energies().minCoeff();
    return rm.beta() * spread <= 600.0;
}

// Negative populations within `floor` of zero are integration roundoff and
// are clamped in the report only; anything beyond it is a real failure. The
// exact path uses the machine-scale 1e-12 floor, the RK path its local error.
PopulationVector report_sample(const RealVector& raw, double time, double floor = 1e-12) {
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        if (raw(i) < -floor) {
            std::ostringstream msg;
            msg << "population " << raw(i) << " at level " << i
                << " is negative beyond the " << floor << " roundoff floor at t = " << time;
            throw NumericalError(msg.str());
        }
    }
    PopulationVector sample;
    sample.values = raw.cwiseMax(0.0);
    sample.time = time;
    return sample;
}

void check_conservation(const RealVector& p, double time) {
    if (std::abs(p.sum() - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "probability drifted to " << p.sum() << " at t = " << time;
        throw IntegrationError(msg.str(), time);
    }
}

Trajectory exact_action_evolve(const rates::RateMatrix& rm, const PopulationVector& initial,
                               std::span<const double> times) {
    const RealVector sqrt_pi = gibbs_sqrt_weights(rm);
    const RealMatrix s = symmetrized_generator(rm);
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(s);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of the symmetrized generator failed");
    }
    // Generator eigenvalues are nonpositive; clip solver noise so large times
    // cannot amplify a spurious positive mode.
    RealVector lambda = solver.eigenvalues().cwiseMin(0.0);
    const RealMatrix& q = solver.eigenvectors();

    const RealVector y0 = initial.values.cwiseQuotient(sqrt_pi);
    const RealVector c = q.transpose() * y0;

    Trajectory trajectory;
    trajectory.samples.reserve(times.size());
    for (const double t : times) {
        const double dt = t - initial.time;
        const RealVector decayed = (lambda.array() * dt).exp().matrix().asDiagonal() * c;
        const RealVector p = sqrt_pi.cwiseProduct(q * decayed);
        check_conservation(p, t);
        trajectory.samples.push_back(report_sample(p, t));
    }
    return trajectory;
}

// Dormand-Prince 5(4) embedded pair, FSAL.
struct Rk45Stepper {
    const rates::RateMatrix& rm;
    double abstol;

    void derivative(const RealVector& p, RealVector& d) const {
        d.setZero();
        for (const auto& e : rm.edges()) {
            const double flux = e.rate * p(e.from);
            d(e.to) += flux;
            d(e.from) -= flux;
        }
    }
};

Trajectory rk_evolve(const rates::RateMatrix& rm, const PopulationVector& initial,
                     std::span<const double> times, const EvolveOptions& options) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    const Rk45Stepper stepper{rm, options.abstol};
    const int n = rm.n_levels();
    RealVector p = initial.values;
    double t = initial.time;

    double out_rate = 0.0;
    RealVector outflux = RealVector::Zero(n);
    for (const auto& e : rm.edges()) outflux(e.from) += e.rate;
    out_rate = outflux.size() > 0 ? outflux.maxCoeff() : 0.0;

    const double t_end = times.empty() ? t : times.back();
    const double dt_min = 1e-14 * std::max(1.0, std::abs(t_end));
    double dt = out_rate > 0.0 ? 0.1 / out_rate : std::max(t_end - t, 1.0);

    RealVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), trial(n), err(n);
    stepper.derivative(p, k1);

    Trajectory trajectory;
    trajectory.samples.reserve(times.size());
    for (const double t_target : times) {
        while (t < t_target) {
            const double h = std::min(dt, t_target - t);
            stepper.derivative(p + h * a21 * k1, k2);
            stepper.derivative(p + h * (a31 * k1 + a32 * k2), k3);
            stepper.derivative(p + h * (a41 * k1 + a42 * k2 + a43 * k3), k4);
            stepper.derivative(p + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
            stepper.derivative(p + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5),
                               k6);
            trial = p + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            stepper.derivative(trial, k7);
            err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double err_norm = err.cwiseAbs().maxCoeff();

            if (err_norm <= options.abstol) {
                t += h;
                p = trial;
                k1 = k7;  // FSAL
                check_conservation(p, t);
            }
            const double shrink =
                err_norm > 0.0 ? 0.9 * std::pow(options.abstol / err_norm, 0.2) : 5.0;
            dt = h * std::clamp(shrink, 0.2, 5.0);
            if (dt < dt_min) {
                std::ostringstream msg;
                msg << "step size underflow at t = " << t << " (dt = " << dt << ")";
                throw IntegrationError(msg.str(), t);
            }
        }
        trajectory.samples.push_back(report_sample(p, t_target, 10.0 * options.abstol));
    }
    return trajectory;
}

}  // namespace

Trajectory evolve(const rates::RateMatrix& rm, const PopulationVector& initial,
                  std::span<const double> times, const EvolveOptions& options) {
    initial.validate();
    if (initial.values.size() != rm.n_levels()) {
        throw ValidationError("initial population length does not match the level count");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < initial.time || (i > 0 && times[i] <= times[i - 1])) {
            throw ValidationError("sample times must be strictly ascending and >= start time");
        }
    }

    Trajectory trajectory;
    if (times.empty()) return trajectory;

    if (rm.edges().empty()) {
        // No transitions: populations are frozen.
        for (const double t : times) {
            trajectory.samples.push_back(report_sample(initial.values, t));
        }
    } else {
        EvolveOptions::Method method = options.method;
        if (method == EvolveOptions::Method::Auto) {
            method = exact_action_feasible(rm, options) ? EvolveOptions::Method::ExactAction
                                                        : EvolveOptions::Method::AdaptiveRk;
        }
        trajectory = method == EvolveOptions::Method::ExactAction
                         ? exact_action_evolve(rm, initial, times)
                         : rk_evolve(rm, initial, times, options);
    }

    if (options.target) {
        if (options.target->size() != rm.n_levels()) {
            throw ValidationError("convergence target length does not match the level count");
        }
        trajectory.convergence.reserve(trajectory.samples.size());
        for (const auto& sample : trajectory.samples) {
            trajectory.convergence.push_back(
                0.5 * (sample.values - *options.target).cwiseAbs().sum());
        }
    }
    return trajectory;
}

double distance_to(const PopulationVector& a, const PopulationVector& b) {
    if (a.values.size() != b.values.size()) {
        throw ValidationError("total variation distance requires equal lengths");
    }
    return 0.5 * (a.values - b.values).cwiseAbs().sum();
}

double relaxation_rate_estimate(const rates::RateMatrix& rm) {
    if (std::isinf(rm.beta())) {
        throw ValidationError("relaxation_rate_estimate requires finite beta");
    }
    const auto report = rates::connectivity(rm);
    if (!report.connected) {
        std::ostringstream msg;
        msg << "rate graph has " << report.n_components()
            << " components; restrict_to_component and estimate per component";
        throw ValidationError(msg.str());
    }
    if (rm.n_levels() < 2) {
        throw ValidationError("relaxation rate is undefined for a single level");
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(symmetrized_generator(rm));
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigendecomposition of the symmetrized generator failed");
    }
    const RealVector& lambda = solver.eigenvalues();  // ascending, <= 0 up to noise
    const int last = static_cast<int>(lambda.size()) - 1;
    if (std::abs(lambda(last)) > 1e-9 * std::max(rm.max_rate(), 1e-300)) {
        throw NumericalError("no numerical null vector found on a connected graph");
    }
    return std::max(-lambda(last - 1), 0.0);
}

RealVector stationary_from_nullspace(const rates::RateMatrix& rm,
                                     const PopulationVector& initial) {
    initial.validate();
    if (initial.values.size() != rm.n_levels()) {
        throw ValidationError("initial population length does not match the level count");
    }
    const auto report = rates::connectivity(rm);
    const RealVector sqrt_pi = gibbs_sqrt_weights(rm);
    const RealMatrix s = symmetrized_generator(rm);

    RealVector stationary = RealVector::Zero(rm.n_levels());
    for (const auto& members : report.components) {
        double mass = 0.0;
        for (int k : members) mass += std::max(initial.values(k), 0.0);
        if (mass == 0.0) continue;
        if (members.size() == 1) {
            stationary(members.front()) = mass;
            continue;
        }
        const int m = static_cast<int>(members.size());
        RealMatrix block(m, m);
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) block(a, b) = s(members[a], members[b]);
        }
        Eigen::SelfAdjointEigenSolver<RealMatrix> solver(block);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("null-space eigendecomposition failed");
        }
        // The largest eigenvalue is the component's null mode.
        RealVector v = solver.eigenvectors().col(m - 1);
        RealVector u(m);
        for (int a = 0; a < m; ++a) u(a) = sqrt_pi(members[a]) * v(a);
        if (u.sum() < 0.0) u = -u;
        u *= mass / u.sum();
        for (int a = 0; a < m; ++a) stationary(members[a]) = u(a);
    }
    return stationary;
}

void verify_prediction_consistency(const rates::RateMatrix& rm,
                                   const rates::SteadyStatePrediction& prediction,
                                   const PopulationVector& initial) {
    const RealVector from_nullspace = stationary_from_nullspace(rm, initial);
    const double tv = 0.5 * (prediction.populations - from_nullspace).cwiseAbs().sum();
    if (tv > 1e-8) {
        std::ostringstream msg;
        msg << "closed-form prediction and generator null space disagree: TV = " << tv;
        throw NumericalError(msg.str());
    }
}

}  // namespace synchrotherm::dyn
