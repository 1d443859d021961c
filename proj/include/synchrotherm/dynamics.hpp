// dynamics.hpp — time integration of the Pauli master equation over the rate
// graph, convergence diagnostics, and the spectral-gap relaxation estimate.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "synchrotherm/population.hpp"
#include "synchrotherm/rate_graph.hpp"

namespace synchrotherm::dyn {

struct Trajectory {
    std::vector<PopulationVector> samples;  // at the requested times
    std::vector<double> convergence;        // TV distance to target, if one was given
};

struct EvolveOptions {
    enum class Method {
        Auto,        // exact action when feasible, adaptive RK otherwise
        AdaptiveRk,  // embedded Dormand-Prince 5(4) pair
        ExactAction  // eigendecomposition of the Gibbs-symmetrized generator
    };

    Method method = Method::Auto;
    double abstol = 1e-10;
    int exact_action_max_dim = 512;
    std::optional<RealVector> target;  // reference for the convergence series
};

// Integrates dP/dt = G P from the initial populations, sampling at the
// requested (ascending, nonnegative) times. Populations are clamped to zero
// only in the reported samples, never inside the integrator state.
Trajectory evolve(const rates::RateMatrix& rm, const PopulationVector& initial,
                  std::span<const double> times, const EvolveOptions& options = {});

// Total variation distance (1/2) sum |P - Q|.
double distance_to(const PopulationVector& a, const PopulationVector& b);

// Smallest nonzero decay rate of the generator: the spectral gap of the
// Gibbs-symmetrized generator. Requires a connected graph at finite beta;
// disconnected inputs must be restricted per component first.
double relaxation_rate_estimate(const rates::RateMatrix& rm);

// Stationary state assembled from the generator null space, one null vector
// per component, weighted by the initial-state mass in that component. An
// independent route to the closed-form prediction.
RealVector stationary_from_nullspace(const rates::RateMatrix& rm,
                                     const PopulationVector& initial);

// Cross-verifies the closed-form prediction against the null-space route;
// throws NumericalError when they disagree beyond 1e-8 total variation.
void verify_prediction_consistency(const rates::RateMatrix& rm,
                                   const rates::SteadyStatePrediction& prediction,
                                   const PopulationVector& initial);

}  // namespace synchrotherm::dyn
