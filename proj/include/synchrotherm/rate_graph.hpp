// rate_graph.hpp — transition-rate matrix over eigenlevels, connectivity
// classification of the induced graph, and steady-state prediction (canonical
// state on a connected graph, mixture of partial thermal states otherwise).

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "synchrotherm/bath.hpp"
#include "synchrotherm/models.hpp"
#include "synchrotherm/population.hpp"
#include "synchrotherm/spectral_core.hpp"

namespace synchrotherm::rates {

struct RateThresholds {
    // Rate floor relative to the max stored rate, applied per level pair: a
    // pair is dropped only when both directions fall below the floor, so the
    // stored graph keeps exact detailed-balance pairing.
    double edge_threshold_rel = 1e-12;
    double gap_tol_rel = 1e-10;  // degenerate-gap tolerance, relative to max|E|
};

// Zero-gap level pair with nonzero coupling. Such pairs carry no rate (the
// secular Pauli equation is derived for nondegenerate gaps and the flat
// bath's N(0) diverges) and are surfaced here instead of silently dropped.
struct DegeneratePair {
    int i = 0;
    int j = 0;          // i < j
    double weight2 = 0.0;  // summed squared coupling element
};

class RateMatrix {
public:
    struct Edge {
        int to = 0;    // final level f
        int from = 0;  // initial level i
        double rate = 0.0;  // W(f <- i)
    };

    RateMatrix(RealVector energies, std::vector<Edge> edges,
               std::vector<DegeneratePair> degenerate_pairs, double beta,
               double edge_threshold, double gap_tol);

    int n_levels() const { return static_cast<int>(energies_.size()); }
    const RealVector& energies() const { return energies_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<DegeneratePair>& degenerate_pairs() const { return degenerate_pairs_; }

    double beta() const { return beta_; }
    double edge_threshold() const { return edge_threshold_; }
    double gap_tol() const { return gap_tol_; }
    double max_rate() const { return max_rate_; }

    // W(f <- i), zero when absent.
    double rate(int to, int from) const;

    // Generator G of dP/dt = G P: off-diagonal G(f,i) = W(f<-i), diagonal
    // G(i,i) = -sum_f W(f<-i).
    RealMatrix generator() const;

private:
    RealVector energies_;
    std::vector<Edge> edges_;  // sorted by (to, from)
    std::vector<DegeneratePair> degenerate_pairs_;
    double beta_;
    double edge_threshold_;
    double gap_tol_;
    double max_rate_;
};

// Generic pipeline: W(f <- i) = sum_channels |<f|A|i>|^2 * rate(bath, E_f - E_i)
// with the coupling elements taken in the eigenbasis.
RateMatrix build_rate_matrix(const EigenBasis& basis,
                             const std::vector<CouplingChannel>& channels,
                             const bath::BathSpec& bath_spec,
                             const RateThresholds& thresholds = {});

// Analytic pipeline: coupling elements are the Franck-Condon weights.
RateMatrix build_rate_matrix(const models::AnalyticEigensystem& eig,
                             const std::vector<models::EffectiveCoupling>& couplings,
                             const bath::BathSpec& bath_spec,
                             const RateThresholds& thresholds = {});

// Dispersive model: the coupling matrix is already expressed in the eigenbasis.
RateMatrix build_rate_matrix(const models::DispersiveModel& model,
                             const bath::BathSpec& bath_spec,
                             const RateThresholds& thresholds = {});

struct ConnectivityReport {
    std::vector<std::vector<int>> components;      // partition, sorted members
    std::vector<int> component_of;                 // level index -> component id
    bool connected = false;
    std::vector<std::pair<int, int>> degenerate_links;  // degenerate pairs used as links
    std::string warning;

    int n_components() const { return static_cast<int>(components.size()); }
};

// Undirected reachability over the support of W. Degenerate coupled pairs
// carry zero rate but count as links for classification: any infinitesimal
// gap perturbation makes their rate nonzero, so the robust component count
// treats them as connected; every such link is listed in the report.
ConnectivityReport connectivity(const RateMatrix& rm);

struct SteadyStatePrediction {
    enum class Kind { Canonical, Mixture };
    Kind kind = Kind::Canonical;
    RealVector populations;
    std::vector<double> component_weights;  // initial-state mass per component
};

// Connected graph: Gibbs over all levels, independent of the initial state.
// Disconnected graph: per-component Gibbs weighted by the initial-state mass
// projected into each component.
SteadyStatePrediction predict_steady_state(const RateMatrix& rm,
                                           const ConnectivityReport& report,
                                           const PopulationVector& initial);

struct StationarityReport {
    double residual = 0.0;  // max_n |sum_m W(n<-m) P_m - sum_m W(m<-n) P_n|
    double bound = 0.0;     // 1e-9 * max rate
    bool accepted = true;
};

StationarityReport verify_stationarity(const RateMatrix& rm, const RealVector& populations);

// Sub-rate-matrix over the given levels (indices remapped to 0..k-1 in the
// given order). Thresholds are inherited, not recomputed.
RateMatrix restrict_to_component(const RateMatrix& rm, const std::vector<int>& levels);

}  // namespace synchrotherm::rates
