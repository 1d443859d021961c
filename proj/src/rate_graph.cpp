#include "synchrotherm/rate_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace synchrotherm::rates {

namespace {

struct UnionFind {
    std::vector<int> parent;

    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }

    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }

    bool merge(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

// Shared assembly: candidate pairs carry the summed squared coupling element.
RateMatrix assemble(const RealVector& energies,
                    const std::vector<std::tuple<int, int, double>>& pair_weights,
                    const bath::BathSpec& bath_spec, const RateThresholds& thresholds) {
    bath_spec.validate();
    const double max_abs_e = energies.size() > 0 ? energies.cwiseAbs().maxCoeff() : 0.0;
    const double gap_tol = thresholds.gap_tol_rel * std::max(max_abs_e, 1.0);

    struct PairRates {
        int i, j;
        double up, down;  // W(j<-i), W(i<-j)
    };
    std::vector<DegeneratePair> degenerate;
    std::vector<PairRates> candidates;
    double max_rate = 0.0;
    for (const auto& [i, j, weight2] : pair_weights) {
        if (weight2 <= 0.0) continue;
        const double gap = energies(j) - energies(i);
        if (std::abs(gap) <= gap_tol) {
            degenerate.push_back({std::min(i, j), std::max(i, j), weight2});
            continue;
        }
        const double up = weight2 * bath::rate(bath_spec, gap);
        const double down = weight2 * bath::rate(bath_spec, -gap);
        if (up > 0.0 || down > 0.0) candidates.push_back({i, j, up, down});
        max_rate = std::max({max_rate, up, down});
    }

    // The floor is applied per pair: a pair whose faster direction clears the
    // threshold keeps its reverse rate too, however small, so every stored
    // pair satisfies detailed balance exactly and the graph stays
    // symmetrizable. Dropping only whole pairs leaves the topology unchanged.
    const double edge_threshold = thresholds.edge_threshold_rel * max_rate;
    std::vector<RateMatrix::Edge> edges;
    edges.reserve(2 * candidates.size());
    for (const auto& pair : candidates) {
        if (std::max(pair.up, pair.down) <= edge_threshold) continue;
        if (pair.up > 0.0) edges.push_back({pair.j, pair.i, pair.up});
        if (pair.down > 0.0) edges.push_back({pair.i, pair.j, pair.down});
    }
    std::sort(degenerate.begin(), degenerate.end(), [](const auto& a, const auto& b) {
        return std::pair(a.i, a.j) < std::pair(b.i, b.j);
    });
    return RateMatrix(energies, std::move(edges), std::move(degenerate), bath_spec.beta,
                      edge_threshold, gap_tol);
}

std::vector<std::tuple<int, int, double>> pair_weights_from_ops(
    const std::vector<ComplexMatrix>& transformed) {
    std::vector<std::tuple<int, int, double>> out;
    if (transformed.empty()) return out;
    const int dim = static_cast<int>(transformed.front().rows());
    for (int i = 0; i < dim; ++i) {
        for (int j = i + 1; j < dim; ++j) {
            double weight2 = 0.0;
            for (const auto& op : transformed) {
                weight2 += std::norm(op(i, j));
            }
            if (weight2 > 0.0) out.emplace_back(i, j, weight2);
        }
    }
    return out;
}

}  // namespace

RateMatrix::RateMatrix(RealVector energies, std::vector<Edge> edges,
                       std::vector<DegeneratePair> degenerate_pairs, double beta,
                       double edge_threshold, double gap_tol)
    : energies_(std::move(energies)),
      edges_(std::move(edges)),
      degenerate_pairs_(std::move(degenerate_pairs)),
      beta_(beta),
      edge_threshold_(edge_threshold),
      gap_tol_(gap_tol),
      max_rate_(0.0) {
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return std::pair(a.to, a.from) < std::pair(b.to, b.from);
    });
    for (const auto& e : edges_) max_rate_ = std::max(max_rate_, e.rate);

    // Detailed-balance identity for every stored pair with both directions
    // present, checked in log form so extreme Boltzmann factors cannot
    // overflow: ln W(f<-i) - beta e_i = ln W(i<-f) - beta e_f.
    if (!std::isinf(beta_)) {
        const double e_min = energies_.size() > 0 ? energies_.minCoeff() : 0.0;
        for (const auto& e : edges_) {
            if (e.to < e.from) continue;  // one orientation per pair
            const double reverse = rate(e.from, e.to);
            if (reverse <= 0.0) continue;
            const double lhs = std::log(e.rate) - beta_ * (energies_(e.from) - e_min);
            const double rhs = std::log(reverse) - beta_ * (energies_(e.to) - e_min);
            if (std::abs(lhs - rhs) > 1e-9) {
                std::ostringstream msg;
                msg << "detailed balance violated on pair (" << e.from << ", " << e.to
                    << "): log-form residual " << std::abs(lhs - rhs);
                throw NumericalError(msg.str());
            }
        }
    }
}

double RateMatrix::rate(int to, int from) const {
    const auto it = std::lower_bound(
        edges_.begin(), edges_.end(), std::pair(to, from), [](const Edge& e, const auto& key) {
            return std::pair(e.to, e.from) < key;
        });
    if (it == edges_.end() || it->to != to || it->from != from) return 0.0;
    return it->rate;
}

RealMatrix RateMatrix::generator() const {
    RealMatrix g = RealMatrix::Zero(n_levels(), n_levels());
    for (const auto& e : edges_) {
        g(e.to, e.from) += e.rate;
        g(e.from, e.from) -= e.rate;
    }
    return g;
}

RateMatrix build_rate_matrix(const EigenBasis& basis,
                             const std::vector<CouplingChannel>& channels,
                             const bath::BathSpec& bath_spec,
                             const RateThresholds& thresholds) {
    std::vector<ComplexMatrix> transformed;
    transformed.reserve(channels.size());
    for (const auto& channel : channels) {
        if (channel.op.dim() != basis.dim()) {
            throw ValidationError("coupling channel dimension does not match the basis");
        }
        transformed.push_back(basis.vectors.adjoint() * channel.op.entries() * basis.vectors);
    }
    return assemble(basis.energies, pair_weights_from_ops(transformed), bath_spec, thresholds);
}

RateMatrix build_rate_matrix(const models::AnalyticEigensystem& eig,
                             const std::vector<models::EffectiveCoupling>& couplings,
                             const bath::BathSpec& bath_spec,
                             const RateThresholds& thresholds) {
    std::vector<std::tuple<int, int, double>> pair_weights;
    pair_weights.reserve(couplings.size());
    for (const auto& c : couplings) {
        pair_weights.emplace_back(c.i, c.j, c.weight * c.weight);
    }
    return assemble(eig.energies(), pair_weights, bath_spec, thresholds);
}

RateMatrix build_rate_matrix(const models::DispersiveModel& model,
                             const bath::BathSpec& bath_spec,
                             const RateThresholds& thresholds) {
    return assemble(model.basis.energies, pair_weights_from_ops({model.coupling}), bath_spec,
                    thresholds);
}

ConnectivityReport connectivity(const RateMatrix& rm) {
    const int n = rm.n_levels();
    UnionFind uf(n);
    for (const auto& e : rm.edges()) uf.merge(e.to, e.from);

    ConnectivityReport report;
    for (const auto& d : rm.degenerate_pairs()) {
        if (uf.find(d.i) != uf.find(d.j)) {
            uf.merge(d.i, d.j);
            report.degenerate_links.emplace_back(d.i, d.j);
        }
    }

    std::map<int, int> root_to_component;
    report.component_of.assign(n, -1);
    for (int k = 0; k < n; ++k) {
        const int root = uf.find(k);
        auto [it, inserted] = root_to_component.try_emplace(root, report.n_components());
        if (inserted) report.components.emplace_back();
        report.component_of[k] = it->second;
        report.components[it->second].push_back(k);
    }
    report.connected = report.n_components() == 1;

    if (std::isinf(rm.beta())) {
        report.warning =
            "zero-temperature graph: upward rates vanish, components computed on the "
            "union of both directions";
    } else if (!report.degenerate_links.empty()) {
        report.warning =
            "degenerate zero-rate pairs were counted as links for classification";
    }
    return report;
}

SteadyStatePrediction predict_steady_state(const RateMatrix& rm,
                                           const ConnectivityReport& report,
                                           const PopulationVector& initial) {
    initial.validate();
    if (initial.values.size() != rm.n_levels()) {
        throw ValidationError("initial population length does not match the level count");
    }

    const double beta = rm.beta();
    SteadyStatePrediction prediction;
    prediction.kind = report.connected ? SteadyStatePrediction::Kind::Canonical
                                       : SteadyStatePrediction::Kind::Mixture;
    prediction.populations = RealVector::Zero(rm.n_levels());
    prediction.component_weights.resize(report.n_components());

    for (int c = 0; c < report.n_components(); ++c) {
        const auto& members = report.components[c];
        double mass = 0.0;
        for (int k : members) mass += std::max(initial.values(k), 0.0);
        const double weight = report.connected ? 1.0 : mass;
        prediction.component_weights[c] = weight;
        if (weight == 0.0) continue;

        // Gibbs weights with the max-energy shift for numerical stability.
        double e_min = rm.energies()(members.front());
        for (int k : members) e_min = std::min(e_min, rm.energies()(k));
        double z = 0.0;
        for (int k : members) {
            const double d = rm.energies()(k) - e_min;
            const double w = d <= 0.0 ? 1.0 : std::exp(-beta * d);
            prediction.populations(k) = w;
            z += w;
        }
        for (int k : members) prediction.populations(k) *= weight / z;
    }
    return prediction;
}

StationarityReport verify_stationarity(const RateMatrix& rm, const RealVector& populations) {
    if (populations.size() != rm.n_levels()) {
        throw ValidationError("population length does not match the level count");
    }
    RealVector net = RealVector::Zero(rm.n_levels());
    for (const auto& e : rm.edges()) {
        const double flux = e.rate * populations(e.from);
        net(e.to) += flux;
        net(e.from) -= flux;
    }
    StationarityReport report;
    report.residual = net.size() > 0 ? net.cwiseAbs().maxCoeff() : 0.0;
    report.bound = 1e-9 * rm.max_rate();
    report.accepted = report.residual <= report.bound;
    return report;
}

RateMatrix restrict_to_component(const RateMatrix& rm, const std::vector<int>& levels) {
    std::vector<int> map_to_local(rm.n_levels(), -1);
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] < 0 || levels[k] >= rm.n_levels()) {
            throw ValidationError("restrict_to_component: level index out of range");
        }
        map_to_local[levels[k]] = static_cast<int>(k);
    }
    RealVector energies(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) energies(k) = rm.energies()(levels[k]);

    std::vector<RateMatrix::Edge> edges;
    for (const auto& e : rm.edges()) {
        const int to = map_to_local[e.to];
        const int from = map_to_local[e.from];
        if (to >= 0 && from >= 0) edges.push_back({to, from, e.rate});
    }
    std::vector<DegeneratePair> degenerate;
    for (const auto& d : rm.degenerate_pairs()) {
        const int i = map_to_local[d.i];
        const int j = map_to_local[d.j];
        if (i >= 0 && j >= 0) degenerate.push_back({std::min(i, j), std::max(i, j), d.weight2});
    }
    return RateMatrix(std::move(energies), std::move(edges), std::move(degenerate), rm.beta(),
                      rm.edge_threshold(), rm.gap_tol());
}

}  // namespace synchrotherm::rates
