// bath.hpp — parametric heat bath: spectral density J(w), Bose occupation
// N(w), and the directional dissipation rate Gamma(w) they combine into.
//
// Sign convention: rate() takes w = E_final - E_initial. Absorption (w > 0)
// carries J(w) N(w), emission (w < 0) carries J(|w|)[N(|w|) + 1], so
// rate(-w) = exp(beta w) rate(+w) holds in closed form.

#pragma once

#include <cmath>

#include "synchrotherm/errors.hpp"

namespace synchrotherm::bath {

enum class Family { OhmicExpCutoff, Flat };

struct BathSpec {
    Family family = Family::OhmicExpCutoff;
    double coupling = 1.0;  // eta for ohmic, gamma0 for flat (energy units)
    double cutoff = 1.0;    // w_c; ignored by the flat family
    double beta = 1.0;      // inverse temperature; +infinity means T = 0

    void validate() const;
    bool zero_temperature() const { return std::isinf(beta); }
};

// J(w): ohmic_exp_cutoff -> eta w exp(-w/w_c); flat -> gamma0.
double spectral_density(const BathSpec& spec, double omega);

// N(w) = 1/(exp(beta w) - 1) for w > 0; zero at beta = +infinity.
double bose_occupation(const BathSpec& spec, double omega);

// Bath part of the transition rate at w = E_final - E_initial. Zero-gap
// transitions carry zero rate by convention and are surfaced separately by
// the rate graph.
double rate(const BathSpec& spec, double omega);

}  // namespace synchrotherm::bath
