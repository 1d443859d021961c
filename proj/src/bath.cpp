#include "synchrotherm/bath.hpp"

#include <cmath>
#include <sstream>

namespace synchrotherm::bath {

void BathSpec::validate() const {
    if (!(coupling > 0.0)) {
        throw ValidationError("bath coupling must be > 0");
    }
    if (!(cutoff > 0.0)) {
        throw ValidationError("bath cutoff must be > 0");
    }
    if (!(beta > 0.0)) {
        throw ValidationError("bath beta must be > 0 (or +infinity)");
    }
}

double spectral_density(const BathSpec& spec, double omega) {
    if (omega < 0.0) {
        std::ostringstream msg;
        msg << "spectral_density requires omega >= 0, got " << omega;
        throw ValidationError(msg.str());
    }
    switch (spec.family) {
        case Family::OhmicExpCutoff:
            return spec.coupling * omega * std::exp(-omega / spec.cutoff);
        case Family::Flat:
            return spec.coupling;
    }
    return 0.0;
}

double bose_occupation(const BathSpec& spec, double omega) {
    if (!(omega > 0.0)) {
        std::ostringstream msg;
        msg << "bose_occupation requires omega > 0, got " << omega;
        throw ValidationError(msg.str());
    }
    if (spec.zero_temperature()) return 0.0;
    // expm1 keeps the w -> 0 divergence and the large-beta underflow exact.
    return 1.0 / std::expm1(spec.beta * omega);
}

double rate(const BathSpec& spec, double omega) {
    if (omega == 0.0) return 0.0;
    const double gap = std::abs(omega);
    const double j = spectral_density(spec, gap);
    if (j == 0.0) return 0.0;
    const double occupation = spec.zero_temperature() ? 0.0 : 1.0 / std::expm1(spec.beta * gap);
    return omega > 0.0 ? j * occupation : j * (occupation + 1.0);
}

}  // namespace synchrotherm::bath
