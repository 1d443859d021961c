#include "synchrotherm/population.hpp"

#include <cmath>
#include <sstream>

namespace synchrotherm {

void PopulationVector::validate() const {
    if (values.size() < 1) {
        throw ValidationError("population vector must be nonempty");
    }
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values(i) < -1e-12 || !std::isfinite(values(i))) {
            std::ostringstream msg;
            msg << "population[" << i << "] = " << values(i) << " is negative beyond roundoff";
            throw ValidationError(msg.str());
        }
    }
    const double total = values.sum();
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << "population vector sums to " << total << ", expected 1 within 1e-9";
        throw ValidationError(msg.str());
    }
}

}  // namespace synchrotherm
