// population.hpp — probability vector over eigenlevels.

#pragma once

#include <Eigen/Dense>

#include "synchrotherm/errors.hpp"

namespace synchrotherm {

struct PopulationVector {
    Eigen::VectorXd values;
    double time = 0.0;  // 1/energy units

    // Nonnegative up to -1e-12 roundoff, total probability 1 within 1e-9.
    void validate() const;
};

}  // namespace synchrotherm
