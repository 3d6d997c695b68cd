// State-quality figures computed from density matrices: fidelity against a
// pure target, purity, and the two-qubit concurrence/tangle pair.

#pragma once

#include <optional>

#include "hypertomo/linalg.hpp"

namespace hypertomo {

struct ValueWithError {
    double value = 0.0;
    std::optional<double> sigma;  // absent for analytic inputs
};

struct StateMetrics {
    ValueWithError fidelity;
    ValueWithError purity;
    ValueWithError tangle;
    ValueWithError concurrence;
};

/// <psi|rho|psi> for a pure target (the Uhlmann fidelity in this case).
double fidelity(const DensityMatrix& rho, const PureStateVector& target);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 for mixed targets.
double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Tr[rho^2].
double purity(const DensityMatrix& rho);

/// Two-qubit concurrence, max(0, l1 - l2 - l3 - l4) over the square-rooted
/// spectrum of rho (sy x sy) rho* (sy x sy). Throws for dims != [2,2].
double concurrence(const DensityMatrix& rho);

/// concurrence squared.
double tangle(const DensityMatrix& rho);

}  // namespace hypertomo
