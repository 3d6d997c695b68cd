// Deterministic random generators for property-style tests. Test-only code;
// nothing here depends on the library paths it is used to check.

#pragma once

#include <complex>
#include <random>
#include <vector>

#include "hypertomo/linalg.hpp"

namespace testgen {

using hypertomo::ComplexMatrix;
using hypertomo::cplx;

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = g(rng);
        for (std::size_t j = i + 1; j < n; ++j) {
            const cplx v{g(rng), g(rng)};
            m(i, j) = v;
            m(j, i) = std::conj(v);
        }
    }
    return m;
}

inline hypertomo::PureStateVector random_pure_state(std::mt19937_64& rng,
                                                    std::vector<std::size_t> dims) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::size_t d = 1;
    for (std::size_t x : dims) d *= x;
    std::vector<cplx> amps(d);
    for (cplx& a : amps) a = {g(rng), g(rng)};
    return hypertomo::PureStateVector::normalized(std::move(dims), std::move(amps));
}

// Random full-rank density matrix via M M† / Tr.
inline hypertomo::DensityMatrix random_density(std::mt19937_64& rng,
                                               std::vector<std::size_t> dims) {
    std::normal_distribution<double> g(0.0, 1.0);
    std::size_t d = 1;
    for (std::size_t x : dims) d *= x;
    ComplexMatrix m(d, d);
    for (auto& v : m.data()) v = {g(rng), g(rng)};
    ComplexMatrix rho = m * m.adjoint();
    rho *= 1.0 / rho.trace();
    // Hermitize exactly; the product picks up last-bit asymmetry.
    ComplexMatrix sym(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) sym(i, j) = 0.5 * (rho(i, j) + std::conj(rho(j, i)));
    return hypertomo::DensityMatrix(std::move(dims), std::move(sym));
}

// Random unitary from the eigenvectors of a random Hermitian matrix.
inline ComplexMatrix random_unitary(std::mt19937_64& rng, std::size_t n) {
    return hypertomo::eig_hermitian(random_hermitian(rng, n)).vectors;
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            d = std::max(d, std::abs(a(i, j) - b(i, j)));
    return d;
}

}  // namespace testgen
