#include "hypertomo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hypertomo {

double fidelity(const DensityMatrix& rho, const PureStateVector& target) {
    if (rho.dim() != target.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    cplx s = 0.0;
    for (std::size_t i = 0; i < target.dim(); ++i) {
        cplx row = 0.0;
        for (std::size_t j = 0; j < target.dim(); ++j)
            row += rho.matrix()(i, j) * target.amplitude(j);
        s += std::conj(target.amplitude(i)) * row;
    }
    return std::clamp(s.real(), 0.0, 1.0);
}

double uhlmann_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim())
        throw std::invalid_argument("uhlmann_fidelity: dimension mismatch");
    const ComplexMatrix root = sqrt_psd(rho.matrix());
    const ComplexMatrix inner = root * sigma.matrix() * root;
    const double tr = sqrt_psd(inner).trace().real();
    return std::clamp(tr * tr, 0.0, 1.0);
}

double purity(const DensityMatrix& rho) {
    // Tr[rho^2] = sum |rho_ij|^2 for Hermitian rho.
    double s = 0.0;
    for (const cplx& v : rho.matrix().data()) s += std::norm(v);
    return s;
}

double concurrence(const DensityMatrix& rho) {
    if (rho.dims() != std::vector<std::size_t>{2, 2})
        throw std::invalid_argument("concurrence: state is not two qubits");

    // sy x sy is the antidiagonal [-1, 1, 1, -1] (real).
    ComplexMatrix flip(4, 4);
    flip(0, 3) = -1.0;
    flip(1, 2) = 1.0;
    flip(2, 1) = 1.0;
    flip(3, 0) = -1.0;

    const ComplexMatrix spin_flipped = flip * rho.matrix().conjugate() * flip;
    const ComplexMatrix root = sqrt_psd(rho.matrix());
    // Hermitian route: eig(sqrt(rho) rho~ sqrt(rho)) has the same spectrum as
    // rho rho~, and stays within the Hermitian solver.
    ComplexMatrix r = root * spin_flipped * root;
    ComplexMatrix sym(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) sym(i, j) = 0.5 * (r(i, j) + std::conj(r(j, i)));

    auto eig = eig_hermitian(sym);
    double lams[4];
    for (int i = 0; i < 4; ++i) {
        double v = eig.values[i];
        if (v < 0.0) {
            if (v < -1e-10) throw std::domain_error("concurrence: R-matrix spectrum negative");
            v = 0.0;
        }
        lams[i] = std::sqrt(v);
    }
    return std::max(0.0, lams[0] - lams[1] - lams[2] - lams[3]);
}

double tangle(const DensityMatrix& rho) {
    const double c = concurrence(rho);
    return c * c;
}

}  // namespace hypertomo
