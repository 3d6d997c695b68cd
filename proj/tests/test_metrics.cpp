#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hypertomo/metrics.hpp"
#include "hypertomo/states.hpp"
#include "support/generators.hpp"

using namespace hypertomo;

namespace {

DensityMatrix bell_rho() { return DensityMatrix::from_pure(pol_state(0.0)); }

DensityMatrix maximally_mixed4() {
    return DensityMatrix({2, 2}, ComplexMatrix::identity(4) * cplx{0.25});
}

DensityMatrix werner(double p) {
    auto bell = bell_rho();
    ComplexMatrix m = bell.matrix() * cplx{p} + ComplexMatrix::identity(4) * cplx{(1.0 - p) / 4.0};
    return DensityMatrix({2, 2}, std::move(m));
}

DensityMatrix conjugate_by(const DensityMatrix& rho, const ComplexMatrix& u) {
    ComplexMatrix m = u * rho.matrix() * u.adjoint();
    ComplexMatrix sym(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) sym(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return DensityMatrix(rho.dims(), std::move(sym));
}

}  // namespace

TEST_CASE("fidelity basics") {
    CHECK(fidelity(bell_rho(), pol_state(0.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(maximally_mixed4(), pol_state(0.0)) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("fidelity of the visibility family against the path target") {
    for (double v : {0.5, 0.9, 0.9667}) {
        auto rho = mixed_state({v, 0.0, MixedStateKind::two_qubit_psi});
        CHECK(fidelity(rho, path_state(0.0)) == doctest::Approx((1.0 + v) / 2.0).epsilon(1e-12));
    }
    auto rho = mixed_state({0.9667, 0.0, MixedStateKind::two_qubit_psi});
    CHECK(fidelity(rho, path_state(0.0)) == doctest::Approx(0.9834).epsilon(5e-5));
}

TEST_CASE("fidelity is invariant under a global phase on the target") {
    std::mt19937_64 rng(7);
    auto rho = testgen::random_density(rng, {2, 2});
    auto target = testgen::random_pure_state(rng, {2, 2});
    std::vector<cplx> rotated(target.amplitudes().begin(), target.amplitudes().end());
    const cplx ph{std::cos(1.234), std::sin(1.234)};
    for (cplx& a : rotated) a *= ph;
    auto target2 = PureStateVector({2, 2}, std::move(rotated));
    CHECK(std::abs(fidelity(rho, target) - fidelity(rho, target2)) < 1e-14);
}

TEST_CASE("uhlmann fidelity agrees with the pure-target overlap") {
    std::mt19937_64 rng(13);
    auto rho = testgen::random_density(rng, {2, 2});
    auto psi = testgen::random_pure_state(rng, {2, 2});
    // Two chained matrix square roots; sqrt amplifies near-zero eigenvalue
    // noise, so the agreement tolerance is looser than elsewhere.
    CHECK(std::abs(uhlmann_fidelity(rho, DensityMatrix::from_pure(psi)) - fidelity(rho, psi)) <
          1e-7);
    CHECK(uhlmann_fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("purity basics") {
    CHECK(purity(bell_rho()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(purity(maximally_mixed4()) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(purity(mixed_state({0.966701, 0.0, MixedStateKind::one_qubit})) ==
          doctest::Approx(0.96725).epsilon(2e-5));
}

TEST_CASE("purity is invariant under local unitaries") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 10; ++rep) {
        auto rho = testgen::random_density(rng, {2, 2});
        auto u = tensor(testgen::random_unitary(rng, 2), testgen::random_unitary(rng, 2));
        CHECK(std::abs(purity(conjugate_by(rho, u)) - purity(rho)) < 1e-10);
    }
}

TEST_CASE("concurrence of reference states") {
    CHECK(concurrence(bell_rho()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(concurrence(maximally_mixed4()) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("Werner state concurrence matches the closed form") {
    // The numeric spectrum route must land on max(0, (3p - 1)/2).
    CHECK(concurrence(werner(0.8)) == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(concurrence(werner(1.0 / 3.0)) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(concurrence(werner(0.2)) == 0.0);
}

TEST_CASE("concurrence is invariant under local unitaries") {
    std::mt19937_64 rng(19);
    for (int rep = 0; rep < 10; ++rep) {
        auto rho = testgen::random_density(rng, {2, 2});
        auto u = tensor(testgen::random_unitary(rng, 2), testgen::random_unitary(rng, 2));
        CHECK(std::abs(concurrence(conjugate_by(rho, u)) - concurrence(rho)) < 1e-8);
    }
}

TEST_CASE("concurrence rejects non-two-qubit input") {
    std::mt19937_64 rng(23);
    auto rho = testgen::random_density(rng, {4});
    CHECK_THROWS_AS(concurrence(rho), std::invalid_argument);
}

TEST_CASE("tangle is the squared concurrence") {
    CHECK(tangle(bell_rho()) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(tangle(maximally_mixed4()) == 0.0);
    std::mt19937_64 rng(29);
    for (int rep = 0; rep < 5; ++rep) {
        auto rho = testgen::random_density(rng, {2, 2});
        const double c = concurrence(rho);
        CHECK(std::abs(tangle(rho) - c * c) < 1e-12);
    }
}

TEST_CASE("tabulated tangle/concurrence pairs satisfy tau = C^2") {
    struct Pair {
        double tau, sigma_tau, c, sigma_c;
    };
    // Measured column pairs entered as fixtures; tolerance is the propagated
    // quoted uncertainty.
    const Pair pairs[] = {
        {0.785, 0.005, 0.886, 0.003},
        {0.577, 0.026, 0.759, 0.017},
        {0.779, 0.001, 0.883, 0.001},
        {0.411, 0.022, 0.641, 0.017},
    };
    for (const auto& p : pairs) {
        const double tol = p.sigma_tau + 2.0 * p.c * p.sigma_c;
        CHECK(std::abs(p.tau - p.c * p.c) <= tol);
    }
}
