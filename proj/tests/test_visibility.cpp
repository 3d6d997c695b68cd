#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hypertomo/states.hpp"
#include "hypertomo/visibility.hpp"
#include "support/interference_oracle.hpp"

using namespace hypertomo;

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

BSTable experiment_bs_table() {
    return BSTable{
        BeamSplitter::from_intensities(0.42, 0.58),  // lambda1 H
        BeamSplitter::from_intensities(0.36, 0.64),  // lambda1 V
        BeamSplitter::from_intensities(0.45, 0.55),  // lambda2 H
        BeamSplitter::from_intensities(0.43, 0.57),  // lambda2 V
    };
}

}  // namespace

TEST_CASE("lossless condition is enforced") {
    CHECK_THROWS_AS(BeamSplitter(0.8, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(BeamSplitter(-0.6, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(BeamSplitter::from_intensities(0.5, 0.6), std::invalid_argument);
    CHECK_NOTHROW(BeamSplitter::from_intensities(0.42, 0.58));
}

TEST_CASE("beam splitter unitary is unitary") {
    auto u = BeamSplitter::from_intensities(0.36, 0.64).unitary();
    auto defect = u.adjoint() * u - ComplexMatrix::identity(2);
    CHECK(defect.frobenius_norm() < 1e-12);
}

TEST_CASE("balanced splitter gives unit visibility") {
    BeamSplitter balanced(inv_sqrt2, inv_sqrt2);
    CHECK(visibility_1q(balanced) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(visibility_2q(balanced, balanced) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("visibility_1q closed form and table value") {
    auto bs = BeamSplitter::from_intensities(0.42, 0.58);
    const double expected = 2.0 * std::sqrt(0.42 * 0.58);
    CHECK(visibility_1q(bs) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(visibility_1q(bs) == doctest::Approx(0.98712).epsilon(1e-4));
    CHECK(visibility_1q(BeamSplitter(0.0, 1.0)) == 0.0);
}

TEST_CASE("visibility matches the interference oracle on the table splitters") {
    auto table = experiment_bs_table();
    CHECK(std::abs(visibility_1q(table.lambda1_h) -
                   testoracle::interference_visibility_1q(table.lambda1_h)) < 1e-10);
    const double v_h = visibility_2q(table.lambda1_h, table.lambda2_h);
    const double v_v = visibility_2q(table.lambda1_v, table.lambda2_v);
    CHECK(std::abs(v_h - testoracle::interference_visibility_2q(table.lambda1_h,
                                                                table.lambda2_h)) < 1e-10);
    CHECK(std::abs(v_v - testoracle::interference_visibility_2q(table.lambda1_v,
                                                                table.lambda2_v)) < 1e-10);
    CHECK(v_h == doctest::Approx(0.966701).epsilon(1e-5));
    CHECK(v_v == doctest::Approx(0.914690).epsilon(1e-5));
}

TEST_CASE("closed forms agree with the oracle on random lossless splitters") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unif(0.02, 0.98);
    for (int i = 0; i < 100; ++i) {
        const double r2a = unif(rng), r2b = unif(rng);
        BeamSplitter a = BeamSplitter::from_intensities(r2a, 1.0 - r2a);
        BeamSplitter b = BeamSplitter::from_intensities(r2b, 1.0 - r2b);
        CHECK(std::abs(visibility_1q(a) - testoracle::interference_visibility_1q(a)) < 1e-10);
        CHECK(std::abs(visibility_2q(a, b) - testoracle::interference_visibility_2q(a, b)) <
              1e-10);
    }
}

TEST_CASE("equal-splitter reduction of the 2q formula") {
    for (double r2 : {0.1, 0.3, 0.42, 0.49}) {
        BeamSplitter bs = BeamSplitter::from_intensities(r2, 1.0 - r2);
        const double t2 = 1.0 - r2;
        const double expected = 1.0 - (t2 - r2) * (t2 - r2) / (t2 * t2 + r2 * r2);
        CHECK(visibility_2q(bs, bs) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("purity bounds reproduce the experiment ceilings") {
    auto table = experiment_bs_table();
    CHECK(purity_bound(visibility_2q(table.lambda1_h, table.lambda2_h)) ==
          doctest::Approx(0.96725).epsilon(5e-5));
    CHECK(purity_bound(visibility_2q(table.lambda1_v, table.lambda2_v)) ==
          doctest::Approx(0.91833).epsilon(5e-5));
    CHECK(purity_bound(1.0) == 1.0);
    CHECK_THROWS_AS(purity_bound(1.5), std::invalid_argument);
    CHECK_THROWS_AS(purity_bound(-0.1), std::invalid_argument);
}

TEST_CASE("purity consistency verdicts") {
    auto ok_h = check_purity_consistency(0.909, 0.003, 0.96725);
    CHECK(ok_h.compatible);
    auto ok_v = check_purity_consistency(0.886, 0.001, 0.91833);
    CHECK(ok_v.compatible);
    auto bad = check_purity_consistency(0.99, 0.001, 0.918);
    CHECK_FALSE(bad.compatible);
    CHECK(bad.excess > 0.0);
}

TEST_CASE("mixed state fringe on balanced splitters recovers its visibility") {
    BeamSplitter balanced(inv_sqrt2, inv_sqrt2);
    const ComplexMatrix u = tensor(balanced.unitary(), balanced.unitary());
    for (double v : {0.3, 0.75, 0.9667, 1.0}) {
        const double fringe = testoracle::fringe_visibility([&](double phi) {
            auto rho = mixed_state({v, phi, MixedStateKind::two_qubit_psi});
            auto out = u * rho.matrix() * u.adjoint();
            return out(1, 1).real();
        });
        CHECK(std::abs(fringe - v) < 1e-10);
    }
}
