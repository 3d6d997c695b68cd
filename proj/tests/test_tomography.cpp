#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "hypertomo/metrics.hpp"
#include "hypertomo/tomography.hpp"
#include "support/generators.hpp"

using namespace hypertomo;

namespace {

// Noiseless records holding the exact expected counts N * p_s (plus an
// optional uniform accidental term) -- the consistency oracle for both
// reconstruction routes.
std::vector<MeasurementRecord> expected_records(const DensityMatrix& rho, double n_per_basis,
                                                double accidental_counts = 0.0) {
    std::vector<MeasurementRecord> records;
    for (const auto& s : tomography_settings(Dof::polarization)) {
        MeasurementRecord r;
        r.setting = s;
        r.value = n_per_basis * born_probability(rho, s) + accidental_counts;
        r.duration_s = 1.0;
        r.protocol = Protocol::qst;
        r.noise.accidental_rate_hz = accidental_counts;  // duration 1 s
        records.push_back(r);
    }
    return records;
}

DensityMatrix bell_pol() { return DensityMatrix::from_pure(pol_state(0.0)); }

DensityMatrix maximally_mixed4() {
    return DensityMatrix({2, 2}, ComplexMatrix::identity(4) * cplx{0.25});
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
    auto eig = eig_hermitian(a - b);
    double s = 0.0;
    for (double v : eig.values) s += std::abs(v);
    return 0.5 * s;
}

double min_eigenvalue(const ComplexMatrix& m) {
    return eig_hermitian(m).values.back();
}

}  // namespace

TEST_CASE("linear inversion recovers the maximally mixed state") {
    auto records = expected_records(maximally_mixed4(), 1e6);
    auto rho = linear_inversion(records);
    CHECK(trace_distance(rho, maximally_mixed4().matrix()) < 1e-10);
}

TEST_CASE("linear inversion recovers the Bell state from exact counts") {
    auto records = expected_records(bell_pol(), 1e6);
    auto rho = linear_inversion(records);
    CHECK(trace_distance(rho, bell_pol().matrix()) < 1e-9);
}

TEST_CASE("linear inversion subtracts the accidental floor") {
    auto records = expected_records(bell_pol(), 1e6, 250.0);
    auto rho = linear_inversion(records);
    CHECK(trace_distance(rho, bell_pol().matrix()) < 1e-9);
}

TEST_CASE("linear inversion goes negative on low-count data") {
    ProtocolConfig cfg;
    cfg.qst_rate_scale_hz = 100.0;
    cfg.qst_duration_per_setting_s = 0.5;  // about 50 counts at the brightest setting
    int negative_runs = 0;
    for (int seed = 0; seed < 100; ++seed) {
        cfg.rng_seed = 60000 + seed;
        auto records = simulate_qst(bell_pol(), cfg, Dof::polarization);
        if (min_eigenvalue(linear_inversion(records)) < 0.0) ++negative_runs;
    }
    CHECK(negative_runs > 0);
}

TEST_CASE("linear inversion rejects incomplete coverage") {
    auto records = expected_records(bell_pol(), 1e4);
    records.pop_back();
    CHECK_THROWS_AS(linear_inversion(records), std::invalid_argument);
}

TEST_CASE("cholesky parametrization round-trips a physical state") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        auto rho = testgen::random_density(rng, {2, 2});
        auto back = state_from_params(params_from_state(rho.matrix()));
        // The eigenvalue floor perturbs at the 1e-6 scale.
        CHECK(trace_distance(back.matrix(), rho.matrix()) < 1e-5);
    }
}

TEST_CASE("MLE reconstructs the Bell state from exact expected counts") {
    auto records = expected_records(bell_pol(), 1e6);
    auto res = mle_reconstruct(records);
    CHECK(res.converged);
    CHECK(fidelity(res.rho, pol_state(0.0)) >= 0.9999);
    // PSD and unit trace are enforced by the DensityMatrix invariants, but
    // assert the numbers anyway.
    CHECK(std::abs(res.rho.matrix().trace().real() - 1.0) < 1e-10);
    CHECK(min_eigenvalue(res.rho.matrix()) > -1e-9);
}

TEST_CASE("MLE recovers the visibility-family purity") {
    auto rho = mixed_state({0.9, 0.0, MixedStateKind::two_qubit_psi});
    auto records = expected_records(rho, 1e6);
    auto res = mle_reconstruct(records);
    CHECK(purity(res.rho) == doctest::Approx(0.905).epsilon(2e-4));
}

TEST_CASE("MLE agrees with linear inversion on noiseless data") {
    auto records = expected_records(bell_pol(), 1e6);
    auto li = linear_inversion(records);
    auto res = mle_reconstruct(records);
    CHECK(trace_distance(res.rho.matrix(), li) < 1e-6);
}

TEST_CASE("default init matches an explicit clamped-inversion init") {
    ProtocolConfig cfg;
    cfg.rng_seed = 12121;
    auto records = simulate_qst(bell_pol(), cfg, Dof::polarization);
    auto res_default = mle_reconstruct(records);
    auto res_explicit = mle_reconstruct(records, params_from_state(linear_inversion(records)));
    CHECK(uhlmann_fidelity(res_default.rho, res_explicit.rho) > 1.0 - 1e-6);
}

TEST_CASE("MLE log-likelihood dominates the clamped inversion state") {
    ProtocolConfig cfg;
    for (int seed = 0; seed < 5; ++seed) {
        cfg.rng_seed = 90100 + seed;
        auto records = simulate_qst(bell_pol(), cfg, Dof::polarization);
        auto res = mle_reconstruct(records);
        auto li_state = state_from_params(params_from_state(linear_inversion(records)));
        CHECK(res.log_likelihood >= log_likelihood_at(records, li_state) - 1e-9);
        CHECK(std::abs(res.log_likelihood - log_likelihood_at(records, res.rho)) < 1e-6);
    }
}

TEST_CASE("MLE is invariant under record order") {
    ProtocolConfig cfg;
    cfg.rng_seed = 777;
    auto records = simulate_qst(bell_pol(), cfg, Dof::polarization);
    auto res = mle_reconstruct(records);
    std::mt19937_64 rng(1);
    std::shuffle(records.begin(), records.end(), rng);
    auto res_shuffled = mle_reconstruct(records);
    CHECK(trace_distance(res.rho.matrix(), res_shuffled.rho.matrix()) < 1e-9);
}

TEST_CASE("MLE rejects all-zero counts") {
    auto records = expected_records(bell_pol(), 1e6);
    for (auto& r : records) r.value = 0.0;
    CHECK_THROWS_AS(mle_reconstruct(records), std::invalid_argument);
}

TEST_CASE("resampling is deterministic and rejects tiny n") {
    ProtocolConfig cfg;
    cfg.rng_seed = 222;
    auto records = simulate_qst(bell_pol(), cfg, Dof::polarization);
    auto metric = [](const DensityMatrix& rho) { return purity(rho); };
    auto a = resample_uncertainty(records, 2, metric, 999);
    auto b = resample_uncertainty(records, 2, metric, 999);
    CHECK(a.mean == b.mean);
    CHECK(a.stddev == b.stddev);
    CHECK_THROWS_AS(resample_uncertainty(records, 1, metric, 999), std::invalid_argument);
}

TEST_CASE("bootstrap error shrinks like one over root N counts") {
    ProtocolConfig cfg;
    auto metric = [](const DensityMatrix& rho) { return purity(rho); };

    // Near the pure-state boundary a single run's std estimate fluctuates,
    // so pool the dispersion over a few seeds before taking the ratio.
    double var_small = 0.0, var_big = 0.0;
    for (std::uint64_t seed : {3131, 77, 900}) {
        cfg.rng_seed = seed;
        cfg.qst_duration_per_setting_s = 16.7;
        auto small = simulate_qst(bell_pol(), cfg, Dof::polarization);
        cfg.qst_duration_per_setting_s = 1670.0;
        auto big = simulate_qst(bell_pol(), cfg, Dof::polarization);
        const double s1 = resample_uncertainty(small, 100, metric, 5).stddev;
        const double s2 = resample_uncertainty(big, 100, metric, 6).stddev;
        var_small += s1 * s1 / 3.0;
        var_big += s2 * s2 / 3.0;
    }
    const double ratio = std::sqrt(var_big / var_small);
    // Expect about 0.1; accept within a factor of two.
    CHECK(ratio > 0.05);
    CHECK(ratio < 0.2);
}

TEST_CASE("experiment-rate path run lands near the expected error bar") {
    ProtocolConfig cfg;  // defaults are the experiment-like rates
    cfg.rng_seed = 515;
    auto rho_path = DensityMatrix::from_pure(path_state(0.0));
    auto records = simulate_qst(rho_path, cfg, Dof::path);
    auto stat = resample_uncertainty(records, 200,
                                     [](const DensityMatrix& r) { return purity(r); }, 17);
    CHECK(stat.stddev > 0.0005);
    CHECK(stat.stddev < 0.01);
}

TEST_CASE("reconstruction result serializes with matrix and metadata") {
    auto records = expected_records(bell_pol(), 1e5);
    auto res = mle_reconstruct(records);
    const std::string text = reconstruction_to_json(res, 42);
    CHECK(text.find("\"method\": \"mle\"") != std::string::npos);
    CHECK(text.find("\"seed\": 42") != std::string::npos);
    CHECK(text.find("\"rho\"") != std::string::npos);
}
