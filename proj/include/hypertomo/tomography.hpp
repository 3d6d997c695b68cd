// Two-qubit density-matrix reconstruction from 36-setting measurement
// records: Pauli-moment linear inversion as a diagnostic, Poisson
// maximum-likelihood over a Cholesky-style parametrization as the production
// path, and Monte-Carlo resampling for error bars.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hypertomo/measurement.hpp"

namespace hypertomo {

/// 16 real parameters of a lower-triangular T with real diagonal;
/// rho(t) = T†T / Tr[T†T] is PSD with unit trace for any t.
/// Layout: [0..3] diagonal, then (re, im) pairs of the strictly-lower
/// entries (1,0), (2,0), (2,1), (3,0), (3,1), (3,2).
struct CholeskyParams {
    std::array<double, 16> t{};
};

enum class ReconstructionMethod : std::uint8_t { linear_inversion, mle };

struct ReconstructionResult {
    DensityMatrix rho;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    ReconstructionMethod method = ReconstructionMethod::mle;
};

/// Pauli-moment reconstruction rho = 1/4 sum <s_i x s_j> s_i x s_j from
/// accidental-corrected counts. Hermitian and unit trace but not
/// necessarily PSD. Throws std::invalid_argument on incomplete 36-setting
/// coverage or a basis with nonpositive total counts.
ComplexMatrix linear_inversion(const std::vector<MeasurementRecord>& records);

/// Builds rho(t) = T†T / Tr[T†T].
DensityMatrix state_from_params(const CholeskyParams& params);

/// Factors a (possibly indefinite) Hermitian estimate into CholeskyParams:
/// eigenvalues are clamped to a small positive floor, the trace renormalized,
/// and the lower-triangular factor extracted.
CholeskyParams params_from_state(const ComplexMatrix& rho_estimate);

/// Maximizes the Poisson log-likelihood sum_s [n_s log mu_s - mu_s] with
/// mu_s = N_basis p_s(rho) + accidental_s over the Cholesky parametrization,
/// by quasi-Newton ascent with the analytic gradient (derivative-free simplex
/// fallback when the gradient check fails). Per-basis normalizations come
/// from the records, not the fit. Non-convergence yields converged=false;
/// all-zero counts throw std::invalid_argument.
ReconstructionResult mle_reconstruct(const std::vector<MeasurementRecord>& records);
ReconstructionResult mle_reconstruct(const std::vector<MeasurementRecord>& records,
                                     const CholeskyParams& init);

/// Poisson log-likelihood of the records at a fixed candidate state (the
/// same model mle_reconstruct maximizes).
double log_likelihood_at(const std::vector<MeasurementRecord>& records, const DensityMatrix& rho);

using MetricFn = std::function<double(const DensityMatrix&)>;

struct ResampleStats {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Parametric bootstrap: draws synthetic record sets with values resampled
/// as Poisson(observed), reconstructs each by MLE, and applies the metric.
/// Deterministic given rng_seed; resample streams are order-independent.
ResampleStats resample_uncertainty(const std::vector<MeasurementRecord>& records,
                                   int n_resamples, const MetricFn& metric,
                                   std::uint64_t rng_seed);

/// Same bootstrap evaluating several metrics on each reconstruction, so the
/// fits are shared.
std::vector<ResampleStats> resample_uncertainty_multi(
    const std::vector<MeasurementRecord>& records, int n_resamples,
    const std::vector<MetricFn>& metrics, std::uint64_t rng_seed);

/// JSON form of a result: matrix as nested [re, im] pairs plus metadata.
std::string reconstruction_to_json(const ReconstructionResult& result, std::uint64_t seed);

}  // namespace hypertomo
