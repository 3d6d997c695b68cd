#include "hypertomo/states.hpp"

#include <cmath>
#include <stdexcept>

namespace hypertomo {

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

cplx phase(double angle) { return {std::cos(angle), std::sin(angle)}; }

double purity_of(const ComplexMatrix& rho) {
    double s = 0.0;
    for (const cplx& v : rho.data()) s += std::norm(v);
    return s;
}

}  // namespace

PureStateVector pol_state(double phi) {
    std::vector<cplx> amps(4);
    amps[0] = inv_sqrt2;                // |HH>
    amps[3] = phase(phi) * inv_sqrt2;   // |VV>
    return PureStateVector({2, 2}, std::move(amps));
}

PureStateVector path_state(double theta) {
    std::vector<cplx> amps(4);
    amps[1] = inv_sqrt2;                 // |AB>
    amps[2] = phase(theta) * inv_sqrt2;  // |BA>
    return PureStateVector({2, 2}, std::move(amps));
}

PureStateVector hyper_state(const SourceConfig& cfg) {
    if (cfg.kappa_bins != 1)
        throw std::invalid_argument("hyper_state: kappa_bins must be 1 (use hyper_state_kappa)");
    return tensor(pol_state(cfg.phi), path_state(cfg.theta));
}

std::vector<double> kappa_weights(std::size_t kappa_bins, const KappaProfile& profile) {
    if (kappa_bins == 0) throw std::invalid_argument("kappa_weights: kappa_bins must be >= 1");
    std::vector<double> w(kappa_bins);
    switch (profile.kind) {
        case KappaProfileKind::uniform:
            for (double& x : w) x = 1.0;
            break;
        case KappaProfileKind::gaussian: {
            if (profile.sigma <= 0.0)
                throw std::invalid_argument("kappa_weights: gaussian sigma must be positive");
            for (std::size_t k = 0; k < kappa_bins; ++k) {
                const double kappa = kappa_bin_coordinate(k, kappa_bins);
                w[k] = std::exp(-kappa * kappa / (2.0 * profile.sigma * profile.sigma));
            }
            break;
        }
    }
    double sum = 0.0;
    for (double x : w) sum += x;
    for (double& x : w) x /= sum;
    return w;
}

double kappa_bin_coordinate(std::size_t k, std::size_t kappa_bins) {
    return (static_cast<double>(k) + 0.5) / static_cast<double>(kappa_bins) - 0.5;
}

PureStateVector hyper_state_kappa(const SourceConfig& cfg) {
    const std::size_t K = cfg.kappa_bins;
    if (K == 0) throw std::invalid_argument("hyper_state_kappa: kappa_bins must be >= 1");
    const auto weights = kappa_weights(K, cfg.kappa_weight_profile);
    const double alpha = cfg.kappa_phase_gradient;

    const std::vector<std::size_t> dims{2, 2, 2, 2, K, K};
    std::vector<cplx> amps(16 * K * K);

    // path factor amplitudes indexed by (T1, T2)
    cplx path_amp[2][2] = {{0.0, inv_sqrt2}, {phase(cfg.theta) * inv_sqrt2, 0.0}};

    for (std::size_t k1 = 0; k1 < K; ++k1) {
        const double kap1 = kappa_bin_coordinate(k1, K);
        for (std::size_t k2 = 0; k2 < K; ++k2) {
            const double kap2 = kappa_bin_coordinate(k2, K);
            const double wk = std::sqrt(weights[k1] * weights[k2]);
            const cplx hh = wk * inv_sqrt2;
            const cplx vv = wk * inv_sqrt2 * phase(cfg.phi + alpha * (kap1 + kap2));
            for (std::size_t t1 = 0; t1 < 2; ++t1)
                for (std::size_t t2 = 0; t2 < 2; ++t2) {
                    const cplx pa = path_amp[t1][t2];
                    if (pa == cplx{}) continue;
                    // index over [pol1, pol2, path1, path2, k1, k2]
                    const std::size_t base = (((t1 * 2 + t2) * K + k1) * K + k2);
                    amps[(0 * 2 + 0) * 4 * K * K + base] = hh * pa;  // |HH>
                    amps[(1 * 2 + 1) * 4 * K * K + base] = vv * pa;  // |VV>
                }
        }
    }
    return PureStateVector::normalized(dims, std::move(amps));
}

DensityMatrix mixed_state(const MixedStateSpec& spec) {
    const double v = spec.visibility;
    if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("mixed_state: visibility must be in [0, 1]");
    const cplx off = phase(-spec.phi) * (v / 2.0);
    switch (spec.kind) {
        case MixedStateKind::one_qubit: {
            ComplexMatrix m(2, 2);
            m(0, 0) = 0.5;
            m(1, 1) = 0.5;
            m(0, 1) = off;
            m(1, 0) = std::conj(off);
            return DensityMatrix({2}, std::move(m));
        }
        case MixedStateKind::two_qubit_psi: {
            ComplexMatrix m(4, 4);
            m(1, 1) = 0.5;
            m(2, 2) = 0.5;
            m(1, 2) = off;
            m(2, 1) = std::conj(off);
            return DensityMatrix({2, 2}, std::move(m));
        }
    }
    throw std::invalid_argument("mixed_state: unknown kind");
}

std::vector<std::size_t> keep_indices(Dof dof) {
    return dof == Dof::polarization ? std::vector<std::size_t>{0, 1}
                                    : std::vector<std::size_t>{2, 3};
}

DensityMatrix reduced_dof(const PureStateVector& full, Dof dof) {
    return partial_trace(full, keep_indices(dof));
}

double calibrate_kappa_gradient(std::size_t kappa_bins, const KappaProfile& profile,
                                double target_purity) {
    if (target_purity <= 0.5 || target_purity > 1.0)
        throw std::invalid_argument("calibrate_kappa_gradient: target purity must be in (0.5, 1]");

    auto pol_purity = [&](double alpha) {
        SourceConfig cfg;
        cfg.kappa_bins = kappa_bins;
        cfg.kappa_phase_gradient = alpha;
        cfg.kappa_weight_profile = profile;
        return purity_of(reduced_dof(hyper_state_kappa(cfg), Dof::polarization).matrix());
    };

    if (pol_purity(0.0) < target_purity)
        throw std::invalid_argument("calibrate_kappa_gradient: target above achievable purity");
    if (target_purity == 1.0) return 0.0;

    // Walk out in small steps to find the first downward crossing, then bisect.
    const double step = 0.05;
    const double alpha_max = 64.0;
    double lo = 0.0, hi = 0.0;
    for (double a = step; a <= alpha_max; a += step) {
        if (pol_purity(a) <= target_purity) {
            hi = a;
            lo = a - step;
            break;
        }
    }
    if (hi == 0.0)
        throw std::invalid_argument("calibrate_kappa_gradient: target purity unreachable");

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double p = pol_purity(mid);
        if (std::abs(p - target_purity) < 1e-13 || (hi - lo) < 1e-14) return mid;
        (p > target_purity ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace hypertomo
