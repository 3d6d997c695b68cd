// Construction of the source states: the polarization and path Bell pairs,
// their hyperentangled product, the momentum-extended state in which
// polarization is entangled with the intra-aperture momentum bins, and the
// visibility-parametrized mixed states.
//
// Subsystem ordering convention, used by every module:
//   [pol_1, pol_2, path_1, path_2, kappa_1, kappa_2]
// with photon 1/2 labeled by wavelength. Basis labels: polarization H=0, V=1;
// path A=0, B=1; kappa bins 0..K-1 covering the aperture coordinate
// [-1/2, 1/2].

#pragma once

#include <cstdint>
#include <vector>

#include "hypertomo/linalg.hpp"

namespace hypertomo {

enum class Dof : std::uint8_t { polarization, path };

enum class KappaProfileKind : std::uint8_t { uniform, gaussian };

struct KappaProfile {
    KappaProfileKind kind = KappaProfileKind::uniform;
    double sigma = 0.25;  // gaussian width in aperture units; ignored for uniform
};

struct SourceConfig {
    double phi = 0.0;    // polarization phase, radians
    double theta = 0.0;  // path phase, radians
    std::size_t kappa_bins = 21;
    double kappa_phase_gradient = 0.0;  // radians per unit aperture coordinate
    KappaProfile kappa_weight_profile;
};

enum class MixedStateKind : std::uint8_t { one_qubit, two_qubit_psi };

struct MixedStateSpec {
    double visibility = 1.0;  // in [0, 1]
    double phi = 0.0;
    MixedStateKind kind = MixedStateKind::two_qubit_psi;
};

/// (|HH> + e^{i phi}|VV>)/sqrt(2), dims [2,2].
PureStateVector pol_state(double phi);

/// (|AB> + e^{i theta}|BA>)/sqrt(2), dims [2,2].
PureStateVector path_state(double theta);

/// Product of pol_state(phi) and path_state(theta) in canonical order,
/// dims [2,2,2,2]. Requires kappa_bins == 1.
PureStateVector hyper_state(const SourceConfig& cfg);

/// Momentum-extended state, dims [2,2,2,2,K,K]. The path factor is exactly
/// path_state(theta); the polarization-kappa factor carries a linear phase
/// gradient alpha*(kappa + kappa') on the VV component, which entangles
/// polarization with the aperture bins while leaving path separable.
PureStateVector hyper_state_kappa(const SourceConfig& cfg);

/// Closed-form visibility-V mixed state (one qubit, or the two-qubit
/// psi-type occupying the |01>/|10> block). Purity is 1/2 + V^2/2.
DensityMatrix mixed_state(const MixedStateSpec& spec);

/// Subsystem indices of a DOF within the canonical ordering.
std::vector<std::size_t> keep_indices(Dof dof);

/// Two-qubit reduced state of one DOF, tracing out everything else.
DensityMatrix reduced_dof(const PureStateVector& full, Dof dof);

/// Normalized bin weights W_k (sum 1) for a profile over K bins.
std::vector<double> kappa_weights(std::size_t kappa_bins, const KappaProfile& profile);

/// Center coordinate of bin k among K bins spanning [-1/2, 1/2].
double kappa_bin_coordinate(std::size_t k, std::size_t kappa_bins);

/// Finds the phase gradient alpha >= 0 whose kappa-traced polarization purity
/// equals `target_purity`, by scanning for a bracket and bisecting against the
/// brute-force partial trace. Throws std::invalid_argument if the target is
/// outside (0.5, 1] or unreachable for this profile.
double calibrate_kappa_gradient(std::size_t kappa_bins, const KappaProfile& profile,
                                double target_purity);

}  // namespace hypertomo
