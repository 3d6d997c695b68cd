// Synthetic measurement generation for both characterization protocols:
// projective coincidence counting with Poisson noise and a uniform accidental
// floor (QST), and seeded stimulated-intensity readout of the central
// momentum bin (SET). Records serialize to CSV and JSON with bit-exact
// round-trip.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypertomo/states.hpp"

namespace hypertomo {

/// The six single-qubit analyzer eigenstates (one per Pauli eigenvector).
enum class BasisState : std::uint8_t { z_plus, z_minus, x_plus, x_minus, y_plus, y_minus };

constexpr std::size_t kNumBasisStates = 6;
constexpr std::size_t kNumSettings = 36;

/// Display label of an analyzer state for a DOF: polarization H,V,D,A,L,R;
/// path A,B,A+B,A-B,A+iB,A-iB.
std::string basis_label(Dof dof, BasisState s);
BasisState parse_basis_label(Dof dof, const std::string& label);

/// Single-qubit amplitudes of an analyzer state in the computational basis.
PureStateVector basis_ket(BasisState s);

/// 2x2 projector |s><s|.
ComplexMatrix basis_projector(BasisState s);

struct ProjectorSetting {
    Dof dof = Dof::polarization;
    BasisState photon1 = BasisState::z_plus;
    BasisState photon2 = BasisState::z_plus;
};

enum class Protocol : std::uint8_t { qst, set };

struct NoiseMeta {
    // QST fields
    double singles_rate_hz = 0.0;
    double accidental_rate_hz = 0.0;
    double gate_window_s = 0.0;
    // SET fields
    double relative_intensity_noise = 0.0;
    double background_fraction = 0.0;
};

struct MeasurementRecord {
    ProjectorSetting setting;
    double value = 0.0;  // coincidence counts (QST, integral) or intensity (SET)
    double duration_s = 0.0;
    Protocol protocol = Protocol::qst;
    NoiseMeta noise;
};

struct ProtocolConfig {
    double qst_rate_scale_hz = 100.0;        // rate at the brightest setting
    double qst_duration_per_setting_s = 16.7;
    double car = 100.0;                      // coincidence-to-accidental ratio
    double qst_gate_window_s = 9e-9;
    double set_gain = 1e4;
    double set_noise_fraction = 0.01;        // relative Gaussian intensity noise
    double set_background_fraction = 0.0;    // additive floor as fraction of gain
    double set_duration_per_setting_s = 4.2;
    std::uint64_t rng_seed = 1;
};

/// The 36 ordered analyzer pairs, row-major over the six-state alphabet
/// (Z+, Z-, X+, X-, Y+, Y-), so the first polarization setting is (H, H).
std::vector<ProjectorSetting> tomography_settings(Dof dof);

/// Tr[rho (P1 x P2)] for a two-qubit state of the setting's DOF.
double born_probability(const DensityMatrix& state, const ProjectorSetting& setting);

/// Poisson coincidence counts for all 36 settings. The mean at setting s is
/// (rate_scale * p_s / p_max + rate_scale / car) * duration. Deterministic
/// given cfg.rng_seed; per-setting streams are order-independent.
std::vector<MeasurementRecord> simulate_qst(const DensityMatrix& state, const ProtocolConfig& cfg,
                                            Dof dof);

/// Projects the kappa subsystems of a [2,2,2,2,K,K] state onto the central
/// bin (K odd) and renormalizes. Throws std::invalid_argument for even K or
/// wrong dims, std::domain_error when the projection has zero norm.
PureStateVector kappa_central_slice(const PureStateVector& full_state);

/// Stimulated intensities for all 36 settings, sampling the kappa-sliced
/// reduced state: gain * p_s * (1 + eps) + gain * background_fraction with
/// eps ~ N(0, set_noise_fraction). Deterministic given cfg.rng_seed.
std::vector<MeasurementRecord> simulate_set(const PureStateVector& full_state,
                                            const ProtocolConfig& cfg, Dof dof,
                                            const SourceConfig& source_cfg);

/// CSV with a commented basis-convention header; numeric fields use
/// shortest round-trip formatting, so parse(format(x)) == x bit-for-bit.
std::string records_to_csv(const std::vector<MeasurementRecord>& records);
std::vector<MeasurementRecord> records_from_csv(const std::string& csv);

/// JSON array form of the same records; also bit-exact.
std::string records_to_json(const std::vector<MeasurementRecord>& records);
std::vector<MeasurementRecord> records_from_json(const std::string& json_text);

}  // namespace hypertomo
