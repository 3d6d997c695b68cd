// End-to-end orchestration: load a JSON run configuration, build the source
// state, simulate both protocols, reconstruct, attach bootstrap error bars,
// evaluate the splitter purity ceilings, and emit the report plus plot-ready
// matrix data. The CLI is a thin shell over run_pipeline; everything here is
// library code so results can be reproduced by direct calls.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypertomo/measurement.hpp"
#include "hypertomo/metrics.hpp"
#include "hypertomo/tomography.hpp"
#include "hypertomo/visibility.hpp"

namespace hypertomo {

struct OutputPaths {
    std::string report_path = "out/report.json";
    std::string records_path = "out/records.csv";
    std::string matrices_path = "out/matrices";
};

struct RunConfig {
    SourceConfig source;
    /// When set, the kappa phase gradient is calibrated so the kappa-traced
    /// polarization purity hits this value (kappa_phase_gradient must then
    /// be left at zero).
    std::optional<double> target_polarization_purity;
    ProtocolConfig protocol;
    int n_resamples = 200;
    BSTable bs_table;
    OutputPaths outputs;
    std::vector<std::string> pipeline{"simulate-qst", "simulate-set", "reconstruct",
                                      "metrics",      "visibility",   "report"};
};

/// Thrown on malformed or invalid configuration; message carries line:column
/// anchors for parse errors.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

struct VisibilityReport {
    double visibility_h = 0.0;
    double visibility_v = 0.0;
    double bound_h = 0.0;
    double bound_v = 0.0;
    std::vector<std::pair<std::string, PurityConsistencyReport>> checks;
};

struct PipelineArtifacts {
    /// Keys: "path_qst", "polarization_qst", "path_set", "polarization_set".
    std::map<std::string, std::vector<MeasurementRecord>> records;
    std::map<std::string, ReconstructionResult> reconstructions;
    std::map<std::string, StateMetrics> metrics_table;
    std::optional<VisibilityReport> visibility;
    std::optional<double> calibrated_gradient;
    std::string report_json;  // empty unless the report stage ran
};

/// Runs the configured stages in order, entirely in memory.
/// Throws std::runtime_error (with the stage name) on stage failure.
PipelineArtifacts execute_pipeline(const RunConfig& cfg);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::vector<std::string>> stages;
    std::optional<std::string> out_dir;  // re-roots all output paths
};

/// CLI entry: loads the config, applies overrides, executes, writes outputs.
/// Returns 0 on success, 1 on stage failure, 2 on config errors; messages go
/// to stderr.
int run_pipeline(const std::string& config_path, const RunOverrides& overrides = {});

/// Bar-chart data for a two-qubit density matrix: CSV rows
/// (row_label, col_label, re, im) in basis order HH,HV,VH,VV or AA,AB,BA,BB.
std::string matrix_plotdata_csv(const DensityMatrix& rho, Dof dof);
/// Rebuilds the matrix from plot CSV; round-trips bit-exactly.
ComplexMatrix matrix_from_plotdata(const std::string& csv);
void export_matrix_plotdata(const DensityMatrix& rho, Dof dof, const std::string& path);

/// Table-style CSV of the metrics (rows F, Tr rho^2, tau, C; one column per
/// DOF x protocol).
std::string metrics_table_csv(const std::map<std::string, StateMetrics>& table);

}  // namespace hypertomo
