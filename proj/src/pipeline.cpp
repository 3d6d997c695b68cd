#include "hypertomo/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace hypertomo {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string fmt_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::pair<int, int> line_col_of_offset(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

const std::vector<std::string> kKnownStages = {"simulate-qst", "simulate-set", "reconstruct",
                                               "metrics",      "visibility",   "report"};

KappaProfile parse_profile(const json& j) {
    KappaProfile p;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "uniform") {
        p.kind = KappaProfileKind::uniform;
    } else if (kind == "gaussian") {
        p.kind = KappaProfileKind::gaussian;
        p.sigma = j.at("sigma").get<double>();
        if (p.sigma <= 0.0) throw ConfigError("config: gaussian profile sigma must be positive");
    } else {
        throw ConfigError("config: unknown kappa_weight_profile kind '" + kind + "'");
    }
    return p;
}

BeamSplitter parse_bs(const json& j) {
    return BeamSplitter::from_intensities(j.at("r2").get<double>(), j.at("t2").get<double>());
}

std::string key_of(Protocol protocol, Dof dof) {
    return std::string(dof == Dof::polarization ? "polarization" : "path") +
           (protocol == Protocol::qst ? "_qst" : "_set");
}

PureStateVector fidelity_target(Dof dof) {
    return dof == Dof::polarization ? pol_state(0.0) : path_state(0.0);
}

std::array<std::string, 4> basis_pair_labels(Dof dof) {
    const std::string a = basis_label(dof, BasisState::z_plus);
    const std::string b = basis_label(dof, BasisState::z_minus);
    return {a + a, a + b, b + a, b + b};
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
}

ordered_json value_with_error_json(const ValueWithError& v) {
    ordered_json j;
    j["value"] = v.value;
    if (v.sigma) j["sigma"] = *v.sigma;
    return j;
}

ordered_json metrics_json(const StateMetrics& m) {
    ordered_json j;
    j["fidelity"] = value_with_error_json(m.fidelity);
    j["purity"] = value_with_error_json(m.purity);
    j["tangle"] = value_with_error_json(m.tangle);
    j["concurrence"] = value_with_error_json(m.concurrence);
    return j;
}

constexpr const char* kMechanismNote =
    "The stimulated protocol seeds a single transverse-momentum bin, so its polarization "
    "readout probes a pure slice of the joint state, while the coincidence protocol averages "
    "over the whole aperture and traces the momentum bins out. With a nonzero momentum phase "
    "gradient the sliced polarization state is therefore purer than the traced one, and "
    "stimulated-readout purity exceeds coincidence purity in this model. Instrument effects "
    "outside the model (splitter imbalance, seed light scattered by the mask) can push "
    "measured stimulated values below coincidence values instead.";

constexpr const char* kBoundsNote =
    "The purity ceilings are hardware limits of unbalanced analyzer splitters. The simulation "
    "does not inject those imperfections, so simulated path purities may legitimately sit "
    "above the ceilings; the consistency flags are meaningful for measured data.";

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_col_of_offset(json_text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }

    try {
        RunConfig cfg;
        if (j.contains("source")) {
            const auto& s = j["source"];
            if (s.contains("phi_rad")) cfg.source.phi = s["phi_rad"].get<double>();
            if (s.contains("theta_rad")) cfg.source.theta = s["theta_rad"].get<double>();
            if (s.contains("kappa_bins"))
                cfg.source.kappa_bins = s["kappa_bins"].get<std::size_t>();
            if (s.contains("kappa_phase_gradient_rad"))
                cfg.source.kappa_phase_gradient = s["kappa_phase_gradient_rad"].get<double>();
            if (s.contains("kappa_weight_profile"))
                cfg.source.kappa_weight_profile = parse_profile(s["kappa_weight_profile"]);
            if (s.contains("target_polarization_purity")) {
                cfg.target_polarization_purity =
                    s["target_polarization_purity"].get<double>();
                if (cfg.source.kappa_phase_gradient != 0.0)
                    throw ConfigError(
                        "config: specify either kappa_phase_gradient_rad or "
                        "target_polarization_purity, not both");
            }
        }
        if (cfg.source.kappa_bins < 1) throw ConfigError("config: kappa_bins must be >= 1");

        if (j.contains("protocol")) {
            const auto& p = j["protocol"];
            auto get = [&](const char* name, double& field) {
                if (p.contains(name)) field = p[name].get<double>();
            };
            get("qst_rate_scale_hz", cfg.protocol.qst_rate_scale_hz);
            get("qst_duration_per_setting_s", cfg.protocol.qst_duration_per_setting_s);
            get("car", cfg.protocol.car);
            get("qst_gate_window_s", cfg.protocol.qst_gate_window_s);
            get("set_gain", cfg.protocol.set_gain);
            get("set_noise_fraction", cfg.protocol.set_noise_fraction);
            get("set_background_fraction", cfg.protocol.set_background_fraction);
            get("set_duration_per_setting_s", cfg.protocol.set_duration_per_setting_s);
            if (p.contains("rng_seed"))
                cfg.protocol.rng_seed = p["rng_seed"].get<std::uint64_t>();
            if (p.contains("n_resamples")) cfg.n_resamples = p["n_resamples"].get<int>();
            if (cfg.protocol.qst_rate_scale_hz <= 0.0 ||
                cfg.protocol.qst_duration_per_setting_s <= 0.0 || cfg.protocol.car <= 0.0 ||
                cfg.protocol.set_gain <= 0.0 || cfg.protocol.set_duration_per_setting_s <= 0.0)
                throw ConfigError("config: rates, durations, CAR and gain must be positive");
            if (cfg.n_resamples < 2) throw ConfigError("config: n_resamples must be >= 2");
        }

        if (j.contains("bs_table")) {
            const auto& b = j["bs_table"];
            cfg.bs_table = BSTable{parse_bs(b.at("lambda1").at("h")),
                                   parse_bs(b.at("lambda1").at("v")),
                                   parse_bs(b.at("lambda2").at("h")),
                                   parse_bs(b.at("lambda2").at("v"))};
        }

        if (j.contains("outputs")) {
            const auto& o = j["outputs"];
            if (o.contains("report_path"))
                cfg.outputs.report_path = o["report_path"].get<std::string>();
            if (o.contains("records_path"))
                cfg.outputs.records_path = o["records_path"].get<std::string>();
            if (o.contains("matrices_path"))
                cfg.outputs.matrices_path = o["matrices_path"].get<std::string>();
        }

        if (j.contains("pipeline")) {
            cfg.pipeline = j["pipeline"].get<std::vector<std::string>>();
            for (const auto& stage : cfg.pipeline)
                if (std::find(kKnownStages.begin(), kKnownStages.end(), stage) ==
                    kKnownStages.end())
                    throw ConfigError("config: unknown pipeline stage '" + stage + "'");
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

PipelineArtifacts execute_pipeline(const RunConfig& cfg) {
    PipelineArtifacts art;

    SourceConfig source = cfg.source;
    std::optional<PureStateVector> full_state;
    auto ensure_state = [&]() {
        if (full_state) return;
        if (cfg.target_polarization_purity) {
            source.kappa_phase_gradient = calibrate_kappa_gradient(
                source.kappa_bins, source.kappa_weight_profile, *cfg.target_polarization_purity);
            art.calibrated_gradient = source.kappa_phase_gradient;
        }
        full_state = hyper_state_kappa(source);
    };

    std::string current_stage;
    try {
        for (const std::string& stage : cfg.pipeline) {
            current_stage = stage;
            if (stage == "simulate-qst") {
                ensure_state();
                for (Dof dof : {Dof::path, Dof::polarization})
                    art.records[key_of(Protocol::qst, dof)] =
                        simulate_qst(reduced_dof(*full_state, dof), cfg.protocol, dof);
            } else if (stage == "simulate-set") {
                ensure_state();
                for (Dof dof : {Dof::path, Dof::polarization})
                    art.records[key_of(Protocol::set, dof)] =
                        simulate_set(*full_state, cfg.protocol, dof, source);
            } else if (stage == "reconstruct") {
                if (art.records.empty())
                    throw std::runtime_error("no records to reconstruct (run simulate first)");
                for (const auto& [key, records] : art.records)
                    art.reconstructions.emplace(key, mle_reconstruct(records));
            } else if (stage == "metrics") {
                if (art.reconstructions.empty())
                    throw std::runtime_error("no reconstructions for metrics");
                for (const auto& [key, rec] : art.reconstructions) {
                    const Dof dof = key.starts_with("polarization") ? Dof::polarization
                                                                    : Dof::path;
                    const PureStateVector target = fidelity_target(dof);
                    const std::vector<MetricFn> fns = {
                        [&target](const DensityMatrix& r) { return fidelity(r, target); },
                        [](const DensityMatrix& r) { return purity(r); },
                        [](const DensityMatrix& r) { return tangle(r); },
                        [](const DensityMatrix& r) { return concurrence(r); },
                    };
                    const auto stats = resample_uncertainty_multi(
                        art.records.at(key), cfg.n_resamples, fns, cfg.protocol.rng_seed);
                    StateMetrics m;
                    m.fidelity = {fidelity(rec.rho, target), stats[0].stddev};
                    m.purity = {purity(rec.rho), stats[1].stddev};
                    m.tangle = {tangle(rec.rho), stats[2].stddev};
                    m.concurrence = {concurrence(rec.rho), stats[3].stddev};
                    art.metrics_table[key] = m;
                }
            } else if (stage == "visibility") {
                VisibilityReport rep;
                rep.visibility_h = visibility_2q(cfg.bs_table.lambda1_h, cfg.bs_table.lambda2_h);
                rep.visibility_v = visibility_2q(cfg.bs_table.lambda1_v, cfg.bs_table.lambda2_v);
                rep.bound_h = purity_bound(rep.visibility_h);
                rep.bound_v = purity_bound(rep.visibility_v);
                for (const char* key : {"path_qst", "path_set"}) {
                    auto it = art.metrics_table.find(key);
                    if (it == art.metrics_table.end()) continue;
                    const double measured = it->second.purity.value;
                    const double sigma = it->second.purity.sigma.value_or(0.0);
                    rep.checks.emplace_back(
                        std::string(key) + "_vs_h",
                        check_purity_consistency(measured, sigma, rep.bound_h));
                    rep.checks.emplace_back(
                        std::string(key) + "_vs_v",
                        check_purity_consistency(measured, sigma, rep.bound_v));
                }
                art.visibility = rep;
            } else if (stage == "report") {
                ordered_json rpt;
                ordered_json cfg_echo;
                cfg_echo["rng_seed"] = cfg.protocol.rng_seed;
                cfg_echo["kappa_bins"] = source.kappa_bins;
                cfg_echo["kappa_phase_gradient_rad"] = source.kappa_phase_gradient;
                if (art.calibrated_gradient)
                    cfg_echo["calibrated_from_target_purity"] = *cfg.target_polarization_purity;
                cfg_echo["phi_rad"] = source.phi;
                cfg_echo["theta_rad"] = source.theta;
                cfg_echo["n_resamples"] = cfg.n_resamples;
                rpt["config"] = std::move(cfg_echo);
                rpt["basis_conventions"] = {
                    {"polarization", "H,V,D,A,L,R; matrix order HH,HV,VH,VV"},
                    {"path", "A,B,A+B,A-B,A+iB,A-iB; matrix order AA,AB,BA,BB"}};

                if (!art.metrics_table.empty()) {
                    ordered_json table;
                    for (const char* key :
                         {"path_qst", "polarization_qst", "path_set", "polarization_set"}) {
                        auto it = art.metrics_table.find(key);
                        if (it != art.metrics_table.end()) table[key] = metrics_json(it->second);
                    }
                    rpt["table"] = std::move(table);
                }
                if (!art.reconstructions.empty()) {
                    ordered_json recon;
                    for (const auto& [key, rec] : art.reconstructions) {
                        recon[key] = {{"converged", rec.converged},
                                      {"iterations", rec.iterations},
                                      {"log_likelihood", rec.log_likelihood}};
                    }
                    rpt["reconstruction"] = std::move(recon);
                }
                if (art.visibility) {
                    ordered_json v;
                    v["visibility_h"] = art.visibility->visibility_h;
                    v["visibility_v"] = art.visibility->visibility_v;
                    v["purity_bound_h"] = art.visibility->bound_h;
                    v["purity_bound_v"] = art.visibility->bound_v;
                    ordered_json checks = ordered_json::array();
                    for (const auto& [name, check] : art.visibility->checks) {
                        checks.push_back({{"name", name},
                                          {"measured", check.measured},
                                          {"sigma", check.sigma},
                                          {"bound", check.bound},
                                          {"compatible", check.compatible}});
                    }
                    v["consistency"] = std::move(checks);
                    rpt["visibility"] = std::move(v);
                }
                rpt["notes"] = {{"momentum_slice_vs_trace", kMechanismNote},
                                {"purity_bounds", kBoundsNote}};
                art.report_json = rpt.dump(2) + "\n";
            }
        }
    } catch (const std::exception& e) {
        throw std::runtime_error("stage '" + current_stage + "' failed: " + e.what());
    }
    return art;
}

int run_pipeline(const std::string& config_path, const RunOverrides& overrides) {
    RunConfig cfg;
    try {
        cfg = load_run_config(config_path);
        if (overrides.seed) cfg.protocol.rng_seed = *overrides.seed;
        if (overrides.stages) {
            cfg.pipeline = *overrides.stages;
            for (const auto& stage : cfg.pipeline)
                if (std::find(kKnownStages.begin(), kKnownStages.end(), stage) ==
                    kKnownStages.end())
                    throw ConfigError("config: unknown pipeline stage '" + stage + "'");
        }
        if (overrides.out_dir) {
            const std::filesystem::path dir(*overrides.out_dir);
            auto rebase = [&](std::string& p) {
                p = (dir / std::filesystem::path(p).filename()).string();
            };
            rebase(cfg.outputs.report_path);
            rebase(cfg.outputs.records_path);
            cfg.outputs.matrices_path = (dir / "matrices").string();
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        const PipelineArtifacts art = execute_pipeline(cfg);

        if (!art.records.empty()) {
            std::vector<MeasurementRecord> all;
            for (const auto& [key, records] : art.records)
                all.insert(all.end(), records.begin(), records.end());
            write_text_file(cfg.outputs.records_path, records_to_csv(all));
        }
        if (!art.reconstructions.empty()) {
            for (const auto& [key, rec] : art.reconstructions) {
                const Dof dof =
                    key.starts_with("polarization") ? Dof::polarization : Dof::path;
                const std::filesystem::path dir(cfg.outputs.matrices_path);
                std::filesystem::create_directories(dir);
                export_matrix_plotdata(rec.rho, dof, (dir / (key + ".csv")).string());
            }
        }
        if (!art.report_json.empty()) {
            write_text_file(cfg.outputs.report_path, art.report_json);
        } else if (art.visibility) {
            // A visibility-only pipeline still gets its consistency report.
            ordered_json v;
            v["visibility_h"] = art.visibility->visibility_h;
            v["visibility_v"] = art.visibility->visibility_v;
            v["purity_bound_h"] = art.visibility->bound_h;
            v["purity_bound_v"] = art.visibility->bound_v;
            ordered_json checks = ordered_json::array();
            for (const auto& [name, check] : art.visibility->checks)
                checks.push_back({{"name", name},
                                  {"measured", check.measured},
                                  {"sigma", check.sigma},
                                  {"bound", check.bound},
                                  {"compatible", check.compatible}});
            v["consistency"] = std::move(checks);
            write_text_file(cfg.outputs.report_path, v.dump(2) + "\n");
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }
}

std::string matrix_plotdata_csv(const DensityMatrix& rho, Dof dof) {
    if (rho.dims() != std::vector<std::size_t>{2, 2})
        throw std::invalid_argument("matrix_plotdata_csv: expected a two-qubit state");
    const auto labels = basis_pair_labels(dof);
    std::ostringstream out;
    out << "# density matrix bar-chart data; basis order " << labels[0] << "," << labels[1]
        << "," << labels[2] << "," << labels[3] << "\n";
    out << "row_label,col_label,re,im\n";
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            const cplx v = rho.matrix()(i, j);
            out << labels[i] << ',' << labels[j] << ',' << fmt_double(v.real()) << ','
                << fmt_double(v.imag()) << "\n";
        }
    return out.str();
}

ComplexMatrix matrix_from_plotdata(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    ComplexMatrix m(4, 4);
    std::size_t row = 0, filled = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column header
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t pos = line.find(',', start);
            cells.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (cells.size() != 4)
            throw std::invalid_argument("matrix_from_plotdata: malformed row");
        double re = 0.0, im = 0.0;
        auto r1 = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), re);
        auto r2 = std::from_chars(cells[3].data(), cells[3].data() + cells[3].size(), im);
        if (r1.ec != std::errc{} || r2.ec != std::errc{})
            throw std::invalid_argument("matrix_from_plotdata: malformed number");
        m(row, filled % 4) = {re, im};
        ++filled;
        row = filled / 4;
    }
    if (filled != 16) throw std::invalid_argument("matrix_from_plotdata: expected 16 rows");
    return m;
}

void export_matrix_plotdata(const DensityMatrix& rho, Dof dof, const std::string& path) {
    write_text_file(path, matrix_plotdata_csv(rho, dof));
}

std::string metrics_table_csv(const std::map<std::string, StateMetrics>& table) {
    std::ostringstream out;
    out << "metric";
    std::vector<std::string> keys;
    for (const char* key : {"path_qst", "polarization_qst", "path_set", "polarization_set"})
        if (table.count(key)) keys.push_back(key);
    for (const auto& k : keys) out << ',' << k << ',' << k << "_sigma";
    out << "\n";
    auto row = [&](const char* name, auto pick) {
        out << name;
        for (const auto& k : keys) {
            const ValueWithError v = pick(table.at(k));
            out << ',' << fmt_double(v.value) << ','
                << (v.sigma ? fmt_double(*v.sigma) : std::string());
        }
        out << "\n";
    };
    row("fidelity", [](const StateMetrics& m) { return m.fidelity; });
    row("purity", [](const StateMetrics& m) { return m.purity; });
    row("tangle", [](const StateMetrics& m) { return m.tangle; });
    row("concurrence", [](const StateMetrics& m) { return m.concurrence; });
    return out.str();
}

}  // namespace hypertomo
