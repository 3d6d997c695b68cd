#include "hypertomo/measurement.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hypertomo/rng.hpp"

namespace hypertomo {

namespace {

const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

constexpr const char* kPolLabels[kNumBasisStates] = {"H", "V", "D", "A", "L", "R"};
constexpr const char* kPathLabels[kNumBasisStates] = {"A", "B", "A+B", "A-B", "A+iB", "A-iB"};

// Stream ids keep per-setting RNG draws independent of loop order.
std::uint64_t setting_stream(Protocol protocol, Dof dof, std::size_t index) {
    return (static_cast<std::uint64_t>(protocol) << 32) | (static_cast<std::uint64_t>(dof) << 16) |
           static_cast<std::uint64_t>(index);
}

std::string fmt_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("records: malformed numeric field '" + s + "'");
    return x;
}

std::string protocol_name(Protocol p) { return p == Protocol::qst ? "qst" : "set"; }

Protocol parse_protocol(const std::string& s) {
    if (s == "qst") return Protocol::qst;
    if (s == "set") return Protocol::set;
    throw std::invalid_argument("records: unknown protocol '" + s + "'");
}

std::string dof_name(Dof d) { return d == Dof::polarization ? "polarization" : "path"; }

Dof parse_dof(const std::string& s) {
    if (s == "polarization") return Dof::polarization;
    if (s == "path") return Dof::path;
    throw std::invalid_argument("records: unknown dof '" + s + "'");
}

constexpr const char* kCsvColumns =
    "protocol,dof,s1,s2,duration_s,value,singles_rate_hz,accidental_rate_hz,gate_window_s,"
    "relative_intensity_noise,background_fraction";

}  // namespace

std::string basis_label(Dof dof, BasisState s) {
    const auto i = static_cast<std::size_t>(s);
    return dof == Dof::polarization ? kPolLabels[i] : kPathLabels[i];
}

BasisState parse_basis_label(Dof dof, const std::string& label) {
    for (std::size_t i = 0; i < kNumBasisStates; ++i)
        if (basis_label(dof, static_cast<BasisState>(i)) == label)
            return static_cast<BasisState>(i);
    throw std::invalid_argument("records: unknown basis label '" + label + "'");
}

PureStateVector basis_ket(BasisState s) {
    switch (s) {
        case BasisState::z_plus:  return PureStateVector({2}, {1.0, 0.0});
        case BasisState::z_minus: return PureStateVector({2}, {0.0, 1.0});
        case BasisState::x_plus:  return PureStateVector({2}, {inv_sqrt2, inv_sqrt2});
        case BasisState::x_minus: return PureStateVector({2}, {inv_sqrt2, -inv_sqrt2});
        case BasisState::y_plus:  return PureStateVector({2}, {inv_sqrt2, cplx{0.0, inv_sqrt2}});
        case BasisState::y_minus: return PureStateVector({2}, {inv_sqrt2, cplx{0.0, -inv_sqrt2}});
    }
    throw std::invalid_argument("basis_ket: unknown state");
}

ComplexMatrix basis_projector(BasisState s) {
    const auto ket = basis_ket(s);
    ComplexMatrix p(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            p(i, j) = ket.amplitude(i) * std::conj(ket.amplitude(j));
    return p;
}

std::vector<ProjectorSetting> tomography_settings(Dof dof) {
    std::vector<ProjectorSetting> out;
    out.reserve(kNumSettings);
    for (std::size_t a = 0; a < kNumBasisStates; ++a)
        for (std::size_t b = 0; b < kNumBasisStates; ++b)
            out.push_back({dof, static_cast<BasisState>(a), static_cast<BasisState>(b)});
    return out;
}

double born_probability(const DensityMatrix& state, const ProjectorSetting& setting) {
    if (state.dims() != std::vector<std::size_t>{2, 2})
        throw std::invalid_argument("born_probability: state is not a two-qubit reduction");
    const ComplexMatrix proj =
        tensor(basis_projector(setting.photon1), basis_projector(setting.photon2));
    cplx tr = 0.0;
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) tr += state.matrix()(a, b) * proj(b, a);
    double p = tr.real();
    if (p < 0.0 && p > -1e-12) p = 0.0;
    return std::clamp(p, 0.0, 1.0);
}

std::vector<MeasurementRecord> simulate_qst(const DensityMatrix& state, const ProtocolConfig& cfg,
                                            Dof dof) {
    if (cfg.qst_rate_scale_hz <= 0.0 || cfg.qst_duration_per_setting_s <= 0.0 || cfg.car <= 0.0)
        throw std::invalid_argument("simulate_qst: rates, durations and CAR must be positive");
    const auto settings = tomography_settings(dof);
    std::vector<double> probs(settings.size());
    double p_max = 0.0;
    for (std::size_t i = 0; i < settings.size(); ++i) {
        probs[i] = born_probability(state, settings[i]);
        p_max = std::max(p_max, probs[i]);
    }

    const double accidental_rate = cfg.qst_rate_scale_hz / cfg.car;
    NoiseMeta meta;
    meta.accidental_rate_hz = accidental_rate;
    meta.gate_window_s = cfg.qst_gate_window_s;
    meta.singles_rate_hz =
        cfg.qst_gate_window_s > 0.0 ? std::sqrt(accidental_rate / cfg.qst_gate_window_s) : 0.0;

    std::vector<MeasurementRecord> records;
    records.reserve(settings.size());
    for (std::size_t i = 0; i < settings.size(); ++i) {
        const double mu = (cfg.qst_rate_scale_hz * probs[i] / p_max + accidental_rate) *
                          cfg.qst_duration_per_setting_s;
        std::mt19937_64 rng(mix_seed(cfg.rng_seed, setting_stream(Protocol::qst, dof, i)));
        std::poisson_distribution<long long> poisson(mu);
        MeasurementRecord rec;
        rec.setting = settings[i];
        rec.value = static_cast<double>(poisson(rng));
        rec.duration_s = cfg.qst_duration_per_setting_s;
        rec.protocol = Protocol::qst;
        rec.noise = meta;
        records.push_back(rec);
    }
    return records;
}

PureStateVector kappa_central_slice(const PureStateVector& full_state) {
    const auto& dims = full_state.dims();
    if (dims.size() != 6 || dims[0] != 2 || dims[1] != 2 || dims[2] != 2 || dims[3] != 2 ||
        dims[4] != dims[5])
        throw std::invalid_argument("kappa_central_slice: expected dims [2,2,2,2,K,K]");
    const std::size_t K = dims[4];
    if (K % 2 == 0)
        throw std::invalid_argument("kappa_central_slice: no central bin for even K");
    const std::size_t c = K / 2;

    std::vector<cplx> amps(16);
    double norm2 = 0.0;
    for (std::size_t q = 0; q < 16; ++q) {
        amps[q] = full_state.amplitude((q * K + c) * K + c);
        norm2 += std::norm(amps[q]);
    }
    if (norm2 <= 0.0)
        throw std::domain_error("kappa_central_slice: zero amplitude at the central bin");
    return PureStateVector::normalized({2, 2, 2, 2}, std::move(amps));
}

std::vector<MeasurementRecord> simulate_set(const PureStateVector& full_state,
                                            const ProtocolConfig& cfg, Dof dof,
                                            const SourceConfig& source_cfg) {
    if (full_state.dims() !=
        std::vector<std::size_t>{2, 2, 2, 2, source_cfg.kappa_bins, source_cfg.kappa_bins})
        throw std::invalid_argument("simulate_set: state dims do not match source config");
    if (cfg.set_gain <= 0.0 || cfg.set_duration_per_setting_s <= 0.0)
        throw std::invalid_argument("simulate_set: gain and duration must be positive");

    const DensityMatrix rho_slice = reduced_dof(kappa_central_slice(full_state), dof);

    NoiseMeta meta;
    meta.relative_intensity_noise = cfg.set_noise_fraction;
    meta.background_fraction = cfg.set_background_fraction;

    const auto settings = tomography_settings(dof);
    std::vector<MeasurementRecord> records;
    records.reserve(settings.size());
    for (std::size_t i = 0; i < settings.size(); ++i) {
        const double p = born_probability(rho_slice, settings[i]);
        double eps = 0.0;
        if (cfg.set_noise_fraction > 0.0) {
            std::mt19937_64 rng(mix_seed(cfg.rng_seed, setting_stream(Protocol::set, dof, i)));
            std::normal_distribution<double> gauss(0.0, cfg.set_noise_fraction);
            eps = gauss(rng);
        }
        MeasurementRecord rec;
        rec.setting = settings[i];
        rec.value = std::max(
            0.0, cfg.set_gain * p * (1.0 + eps) + cfg.set_gain * cfg.set_background_fraction);
        rec.duration_s = cfg.set_duration_per_setting_s;
        rec.protocol = Protocol::set;
        rec.noise = meta;
        records.push_back(rec);
    }
    return records;
}

std::string records_to_csv(const std::vector<MeasurementRecord>& records) {
    std::ostringstream out;
    out << "# measurement records; one analyzer setting per row\n";
    out << "# basis labels: polarization H,V,D,A,L,R; path A,B,A+B,A-B,A+iB,A-iB\n";
    out << kCsvColumns << "\n";
    for (const auto& r : records) {
        out << protocol_name(r.protocol) << ',' << dof_name(r.setting.dof) << ','
            << basis_label(r.setting.dof, r.setting.photon1) << ','
            << basis_label(r.setting.dof, r.setting.photon2) << ',' << fmt_double(r.duration_s)
            << ',' << fmt_double(r.value) << ',' << fmt_double(r.noise.singles_rate_hz) << ','
            << fmt_double(r.noise.accidental_rate_hz) << ',' << fmt_double(r.noise.gate_window_s)
            << ',' << fmt_double(r.noise.relative_intensity_noise) << ','
            << fmt_double(r.noise.background_fraction) << "\n";
    }
    return out.str();
}

std::vector<MeasurementRecord> records_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::vector<MeasurementRecord> records;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kCsvColumns)
                throw std::invalid_argument("records_from_csv: unexpected column header");
            header_seen = true;
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
        if (cells.size() != 11)
            throw std::invalid_argument("records_from_csv: wrong field count in row");
        MeasurementRecord r;
        r.protocol = parse_protocol(cells[0]);
        r.setting.dof = parse_dof(cells[1]);
        r.setting.photon1 = parse_basis_label(r.setting.dof, cells[2]);
        r.setting.photon2 = parse_basis_label(r.setting.dof, cells[3]);
        r.duration_s = parse_double(cells[4]);
        r.value = parse_double(cells[5]);
        r.noise.singles_rate_hz = parse_double(cells[6]);
        r.noise.accidental_rate_hz = parse_double(cells[7]);
        r.noise.gate_window_s = parse_double(cells[8]);
        r.noise.relative_intensity_noise = parse_double(cells[9]);
        r.noise.background_fraction = parse_double(cells[10]);
        if (r.duration_s <= 0.0 || r.value < 0.0)
            throw std::invalid_argument("records_from_csv: invalid duration or value");
        records.push_back(r);
    }
    if (!header_seen) throw std::invalid_argument("records_from_csv: missing column header");
    return records;
}

std::string records_to_json(const std::vector<MeasurementRecord>& records) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["protocol"] = protocol_name(r.protocol);
        j["dof"] = dof_name(r.setting.dof);
        j["s1"] = basis_label(r.setting.dof, r.setting.photon1);
        j["s2"] = basis_label(r.setting.dof, r.setting.photon2);
        j["duration_s"] = r.duration_s;
        j["value"] = r.value;
        if (r.protocol == Protocol::qst) {
            j["noise"] = {{"singles_rate_hz", r.noise.singles_rate_hz},
                          {"accidental_rate_hz", r.noise.accidental_rate_hz},
                          {"gate_window_s", r.noise.gate_window_s}};
        } else {
            j["noise"] = {{"relative_intensity_noise", r.noise.relative_intensity_noise},
                          {"background_fraction", r.noise.background_fraction}};
        }
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

std::vector<MeasurementRecord> records_from_json(const std::string& json_text) {
    const auto arr = nlohmann::json::parse(json_text);
    if (!arr.is_array()) throw std::invalid_argument("records_from_json: expected an array");
    std::vector<MeasurementRecord> records;
    records.reserve(arr.size());
    for (const auto& j : arr) {
        MeasurementRecord r;
        r.protocol = parse_protocol(j.at("protocol").get<std::string>());
        r.setting.dof = parse_dof(j.at("dof").get<std::string>());
        r.setting.photon1 = parse_basis_label(r.setting.dof, j.at("s1").get<std::string>());
        r.setting.photon2 = parse_basis_label(r.setting.dof, j.at("s2").get<std::string>());
        r.duration_s = j.at("duration_s").get<double>();
        r.value = j.at("value").get<double>();
        const auto& n = j.at("noise");
        if (r.protocol == Protocol::qst) {
            r.noise.singles_rate_hz = n.at("singles_rate_hz").get<double>();
            r.noise.accidental_rate_hz = n.at("accidental_rate_hz").get<double>();
            r.noise.gate_window_s = n.at("gate_window_s").get<double>();
        } else {
            r.noise.relative_intensity_noise = n.at("relative_intensity_noise").get<double>();
            r.noise.background_fraction = n.at("background_fraction").get<double>();
        }
        if (r.duration_s <= 0.0 || r.value < 0.0)
            throw std::invalid_argument("records_from_json: invalid duration or value");
        records.push_back(r);
    }
    return records;
}

}  // namespace hypertomo
