#include "hypertomo/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "hypertomo/rng.hpp"

namespace hypertomo {

namespace {

constexpr double kEigenvalueFloor = 1e-6;   // clamp level for indefinite inits
constexpr double kGradTolerance = 1e-8;     // infinity-norm on the scaled gradient
constexpr int kMaxIterations = 10000;

using Params = std::array<double, 16>;

int axis_of(BasisState s) { return static_cast<int>(s) / 2; }

// One aggregated analyzer setting (out of 36).
struct SettingData {
    ProjectorSetting setting;
    ComplexMatrix projector;   // 4x4
    double counts = 0.0;       // summed observed values
    double background = 0.0;   // expected accidental/background contribution
    double n_basis = 0.0;      // shared within the complete 4-setting basis
};

// Groups records by setting, fills expected backgrounds, and estimates the
// per-basis normalization from accidental-corrected sums.
std::vector<SettingData> aggregate(const std::vector<MeasurementRecord>& records) {
    if (records.empty()) throw std::invalid_argument("tomography: no records");
    const Dof dof = records.front().setting.dof;

    std::array<SettingData, kNumSettings> slots;
    std::array<bool, kNumSettings> seen{};
    const auto settings = tomography_settings(dof);
    for (std::size_t i = 0; i < kNumSettings; ++i) {
        slots[i].setting = settings[i];
        slots[i].projector = tensor(basis_projector(settings[i].photon1),
                                    basis_projector(settings[i].photon2));
    }

    // SET backgrounds are a fraction of the (unknown) per-basis budget; the
    // uniform-floor identity sum = G (1 + 4 bf) recovers it from raw sums.
    std::array<double, 9> set_raw_sum{};
    std::array<double, 9> set_bf{};

    for (const auto& r : records) {
        if (r.setting.dof != dof)
            throw std::invalid_argument("tomography: mixed DOFs in one record set");
        if (r.value < 0.0) throw std::invalid_argument("tomography: negative record value");
        const std::size_t idx = static_cast<std::size_t>(r.setting.photon1) * kNumBasisStates +
                                static_cast<std::size_t>(r.setting.photon2);
        seen[idx] = true;
        slots[idx].counts += r.value;
        const int basis = axis_of(r.setting.photon1) * 3 + axis_of(r.setting.photon2);
        if (r.protocol == Protocol::qst) {
            slots[idx].background += r.noise.accidental_rate_hz * r.duration_s;
        } else {
            set_raw_sum[basis] += r.value;
            set_bf[basis] = r.noise.background_fraction;
        }
    }
    for (std::size_t i = 0; i < kNumSettings; ++i)
        if (!seen[i])
            throw std::invalid_argument("tomography: incomplete coverage of the 36 settings");

    std::vector<SettingData> out(slots.begin(), slots.end());
    for (auto& s : out) {
        const int basis = axis_of(s.setting.photon1) * 3 + axis_of(s.setting.photon2);
        if (set_bf[basis] > 0.0)
            s.background += set_bf[basis] * set_raw_sum[basis] / (1.0 + 4.0 * set_bf[basis]);
    }

    std::array<double, 9> basis_total{};
    for (const auto& s : out) {
        const int basis = axis_of(s.setting.photon1) * 3 + axis_of(s.setting.photon2);
        basis_total[basis] += s.counts - s.background;
    }
    for (double t : basis_total)
        if (t <= 0.0)
            throw std::invalid_argument("tomography: a basis has nonpositive total counts");
    for (auto& s : out)
        s.n_basis = basis_total[axis_of(s.setting.photon1) * 3 + axis_of(s.setting.photon2)];
    return out;
}

ComplexMatrix pauli(int axis) {
    switch (axis) {
        case 0: return ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, -1.0}});           // z
        case 1: return ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});            // x
        default: return ComplexMatrix::from_rows({{0.0, cplx{0.0, -1.0}},             // y
                                                  {cplx{0.0, 1.0}, 0.0}});
    }
}

ComplexMatrix build_T(const Params& p) {
    ComplexMatrix t(4, 4);
    for (std::size_t i = 0; i < 4; ++i) t(i, i) = p[i];
    const std::pair<int, int> lower[6] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
    for (int k = 0; k < 6; ++k)
        t(lower[k].first, lower[k].second) = {p[4 + 2 * k], p[5 + 2 * k]};
    return t;
}

ComplexMatrix hermitize(const ComplexMatrix& m) {
    ComplexMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    return out;
}

// Likelihood engine over the 16 real parameters. Objective values and
// gradients are scaled by 1/total-counts so the convergence threshold does
// not depend on the count scale.
class Likelihood {
public:
    explicit Likelihood(std::vector<SettingData> data) : data_(std::move(data)) {
        double total = 0.0;
        for (const auto& s : data_) total += s.counts;
        if (total <= 0.0) throw std::invalid_argument("tomography: all counts are zero");
        scale_ = 1.0 / std::max(1.0, total);
    }

    double unscaled_log_likelihood(const Params& p) const { return value_only(p); }

    double log_likelihood_rho(const ComplexMatrix& rho) const {
        double logl = 0.0;
        for (const auto& s : data_) {
            double prob = 0.0;
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b)
                    prob += (rho(a, b) * s.projector(b, a)).real();
            const double mu = std::max(s.n_basis * std::max(prob, 0.0) + s.background, 1e-300);
            logl += (s.counts > 0.0 ? s.counts * std::log(mu) : 0.0) - mu;
        }
        return logl;
    }

    // Returns scaled -logL; fills the scaled gradient when grad != nullptr.
    double eval(const Params& p, Params* grad) const {
        const ComplexMatrix t = build_T(p);
        const ComplexMatrix m = t.adjoint() * t;
        const double tau = m.trace().real();
        ComplexMatrix rho = m;
        rho *= 1.0 / tau;

        double logl = 0.0;
        ComplexMatrix g_rho(4, 4);
        for (const auto& s : data_) {
            double prob = 0.0;
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b)
                    prob += (rho(a, b) * s.projector(b, a)).real();
            prob = std::max(prob, 0.0);
            const double mu = std::max(s.n_basis * prob + s.background, 1e-300);
            logl += (s.counts > 0.0 ? s.counts * std::log(mu) : 0.0) - mu;
            if (grad) {
                const double w = (s.counts / mu - 1.0) * s.n_basis;
                for (std::size_t a = 0; a < 4; ++a)
                    for (std::size_t b = 0; b < 4; ++b) g_rho(a, b) += w * s.projector(a, b);
            }
        }

        if (grad) {
            double tr_grho = 0.0;
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b)
                    tr_grho += (g_rho(a, b) * rho(b, a)).real();
            ComplexMatrix w_mat = g_rho;
            for (std::size_t a = 0; a < 4; ++a) w_mat(a, a) -= tr_grho;
            w_mat *= 1.0 / tau;
            const ComplexMatrix c = t * w_mat;  // dL = 2 Re(conj(C_ab) dT_ab)
            for (std::size_t i = 0; i < 4; ++i) (*grad)[i] = -2.0 * c(i, i).real() * scale_;
            const std::pair<int, int> lower[6] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
            for (int k = 0; k < 6; ++k) {
                (*grad)[4 + 2 * k] = -2.0 * c(lower[k].first, lower[k].second).real() * scale_;
                (*grad)[5 + 2 * k] = -2.0 * c(lower[k].first, lower[k].second).imag() * scale_;
            }
        }
        return -logl * scale_;
    }

private:
    double value_only(const Params& p) const { return -eval(p, nullptr) / scale_; }

    std::vector<SettingData> data_;
    double scale_ = 1.0;
};

double inf_norm(const Params& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(const Params& a, const Params& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct OptimOutcome {
    Params x;
    int iterations = 0;
    bool converged = false;
};

OptimOutcome lbfgs_minimize(const Likelihood& like, Params x) {
    Params g{};
    double fx = like.eval(x, &g);

    std::deque<std::pair<Params, Params>> history;  // (s, y)
    OptimOutcome out{x, 0, false};

    for (int iter = 0; iter < kMaxIterations; ++iter) {
        out.iterations = iter;
        if (inf_norm(g) < kGradTolerance) {
            out.converged = true;
            break;
        }

        // Two-loop recursion.
        Params q = g;
        std::vector<double> alphas(history.size());
        for (std::size_t i = history.size(); i-- > 0;) {
            const auto& [s, y] = history[i];
            const double rho_i = 1.0 / dot(y, s);
            alphas[i] = rho_i * dot(s, q);
            for (std::size_t k = 0; k < q.size(); ++k) q[k] -= alphas[i] * y[k];
        }
        if (!history.empty()) {
            const auto& [s, y] = history.back();
            const double gamma = dot(s, y) / dot(y, y);
            for (double& v : q) v *= gamma;
        }
        for (std::size_t i = 0; i < history.size(); ++i) {
            const auto& [s, y] = history[i];
            const double rho_i = 1.0 / dot(y, s);
            const double beta = rho_i * dot(y, q);
            for (std::size_t k = 0; k < q.size(); ++k) q[k] += (alphas[i] - beta) * s[k];
        }
        Params d;
        for (std::size_t k = 0; k < d.size(); ++k) d[k] = -q[k];
        double slope = dot(g, d);
        if (slope >= 0.0) {  // not a descent direction; reset
            for (std::size_t k = 0; k < d.size(); ++k) d[k] = -g[k];
            slope = dot(g, d);
            history.clear();
        }

        // Backtracking Armijo line search.
        double step = 1.0;
        Params x_new{};
        Params g_new{};
        double f_new = fx;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t k = 0; k < x.size(); ++k) x_new[k] = x[k] + step * d[k];
            f_new = like.eval(x_new, &g_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            out.converged = inf_norm(g) < 1e-6;  // stalled at numerical precision
            break;
        }

        Params s_vec{}, y_vec{};
        for (std::size_t k = 0; k < x.size(); ++k) {
            s_vec[k] = x_new[k] - x[k];
            y_vec[k] = g_new[k] - g[k];
        }
        const double sy = dot(s_vec, y_vec);
        if (sy > 1e-12 * std::sqrt(dot(s_vec, s_vec)) * std::sqrt(dot(y_vec, y_vec))) {
            history.emplace_back(s_vec, y_vec);
            if (history.size() > 10) history.pop_front();
        }
        x = x_new;
        g = g_new;
        fx = f_new;
    }
    out.x = x;
    return out;
}

OptimOutcome nelder_mead_minimize(const Likelihood& like, const Params& x0) {
    const std::size_t n = x0.size();
    std::vector<Params> simplex(n + 1, x0);
    std::vector<double> f(n + 1);
    for (std::size_t i = 0; i < n; ++i)
        simplex[i + 1][i] += 0.05 * std::max(std::abs(x0[i]), 0.1);
    for (std::size_t i = 0; i <= n; ++i) f[i] = like.eval(simplex[i], nullptr);

    OptimOutcome out{x0, 0, false};
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        out.iterations = iter;
        std::vector<std::size_t> order(n + 1);
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });

        double diameter = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            diameter = std::max(
                diameter, std::abs(simplex[order[n]][i] - simplex[order[0]][i]));
        if (diameter < 1e-10 &&
            std::abs(f[order[n]] - f[order[0]]) < 1e-12 * (1.0 + std::abs(f[order[0]]))) {
            out.converged = true;
            break;
        }

        Params centroid{};
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[order[i]][k];
        }
        for (double& v : centroid) v /= static_cast<double>(n);

        auto blend = [&](double coef) {
            Params p;
            for (std::size_t k = 0; k < n; ++k)
                p[k] = centroid[k] + coef * (simplex[order[n]][k] - centroid[k]);
            return p;
        };

        const Params refl = blend(-1.0);
        const double f_refl = like.eval(refl, nullptr);
        if (f_refl < f[order[0]]) {
            const Params expand = blend(-2.0);
            const double f_exp = like.eval(expand, nullptr);
            if (f_exp < f_refl) {
                simplex[order[n]] = expand;
                f[order[n]] = f_exp;
            } else {
                simplex[order[n]] = refl;
                f[order[n]] = f_refl;
            }
        } else if (f_refl < f[order[n - 1]]) {
            simplex[order[n]] = refl;
            f[order[n]] = f_refl;
        } else {
            const Params contract = blend(0.5);
            const double f_con = like.eval(contract, nullptr);
            if (f_con < f[order[n]]) {
                simplex[order[n]] = contract;
                f[order[n]] = f_con;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k)
                        simplex[order[i]][k] =
                            0.5 * (simplex[order[i]][k] + simplex[order[0]][k]);
                    f[order[i]] = like.eval(simplex[order[i]], nullptr);
                }
            }
        }
        out.x = simplex[order[0]];
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (f[i] < f[best]) best = i;
    out.x = simplex[best];
    return out;
}

bool gradient_check(const Likelihood& like, const Params& x) {
    Params g{};
    like.eval(x, &g);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
        Params xl = x, xr = x;
        xl[i] -= h;
        xr[i] += h;
        const double fd = (like.eval(xr, nullptr) - like.eval(xl, nullptr)) / (2.0 * h);
        const double denom = std::max({1.0, std::abs(fd), std::abs(g[i])});
        if (std::abs(fd - g[i]) / denom > 1e-4) return false;
    }
    return true;
}

ComplexMatrix cholesky_lower(const ComplexMatrix& a) {
    const std::size_t n = a.rows();
    ComplexMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) diag -= std::norm(l(j, k));
        l(j, j) = std::sqrt(std::max(diag, 1e-24));
        for (std::size_t i = j + 1; i < n; ++i) {
            cplx v = a(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * std::conj(l(j, k));
            l(i, j) = v / l(j, j).real();
        }
    }
    return l;
}

}  // namespace

ComplexMatrix linear_inversion(const std::vector<MeasurementRecord>& records) {
    const auto data = aggregate(records);

    // Accidental-corrected counts per setting, indexed by state pair.
    double corrected[kNumBasisStates][kNumBasisStates];
    for (const auto& s : data)
        corrected[static_cast<int>(s.setting.photon1)][static_cast<int>(s.setting.photon2)] =
            s.counts - s.background;

    double basis_norm[3][3];
    for (int a1 = 0; a1 < 3; ++a1)
        for (int a2 = 0; a2 < 3; ++a2) {
            double sum = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) sum += corrected[2 * a1 + i][2 * a2 + j];
            basis_norm[a1][a2] = sum;
        }

    double m2[3][3];
    double m1_first[3] = {0, 0, 0};
    double m1_second[3] = {0, 0, 0};
    for (int a1 = 0; a1 < 3; ++a1)
        for (int a2 = 0; a2 < 3; ++a2) {
            double even = 0.0, first = 0.0, second = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const double c = corrected[2 * a1 + i][2 * a2 + j];
                    const double s1 = i == 0 ? 1.0 : -1.0;
                    const double s2 = j == 0 ? 1.0 : -1.0;
                    even += s1 * s2 * c;
                    first += s1 * c;
                    second += s2 * c;
                }
            m2[a1][a2] = even / basis_norm[a1][a2];
            m1_first[a1] += first / basis_norm[a1][a2] / 3.0;
            m1_second[a2] += second / basis_norm[a1][a2] / 3.0;
        }

    ComplexMatrix rho = ComplexMatrix::identity(4);
    const ComplexMatrix id2 = ComplexMatrix::identity(2);
    for (int a = 0; a < 3; ++a) {
        rho += tensor(pauli(a), id2) * cplx{m1_first[a]};
        rho += tensor(id2, pauli(a)) * cplx{m1_second[a]};
        for (int b = 0; b < 3; ++b) rho += tensor(pauli(a), pauli(b)) * cplx{m2[a][b]};
    }
    rho *= 0.25;
    return hermitize(rho);
}

DensityMatrix state_from_params(const CholeskyParams& params) {
    const ComplexMatrix t = build_T(params.t);
    ComplexMatrix m = t.adjoint() * t;
    const double tau = m.trace().real();
    if (tau <= 0.0) throw std::invalid_argument("state_from_params: zero factor");
    m *= 1.0 / tau;
    return DensityMatrix({2, 2}, hermitize(m));
}

CholeskyParams params_from_state(const ComplexMatrix& rho_estimate) {
    auto eig = eig_hermitian(rho_estimate);
    ComplexMatrix clamped(4, 4);
    double trace = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        const double lam = std::max(eig.values[k], kEigenvalueFloor);
        trace += lam;
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j)
                clamped(i, j) += lam * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    clamped *= 1.0 / trace;

    // rho = U U† with U upper = P chol(P rho P) P, so T = U† is lower.
    ComplexMatrix flipped(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) flipped(i, j) = clamped(3 - i, 3 - j);
    const ComplexMatrix l = cholesky_lower(hermitize(flipped));
    ComplexMatrix upper(4, 4);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) upper(i, j) = l(3 - i, 3 - j);
    const ComplexMatrix t = upper.adjoint();

    CholeskyParams p;
    for (std::size_t i = 0; i < 4; ++i) p.t[i] = t(i, i).real();
    const std::pair<int, int> lower_idx[6] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
    for (int k = 0; k < 6; ++k) {
        p.t[4 + 2 * k] = t(lower_idx[k].first, lower_idx[k].second).real();
        p.t[5 + 2 * k] = t(lower_idx[k].first, lower_idx[k].second).imag();
    }
    return p;
}

ReconstructionResult mle_reconstruct(const std::vector<MeasurementRecord>& records) {
    return mle_reconstruct(records, params_from_state(linear_inversion(records)));
}

double log_likelihood_at(const std::vector<MeasurementRecord>& records, const DensityMatrix& rho) {
    if (rho.dims() != std::vector<std::size_t>{2, 2})
        throw std::invalid_argument("log_likelihood_at: state is not two qubits");
    return Likelihood(aggregate(records)).log_likelihood_rho(rho.matrix());
}

ReconstructionResult mle_reconstruct(const std::vector<MeasurementRecord>& records,
                                     const CholeskyParams& init) {
    Likelihood like(aggregate(records));

    OptimOutcome opt;
    if (gradient_check(like, init.t)) {
        opt = lbfgs_minimize(like, init.t);
    } else {
        opt = nelder_mead_minimize(like, init.t);
    }

    CholeskyParams fitted;
    fitted.t = opt.x;
    ReconstructionResult res{state_from_params(fitted),
                             like.unscaled_log_likelihood(opt.x), opt.iterations,
                             opt.converged, ReconstructionMethod::mle};
    return res;
}

ResampleStats resample_uncertainty(const std::vector<MeasurementRecord>& records,
                                   int n_resamples, const MetricFn& metric,
                                   std::uint64_t rng_seed) {
    return resample_uncertainty_multi(records, n_resamples, {metric}, rng_seed)[0];
}

std::vector<ResampleStats> resample_uncertainty_multi(
    const std::vector<MeasurementRecord>& records, int n_resamples,
    const std::vector<MetricFn>& metrics, std::uint64_t rng_seed) {
    if (n_resamples < 2)
        throw std::invalid_argument("resample_uncertainty: need at least 2 resamples");

    std::vector<std::vector<double>> samples(metrics.size());
    std::vector<MeasurementRecord> resampled = records;
    for (int r = 0; r < n_resamples; ++r) {
        std::mt19937_64 rng(mix_seed(rng_seed, 0xB00757A900000000ULL + r));
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (records[i].value > 0.0) {
                std::poisson_distribution<long long> poisson(records[i].value);
                resampled[i].value = static_cast<double>(poisson(rng));
            } else {
                resampled[i].value = 0.0;
            }
        }
        const auto fit = mle_reconstruct(resampled);
        for (std::size_t m = 0; m < metrics.size(); ++m)
            samples[m].push_back(metrics[m](fit.rho));
    }

    std::vector<ResampleStats> out(metrics.size());
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        double mean = 0.0;
        for (double v : samples[m]) mean += v;
        mean /= samples[m].size();
        double var = 0.0;
        for (double v : samples[m]) var += (v - mean) * (v - mean);
        var /= (samples[m].size() - 1);
        out[m] = {mean, std::sqrt(var)};
    }
    return out;
}

std::string reconstruction_to_json(const ReconstructionResult& result, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["method"] =
        result.method == ReconstructionMethod::mle ? "mle" : "linear_inversion";
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["log_likelihood"] = result.log_likelihood;
    j["seed"] = seed;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.rho.dim(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < result.rho.dim(); ++k) {
            const cplx v = result.rho.matrix()(i, k);
            row.push_back({v.real(), v.imag()});
        }
        rows.push_back(std::move(row));
    }
    j["rho"] = std::move(rows);
    return j.dump(2);
}

}  // namespace hypertomo
