#include "hypertomo/visibility.hpp"

#include <cmath>
#include <stdexcept>

namespace hypertomo {

BeamSplitter::BeamSplitter(double r, double t) : r_(r), t_(t) {
    if (r < 0.0 || t < 0.0)
        throw std::invalid_argument("BeamSplitter: amplitudes must be nonnegative");
    if (std::abs(t * t + r * r - 1.0) > 1e-12)
        throw std::invalid_argument("BeamSplitter: not lossless (t^2 + r^2 != 1)");
}

BeamSplitter BeamSplitter::from_intensities(double r2, double t2) {
    if (r2 < 0.0 || t2 < 0.0)
        throw std::invalid_argument("BeamSplitter: intensities must be nonnegative");
    return BeamSplitter(std::sqrt(r2), std::sqrt(t2));
}

ComplexMatrix BeamSplitter::unitary() const {
    const cplx ir{0.0, r_};
    return ComplexMatrix::from_rows({{t_, ir}, {ir, t_}});
}

double visibility_1q(const BeamSplitter& bs) { return 2.0 * bs.r() * bs.t(); }

double visibility_2q(const BeamSplitter& bs1, const BeamSplitter& bs2) {
    const double tt = bs1.t() * bs2.t();
    const double rr = bs1.r() * bs2.r();
    return 1.0 - (tt - rr) * (tt - rr) / (tt * tt + rr * rr);
}

double purity_bound(double v) {
    if (v < 0.0 || v > 1.0) throw std::invalid_argument("purity_bound: visibility not in [0, 1]");
    return 0.5 + v * v / 2.0;
}

PurityConsistencyReport check_purity_consistency(double measured_purity, double sigma,
                                                 double bound) {
    PurityConsistencyReport rep;
    rep.measured = measured_purity;
    rep.sigma = sigma;
    rep.bound = bound;
    rep.excess = measured_purity - 2.0 * sigma - bound;
    rep.compatible = rep.excess <= 0.0;
    return rep;
}

}  // namespace hypertomo
