// Interference visibility of pure states on lossless unbalanced beam
// splitters, and the visibility -> purity bound used to turn measured
// splitter parameters into a ceiling on reconstructable purity.

#pragma once

#include <string>

#include "hypertomo/linalg.hpp"

namespace hypertomo {

/// Lossless beam splitter, amplitude parametrization with t^2 + r^2 = 1.
class BeamSplitter {
public:
    /// From amplitude coefficients; throws if lossless condition fails.
    BeamSplitter(double r, double t);

    /// From intensity coefficients r^2, t^2 (the usual tabulated form).
    static BeamSplitter from_intensities(double r2, double t2);

    double r() const { return r_; }
    double t() const { return t_; }

    /// 2x2 mode transformation: |0> -> t|0>' + ir|1>', |1> -> t|1>' + ir|0>'.
    ComplexMatrix unitary() const;

private:
    double r_;
    double t_;
};

/// Per-wavelength, per-polarization splitter parameters. Defaults are the
/// measured values of the experiment's analyzers.
struct BSTable {
    BeamSplitter lambda1_h = BeamSplitter::from_intensities(0.42, 0.58);
    BeamSplitter lambda1_v = BeamSplitter::from_intensities(0.36, 0.64);
    BeamSplitter lambda2_h = BeamSplitter::from_intensities(0.45, 0.55);
    BeamSplitter lambda2_v = BeamSplitter::from_intensities(0.43, 0.57);
};

/// Fringe visibility of (|0> + e^{i phi}|1>)/sqrt(2) on one splitter: 2rt.
double visibility_1q(const BeamSplitter& bs);

/// Fringe visibility of the psi-type two-qubit state on two splitters:
/// 1 - (t1 t2 - r1 r2)^2 / (t1^2 t2^2 + r1^2 r2^2).
double visibility_2q(const BeamSplitter& bs1, const BeamSplitter& bs2);

/// Maximum purity of a mixed state producing fringe visibility v on a
/// balanced splitter: 1/2 + v^2/2. Throws for v outside [0, 1].
double purity_bound(double v);

struct PurityConsistencyReport {
    double measured;
    double sigma;
    double bound;
    bool compatible;  // false when measured - 2 sigma > bound
    double excess;    // measured - 2 sigma - bound (positive on violation)
};

/// Two-sigma compatibility check of a measured purity against a bound.
PurityConsistencyReport check_purity_consistency(double measured_purity, double sigma,
                                                 double bound);

}  // namespace hypertomo
