// Dense complex linear algebra for small tensor-product systems: matrices,
// state vectors, density matrices, Kronecker products, partial traces and
// Hermitian eigendecomposition. Everything here is a pure value type.

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace hypertomo {

using cplx = std::complex<double>;

/// Dense row-major complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const cplx> data() const { return data_; }
    std::span<cplx> data() { return data_; }

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    ComplexMatrix conjugate() const;
    cplx trace() const;
    double frobenius_norm() const;

    /// Largest entrywise deviation from M = M†.
    double hermiticity_defect() const;
    bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }

    ComplexMatrix& operator+=(const ComplexMatrix& rhs);
    ComplexMatrix& operator-=(const ComplexMatrix& rhs);
    ComplexMatrix& operator*=(cplx s);

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

/// Normalized amplitude vector over a labeled tensor-product basis. The
/// subsystem dimensions are fixed at construction; indices are row-major
/// mixed radix (first subsystem varies slowest).
class PureStateVector {
public:
    /// Amplitudes must already be normalized to 1e-12; throws otherwise.
    PureStateVector(std::vector<std::size_t> dims, std::vector<cplx> amplitudes);

    /// Rescales the amplitudes to unit norm, then constructs.
    static PureStateVector normalized(std::vector<std::size_t> dims, std::vector<cplx> amplitudes);

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t dim() const { return amplitudes_.size(); }
    std::span<const cplx> amplitudes() const { return amplitudes_; }
    cplx amplitude(std::size_t i) const { return amplitudes_[i]; }

    /// ⟨this|other⟩.
    cplx overlap(const PureStateVector& other) const;

private:
    std::vector<std::size_t> dims_;
    std::vector<cplx> amplitudes_;
};

/// Hermitian, unit-trace, positive-semidefinite operator over a
/// tensor-product basis. Constructor validates all three invariants
/// (PSD is checked by eigendecomposition for dim <= 64).
class DensityMatrix {
public:
    DensityMatrix(std::vector<std::size_t> dims, ComplexMatrix matrix);

    static DensityMatrix from_pure(const PureStateVector& psi);

    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t dim() const { return matrix_.rows(); }
    const ComplexMatrix& matrix() const { return matrix_; }

private:
    std::vector<std::size_t> dims_;
    ComplexMatrix matrix_;
};

/// Kronecker products; dims of state/density results are concatenated.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
PureStateVector tensor(const PureStateVector& a, const PureStateVector& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);

/// Reduced density matrix over the subsystems in `keep` (original order
/// preserved). Throws std::invalid_argument for empty or out-of-range keep.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep);
/// Same reduction computed directly from a pure state, without forming the
/// full outer product.
DensityMatrix partial_trace(const PureStateVector& psi, const std::vector<std::size_t>& keep);

struct EigResult {
    std::vector<double> values;  // descending
    ComplexMatrix vectors;       // columns, matching order
};

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Throws std::invalid_argument if the input is not Hermitian.
EigResult eig_hermitian(const ComplexMatrix& m);

/// Principal square root of a PSD matrix. Eigenvalues in [-1e-9, 0) are
/// clamped to zero; anything below -1e-6 throws std::domain_error.
ComplexMatrix sqrt_psd(const ComplexMatrix& m);

/// Row-major strides for a mixed-radix index over `dims`.
std::vector<std::size_t> strides_of(const std::vector<std::size_t>& dims);

}  // namespace hypertomo
