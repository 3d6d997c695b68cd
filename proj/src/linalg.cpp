#include "hypertomo/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hypertomo {

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.begin()->size() : 0;
    ComplexMatrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw std::invalid_argument("ComplexMatrix::from_rows: ragged rows");
        std::size_t j = 0;
        for (const cplx& v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
    return m;
}

ComplexMatrix ComplexMatrix::conjugate() const {
    ComplexMatrix m(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) m.data_[i] = std::conj(data_[i]);
    return m;
}

cplx ComplexMatrix::trace() const {
    if (rows_ != cols_) throw std::invalid_argument("trace: matrix not square");
    cplx t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const cplx& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

double ComplexMatrix::hermiticity_defect() const {
    if (rows_ != cols_) throw std::invalid_argument("hermiticity_defect: matrix not square");
    double d = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = i; j < cols_; ++j)
            d = std::max(d, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return d;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("matrix add: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("matrix sub: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
    for (cplx& v : data_) v *= s;
    return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix mul: shape mismatch");
    ComplexMatrix m(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx aik = a(i, k);
            if (aik == cplx{}) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) m(i, j) += aik * b(k, j);
        }
    return m;
}

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> s(dims.size(), 1);
    for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
    return s;
}

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
    std::size_t p = 1;
    for (std::size_t d : dims) p *= d;
    return p;
}

double norm2(std::span<const cplx> v) {
    double s = 0.0;
    for (const cplx& a : v) s += std::norm(a);
    return std::sqrt(s);
}

}  // namespace

PureStateVector::PureStateVector(std::vector<std::size_t> dims, std::vector<cplx> amplitudes)
    : dims_(std::move(dims)), amplitudes_(std::move(amplitudes)) {
    for (std::size_t d : dims_)
        if (d == 0) throw std::invalid_argument("PureStateVector: zero subsystem dimension");
    if (amplitudes_.size() != product(dims_))
        throw std::invalid_argument("PureStateVector: amplitude count does not match dims");
    if (std::abs(norm2(amplitudes_) - 1.0) > 1e-12)
        throw std::invalid_argument("PureStateVector: amplitudes not normalized");
}

PureStateVector PureStateVector::normalized(std::vector<std::size_t> dims,
                                            std::vector<cplx> amplitudes) {
    const double n = norm2(amplitudes);
    if (n == 0.0) throw std::invalid_argument("PureStateVector: zero vector cannot be normalized");
    for (cplx& a : amplitudes) a /= n;
    return PureStateVector(std::move(dims), std::move(amplitudes));
}

cplx PureStateVector::overlap(const PureStateVector& other) const {
    if (dim() != other.dim()) throw std::invalid_argument("overlap: dimension mismatch");
    cplx s = 0.0;
    for (std::size_t i = 0; i < amplitudes_.size(); ++i)
        s += std::conj(amplitudes_[i]) * other.amplitudes_[i];
    return s;
}

DensityMatrix::DensityMatrix(std::vector<std::size_t> dims, ComplexMatrix matrix)
    : dims_(std::move(dims)), matrix_(std::move(matrix)) {
    const std::size_t d = product(dims_);
    if (matrix_.rows() != d || matrix_.cols() != d)
        throw std::invalid_argument("DensityMatrix: matrix size does not match dims");
    if (matrix_.hermiticity_defect() > 1e-10)
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(matrix_.trace() - cplx{1.0}) > 1e-10)
        throw std::invalid_argument("DensityMatrix: trace != 1");
    if (d <= 64) {
        const auto eig = eig_hermitian(matrix_);
        if (eig.values.back() < -1e-9)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
    }
}

DensityMatrix DensityMatrix::from_pure(const PureStateVector& psi) {
    const std::size_t d = psi.dim();
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            m(i, j) = psi.amplitude(i) * std::conj(psi.amplitude(j));
    return DensityMatrix(psi.dims(), std::move(m));
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx{}) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    m(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return m;
}

PureStateVector tensor(const PureStateVector& a, const PureStateVector& b) {
    std::vector<std::size_t> dims = a.dims();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    std::vector<cplx> amps(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j)
            amps[i * b.dim() + j] = a.amplitude(i) * b.amplitude(j);
    return PureStateVector(std::move(dims), std::move(amps));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
    std::vector<std::size_t> dims = a.dims();
    dims.insert(dims.end(), b.dims().begin(), b.dims().end());
    return DensityMatrix(std::move(dims), tensor(a.matrix(), b.matrix()));
}

namespace {

struct TraceLayout {
    std::vector<std::size_t> keep_dims;
    std::vector<std::size_t> keep_offsets;    // full-index offset of each kept multi-index
    std::vector<std::size_t> traced_offsets;  // full-index offset of each traced multi-index
};

TraceLayout trace_layout(const std::vector<std::size_t>& dims,
                         const std::vector<std::size_t>& keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    std::vector<bool> kept(dims.size(), false);
    for (std::size_t k : keep) {
        if (k >= dims.size()) throw std::invalid_argument("partial_trace: keep index out of range");
        if (kept[k]) throw std::invalid_argument("partial_trace: duplicate keep index");
        kept[k] = true;
    }

    const auto strides = strides_of(dims);
    TraceLayout out;
    std::vector<std::size_t> keep_strides, traced_dims, traced_strides;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (kept[s]) {
            out.keep_dims.push_back(dims[s]);
            keep_strides.push_back(strides[s]);
        } else {
            traced_dims.push_back(dims[s]);
            traced_strides.push_back(strides[s]);
        }
    }

    auto offsets = [](const std::vector<std::size_t>& sub_dims,
                      const std::vector<std::size_t>& sub_strides) {
        std::size_t count = 1;
        for (std::size_t d : sub_dims) count *= d;
        std::vector<std::size_t> off(count, 0);
        std::vector<std::size_t> idx(sub_dims.size(), 0);
        for (std::size_t n = 0; n < count; ++n) {
            std::size_t o = 0;
            for (std::size_t s = 0; s < sub_dims.size(); ++s) o += idx[s] * sub_strides[s];
            off[n] = o;
            for (std::size_t s = sub_dims.size(); s-- > 0;) {
                if (++idx[s] < sub_dims[s]) break;
                idx[s] = 0;
            }
        }
        return off;
    };

    out.keep_offsets = offsets(out.keep_dims, keep_strides);
    out.traced_offsets = offsets(traced_dims, traced_strides);
    return out;
}

}  // namespace

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::size_t>& keep) {
    const auto lay = trace_layout(rho.dims(), keep);
    const std::size_t dk = lay.keep_offsets.size();
    ComplexMatrix out(dk, dk);
    const ComplexMatrix& m = rho.matrix();
    for (std::size_t i = 0; i < dk; ++i)
        for (std::size_t j = 0; j < dk; ++j) {
            cplx s = 0.0;
            for (std::size_t t : lay.traced_offsets)
                s += m(lay.keep_offsets[i] + t, lay.keep_offsets[j] + t);
            out(i, j) = s;
        }
    return DensityMatrix(lay.keep_dims, std::move(out));
}

DensityMatrix partial_trace(const PureStateVector& psi, const std::vector<std::size_t>& keep) {
    const auto lay = trace_layout(psi.dims(), keep);
    const std::size_t dk = lay.keep_offsets.size();
    ComplexMatrix out(dk, dk);
    for (std::size_t t : lay.traced_offsets)
        for (std::size_t i = 0; i < dk; ++i) {
            const cplx ai = psi.amplitude(lay.keep_offsets[i] + t);
            if (ai == cplx{}) continue;
            for (std::size_t j = 0; j < dk; ++j)
                out(i, j) += ai * std::conj(psi.amplitude(lay.keep_offsets[j] + t));
        }
    return DensityMatrix(lay.keep_dims, std::move(out));
}

EigResult eig_hermitian(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("eig_hermitian: matrix not square");
    const double scale = std::max(1.0, m.frobenius_norm());
    if (m.hermiticity_defect() > 1e-8 * scale)
        throw std::invalid_argument("eig_hermitian: matrix not Hermitian");

    const std::size_t n = m.rows();
    // Work on the symmetrized copy so roundoff asymmetry cannot accumulate.
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double tol = 1e-11 * scale;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * std::norm(a(p, q));
        if (std::sqrt(off) <= tol) break;

        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double r = std::abs(apq);
                if (r <= tol / n) continue;
                const cplx phase = apq / r;
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * r);
                const double sgn = tau >= 0.0 ? 1.0 : -1.0;
                const double t = sgn / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx sp = s * phase;          // R(p,q)
                const cplx spc = s * std::conj(phase);  // -R(q,p)

                // Rows: A <- R† A.
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sp * aqk;
                    a(q, k) = spc * apk + c * aqk;
                }
                // Columns: A <- A R, and accumulate V <- V R.
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - spc * akq;
                    a(k, q) = sp * akp + c * akq;
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - spc * vkq;
                    v(k, q) = sp * vkp + c * vkq;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });

    EigResult res;
    res.values.resize(n);
    res.vectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        res.values[j] = a(order[j], order[j]).real();
        for (std::size_t i = 0; i < n; ++i) res.vectors(i, j) = v(i, order[j]);
    }
    return res;
}

ComplexMatrix sqrt_psd(const ComplexMatrix& m) {
    EigResult eig = eig_hermitian(m);
    if (eig.values.back() < -1e-6)
        throw std::domain_error("sqrt_psd: significantly negative eigenvalue");
    const std::size_t n = m.rows();
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lam = std::max(0.0, eig.values[k]);
        const double root = std::sqrt(lam);
        if (root == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx vik = eig.vectors(i, k);
            if (vik == cplx{}) continue;
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += root * vik * std::conj(eig.vectors(j, k));
        }
    }
    return out;
}

}  // namespace hypertomo
