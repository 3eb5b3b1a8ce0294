#pragma once

// Symmetric banded matrices with a banded Cholesky factorization, and a
// minimal row-major dense matrix.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "splinegale/error.hpp"

namespace splinegale {

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw Error(ErrorCode::ParameterError, "matrix shapes do not match");
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double v = a(i, l);
            if (v == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += v * b(l, j);
        }
    return out;
}

inline double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

/// Symmetric matrix with entries only for |i - j| <= bandwidth; the lower
/// band is stored, row i holding columns i - bandwidth .. i.
class BandedSymmetric {
public:
    BandedSymmetric() = default;
    BandedSymmetric(std::size_t n, std::size_t bandwidth)
        : n_(n), bw_(bandwidth), data_(n * (bandwidth + 1), 0.0) {}

    std::size_t size() const { return n_; }
    std::size_t bandwidth() const { return bw_; }

    bool in_band(std::size_t i, std::size_t j) const { return (i > j ? i - j : j - i) <= bw_; }

    double operator()(std::size_t i, std::size_t j) const {
        if (i < j) std::swap(i, j);
        if (i - j > bw_) return 0.0;
        return data_[i * (bw_ + 1) + (bw_ - (i - j))];
    }

    /// Reference to the stored entry (i, j); symmetric partner is the same slot.
    double& at(std::size_t i, std::size_t j) {
        if (i < j) std::swap(i, j);
        if (i - j > bw_) throw Error(ErrorCode::IndexOutOfRange, "entry outside the band");
        return data_[i * (bw_ + 1) + (bw_ - (i - j))];
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t lo = i > bw_ ? i - bw_ : 0;
            const std::size_t hi = std::min(n_ - 1, i + bw_);
            for (std::size_t j = lo; j <= hi; ++j) y[i] += (*this)(i, j) * x[j];
        }
        return y;
    }

    DenseMatrix dense() const {
        DenseMatrix m(n_, n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
        return m;
    }

private:
    std::size_t n_ = 0;
    std::size_t bw_ = 0;
    std::vector<double> data_;
};

/// Lower-triangular banded Cholesky factor L with A = L L^T.
class BandedCholesky {
public:
    BandedCholesky() = default;

    explicit BandedCholesky(const BandedSymmetric& a) : n_(a.size()), bw_(a.bandwidth()), l_(a) {
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t lo = i > bw_ ? i - bw_ : 0;
            for (std::size_t j = lo; j <= i; ++j) {
                double s = l_(i, j);
                const std::size_t klo = std::max(lo, j > bw_ ? j - bw_ : 0);
                for (std::size_t k = klo; k < j; ++k) s -= l_(i, k) * l_(j, k);
                if (i == j) {
                    if (!(s > 0.0))
                        throw Error(ErrorCode::SingularGram,
                                    "nonpositive pivot " + std::to_string(s) + " at row " + std::to_string(i));
                    l_.at(i, i) = std::sqrt(s);
                } else {
                    l_.at(i, j) = s / l_(j, j);
                }
            }
        }
    }

    std::size_t size() const { return n_; }

    /// Largest over smallest diagonal entry of L (conditioning proxy).
    double condition_proxy() const {
        double lo = kHuge, hi = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            lo = std::min(lo, l_(i, i));
            hi = std::max(hi, l_(i, i));
        }
        return n_ == 0 ? 1.0 : hi / lo;
    }

    std::vector<double> solve(std::span<const double> b) const {
        if (b.size() != n_) throw Error(ErrorCode::ParameterError, "right-hand side has wrong length");
        std::vector<double> y(b.begin(), b.end());
        for (std::size_t i = 0; i < n_; ++i) {
            const std::size_t lo = i > bw_ ? i - bw_ : 0;
            for (std::size_t k = lo; k < i; ++k) y[i] -= l_(i, k) * y[k];
            y[i] /= l_(i, i);
        }
        for (std::size_t i = n_; i-- > 0;) {
            const std::size_t hi = std::min(n_ - 1, i + bw_);
            for (std::size_t k = i + 1; k <= hi; ++k) y[i] -= l_(k, i) * y[k];
            y[i] /= l_(i, i);
        }
        return y;
    }

    /// Dense inverse by solving against unit vectors, symmetrized.
    DenseMatrix inverse() const {
        DenseMatrix inv(n_, n_);
        std::vector<double> e(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            e[j] = 1.0;
            const auto col = solve(e);
            e[j] = 0.0;
            for (std::size_t i = 0; i < n_; ++i) inv(i, j) = col[i];
        }
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = i + 1; j < n_; ++j) {
                const double avg = 0.5 * (inv(i, j) + inv(j, i));
                inv(i, j) = inv(j, i) = avg;
            }
        return inv;
    }

private:
    static constexpr double kHuge = 1e300;
    std::size_t n_ = 0;
    std::size_t bw_ = 0;
    BandedSymmetric l_;  // lower triangle used, upper implied zero
};

}  // namespace splinegale
