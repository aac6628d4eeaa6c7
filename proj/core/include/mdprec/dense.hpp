#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mdprec/csr_matrix.hpp"

namespace mdprec {

/// Small column-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(Index rows, Index cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    static DenseMatrix from_csr(const CsrMatrix& m);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    double& operator()(Index i, Index j) { return data_[j * rows_ + i]; }
    double operator()(Index i, Index j) const { return data_[j * rows_ + i]; }
    std::span<double> column(Index j) { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> column(Index j) const { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> data() const { return data_; }

    /// Drops exact zeros.
    CsrMatrix to_csr() const;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<double> data_;
};

/// Result of a dense least-squares solve min ||A z - b||_2.
struct LeastSquaresSolution {
    Vector z;
    double residual_norm = 0.0;
};

/// Householder QR least squares for a full-column-rank A (rows >= cols).
/// If unpivoted QR exposes a negligible diagonal in R, the problem is redone
/// with column pivoting; std::nullopt when the columns are numerically rank
/// deficient even then.
std::optional<LeastSquaresSolution> householder_least_squares(DenseMatrix a, Vector b);

/// LU factorization with partial pivoting.
class DenseLu {
public:
    DenseLu() = default;
    /// Throws NumericalError when the matrix is singular to working precision.
    explicit DenseLu(DenseMatrix a);

    Index size() const { return lu_.rows(); }
    void solve_in_place(std::span<double> x) const;
    Vector solve(std::span<const double> b) const;
    /// Solves A^T x = b.
    Vector solve_transposed(std::span<const double> b) const;
    DenseMatrix inverse() const;

private:
    DenseMatrix lu_;
    std::vector<Index> perm_;
};

} // namespace mdprec
