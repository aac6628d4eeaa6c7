#pragma once

#include <memory>
#include <span>

#include "mdprec/csr_matrix.hpp"

namespace mdprec {

/// Sparse LU factorization of a square matrix (COLAMD ordering).
class SparseLu {
public:
    /// Throws NumericalError when the factorization fails.
    explicit SparseLu(const CsrMatrix& a);
    ~SparseLu();
    SparseLu(SparseLu&&) noexcept;
    SparseLu& operator=(SparseLu&&) noexcept;

    Index size() const;
    Vector solve(std::span<const double> b) const;
    /// Solves A^T x = b.
    Vector solve_transposed(std::span<const double> b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace mdprec
