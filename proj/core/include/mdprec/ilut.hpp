#pragma once

#include <span>

#include "mdprec/csr_matrix.hpp"

namespace mdprec {

/// A ~= L U with L unit lower triangular (diagonal not stored) and U upper
/// triangular with the diagonal stored first in each row.
struct IlutFactors {
    CsrMatrix l; ///< strictly lower part
    CsrMatrix u; ///< upper part including the diagonal
};

/// Dual-threshold incomplete LU without pivoting. Entries below
/// tau * ||a_i||_2 are dropped and each of the L and U parts of row i keeps
/// at most ceil(fill * nnz(a_i)) of its largest entries besides the diagonal.
/// Throws NumericalError naming the row on a zero pivot.
IlutFactors ilut_factor(const CsrMatrix& a, double fill, double tau);

/// x <- (L U)^{-1} x.
void ilut_solve_in_place(const IlutFactors& f, std::span<double> x);

/// L U as an explicit sparse matrix (for diagnostics and tests).
CsrMatrix ilut_product(const IlutFactors& f);

} // namespace mdprec
