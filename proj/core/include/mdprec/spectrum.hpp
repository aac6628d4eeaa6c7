#pragma once

#include "mdprec/csr_matrix.hpp"
#include "mdprec/krylov.hpp"

namespace mdprec::krylov {

struct SpectrumReport {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double ratio = 0.0;
    double one_norm_condition = 0.0; ///< ||A||_1 times an estimate of ||A^{-1}||_1
    /// Values are singular values (square roots of the extremes of A^T A)
    /// because A is not symmetric.
    bool symmetrized = false;
};

/// Extreme eigenvalues by Lanczos iteration (on A^{-1} through a sparse LU
/// for lambda_min) and the 1-norm condition estimate. Throws NumericalError
/// when A is singular.
SpectrumReport lambda_extremes(const CsrMatrix& a, double tol = 1e-10, Index max_steps = 300);

/// Largest eigenvalue of a symmetric operator by Lanczos with full
/// reorthogonalization, stopping when the Ritz residual drops below tol.
double lanczos_largest(Index n, const LinearOperator& op, double tol = 1e-10,
                       Index max_steps = 300);

/// Hager / Higham estimate of ||B||_1 given products with B and B^T.
double hager_one_norm(Index n, const LinearOperator& apply, const LinearOperator& apply_transposed,
                      int max_iterations = 5);

} // namespace mdprec::krylov
