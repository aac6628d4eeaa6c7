#pragma once

#include <functional>
#include <optional>
#include <span>

#include "mdprec/csr_matrix.hpp"

namespace mdprec::krylov {

/// y = Op(x). y has the same length as x.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct GmresConfig {
    double rel_tol = 1e-8; ///< on ||r_k||_2 / ||r_0||_2
    Index max_iters = 1000;
    Index restart = 200;

    void validate() const;
};

struct SolveReport {
    Index iterations = 0;
    bool converged = false;
    /// ||r_k|| / ||r_0|| per iteration, starting with 1.
    Vector residual_history;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
    /// ||b - A x|| / ||b - A x0|| recomputed from the returned iterate.
    double true_relative_residual = 0.0;

    double total_seconds() const { return setup_seconds + solve_seconds; }
};

struct GmresResult {
    Vector x;
    SolveReport report;
};

/// Right-preconditioned restarted GMRES(m) with modified Gram-Schmidt plus one
/// reorthogonalization pass. An empty preconditioner means identity.
GmresResult gmres(const LinearOperator& op, const LinearOperator& prec, std::span<const double> b,
                  const GmresConfig& cfg, std::optional<std::span<const double>> x0 = std::nullopt);

/// Wraps spmv.
LinearOperator matrix_operator(const CsrMatrix& a);

} // namespace mdprec::krylov
