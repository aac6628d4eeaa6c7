#pragma once

#include <optional>
#include <span>

#include "mdprec/csr_matrix.hpp"

namespace mdprec::spai {

struct SpaiConfig {
    double sigma = 1e-8; ///< drop tolerance for both filters
    int ell = 2;         ///< graph power of the filtered pattern
    bool enable_prefilter = true;
    bool enable_postfilter = true;
    /// Keeps the diagonal plus the entries closest in index.
    std::optional<Index> max_pattern_nnz_per_column;
    unsigned jobs = 1; ///< workers for the column minimizations

    /// Throws ConfigError.
    void validate() const;
};

struct SpaiResult {
    CsrMatrix approx_inverse;
    double residual_fro = 0.0; ///< ||A M - I||_F of approx_inverse
    Index pattern_nnz = 0;     ///< nnz of the enriched pattern fed to the minimization
    Index filtered_graph_nnz = 0;
};

/// Jacobi-scaled threshold graph: (i, j) kept when i == j or
/// |a_ij| / sqrt(d_i d_j) > sigma, with d_i = |a_ii| (1 when a_ii == 0).
SparsityGraph prefilter(const CsrMatrix& a, double sigma);

/// Reachability within ell edges; ell == 1 returns g.
SparsityGraph graph_power(const SparsityGraph& g, int ell);

/// Column k of the result minimizes ||A m_k - e_k||_2 over the entries
/// allowed by column k of the pattern. Throws NumericalError naming the
/// column on empty or rank-deficient local problems.
SpaiResult spai_minimize(const CsrMatrix& a, const SparsityGraph& pattern, unsigned jobs = 1);

/// Drops off-diagonal entries with |m_ij| < sigma.
CsrMatrix postfilter(const CsrMatrix& m, double sigma);

/// prefilter -> graph_power -> spai_minimize -> postfilter.
SpaiResult build_spai(const CsrMatrix& a, const SpaiConfig& cfg);

/// ||A M - I||_F.
double residual_frobenius(const CsrMatrix& a, const CsrMatrix& m);

/// Richardson iteration x <- x + M (b - A x), m_iters times from x0.
/// With literal_fixed_residual the residual of x0 is reused in every step.
Vector spai_smooth(const CsrMatrix& a, const CsrMatrix& ainv, std::span<const double> b,
                   std::span<const double> x0, int m_iters, bool literal_fixed_residual = false);

} // namespace mdprec::spai
