#pragma once

#include <span>
#include <vector>

#include "mdprec/csr_matrix.hpp"

namespace mdprec {

/// The 2x2 block system
///
///     [ A    B1^T ] [x_beam ]   [b_beam ]
///     [ B2   C    ] [x_solid] = [b_solid]
///
/// with A block diagonal over the per-fiber partition in beam_block_boundaries.
struct BlockSystem {
    CsrMatrix a;   ///< beam block, M x M
    CsrMatrix b1t; ///< M x N
    CsrMatrix b2;  ///< N x M
    CsrMatrix c;   ///< solid block, N x N
    Vector rhs_beam;
    Vector rhs_solid;
    std::vector<Index> beam_block_boundaries{0};

    Index n_beam() const { return a.rows(); }
    Index n_solid() const { return c.rows(); }
    Index size() const { return n_beam() + n_solid(); }
};

/// Beam / solid pair of vectors.
struct BlockVector {
    Vector beam;
    Vector solid;

    Vector concatenated() const;
    static BlockVector split(std::span<const double> x, Index n_beam);
    friend bool operator==(const BlockVector&, const BlockVector&) = default;
};

/// Throws DimensionError / InvariantError describing the first violation
/// (including the offending row and column for block-diagonality).
void validate(const BlockSystem& sys);

BlockVector block_operator_apply(const BlockSystem& sys, const BlockVector& x);
/// Same product on concatenated vectors [x_beam; x_solid].
void block_operator_apply(const BlockSystem& sys, std::span<const double> x, std::span<double> y);

/// Explicit monolithic matrix [[A, B1^T], [B2, C]].
CsrMatrix assemble_monolithic(const BlockSystem& sys);
Vector monolithic_rhs(const BlockSystem& sys);

} // namespace mdprec
