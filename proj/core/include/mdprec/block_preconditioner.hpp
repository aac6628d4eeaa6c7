#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mdprec/amg.hpp"
#include "mdprec/block_system.hpp"
#include "mdprec/dense.hpp"
#include "mdprec/ilut.hpp"
#include "mdprec/spai.hpp"

namespace mdprec::block {

enum class ReusePolicy { rebuild_each_solve, reuse_within_load_step };

struct BlockPrecConfig {
    int kappa = 3;          ///< sweeps through the block factorization
    int smoother_iters = 3; ///< SPAI Richardson steps per beam solve
    spai::SpaiConfig spai;
    amg::AmgConfig amg;
    int schur_cycles = 1; ///< V-cycles per Schur step
    ReusePolicy reuse_policy = ReusePolicy::rebuild_each_solve;
    /// Hold the beam residual fixed inside the SPAI smoother.
    bool literal_fixed_residual = false;

    void validate() const;
};

/// Approximate block LU: SPAI of A, explicit S = C - B2 M B1^T, AMG on S.
class BlockPreconditioner {
public:
    /// Dense A^{-1} and dense S^{-1} in place of SPAI and AMG.
    static BlockPreconditioner exact(const BlockSystem& sys, const BlockPrecConfig& cfg);

    /// Recomputes all setup products for sys and increments setup_counter.
    void rebuild(const BlockSystem& sys);

    /// kappa sweeps from x0 for the right-hand side rhs.
    BlockVector apply(const BlockSystem& sys, const BlockVector& rhs, const BlockVector& x0) const;
    /// z = P^{-1} r on concatenated vectors, zero initial guess.
    void apply(const BlockSystem& sys, std::span<const double> r, std::span<double> z) const;

    const CsrMatrix& ainv() const { return ainv_; }
    const CsrMatrix& schur_hat() const { return schur_hat_; }
    const amg::AmgHierarchy& amg_hierarchy() const { return amg_; }
    const BlockPrecConfig& config() const { return cfg_; }
    const spai::SpaiResult& spai_stats() const { return spai_stats_; }
    Index setup_counter() const { return setup_counter_; }
    double last_setup_seconds() const { return last_setup_seconds_; }

private:
    friend BlockPreconditioner setup(const BlockSystem&, const BlockPrecConfig&);
    explicit BlockPreconditioner(BlockPrecConfig cfg) : cfg_(std::move(cfg)) {}
    void schur_solve(std::span<const double> b, std::span<double> x) const;

    BlockPrecConfig cfg_;
    CsrMatrix ainv_;
    CsrMatrix schur_hat_;
    amg::AmgHierarchy amg_;
    std::optional<DenseLu> exact_schur_;
    spai::SpaiResult spai_stats_; ///< statistics only; the matrix lives in ainv_
    Index setup_counter_ = 0;
    double last_setup_seconds_ = 0.0;
};

/// Validates sys, then builds SPAI, Schur complement and AMG hierarchy.
BlockPreconditioner setup(const BlockSystem& sys, const BlockPrecConfig& cfg);

/// C - B2 M B1^T.
CsrMatrix approximate_schur(const BlockSystem& sys, const CsrMatrix& ainv);

enum class NormKind { one, inf, frobenius };

struct DominanceRow {
    std::string name;
    double offdiag_norm = 0.0;
    double inv_diag_norm_reciprocal = 0.0;
    bool dominant = false;
    bool estimated = false; ///< inverse norm from the 1-norm estimator
};

struct DominanceReport {
    NormKind norm_kind = NormKind::one;
    std::vector<DominanceRow> rows; ///< beam, then solid; an empty block is skipped
};

/// Diagonal blocks up to this size are inverted densely.
inline constexpr Index kDenseInverseLimit = 2000;

DominanceReport dominance_report(const BlockSystem& sys, NormKind norm_kind);

/// One-level ILUT of the assembled monolithic matrix.
class IlutPreconditioner {
public:
    IlutPreconditioner(const BlockSystem& sys, double fill, double tau);
    explicit IlutPreconditioner(const CsrMatrix& a, double fill, double tau);

    void apply(std::span<const double> r, std::span<double> z) const;
    const IlutFactors& factors() const { return factors_; }

private:
    IlutFactors factors_;
};

IlutPreconditioner one_level_baseline(const BlockSystem& sys, double fill, double tau);

} // namespace mdprec::block
