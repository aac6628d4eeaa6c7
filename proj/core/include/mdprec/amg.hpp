#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mdprec/csr_matrix.hpp"
#include "mdprec/dense.hpp"
#include "mdprec/direct_solver.hpp"
#include "mdprec/ilut.hpp"

namespace mdprec::amg {

enum class TransferKind { plain, smoothed };
enum class SmootherKind { jacobi, gauss_seidel, ilut };

struct AmgConfig {
    TransferKind transfer_kind = TransferKind::smoothed;
    double prolongator_damping = 4.0 / 3.0;
    Index max_coarse_size = 1000;
    Index max_levels = 10;
    SmootherKind smoother_kind = SmootherKind::ilut;
    int smoother_sweeps = 1;
    double jacobi_damping = 0.7;
    double ilut_fill = 1.0;
    double ilut_drop = 1e-4;
    /// Near-nullspace vectors per node; also the level-0 block size.
    Index nullspace_dim = 1;
    /// Strength threshold theta: |a_ij| <= theta sqrt(|a_ii a_jj|) is weak.
    double strength_threshold = 0.0;
    /// Schwarz overlap; a single process has nothing to overlap, recorded only.
    int smoother_overlap = 1;

    void validate() const;
};

/// Greedy aggregation of a (symmetrized) graph. Returns one aggregate id per
/// node; ids are numbered in order of creation.
std::vector<Index> aggregate(const SparsityGraph& g, Index min_aggregate_size = 3);

struct TentativeProlongator {
    CsrMatrix p;
    DenseMatrix coarse_nullspace;
};

/// Per-aggregate thin QR of the nullspace rows. dof_aggregate[i] is the
/// aggregate of dof i; coarse dof (a, c) is numbered a * k + c.
TentativeProlongator tentative_prolongator(std::span<const Index> dof_aggregate,
                                           const DenseMatrix& nullspace);

/// Estimate of the spectral radius of D^{-1} A by power iteration.
double estimate_dinv_a_radius(const CsrMatrix& a, int iterations = 20);

/// (I - omega / rho(D^{-1} A) D^{-1} A) P_tent. omega == 0 returns P_tent.
CsrMatrix smooth_prolongator(const CsrMatrix& a, const CsrMatrix& p_tent, double omega);

/// P^T A P.
CsrMatrix galerkin(const CsrMatrix& a, const CsrMatrix& p);

struct Level {
    CsrMatrix a;
    CsrMatrix p; ///< to the next coarser level; empty on the coarsest
    CsrMatrix r; ///< transpose(p)
    Index block_size = 1;
    Vector inv_diag;
    std::optional<IlutFactors> ilut;
};

class AmgHierarchy {
public:
    AmgHierarchy() = default;

    std::span<const Level> levels() const { return levels_; }
    Index num_levels() const { return levels_.size(); }
    const AmgConfig& config() const { return cfg_; }
    /// Coarsening stopped because aggregation no longer reduced the size.
    bool stagnated() const { return stagnated_; }
    /// sum nnz(A_l) / nnz(A_0)
    double operator_complexity() const;

    /// One V(s, s) cycle from x0.
    Vector vcycle(std::span<const double> b, std::span<const double> x0) const;

private:
    friend AmgHierarchy build_hierarchy(const CsrMatrix&, const AmgConfig&,
                                        std::optional<DenseMatrix>);
    void cycle(Index level, std::span<const double> b, std::span<double> x) const;
    void smooth(const Level& lv, std::span<const double> b, std::span<double> x, bool pre) const;
    void coarse_solve(std::span<const double> b, std::span<double> x) const;

    AmgConfig cfg_;
    std::vector<Level> levels_;
    std::optional<DenseLu> coarse_dense_;
    std::shared_ptr<const SparseLu> coarse_sparse_;
    bool stagnated_ = false;
};

/// Constant vector per scalar component, interleaved with the given block size.
DenseMatrix constant_nullspace(Index n, Index block_size);

/// Without a nullspace, constant_nullspace(n, cfg.nullspace_dim) is used.
AmgHierarchy build_hierarchy(const CsrMatrix& a, const AmgConfig& cfg,
                             std::optional<DenseMatrix> nullspace = std::nullopt);

} // namespace mdprec::amg
