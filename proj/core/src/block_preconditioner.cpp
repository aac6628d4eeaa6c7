#include "mdprec/block_preconditioner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mdprec/direct_solver.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/sparse_ops.hpp"
#include "mdprec/spectrum.hpp"

namespace mdprec::block {

void BlockPrecConfig::validate() const {
    if (kappa < 1) throw ConfigError("kappa must be >= 1");
    if (smoother_iters < 1) throw ConfigError("smoother_iters must be >= 1");
    if (schur_cycles < 1) throw ConfigError("schur_cycles must be >= 1");
    spai.validate();
    amg.validate();
}

CsrMatrix approximate_schur(const BlockSystem& sys, const CsrMatrix& ainv) {
    if (sys.b2.nnz() == 0 || sys.b1t.nnz() == 0 || sys.n_beam() == 0) return sys.c;
    const CsrMatrix coupling = spgemm(sys.b2, spgemm(ainv, sys.b1t));
    return add_scaled(sys.c, -1.0, coupling);
}

BlockPreconditioner setup(const BlockSystem& sys, const BlockPrecConfig& cfg) {
    cfg.validate();
    BlockPreconditioner p(cfg);
    p.rebuild(sys);
    return p;
}

void BlockPreconditioner::rebuild(const BlockSystem& sys) {
    validate(sys);
    const auto t0 = std::chrono::steady_clock::now();
    exact_schur_.reset();
    if (sys.n_beam() > 0) {
        spai_stats_ = spai::build_spai(sys.a, cfg_.spai);
        ainv_ = std::move(spai_stats_.approx_inverse);
        spai_stats_.approx_inverse = CsrMatrix();
    } else {
        spai_stats_ = {};
        ainv_ = CsrMatrix(0, 0);
    }
    schur_hat_ = approximate_schur(sys, ainv_);
    if (schur_hat_.rows() > 0) amg_ = amg::build_hierarchy(schur_hat_, cfg_.amg);
    ++setup_counter_;
    last_setup_seconds_ =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BlockPreconditioner BlockPreconditioner::exact(const BlockSystem& sys, const BlockPrecConfig& cfg) {
    cfg.validate();
    validate(sys);
    const auto t0 = std::chrono::steady_clock::now();
    BlockPreconditioner p(cfg);
    if (sys.n_beam() > 0) {
        p.ainv_ = DenseLu(DenseMatrix::from_csr(sys.a)).inverse().to_csr();
    } else {
        p.ainv_ = CsrMatrix(0, 0);
    }
    p.schur_hat_ = approximate_schur(sys, p.ainv_);
    if (p.schur_hat_.rows() > 0) p.exact_schur_.emplace(DenseMatrix::from_csr(p.schur_hat_));
    p.setup_counter_ = 1;
    p.last_setup_seconds_ =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return p;
}

void BlockPreconditioner::schur_solve(std::span<const double> b, std::span<double> x) const {
    if (b.empty()) return;
    if (exact_schur_) {
        std::ranges::copy(exact_schur_->solve(b), x.begin());
        return;
    }
    std::ranges::fill(x, 0.0);
    for (int c = 0; c < cfg_.schur_cycles; ++c) {
        Vector next = amg_.vcycle(b, x);
        std::ranges::copy(next, x.begin());
    }
}

BlockVector BlockPreconditioner::apply(const BlockSystem& sys, const BlockVector& rhs,
                                       const BlockVector& x0) const {
    const Index m = sys.n_beam();
    const Index n = sys.n_solid();
    if (rhs.beam.size() != m || rhs.solid.size() != n || x0.beam.size() != m ||
        x0.solid.size() != n || ainv_.rows() != m || schur_hat_.rows() != n) {
        throw DimensionError("BlockPreconditioner::apply: sizes do not match the system");
    }
    BlockVector x = x0;
    const Vector zero_beam(m, 0.0);
    Vector schur_rhs(n), y_solid(n), beam_rhs(m);
    for (int sweep = 0; sweep < cfg_.kappa; ++sweep) {
        BlockVector ax = block_operator_apply(sys, x);
        BlockVector r{rhs.beam, rhs.solid};
        axpy(-1.0, ax.beam, r.beam);
        axpy(-1.0, ax.solid, r.solid);

        // Predictor.
        Vector y_beam = m > 0 ? spai::spai_smooth(sys.a, ainv_, r.beam, zero_beam, cfg_.smoother_iters,
                                                  cfg_.literal_fixed_residual)
                              : Vector{};
        // Schur complement step.
        schur_rhs = r.solid;
        if (m > 0) spmv_add(sys.b2, -1.0, y_beam, schur_rhs);
        schur_solve(schur_rhs, y_solid);
        // Corrector.
        if (m > 0) {
            beam_rhs = r.beam;
            spmv_add(sys.b1t, -1.0, y_solid, beam_rhs);
            y_beam = spai::spai_smooth(sys.a, ainv_, beam_rhs, y_beam, cfg_.smoother_iters,
                                       cfg_.literal_fixed_residual);
        }
        axpy(1.0, y_beam, x.beam);
        axpy(1.0, y_solid, x.solid);
    }
    return x;
}

void BlockPreconditioner::apply(const BlockSystem& sys, std::span<const double> r,
                                std::span<double> z) const {
    const Index m = sys.n_beam();
    if (r.size() != sys.size() || z.size() != sys.size()) {
        throw DimensionError("BlockPreconditioner::apply: vector length");
    }
    BlockVector rhs = BlockVector::split(r, m);
    BlockVector x0{Vector(m, 0.0), Vector(sys.n_solid(), 0.0)};
    BlockVector x = apply(sys, rhs, x0);
    std::ranges::copy(x.beam, z.begin());
    std::ranges::copy(x.solid, z.begin() + static_cast<std::ptrdiff_t>(m));
}

// ---------------------------------------------------------------------------

namespace {

double block_norm(const CsrMatrix& m, NormKind kind) {
    const MatrixNorms n = matrix_norms(m);
    switch (kind) {
    case NormKind::one: return n.one_norm;
    case NormKind::inf: return n.inf_norm;
    case NormKind::frobenius: return n.frobenius;
    }
    return 0.0;
}

double dense_norm(const DenseMatrix& d, NormKind kind) {
    double best = 0.0;
    if (kind == NormKind::frobenius) {
        for (double v : d.data()) best += v * v;
        return std::sqrt(best);
    }
    if (kind == NormKind::one) {
        for (Index j = 0; j < d.cols(); ++j) {
            double s = 0.0;
            for (double v : d.column(j)) s += std::abs(v);
            best = std::max(best, s);
        }
        return best;
    }
    for (Index i = 0; i < d.rows(); ++i) {
        double s = 0.0;
        for (Index j = 0; j < d.cols(); ++j) s += std::abs(d(i, j));
        best = std::max(best, s);
    }
    return best;
}

struct InverseNorm {
    double value = 0.0;
    bool estimated = false;
};

// Norm of the inverse of the diagonal block m, split into independent
// sub-blocks where the partition allows it.
InverseNorm inverse_norm(const CsrMatrix& m, std::span<const Index> parts, NormKind kind,
                         const std::string& name) {
    InverseNorm out;
    double frob2 = 0.0;
    for (Index b = 0; b + 1 < parts.size(); ++b) {
        const Index r0 = parts[b];
        const Index r1 = parts[b + 1];
        const CsrMatrix sub = submatrix(m, r0, r1, r0, r1);
        double v = 0.0;
        if (sub.rows() <= kDenseInverseLimit) {
            DenseMatrix inv;
            try {
                inv = DenseLu(DenseMatrix::from_csr(sub)).inverse();
            } catch (const NumericalError&) {
                throw NumericalError("dominance_report: diagonal block " + name + " is singular");
            }
            v = dense_norm(inv, kind);
        } else {
            if (kind == NormKind::frobenius) {
                throw NumericalError("dominance_report: frobenius norm of the inverse of " + name +
                                     " requires a block of at most " +
                                     std::to_string(kDenseInverseLimit) + " rows");
            }
            std::optional<SparseLu> lu;
            try {
                lu.emplace(sub);
            } catch (const NumericalError&) {
                throw NumericalError("dominance_report: diagonal block " + name + " is singular");
            }
            const SparseLu& f = *lu;
            auto solve = [&](std::span<const double> x, std::span<double> y) {
                std::ranges::copy(f.solve(x), y.begin());
            };
            auto solve_t = [&](std::span<const double> x, std::span<double> y) {
                std::ranges::copy(f.solve_transposed(x), y.begin());
            };
            // ||B||_inf = ||B^T||_1.
            v = kind == NormKind::one ? krylov::hager_one_norm(sub.rows(), solve, solve_t)
                                      : krylov::hager_one_norm(sub.rows(), solve_t, solve);
            out.estimated = true;
        }
        if (kind == NormKind::frobenius) {
            frob2 += v * v;
        } else {
            out.value = std::max(out.value, v);
        }
    }
    if (kind == NormKind::frobenius) out.value = std::sqrt(frob2);
    return out;
}

} // namespace

DominanceReport dominance_report(const BlockSystem& sys, NormKind norm_kind) {
    validate(sys);
    DominanceReport rep;
    rep.norm_kind = norm_kind;
    auto add_row = [&](const std::string& name, const CsrMatrix& off, const CsrMatrix& diag,
                       std::span<const Index> parts) {
        DominanceRow row;
        row.name = name;
        row.offdiag_norm = block_norm(off, norm_kind);
        const InverseNorm inv = inverse_norm(diag, parts, norm_kind, name);
        row.inv_diag_norm_reciprocal = 1.0 / inv.value;
        row.estimated = inv.estimated;
        row.dominant = row.offdiag_norm <= row.inv_diag_norm_reciprocal;
        rep.rows.push_back(std::move(row));
    };
    if (sys.n_beam() > 0) add_row("beam", sys.b1t, sys.a, sys.beam_block_boundaries);
    if (sys.n_solid() > 0) {
        const std::vector<Index> whole{0, sys.n_solid()};
        add_row("solid", sys.b2, sys.c, whole);
    }
    return rep;
}

// ---------------------------------------------------------------------------

IlutPreconditioner::IlutPreconditioner(const BlockSystem& sys, double fill, double tau)
    : IlutPreconditioner(assemble_monolithic(sys), fill, tau) {}

IlutPreconditioner::IlutPreconditioner(const CsrMatrix& a, double fill, double tau)
    : factors_(ilut_factor(a, fill, tau)) {}

void IlutPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
    std::ranges::copy(r, z.begin());
    ilut_solve_in_place(factors_, z);
}

IlutPreconditioner one_level_baseline(const BlockSystem& sys, double fill, double tau) {
    validate(sys);
    return IlutPreconditioner(sys, fill, tau);
}

} // namespace mdprec::block
