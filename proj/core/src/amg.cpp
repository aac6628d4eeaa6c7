#include "mdprec/amg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mdprec/errors.hpp"
#include "mdprec/sparse_ops.hpp"

namespace mdprec::amg {

namespace {

// Dense coarsest levels above this size are factored sparsely instead.
constexpr Index kDenseCoarseLimit = 4000;

} // namespace

void AmgConfig::validate() const {
    if (max_coarse_size < 1) throw ConfigError("amg.max_coarse_size must be >= 1");
    if (max_levels < 2) throw ConfigError("amg.max_levels must be >= 2");
    if (!(ilut_fill >= 0.0)) throw ConfigError("amg.ilut_fill must be >= 0");
    if (!(ilut_drop >= 0.0)) throw ConfigError("amg.ilut_drop must be >= 0");
    if (transfer_kind == TransferKind::smoothed &&
        !(prolongator_damping > 0.0 && prolongator_damping <= 2.0)) {
        throw ConfigError("amg.prolongator_damping must lie in (0, 2]");
    }
    if (smoother_sweeps < 1) throw ConfigError("amg.smoother_sweeps must be >= 1");
    if (!(jacobi_damping > 0.0)) throw ConfigError("amg.jacobi_damping must be > 0");
    if (nullspace_dim < 1) throw ConfigError("amg.nullspace_dim must be >= 1");
    if (!(strength_threshold >= 0.0)) throw ConfigError("amg.strength_threshold must be >= 0");
    if (smoother_overlap < 0) throw ConfigError("amg.smoother_overlap must be >= 0");
}

std::vector<Index> aggregate(const SparsityGraph& graph, Index min_aggregate_size) {
    if (graph.rows() != graph.cols()) throw DimensionError("aggregate: graph not square");
    const SparsityGraph g = graph_union(graph, transpose(graph));
    const Index n = g.rows();
    constexpr Index unassigned = static_cast<Index>(-1);
    std::vector<Index> agg(n, unassigned);
    Index n_agg = 0;

    // Phase 1: roots whose whole neighborhood is free.
    for (Index i = 0; i < n; ++i) {
        if (agg[i] != unassigned) continue;
        Index size = 1;
        bool free = true;
        for (Index j : g.row(i)) {
            if (j == i) continue;
            if (agg[j] != unassigned) {
                free = false;
                break;
            }
            ++size;
        }
        if (!free || size < min_aggregate_size) continue;
        agg[i] = n_agg;
        for (Index j : g.row(i)) agg[j] = n_agg;
        ++n_agg;
    }

    // Phase 2: attach leftovers to the phase-1 aggregate they connect to most.
    const std::vector<Index> phase1 = agg;
    std::vector<Index> count(n_agg, 0);
    std::vector<Index> touched;
    for (Index i = 0; i < n; ++i) {
        if (phase1[i] != unassigned) continue;
        touched.clear();
        for (Index j : g.row(i)) {
            const Index a = phase1[j];
            if (j == i || a == unassigned) continue;
            if (count[a]++ == 0) touched.push_back(a);
        }
        Index best = unassigned;
        for (Index a : touched) {
            if (best == unassigned || count[a] > count[best] || (count[a] == count[best] && a < best)) {
                best = a;
            }
        }
        for (Index a : touched) count[a] = 0;
        if (best != unassigned) agg[i] = best;
    }

    // Phase 3: whatever is left forms new aggregates with its free neighbors.
    for (Index i = 0; i < n; ++i) {
        if (agg[i] != unassigned) continue;
        agg[i] = n_agg;
        for (Index j : g.row(i)) {
            if (agg[j] == unassigned) agg[j] = n_agg;
        }
        ++n_agg;
    }
    return agg;
}

TentativeProlongator tentative_prolongator(std::span<const Index> dof_aggregate,
                                           const DenseMatrix& nullspace) {
    const Index n = dof_aggregate.size();
    const Index k = nullspace.cols();
    if (nullspace.rows() != n) throw DimensionError("tentative_prolongator: nullspace rows");
    if (k == 0) throw DimensionError("tentative_prolongator: empty nullspace");
    Index n_agg = 0;
    for (Index a : dof_aggregate) n_agg = std::max(n_agg, a + 1);

    std::vector<std::vector<Index>> members(n_agg);
    for (Index i = 0; i < n; ++i) members[dof_aggregate[i]].push_back(i);

    std::vector<Triplet> t;
    t.reserve(n * k);
    DenseMatrix coarse(n_agg * k, k);
    for (Index a = 0; a < n_agg; ++a) {
        const auto& rows = members[a];
        if (rows.empty()) throw InvariantError("tentative_prolongator: empty aggregate " + std::to_string(a));
        const Index m = rows.size();
        // Thin QR by Gram-Schmidt with one reorthogonalization pass.
        DenseMatrix q(m, k);
        for (Index r = 0; r < m; ++r) {
            for (Index c = 0; c < k; ++c) q(r, c) = nullspace(rows[r], c);
        }
        for (Index c = 0; c < k; ++c) {
            auto qc = q.column(c);
            const double original = norm2(qc);
            for (int pass = 0; pass < 2; ++pass) {
                for (Index p = 0; p < c; ++p) {
                    const double h = dot(q.column(p), qc);
                    coarse(a * k + p, c) += h;
                    axpy(-h, q.column(p), qc);
                }
            }
            const double rcc = norm2(qc);
            if (original == 0.0 || rcc <= 1e-10 * original) {
                throw NumericalError("tentative_prolongator: nullspace rank deficient in aggregate " +
                                     std::to_string(a));
            }
            for (double& v : qc) v /= rcc;
            coarse(a * k + c, c) = rcc;
        }
        for (Index r = 0; r < m; ++r) {
            for (Index c = 0; c < k; ++c) t.push_back({rows[r], a * k + c, q(r, c)});
        }
    }
    return {CsrMatrix::from_triplets(n, n_agg * k, std::move(t)), std::move(coarse)};
}

double estimate_dinv_a_radius(const CsrMatrix& a, int iterations) {
    const Index n = a.rows();
    if (n == 0) return 0.0;
    Vector d = a.diagonal();
    for (Index i = 0; i < n; ++i) {
        if (d[i] == 0.0) throw NumericalError("zero diagonal entry in row " + std::to_string(i));
    }
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    Vector x(n), y(n);
    for (double& v : x) v = unif(rng);
    double nx = norm2(x);
    for (double& v : x) v /= nx;
    double rho = 0.0;
    for (int it = 0; it < iterations; ++it) {
        spmv(a, x, y);
        for (Index i = 0; i < n; ++i) y[i] /= d[i];
        rho = norm2(y);
        if (rho == 0.0) return 0.0;
        for (Index i = 0; i < n; ++i) x[i] = y[i] / rho;
    }
    return rho;
}

CsrMatrix smooth_prolongator(const CsrMatrix& a, const CsrMatrix& p_tent, double omega) {
    if (a.cols() != p_tent.rows() || !a.square()) throw DimensionError("smooth_prolongator: shapes");
    if (omega == 0.0) return p_tent;
    const double rho = estimate_dinv_a_radius(a);
    const Vector d = a.diagonal();
    const CsrMatrix ap = spgemm(a, p_tent);
    Vector values(ap.values().begin(), ap.values().end());
    for (Index i = 0; i < ap.rows(); ++i) {
        for (Index k = ap.row_offsets()[i]; k < ap.row_offsets()[i + 1]; ++k) values[k] /= d[i];
    }
    const CsrMatrix dinv_ap(ap.rows(), ap.cols(),
                            std::vector<Index>(ap.row_offsets().begin(), ap.row_offsets().end()),
                            std::vector<Index>(ap.col_indices().begin(), ap.col_indices().end()),
                            std::move(values));
    return add_scaled(p_tent, -omega / rho, dinv_ap);
}

CsrMatrix galerkin(const CsrMatrix& a, const CsrMatrix& p) {
    if (!a.square() || a.cols() != p.rows()) throw DimensionError("galerkin: shapes do not conform");
    return spgemm(transpose(p), spgemm(a, p));
}

DenseMatrix constant_nullspace(Index n, Index block_size) {
    if (block_size == 0 || n % block_size != 0) {
        throw ConfigError("nullspace block size " + std::to_string(block_size) +
                          " does not divide the matrix size " + std::to_string(n));
    }
    DenseMatrix ns(n, block_size);
    for (Index i = 0; i < n; ++i) ns(i, i % block_size) = 1.0;
    return ns;
}

namespace {

// Node graph of strong connections, one node per block of b dofs.
SparsityGraph node_graph(const CsrMatrix& a, Index b, double theta) {
    const Index nn = a.rows() / b;
    const Vector d = a.diagonal();
    std::vector<Triplet> t;
    t.reserve(a.nnz() / (b * b) + nn);
    for (Index i = 0; i < a.rows(); ++i) {
        auto c = a.row_cols(i);
        auto v = a.row_values(i);
        for (Index k = 0; k < c.size(); ++k) {
            const Index j = c[k];
            if (i / b == j / b) continue;
            const double s = std::abs(v[k]);
            if (s == 0.0 || s <= theta * std::sqrt(std::abs(d[i] * d[j]))) continue;
            t.push_back({i / b, j / b, 1.0});
        }
    }
    for (Index i = 0; i < nn; ++i) t.push_back({i, i, 1.0});
    return extract_graph(CsrMatrix::from_triplets(nn, nn, std::move(t)));
}

} // namespace

double AmgHierarchy::operator_complexity() const {
    if (levels_.empty() || levels_[0].a.nnz() == 0) return 1.0;
    double total = 0.0;
    for (const auto& lv : levels_) total += static_cast<double>(lv.a.nnz());
    return total / static_cast<double>(levels_[0].a.nnz());
}

AmgHierarchy build_hierarchy(const CsrMatrix& a, const AmgConfig& cfg,
                             std::optional<DenseMatrix> nullspace) {
    cfg.validate();
    if (!a.square()) throw DimensionError("build_hierarchy: matrix not square");
    DenseMatrix ns = nullspace ? std::move(*nullspace) : constant_nullspace(a.rows(), cfg.nullspace_dim);
    if (ns.rows() != a.rows()) throw DimensionError("build_hierarchy: nullspace rows");

    AmgHierarchy h;
    h.cfg_ = cfg;
    CsrMatrix current = a;
    Index block = cfg.nullspace_dim;
    if (a.rows() % block != 0) throw ConfigError("amg.nullspace_dim does not divide the matrix size");
    while (true) {
        Level lv;
        lv.a = std::move(current);
        lv.block_size = block;
        const Index n = lv.a.rows();
        const bool last_allowed = h.levels_.size() + 1 >= cfg.max_levels;
        if (n <= cfg.max_coarse_size || last_allowed) {
            h.levels_.push_back(std::move(lv));
            break;
        }
        const SparsityGraph g = node_graph(lv.a, block, cfg.strength_threshold);
        const std::vector<Index> node_agg = aggregate(g);
        std::vector<Index> dof_agg(n);
        for (Index i = 0; i < n; ++i) dof_agg[i] = node_agg[i / block];
        TentativeProlongator tp = tentative_prolongator(dof_agg, ns);
        if (tp.p.cols() >= n) {
            h.stagnated_ = true;
            h.levels_.push_back(std::move(lv));
            break;
        }
        lv.p = cfg.transfer_kind == TransferKind::smoothed
                   ? smooth_prolongator(lv.a, tp.p, cfg.prolongator_damping)
                   : std::move(tp.p);
        lv.r = transpose(lv.p);
        current = spgemm(lv.r, spgemm(lv.a, lv.p));
        ns = std::move(tp.coarse_nullspace);
        block = ns.cols();
        h.levels_.push_back(std::move(lv));
    }

    for (Index l = 0; l + 1 < h.levels_.size(); ++l) {
        Level& lv = h.levels_[l];
        if (cfg.smoother_kind == SmootherKind::ilut) {
            lv.ilut = ilut_factor(lv.a, cfg.ilut_fill, cfg.ilut_drop);
        } else {
            lv.inv_diag = lv.a.diagonal();
            for (Index i = 0; i < lv.inv_diag.size(); ++i) {
                if (lv.inv_diag[i] == 0.0) {
                    throw NumericalError("amg smoother: zero diagonal in row " + std::to_string(i) +
                                         " of level " + std::to_string(l));
                }
                lv.inv_diag[i] = 1.0 / lv.inv_diag[i];
            }
        }
    }
    const CsrMatrix& ac = h.levels_.back().a;
    if (ac.rows() <= kDenseCoarseLimit) {
        h.coarse_dense_.emplace(DenseMatrix::from_csr(ac));
    } else {
        h.coarse_sparse_ = std::make_shared<const SparseLu>(ac);
    }
    return h;
}

void AmgHierarchy::smooth(const Level& lv, std::span<const double> b, std::span<double> x,
                          bool pre) const {
    const Index n = lv.a.rows();
    Vector r(n);
    for (int s = 0; s < cfg_.smoother_sweeps; ++s) {
        switch (cfg_.smoother_kind) {
        case SmootherKind::ilut:
            residual(lv.a, b, x, r);
            ilut_solve_in_place(*lv.ilut, r);
            axpy(1.0, r, x);
            break;
        case SmootherKind::jacobi:
            residual(lv.a, b, x, r);
            for (Index i = 0; i < n; ++i) x[i] += cfg_.jacobi_damping * lv.inv_diag[i] * r[i];
            break;
        case SmootherKind::gauss_seidel: {
            // Forward sweep before the coarse correction, backward after.
            auto row_update = [&](Index i) {
                auto c = lv.a.row_cols(i);
                auto v = lv.a.row_values(i);
                double acc = b[i];
                for (Index k = 0; k < c.size(); ++k) acc -= v[k] * x[c[k]];
                x[i] += lv.inv_diag[i] * acc;
            };
            if (pre) {
                for (Index i = 0; i < n; ++i) row_update(i);
            } else {
                for (Index i = n; i-- > 0;) row_update(i);
            }
            break;
        }
        }
    }
}

void AmgHierarchy::coarse_solve(std::span<const double> b, std::span<double> x) const {
    const CsrMatrix& ac = levels_.back().a;
    Vector r(ac.rows());
    residual(ac, b, x, r);
    if (coarse_dense_) {
        coarse_dense_->solve_in_place(r);
    } else {
        r = coarse_sparse_->solve(r);
    }
    axpy(1.0, r, x);
}

void AmgHierarchy::cycle(Index level, std::span<const double> b, std::span<double> x) const {
    if (level + 1 == levels_.size()) {
        coarse_solve(b, x);
        return;
    }
    const Level& lv = levels_[level];
    smooth(lv, b, x, true);
    Vector r(lv.a.rows());
    residual(lv.a, b, x, r);
    Vector rc = spmv(lv.r, r);
    Vector ec(rc.size(), 0.0);
    cycle(level + 1, rc, ec);
    spmv_add(lv.p, 1.0, ec, x);
    smooth(lv, b, x, false);
}

Vector AmgHierarchy::vcycle(std::span<const double> b, std::span<const double> x0) const {
    if (levels_.empty()) throw InvariantError("vcycle: empty hierarchy");
    const Index n = levels_[0].a.rows();
    if (b.size() != n || x0.size() != n) throw DimensionError("vcycle: vector length");
    Vector x(x0.begin(), x0.end());
    cycle(0, b, x);
    return x;
}

} // namespace mdprec::amg
