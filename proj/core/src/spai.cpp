#include "mdprec/spai.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "mdprec/dense.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/sparse_ops.hpp"

namespace mdprec::spai {

void SpaiConfig::validate() const {
    if (!(sigma >= 0.0)) throw ConfigError("spai.sigma must be >= 0");
    if (ell < 1) throw ConfigError("spai.ell must be >= 1");
    if (max_pattern_nnz_per_column && *max_pattern_nnz_per_column < 1) {
        throw ConfigError("spai.max_pattern_nnz_per_column must be >= 1");
    }
    if (jobs < 1) throw ConfigError("spai.jobs must be >= 1");
}

SparsityGraph prefilter(const CsrMatrix& a, double sigma) {
    if (!a.square()) throw DimensionError("prefilter: matrix not square");
    const Index n = a.rows();
    Vector d = a.diagonal();
    for (double& v : d) v = std::abs(v) > 0.0 ? std::abs(v) : 1.0;

    std::vector<Index> offsets{0};
    std::vector<Index> cols;
    offsets.reserve(n + 1);
    for (Index i = 0; i < n; ++i) {
        auto rc = a.row_cols(i);
        auto rv = a.row_values(i);
        bool diag_done = false;
        for (Index k = 0; k < rc.size(); ++k) {
            const Index j = rc[k];
            if (!diag_done && j >= i) {
                if (j > i) cols.push_back(i);
                diag_done = true;
            }
            if (j == i || std::abs(rv[k]) / std::sqrt(d[i] * d[j]) > sigma) cols.push_back(j);
        }
        if (!diag_done) cols.push_back(i);
        offsets.push_back(cols.size());
    }
    return SparsityGraph(n, n, std::move(offsets), std::move(cols));
}

SparsityGraph graph_power(const SparsityGraph& g, int ell) {
    if (g.rows() != g.cols()) throw DimensionError("graph_power: graph not square");
    if (ell < 1) throw ConfigError("graph_power: ell must be >= 1");
    if (ell == 1) return g;
    const Index n = g.rows();
    std::vector<Index> offsets{0};
    std::vector<Index> cols;
    std::vector<Index> mark(n, n);
    std::vector<Index> frontier, next, reached;
    for (Index i = 0; i < n; ++i) {
        reached.clear();
        frontier.clear();
        for (Index j : g.row(i)) {
            mark[j] = i;
            reached.push_back(j);
            frontier.push_back(j);
        }
        for (int depth = 1; depth < ell && !frontier.empty(); ++depth) {
            next.clear();
            for (Index u : frontier) {
                for (Index v : g.row(u)) {
                    if (mark[v] != i) {
                        mark[v] = i;
                        reached.push_back(v);
                        next.push_back(v);
                    }
                }
            }
            frontier.swap(next);
        }
        std::sort(reached.begin(), reached.end());
        cols.insert(cols.end(), reached.begin(), reached.end());
        offsets.push_back(cols.size());
    }
    return SparsityGraph(n, n, std::move(offsets), std::move(cols));
}

namespace {

struct ColumnSolution {
    std::vector<Index> rows;
    Vector values;
};

// Solves the local least-squares problems for columns [k0, k1).
void minimize_columns(const CsrMatrix& a, const CsrMatrix& at, const SparsityGraph& pattern_t,
                      Index k0, Index k1, std::vector<ColumnSolution>& out) {
    const Index n = a.rows();
    std::vector<Index> local(n, n);
    std::vector<Index> rows_i;
    for (Index k = k0; k < k1; ++k) {
        auto jset = pattern_t.row(k);
        if (jset.empty()) {
            throw NumericalError("spai_minimize: empty pattern in column " + std::to_string(k));
        }
        rows_i.clear();
        for (Index j : jset) {
            for (Index r : at.row_cols(j)) {
                if (local[r] == n) {
                    local[r] = 0;
                    rows_i.push_back(r);
                }
            }
        }
        std::sort(rows_i.begin(), rows_i.end());
        for (Index p = 0; p < rows_i.size(); ++p) local[rows_i[p]] = p;

        ColumnSolution& sol = out[k - k0];
        sol.rows.assign(jset.begin(), jset.end());
        if (rows_i.size() < jset.size()) {
            for (Index r : rows_i) local[r] = n;
            throw NumericalError("spai_minimize: rank-deficient local problem in column " +
                                 std::to_string(k));
        }
        DenseMatrix block(rows_i.size(), jset.size());
        for (Index q = 0; q < jset.size(); ++q) {
            auto rc = at.row_cols(jset[q]);
            auto rv = at.row_values(jset[q]);
            for (Index t = 0; t < rc.size(); ++t) block(local[rc[t]], q) = rv[t];
        }
        Vector rhs(rows_i.size(), 0.0);
        if (local[k] != n) rhs[local[k]] = 1.0;
        for (Index r : rows_i) local[r] = n;

        auto ls = householder_least_squares(std::move(block), std::move(rhs));
        if (!ls) {
            throw NumericalError("spai_minimize: rank-deficient local problem in column " +
                                 std::to_string(k));
        }
        sol.values = std::move(ls->z);
    }
}

} // namespace

SpaiResult spai_minimize(const CsrMatrix& a, const SparsityGraph& pattern, unsigned jobs) {
    if (!a.square()) throw DimensionError("spai_minimize: matrix not square");
    if (pattern.rows() != a.rows() || pattern.cols() != a.cols()) {
        throw DimensionError("spai_minimize: pattern shape differs from matrix");
    }
    const Index n = a.rows();
    const CsrMatrix at = transpose(a);
    const SparsityGraph pattern_t = transpose(pattern);

    std::vector<ColumnSolution> columns(n);
    const Index workers = std::max<Index>(1, std::min<Index>(jobs, n / 64 + 1));
    if (workers == 1) {
        minimize_columns(a, at, pattern_t, 0, n, columns);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::vector<ColumnSolution>> parts(workers);
        const Index chunk = (n + workers - 1) / workers;
        for (Index w = 0; w < workers; ++w) {
            const Index k0 = std::min(n, w * chunk);
            const Index k1 = std::min(n, k0 + chunk);
            parts[w].resize(k1 - k0);
            pool.emplace_back([&, w, k0, k1] {
                try {
                    minimize_columns(a, at, pattern_t, k0, k1, parts[w]);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
        Index k = 0;
        for (auto& part : parts) {
            for (auto& col : part) columns[k++] = std::move(col);
        }
    }

    // Columns of M are the rows of M^T.
    std::vector<Index> offsets{0};
    std::vector<Index> idx;
    Vector vals;
    idx.reserve(pattern.nnz());
    vals.reserve(pattern.nnz());
    for (const auto& col : columns) {
        idx.insert(idx.end(), col.rows.begin(), col.rows.end());
        vals.insert(vals.end(), col.values.begin(), col.values.end());
        offsets.push_back(idx.size());
    }
    CsrMatrix mt(n, n, std::move(offsets), std::move(idx), std::move(vals));

    SpaiResult res;
    res.approx_inverse = transpose(mt);
    res.pattern_nnz = pattern.nnz();
    res.residual_fro = residual_frobenius(a, res.approx_inverse);
    return res;
}

CsrMatrix postfilter(const CsrMatrix& m, double sigma) {
    if (!m.square()) throw DimensionError("postfilter: matrix not square");
    std::vector<Index> offsets{0};
    std::vector<Index> cols;
    Vector vals;
    for (Index i = 0; i < m.rows(); ++i) {
        auto rc = m.row_cols(i);
        auto rv = m.row_values(i);
        for (Index k = 0; k < rc.size(); ++k) {
            if (rc[k] == i || !(std::abs(rv[k]) < sigma)) {
                cols.push_back(rc[k]);
                vals.push_back(rv[k]);
            }
        }
        offsets.push_back(cols.size());
    }
    return CsrMatrix(m.rows(), m.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

namespace {

// Caps every column of the pattern at `cap` entries: the diagonal first,
// then the entries nearest to it in index.
SparsityGraph cap_columns(const SparsityGraph& pattern, Index cap) {
    const SparsityGraph pt = transpose(pattern);
    std::vector<Index> offsets{0};
    std::vector<Index> cols;
    std::vector<Index> row;
    for (Index k = 0; k < pt.rows(); ++k) {
        auto r = pt.row(k);
        row.assign(r.begin(), r.end());
        if (row.size() > cap) {
            auto dist = [k](Index j) { return j > k ? j - k : k - j; };
            std::stable_sort(row.begin(), row.end(),
                             [&](Index x, Index y) { return dist(x) < dist(y); });
            row.resize(cap);
            std::sort(row.begin(), row.end());
        }
        cols.insert(cols.end(), row.begin(), row.end());
        offsets.push_back(cols.size());
    }
    return transpose(SparsityGraph(pt.rows(), pt.cols(), std::move(offsets), std::move(cols)));
}

} // namespace

SpaiResult build_spai(const CsrMatrix& a, const SpaiConfig& cfg) {
    cfg.validate();
    if (!a.square()) throw DimensionError("build_spai: matrix not square");
    SparsityGraph filtered = cfg.enable_prefilter ? prefilter(a, cfg.sigma) : extract_graph(a);
    const Index filtered_nnz = filtered.nnz();
    SparsityGraph pattern = graph_power(filtered, cfg.ell);
    if (cfg.max_pattern_nnz_per_column) pattern = cap_columns(pattern, *cfg.max_pattern_nnz_per_column);

    SpaiResult res = spai_minimize(a, pattern, cfg.jobs);
    res.filtered_graph_nnz = filtered_nnz;
    if (cfg.enable_postfilter) {
        res.approx_inverse = postfilter(res.approx_inverse, cfg.sigma);
        res.residual_fro = residual_frobenius(a, res.approx_inverse);
    }
    return res;
}

double residual_frobenius(const CsrMatrix& a, const CsrMatrix& m) {
    if (a.cols() != m.rows() || a.rows() != m.cols()) {
        throw DimensionError("residual_frobenius: shapes do not conform");
    }
    const CsrMatrix am = spgemm(a, m);
    const CsrMatrix r = add_scaled(am, -1.0, CsrMatrix::identity(a.rows()));
    return matrix_norms(r).frobenius;
}

Vector spai_smooth(const CsrMatrix& a, const CsrMatrix& ainv, std::span<const double> b,
                   std::span<const double> x0, int m_iters, bool literal_fixed_residual) {
    const Index n = a.rows();
    if (!a.square() || ainv.rows() != n || ainv.cols() != n || b.size() != n || x0.size() != n) {
        throw DimensionError("spai_smooth: shapes do not conform");
    }
    if (m_iters < 1) throw ConfigError("spai_smooth: m_iters must be >= 1");
    Vector x(x0.begin(), x0.end());
    Vector r(n);
    residual(a, b, x, r);
    for (int it = 0; it < m_iters; ++it) {
        if (it > 0 && !literal_fixed_residual) residual(a, b, x, r);
        spmv_add(ainv, 1.0, r, x);
    }
    return x;
}

} // namespace mdprec::spai
