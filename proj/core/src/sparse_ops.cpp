#include "mdprec/sparse_ops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "mdprec/errors.hpp"

namespace mdprec {

namespace {

void require(bool ok, const char* op, Index a, Index b) {
    if (!ok) {
        std::ostringstream why;
        why << op << ": dimension mismatch (" << a << " vs " << b << ")";
        throw DimensionError(why.str());
    }
}

} // namespace

Vector spmv(const CsrMatrix& m, std::span<const double> x) {
    Vector y(m.rows());
    spmv(m, x, y);
    return y;
}

void spmv(const CsrMatrix& m, std::span<const double> x, std::span<double> y) {
    require(m.cols() == x.size(), "spmv", m.cols(), x.size());
    require(m.rows() == y.size(), "spmv", m.rows(), y.size());
    const auto off = m.row_offsets();
    const auto col = m.col_indices();
    const auto val = m.values();
    for (Index i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (Index k = off[i]; k < off[i + 1]; ++k) sum += val[k] * x[col[k]];
        y[i] = sum;
    }
}

void spmv_add(const CsrMatrix& m, double alpha, std::span<const double> x, std::span<double> y) {
    require(m.cols() == x.size(), "spmv_add", m.cols(), x.size());
    require(m.rows() == y.size(), "spmv_add", m.rows(), y.size());
    const auto off = m.row_offsets();
    const auto col = m.col_indices();
    const auto val = m.values();
    for (Index i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (Index k = off[i]; k < off[i + 1]; ++k) sum += val[k] * x[col[k]];
        y[i] += alpha * sum;
    }
}

void residual(const CsrMatrix& m, std::span<const double> b, std::span<const double> x,
              std::span<double> r) {
    require(m.cols() == x.size(), "residual", m.cols(), x.size());
    require(m.rows() == b.size() && b.size() == r.size(), "residual", m.rows(), b.size());
    const auto off = m.row_offsets();
    const auto col = m.col_indices();
    const auto val = m.values();
    for (Index i = 0; i < m.rows(); ++i) {
        double sum = 0.0;
        for (Index k = off[i]; k < off[i + 1]; ++k) sum += val[k] * x[col[k]];
        r[i] = b[i] - sum;
    }
}

CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b) {
    require(a.cols() == b.rows(), "spgemm", a.cols(), b.rows());
    const Index n_rows = a.rows();
    const Index n_cols = b.cols();
    std::vector<Index> offsets(n_rows + 1, 0);
    std::vector<Index> col_idx;
    Vector vals;

    // Gustavson's row-by-row product with a dense accumulator.
    std::vector<Index> marker(n_cols, static_cast<Index>(-1));
    Vector acc(n_cols, 0.0);
    std::vector<Index> row_pattern;
    for (Index i = 0; i < n_rows; ++i) {
        row_pattern.clear();
        auto a_cols = a.row_cols(i);
        auto a_vals = a.row_values(i);
        for (Index ka = 0; ka < a_cols.size(); ++ka) {
            const Index k = a_cols[ka];
            const double av = a_vals[ka];
            auto b_cols = b.row_cols(k);
            auto b_vals = b.row_values(k);
            for (Index kb = 0; kb < b_cols.size(); ++kb) {
                const Index j = b_cols[kb];
                if (marker[j] != i) {
                    marker[j] = i;
                    acc[j] = 0.0;
                    row_pattern.push_back(j);
                }
                acc[j] += av * b_vals[kb];
            }
        }
        std::sort(row_pattern.begin(), row_pattern.end());
        for (Index j : row_pattern) {
            col_idx.push_back(j);
            vals.push_back(acc[j]);
        }
        offsets[i + 1] = col_idx.size();
    }
    return {n_rows, n_cols, std::move(offsets), std::move(col_idx), std::move(vals)};
}

CsrMatrix transpose(const CsrMatrix& m) {
    std::vector<Index> offsets(m.cols() + 1, 0);
    for (Index j : m.col_indices()) ++offsets[j + 1];
    for (Index j = 0; j < m.cols(); ++j) offsets[j + 1] += offsets[j];
    std::vector<Index> col_idx(m.nnz());
    Vector vals(m.nnz());
    std::vector<Index> next(offsets.begin(), offsets.end() - 1);
    for (Index i = 0; i < m.rows(); ++i) {
        auto c = m.row_cols(i);
        auto v = m.row_values(i);
        for (Index k = 0; k < c.size(); ++k) {
            const Index dst = next[c[k]]++;
            col_idx[dst] = i;
            vals[dst] = v[k];
        }
    }
    return {m.cols(), m.rows(), std::move(offsets), std::move(col_idx), std::move(vals)};
}

CsrMatrix add_scaled(const CsrMatrix& a, double alpha, const CsrMatrix& b) {
    require(a.rows() == b.rows(), "add_scaled", a.rows(), b.rows());
    require(a.cols() == b.cols(), "add_scaled", a.cols(), b.cols());
    std::vector<Index> offsets(a.rows() + 1, 0);
    std::vector<Index> col_idx;
    Vector vals;
    col_idx.reserve(a.nnz() + b.nnz());
    vals.reserve(a.nnz() + b.nnz());
    for (Index i = 0; i < a.rows(); ++i) {
        auto ac = a.row_cols(i);
        auto av = a.row_values(i);
        auto bc = b.row_cols(i);
        auto bv = b.row_values(i);
        Index p = 0, q = 0;
        while (p < ac.size() || q < bc.size()) {
            if (q == bc.size() || (p < ac.size() && ac[p] < bc[q])) {
                col_idx.push_back(ac[p]);
                vals.push_back(av[p]);
                ++p;
            } else if (p == ac.size() || bc[q] < ac[p]) {
                col_idx.push_back(bc[q]);
                vals.push_back(alpha * bv[q]);
                ++q;
            } else {
                col_idx.push_back(ac[p]);
                vals.push_back(av[p] + alpha * bv[q]);
                ++p;
                ++q;
            }
        }
        offsets[i + 1] = col_idx.size();
    }
    return {a.rows(), a.cols(), std::move(offsets), std::move(col_idx), std::move(vals)};
}

CsrMatrix scaled(const CsrMatrix& m, double alpha) {
    Vector vals(m.values().begin(), m.values().end());
    for (double& v : vals) v *= alpha;
    return {m.rows(), m.cols(),
            std::vector<Index>(m.row_offsets().begin(), m.row_offsets().end()),
            std::vector<Index>(m.col_indices().begin(), m.col_indices().end()), std::move(vals)};
}

MatrixNorms matrix_norms(const CsrMatrix& m) {
    MatrixNorms out;
    Vector col_sums(m.cols(), 0.0);
    double fro = 0.0;
    for (Index i = 0; i < m.rows(); ++i) {
        auto c = m.row_cols(i);
        auto v = m.row_values(i);
        double row_sum = 0.0;
        for (Index k = 0; k < c.size(); ++k) {
            const double a = std::abs(v[k]);
            row_sum += a;
            col_sums[c[k]] += a;
            fro += v[k] * v[k];
        }
        out.inf_norm = std::max(out.inf_norm, row_sum);
    }
    for (double s : col_sums) out.one_norm = std::max(out.one_norm, s);
    out.frobenius = std::sqrt(fro);
    return out;
}

SparsityGraph extract_graph(const CsrMatrix& m) {
    return {m.rows(), m.cols(),
            std::vector<Index>(m.row_offsets().begin(), m.row_offsets().end()),
            std::vector<Index>(m.col_indices().begin(), m.col_indices().end())};
}

SparsityGraph transpose(const SparsityGraph& g) {
    std::vector<Index> offsets(g.cols() + 1, 0);
    for (Index j : g.col_indices()) ++offsets[j + 1];
    for (Index j = 0; j < g.cols(); ++j) offsets[j + 1] += offsets[j];
    std::vector<Index> col_idx(g.nnz());
    std::vector<Index> next(offsets.begin(), offsets.end() - 1);
    for (Index i = 0; i < g.rows(); ++i) {
        for (Index j : g.row(i)) col_idx[next[j]++] = i;
    }
    return {g.cols(), g.rows(), std::move(offsets), std::move(col_idx)};
}

SparsityGraph graph_union(const SparsityGraph& a, const SparsityGraph& b) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), "graph_union", a.rows(), b.rows());
    std::vector<Index> offsets(a.rows() + 1, 0);
    std::vector<Index> col_idx;
    for (Index i = 0; i < a.rows(); ++i) {
        auto ra = a.row(i);
        auto rb = b.row(i);
        std::set_union(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(col_idx));
        offsets[i + 1] = col_idx.size();
    }
    return {a.rows(), a.cols(), std::move(offsets), std::move(col_idx)};
}

SparsityGraph graph_product(const SparsityGraph& a, const SparsityGraph& b) {
    require(a.cols() == b.rows(), "graph_product", a.cols(), b.rows());
    std::vector<Index> offsets(a.rows() + 1, 0);
    std::vector<Index> col_idx;
    std::vector<Index> marker(b.cols(), static_cast<Index>(-1));
    std::vector<Index> row_pattern;
    for (Index i = 0; i < a.rows(); ++i) {
        row_pattern.clear();
        for (Index k : a.row(i)) {
            for (Index j : b.row(k)) {
                if (marker[j] != i) {
                    marker[j] = i;
                    row_pattern.push_back(j);
                }
            }
        }
        std::sort(row_pattern.begin(), row_pattern.end());
        col_idx.insert(col_idx.end(), row_pattern.begin(), row_pattern.end());
        offsets[i + 1] = col_idx.size();
    }
    return {a.rows(), b.cols(), std::move(offsets), std::move(col_idx)};
}

bool is_subset(const SparsityGraph& sub, const SparsityGraph& super) {
    if (sub.rows() != super.rows() || sub.cols() != super.cols()) return false;
    for (Index i = 0; i < sub.rows(); ++i) {
        auto rs = sub.row(i);
        auto rp = super.row(i);
        if (!std::includes(rp.begin(), rp.end(), rs.begin(), rs.end())) return false;
    }
    return true;
}

bool bitwise_equal(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.nnz() != b.nnz()) return false;
    if (!std::ranges::equal(a.row_offsets(), b.row_offsets())) return false;
    if (!std::ranges::equal(a.col_indices(), b.col_indices())) return false;
    auto av = a.values();
    auto bv = b.values();
    for (Index k = 0; k < av.size(); ++k) {
        if (std::bit_cast<std::uint64_t>(av[k]) != std::bit_cast<std::uint64_t>(bv[k])) return false;
    }
    return true;
}

CsrMatrix submatrix(const CsrMatrix& m, Index r0, Index r1, Index c0, Index c1) {
    if (r0 > r1 || r1 > m.rows() || c0 > c1 || c1 > m.cols()) {
        throw DimensionError("submatrix: range outside matrix");
    }
    std::vector<Index> offsets(r1 - r0 + 1, 0);
    std::vector<Index> col_idx;
    Vector vals;
    for (Index i = r0; i < r1; ++i) {
        auto c = m.row_cols(i);
        auto v = m.row_values(i);
        auto lo = std::lower_bound(c.begin(), c.end(), c0);
        for (auto it = lo; it != c.end() && *it < c1; ++it) {
            col_idx.push_back(*it - c0);
            vals.push_back(v[static_cast<Index>(it - c.begin())]);
        }
        offsets[i - r0 + 1] = col_idx.size();
    }
    return {r1 - r0, c1 - c0, std::move(offsets), std::move(col_idx), std::move(vals)};
}

double asymmetry(const CsrMatrix& m) {
    if (!m.square()) throw DimensionError("asymmetry: matrix not square");
    const CsrMatrix diff = add_scaled(m, -1.0, transpose(m));
    double worst = 0.0;
    for (double v : diff.values()) worst = std::max(worst, std::abs(v));
    return worst;
}

double dot(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), "dot", x.size(), y.size());
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm2(std::span<const double> x) {
    return std::sqrt(dot(x, x));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    require(x.size() == y.size(), "axpy", x.size(), y.size());
    for (Index i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

bool all_finite(std::span<const double> x) {
    return std::ranges::all_of(x, [](double v) { return std::isfinite(v); });
}

} // namespace mdprec
