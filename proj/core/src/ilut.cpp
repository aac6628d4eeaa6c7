#include "mdprec/ilut.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <string>

#include "mdprec/errors.hpp"
#include "mdprec/sparse_ops.hpp"

namespace mdprec {

namespace {

// Keeps the `cap` entries of largest magnitude, then restores index order.
void keep_largest(std::vector<Index>& idx, const Vector& w, Index cap) {
    if (idx.size() > cap) {
        std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(cap), idx.end(),
                         [&](Index x, Index y) {
                             const double ax = std::abs(w[x]);
                             const double ay = std::abs(w[y]);
                             return ax != ay ? ax > ay : x < y;
                         });
        idx.resize(cap);
    }
    std::sort(idx.begin(), idx.end());
}

} // namespace

IlutFactors ilut_factor(const CsrMatrix& a, double fill, double tau) {
    if (!a.square()) throw DimensionError("ilut_factor: matrix not square");
    if (!(fill >= 0.0) || !(tau >= 0.0)) throw ConfigError("ilut_factor: fill and tau must be >= 0");
    const Index n = a.rows();

    std::vector<Index> l_off{0}, l_col, u_off{0}, u_col;
    Vector l_val, u_val;
    // Position of each U row's diagonal is its first entry.

    Vector w(n, 0.0);
    std::vector<char> in_w(n, 0);
    std::vector<Index> nz;
    std::vector<Index> lower, upper;
    std::priority_queue<Index, std::vector<Index>, std::greater<>> heap;

    for (Index i = 0; i < n; ++i) {
        auto rc = a.row_cols(i);
        auto rv = a.row_values(i);
        double row_norm = 0.0;
        for (double v : rv) row_norm += v * v;
        row_norm = std::sqrt(row_norm);
        const double drop = tau * row_norm;
        const double dfill = std::ceil(fill * static_cast<double>(rc.size()));
        const Index cap = dfill >= static_cast<double>(n) ? n : static_cast<Index>(dfill);

        nz.clear();
        for (Index k = 0; k < rc.size(); ++k) {
            w[rc[k]] = rv[k];
            in_w[rc[k]] = 1;
            nz.push_back(rc[k]);
            if (rc[k] < i) heap.push(rc[k]);
        }
        if (!in_w[i]) {
            in_w[i] = 1;
            w[i] = 0.0;
            nz.push_back(i);
        }

        while (!heap.empty()) {
            const Index k = heap.top();
            heap.pop();
            while (!heap.empty() && heap.top() == k) heap.pop();
            // U row k: diagonal first.
            const Index u0 = u_off[k];
            const Index u1 = u_off[k + 1];
            const double lik = w[k] / u_val[u0];
            if (std::abs(lik) < drop) {
                w[k] = 0.0;
                continue;
            }
            w[k] = lik;
            for (Index t = u0 + 1; t < u1; ++t) {
                const Index j = u_col[t];
                if (!in_w[j]) {
                    in_w[j] = 1;
                    w[j] = 0.0;
                    nz.push_back(j);
                    if (j < i) heap.push(j);
                }
                w[j] -= lik * u_val[t];
            }
        }

        lower.clear();
        upper.clear();
        for (Index j : nz) {
            if (j == i) continue;
            if (w[j] == 0.0 || std::abs(w[j]) < drop) continue;
            (j < i ? lower : upper).push_back(j);
        }
        keep_largest(lower, w, cap);
        keep_largest(upper, w, cap);

        if (w[i] == 0.0 || !std::isfinite(w[i])) {
            throw NumericalError("ilut_factor: zero pivot in row " + std::to_string(i));
        }
        for (Index j : lower) {
            l_col.push_back(j);
            l_val.push_back(w[j]);
        }
        l_off.push_back(l_col.size());
        u_col.push_back(i);
        u_val.push_back(w[i]);
        for (Index j : upper) {
            u_col.push_back(j);
            u_val.push_back(w[j]);
        }
        u_off.push_back(u_col.size());

        for (Index j : nz) {
            w[j] = 0.0;
            in_w[j] = 0;
        }
    }
    IlutFactors f;
    f.l = CsrMatrix(n, n, std::move(l_off), std::move(l_col), std::move(l_val));
    f.u = CsrMatrix(n, n, std::move(u_off), std::move(u_col), std::move(u_val));
    return f;
}

void ilut_solve_in_place(const IlutFactors& f, std::span<double> x) {
    const Index n = f.l.rows();
    if (x.size() != n) throw DimensionError("ilut_solve: vector length");
    for (Index i = 0; i < n; ++i) {
        auto c = f.l.row_cols(i);
        auto v = f.l.row_values(i);
        double s = x[i];
        for (Index k = 0; k < c.size(); ++k) s -= v[k] * x[c[k]];
        x[i] = s;
    }
    for (Index i = n; i-- > 0;) {
        auto c = f.u.row_cols(i);
        auto v = f.u.row_values(i);
        double s = x[i];
        for (Index k = 1; k < c.size(); ++k) s -= v[k] * x[c[k]];
        x[i] = s / v[0];
    }
}

CsrMatrix ilut_product(const IlutFactors& f) {
    const CsrMatrix l = add_scaled(f.l, 1.0, CsrMatrix::identity(f.l.rows()));
    return spgemm(l, f.u);
}

} // namespace mdprec
