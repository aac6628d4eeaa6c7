#include "mdprec/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mdprec/errors.hpp"

namespace mdprec {

DenseMatrix DenseMatrix::from_csr(const CsrMatrix& m) {
    DenseMatrix d(m.rows(), m.cols());
    for (Index i = 0; i < m.rows(); ++i) {
        auto c = m.row_cols(i);
        auto v = m.row_values(i);
        for (Index k = 0; k < c.size(); ++k) d(i, c[k]) = v[k];
    }
    return d;
}

CsrMatrix DenseMatrix::to_csr() const {
    std::vector<Triplet> t;
    for (Index j = 0; j < cols_; ++j) {
        for (Index i = 0; i < rows_; ++i) {
            if ((*this)(i, j) != 0.0) t.push_back({i, j, (*this)(i, j)});
        }
    }
    return CsrMatrix::from_triplets(rows_, cols_, std::move(t));
}

namespace {

// In-place Householder QR of the column-major matrix a, optionally with
// column pivoting. On return the upper triangle holds R, the reflectors are
// applied to b, and perm lists the original column of each position.
void householder_qr(DenseMatrix& a, Vector& b, std::vector<Index>& perm, bool pivot) {
    const Index m = a.rows();
    const Index n = a.cols();
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    Vector col_norms(n, 0.0);
    if (pivot) {
        for (Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (Index i = 0; i < m; ++i) s += a(i, j) * a(i, j);
            col_norms[j] = s;
        }
    }
    Vector v(m);
    for (Index k = 0; k < n; ++k) {
        if (pivot) {
            // Recompute remaining norms exactly; these problems are small.
            Index best = k;
            double best_norm = -1.0;
            for (Index j = k; j < n; ++j) {
                double s = 0.0;
                for (Index i = k; i < m; ++i) s += a(i, j) * a(i, j);
                col_norms[j] = s;
                if (s > best_norm) {
                    best_norm = s;
                    best = j;
                }
            }
            if (best != k) {
                for (Index i = 0; i < m; ++i) std::swap(a(i, k), a(i, best));
                std::swap(perm[k], perm[best]);
            }
        }
        double alpha = 0.0;
        for (Index i = k; i < m; ++i) alpha += a(i, k) * a(i, k);
        alpha = std::sqrt(alpha);
        if (alpha == 0.0) continue;
        if (a(k, k) > 0.0) alpha = -alpha;
        // v = x - alpha e_1, stored unnormalized; R(k,k) = alpha.
        for (Index i = k; i < m; ++i) v[i] = a(i, k);
        v[k] -= alpha;
        double vnorm2 = 0.0;
        for (Index i = k; i < m; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;
        a(k, k) = alpha;
        for (Index i = k + 1; i < m; ++i) a(i, k) = 0.0;
        for (Index j = k + 1; j < n; ++j) {
            double s = 0.0;
            for (Index i = k; i < m; ++i) s += v[i] * a(i, j);
            s *= beta;
            for (Index i = k; i < m; ++i) a(i, j) -= s * v[i];
        }
        double s = 0.0;
        for (Index i = k; i < m; ++i) s += v[i] * b[i];
        s *= beta;
        for (Index i = k; i < m; ++i) b[i] -= s * v[i];
    }
}

bool negligible(const DenseMatrix& r, Index n) {
    double rmax = 0.0;
    for (Index k = 0; k < n; ++k) rmax = std::max(rmax, std::abs(r(k, k)));
    if (rmax == 0.0) return true;
    const double tol = static_cast<double>(std::max(r.rows(), n)) *
                       std::numeric_limits<double>::epsilon() * rmax;
    for (Index k = 0; k < n; ++k) {
        if (std::abs(r(k, k)) <= tol) return true;
    }
    return false;
}

LeastSquaresSolution back_substitute(const DenseMatrix& r, const Vector& qtb,
                                     const std::vector<Index>& perm) {
    const Index n = r.cols();
    Vector y(n);
    for (Index k = n; k-- > 0;) {
        double s = qtb[k];
        for (Index j = k + 1; j < n; ++j) s -= r(k, j) * y[j];
        y[k] = s / r(k, k);
    }
    LeastSquaresSolution out;
    out.z.assign(n, 0.0);
    for (Index k = 0; k < n; ++k) out.z[perm[k]] = y[k];
    double res = 0.0;
    for (Index i = n; i < qtb.size(); ++i) res += qtb[i] * qtb[i];
    out.residual_norm = std::sqrt(res);
    return out;
}

} // namespace

std::optional<LeastSquaresSolution> householder_least_squares(DenseMatrix a, Vector b) {
    if (b.size() != a.rows()) throw DimensionError("householder_least_squares: rhs length");
    if (a.rows() < a.cols()) return std::nullopt;
    const DenseMatrix original = a;
    const Vector original_b = b;
    std::vector<Index> perm;
    householder_qr(a, b, perm, false);
    if (!negligible(a, a.cols())) return back_substitute(a, b, perm);

    a = original;
    b = original_b;
    householder_qr(a, b, perm, true);
    if (negligible(a, a.cols())) return std::nullopt;
    return back_substitute(a, b, perm);
}

// ---------------------------------------------------------------------------

DenseLu::DenseLu(DenseMatrix a) : lu_(std::move(a)) {
    if (lu_.rows() != lu_.cols()) throw DimensionError("DenseLu: matrix not square");
    const Index n = lu_.rows();
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), Index{0});
    double scale = 0.0;
    for (double v : lu_.data()) scale = std::max(scale, std::abs(v));
    for (Index k = 0; k < n; ++k) {
        Index p = k;
        double best = std::abs(lu_(k, k));
        for (Index i = k + 1; i < n; ++i) {
            if (std::abs(lu_(i, k)) > best) {
                best = std::abs(lu_(i, k));
                p = i;
            }
        }
        if (best == 0.0 || best <= std::numeric_limits<double>::min() * scale) {
            throw NumericalError("DenseLu: matrix is singular at column " + std::to_string(k));
        }
        if (p != k) {
            for (Index j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
            std::swap(perm_[k], perm_[p]);
        }
        const double pivot = lu_(k, k);
        for (Index i = k + 1; i < n; ++i) lu_(i, k) /= pivot;
        for (Index j = k + 1; j < n; ++j) {
            const double ukj = lu_(k, j);
            if (ukj == 0.0) continue;
            auto col = lu_.column(j);
            auto lcol = lu_.column(k);
            for (Index i = k + 1; i < n; ++i) col[i] -= lcol[i] * ukj;
        }
    }
}

void DenseLu::solve_in_place(std::span<double> x) const {
    const Index n = size();
    if (x.size() != n) throw DimensionError("DenseLu::solve: rhs length");
    Vector y(n);
    for (Index i = 0; i < n; ++i) y[i] = x[perm_[i]];
    for (Index j = 0; j < n; ++j) {
        const double yj = y[j];
        if (yj == 0.0) continue;
        auto lcol = lu_.column(j);
        for (Index i = j + 1; i < n; ++i) y[i] -= lcol[i] * yj;
    }
    for (Index j = n; j-- > 0;) {
        y[j] /= lu_(j, j);
        const double yj = y[j];
        if (yj == 0.0) continue;
        auto ucol = lu_.column(j);
        for (Index i = 0; i < j; ++i) y[i] -= ucol[i] * yj;
    }
    std::ranges::copy(y, x.begin());
}

Vector DenseLu::solve(std::span<const double> b) const {
    Vector x(b.begin(), b.end());
    solve_in_place(x);
    return x;
}

Vector DenseLu::solve_transposed(std::span<const double> b) const {
    // A = P^T L U, so A^T x = b  <=>  U^T L^T (P x) = b.
    const Index n = size();
    if (b.size() != n) throw DimensionError("DenseLu::solve_transposed: rhs length");
    Vector y(b.begin(), b.end());
    for (Index i = 0; i < n; ++i) {
        double s = y[i];
        for (Index k = 0; k < i; ++k) s -= lu_(k, i) * y[k];
        y[i] = s / lu_(i, i);
    }
    for (Index i = n; i-- > 0;) {
        double s = y[i];
        for (Index k = i + 1; k < n; ++k) s -= lu_(k, i) * y[k];
        y[i] = s;
    }
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[perm_[i]] = y[i];
    return x;
}

DenseMatrix DenseLu::inverse() const {
    const Index n = size();
    DenseMatrix inv(n, n);
    for (Index j = 0; j < n; ++j) {
        auto col = inv.column(j);
        col[j] = 1.0;
        solve_in_place(col);
    }
    return inv;
}

} // namespace mdprec
