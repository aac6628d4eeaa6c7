#include "mdprec/krylov.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mdprec/dense.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/sparse_ops.hpp"

namespace mdprec::krylov {

void GmresConfig::validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("gmres.rel_tol must lie in (0, 1)");
    if (restart < 1) throw ConfigError("gmres.restart must be >= 1");
    if (max_iters < 1) throw ConfigError("gmres.max_iters must be >= 1");
}

LinearOperator matrix_operator(const CsrMatrix& a) {
    return [&a](std::span<const double> x, std::span<double> y) { spmv(a, x, y); };
}

namespace {

void apply_givens(double c, double s, double& x, double& y) {
    const double t = c * x + s * y;
    y = -s * x + c * y;
    x = t;
}

} // namespace

GmresResult gmres(const LinearOperator& op, const LinearOperator& prec, std::span<const double> b,
                  const GmresConfig& cfg, std::optional<std::span<const double>> x0) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Index n = b.size();
    GmresResult out;
    SolveReport& rep = out.report;
    out.x = x0 ? Vector(x0->begin(), x0->end()) : Vector(n, 0.0);
    if (out.x.size() != n) throw DimensionError("gmres: initial guess length");

    Vector r(n), tmp(n);
    auto true_residual = [&](Vector& dst) {
        op(out.x, tmp);
        for (Index i = 0; i < n; ++i) dst[i] = b[i] - tmp[i];
        return norm2(dst);
    };
    const double r0 = true_residual(r);
    rep.residual_history.push_back(1.0);
    auto finish = [&] {
        rep.solve_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        Vector rr(n);
        rep.true_relative_residual = r0 == 0.0 ? 0.0 : true_residual(rr) / r0;
        return out;
    };
    if (r0 == 0.0) {
        rep.converged = true;
        return finish();
    }
    if (!std::isfinite(r0)) throw NumericalError("gmres: non-finite initial residual");

    const Index m = std::min(cfg.restart, cfg.max_iters);
    std::vector<Vector> v(m + 1, Vector(n));
    DenseMatrix h(m + 1, m);
    Vector cs(m), sn(m), g(m + 1);
    Vector z(n), w(n);
    double beta = r0;

    while (rep.iterations < cfg.max_iters) {
        for (Index i = 0; i < n; ++i) v[0][i] = r[i] / beta;
        std::ranges::fill(g, 0.0);
        g[0] = beta;
        Index j = 0;
        bool done = false;
        for (; j < m && rep.iterations < cfg.max_iters; ++j) {
            if (prec) {
                prec(v[j], z);
            } else {
                std::ranges::copy(v[j], z.begin());
            }
            op(z, w);
            const double wnorm0 = norm2(w);
            for (int pass = 0; pass < 2; ++pass) {
                for (Index i = 0; i <= j; ++i) {
                    const double hij = dot(v[i], w);
                    h(i, j) += hij;
                    axpy(-hij, v[i], w);
                }
            }
            const double hnext = norm2(w);
            if (!std::isfinite(hnext) || !std::isfinite(wnorm0)) {
                throw NumericalError("gmres: non-finite value in Arnoldi at iteration " +
                                     std::to_string(rep.iterations + 1));
            }
            h(j + 1, j) = hnext;
            for (Index i = 0; i < j; ++i) apply_givens(cs[i], sn[i], h(i, j), h(i + 1, j));
            const double denom = std::hypot(h(j, j), h(j + 1, j));
            if (denom == 0.0) {
                throw NumericalError("gmres: breakdown with singular Hessenberg at iteration " +
                                     std::to_string(rep.iterations + 1));
            }
            cs[j] = h(j, j) / denom;
            sn[j] = h(j + 1, j) / denom;
            apply_givens(cs[j], sn[j], h(j, j), h(j + 1, j));
            apply_givens(cs[j], sn[j], g[j], g[j + 1]);
            ++rep.iterations;
            const double rel = std::abs(g[j + 1]) / r0;
            rep.residual_history.push_back(rel);
            const bool breakdown = hnext <= 1e-14 * wnorm0;
            if (rel <= cfg.rel_tol || breakdown) {
                done = true;
                ++j;
                break;
            }
            for (Index i = 0; i < n; ++i) v[j + 1][i] = w[i] / hnext;
        }
        // Solve the triangular system and update x += M^{-1} V y.
        Vector y(j);
        for (Index i = j; i-- > 0;) {
            double s = g[i];
            for (Index k = i + 1; k < j; ++k) s -= h(i, k) * y[k];
            y[i] = s / h(i, i);
        }
        std::ranges::fill(w, 0.0);
        for (Index i = 0; i < j; ++i) axpy(y[i], v[i], w);
        if (prec) {
            prec(w, z);
        } else {
            std::ranges::copy(w, z.begin());
        }
        axpy(1.0, z, out.x);
        for (Index c = 0; c < m; ++c) {
            for (Index i = 0; i <= m; ++i) h(i, c) = 0.0;
        }
        beta = true_residual(r);
        if (done) {
            // The Givens estimate can drift from the true residual; accept on either.
            rep.converged = true;
            break;
        }
        if (beta / r0 <= cfg.rel_tol) {
            rep.converged = true;
            break;
        }
        if (beta == 0.0) {
            rep.converged = true;
            break;
        }
    }
    return finish();
}

} // namespace mdprec::krylov
