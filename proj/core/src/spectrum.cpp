#include "mdprec/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>

#include "mdprec/direct_solver.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/sparse_ops.hpp"

namespace mdprec::krylov {

double lanczos_largest(Index n, const LinearOperator& op, double tol, Index max_steps) {
    if (n == 0) return 0.0;
    const Index kmax = std::min(n, max_steps);
    std::vector<Vector> q;
    q.reserve(kmax + 1);
    std::mt19937_64 rng(0x1a2c);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    Vector v(n);
    for (double& x : v) x = unif(rng);
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    q.push_back(v);

    std::vector<double> alpha, beta;
    Vector w(n);
    double theta = 0.0;
    for (Index k = 0; k < kmax; ++k) {
        op(q[k], w);
        const double a = dot(q[k], w);
        alpha.push_back(a);
        // Full reorthogonalization, twice.
        for (int pass = 0; pass < 2; ++pass) {
            for (const Vector& qi : q) axpy(-dot(qi, w), qi, w);
        }
        const double b = norm2(w);
        if (!std::isfinite(b) || !std::isfinite(a)) throw NumericalError("lanczos: non-finite value");

        const Eigen::Index m = static_cast<Eigen::Index>(alpha.size());
        Eigen::VectorXd diag(m), sub(std::max<Eigen::Index>(m - 1, 0));
        for (Eigen::Index i = 0; i < m; ++i) diag[i] = alpha[static_cast<Index>(i)];
        for (Eigen::Index i = 0; i + 1 < m; ++i) sub[i] = beta[static_cast<Index>(i)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        theta = es.eigenvalues()[m - 1];
        const double ritz_res = std::abs(b * es.eigenvectors()(m - 1, m - 1));
        if (ritz_res <= tol * std::abs(theta) || b <= 1e-14 * std::abs(theta) || k + 1 == n) break;
        beta.push_back(b);
        for (double& x : w) x /= b;
        q.push_back(w);
    }
    return theta;
}

double hager_one_norm(Index n, const LinearOperator& apply, const LinearOperator& apply_transposed,
                      int max_iterations) {
    if (n == 0) return 0.0;
    Vector x(n, 1.0 / static_cast<double>(n));
    Vector y(n), xi(n), z(n);
    double est = 0.0;
    Index last_j = n;
    for (int it = 0; it < max_iterations; ++it) {
        apply(x, y);
        double ny = 0.0;
        for (double v : y) ny += std::abs(v);
        if (it > 0 && ny <= est) break;
        est = ny;
        for (Index i = 0; i < n; ++i) xi[i] = y[i] >= 0.0 ? 1.0 : -1.0;
        apply_transposed(xi, z);
        Index j = 0;
        double zmax = std::abs(z[0]);
        for (Index i = 1; i < n; ++i) {
            if (std::abs(z[i]) > zmax) {
                zmax = std::abs(z[i]);
                j = i;
            }
        }
        if (zmax <= dot(z, x) || j == last_j) break;
        last_j = j;
        std::ranges::fill(x, 0.0);
        x[j] = 1.0;
    }
    // Higham's alternating test vector guards against unlucky starts.
    for (Index i = 0; i < n; ++i) {
        const double sign = i % 2 == 0 ? 1.0 : -1.0;
        x[i] = sign * (1.0 + static_cast<double>(i) / static_cast<double>(n > 1 ? n - 1 : 1));
    }
    apply(x, y);
    double alt = 0.0;
    for (double v : y) alt += std::abs(v);
    alt *= 2.0 / (3.0 * static_cast<double>(n));
    return std::max(est, alt);
}

SpectrumReport lambda_extremes(const CsrMatrix& a, double tol, Index max_steps) {
    if (!a.square()) throw DimensionError("lambda_extremes: matrix not square");
    const Index n = a.rows();
    SpectrumReport rep;
    if (n == 0) return rep;
    double amax = 0.0;
    for (double v : a.values()) amax = std::max(amax, std::abs(v));
    rep.symmetrized = asymmetry(a) > 1e-12 * amax;

    const SparseLu lu(a);
    Vector tmp(n);
    if (!rep.symmetrized) {
        rep.lambda_max = lanczos_largest(n, matrix_operator(a), tol, max_steps);
        LinearOperator inv = [&](std::span<const double> x, std::span<double> y) {
            std::ranges::copy(lu.solve(x), y.begin());
        };
        rep.lambda_min = 1.0 / lanczos_largest(n, inv, tol, max_steps);
    } else {
        const CsrMatrix at = transpose(a);
        LinearOperator ata = [&](std::span<const double> x, std::span<double> y) {
            spmv(a, x, tmp);
            spmv(at, tmp, y);
        };
        LinearOperator ata_inv = [&](std::span<const double> x, std::span<double> y) {
            std::ranges::copy(lu.solve(lu.solve_transposed(x)), y.begin());
        };
        rep.lambda_max = std::sqrt(lanczos_largest(n, ata, tol, max_steps));
        rep.lambda_min = 1.0 / std::sqrt(lanczos_largest(n, ata_inv, tol, max_steps));
    }
    rep.ratio = rep.lambda_max / rep.lambda_min;
    LinearOperator inv = [&](std::span<const double> x, std::span<double> y) {
        std::ranges::copy(lu.solve(x), y.begin());
    };
    LinearOperator inv_t = [&](std::span<const double> x, std::span<double> y) {
        std::ranges::copy(lu.solve_transposed(x), y.begin());
    };
    rep.one_norm_condition = matrix_norms(a).one_norm * hager_one_norm(n, inv, inv_t);
    return rep;
}

} // namespace mdprec::krylov
