#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

#include "mdprec/csr_matrix.hpp"
#include "mdprec/sparse_ops.hpp"

namespace testing {

using mdprec::CsrMatrix;
using mdprec::Index;
using mdprec::Vector;

inline Eigen::MatrixXd dense(const CsrMatrix& m) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows()),
                                              static_cast<Eigen::Index>(m.cols()));
    for (Index i = 0; i < m.rows(); ++i) {
        const auto cols = m.row_cols(i);
        const auto vals = m.row_values(i);
        for (Index k = 0; k < cols.size(); ++k) {
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) += vals[k];
        }
    }
    return d;
}

inline CsrMatrix csr(const Eigen::MatrixXd& d) {
    std::vector<mdprec::Triplet> t;
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        for (Eigen::Index j = 0; j < d.cols(); ++j) {
            if (d(i, j) != 0.0) t.push_back({static_cast<Index>(i), static_cast<Index>(j), d(i, j)});
        }
    }
    return CsrMatrix::from_triplets(static_cast<Index>(d.rows()), static_cast<Index>(d.cols()), std::move(t));
}

inline Eigen::VectorXd evec(const Vector& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Random sparse matrix with the given fill probability.
inline CsrMatrix random_sparse(Index rows, Index cols, double density, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), p(0.0, 1.0);
    std::vector<mdprec::Triplet> t;
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            if (p(rng) < density) t.push_back({i, j, u(rng)});
        }
    }
    return CsrMatrix::from_triplets(rows, cols, std::move(t));
}

/// Random sparse matrix with a dominant diagonal.
inline CsrMatrix random_diag_dominant(Index n, double density, std::mt19937_64& rng) {
    Eigen::MatrixXd d = dense(random_sparse(n, n, density, rng));
    for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, i) = d.row(i).cwiseAbs().sum() + 1.0;
    return csr(d);
}

/// 1D Laplacian tridiag(-1, 2, -1).
inline CsrMatrix laplacian_1d(Index n) {
    std::vector<mdprec::Triplet> t;
    for (Index i = 0; i < n; ++i) {
        t.push_back({i, i, 2.0});
        if (i > 0) t.push_back({i, i - 1, -1.0});
        if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

/// 7-point Laplacian on an m^3 grid with Dirichlet boundary.
inline CsrMatrix laplacian_3d(Index m) {
    const Index n = m * m * m;
    std::vector<mdprec::Triplet> t;
    auto id = [m](Index i, Index j, Index k) { return (k * m + j) * m + i; };
    for (Index k = 0; k < m; ++k) {
        for (Index j = 0; j < m; ++j) {
            for (Index i = 0; i < m; ++i) {
                const Index r = id(i, j, k);
                t.push_back({r, r, 6.0});
                if (i > 0) t.push_back({r, id(i - 1, j, k), -1.0});
                if (i + 1 < m) t.push_back({r, id(i + 1, j, k), -1.0});
                if (j > 0) t.push_back({r, id(i, j - 1, k), -1.0});
                if (j + 1 < m) t.push_back({r, id(i, j + 1, k), -1.0});
                if (k > 0) t.push_back({r, id(i, j, k - 1), -1.0});
                if (k + 1 < m) t.push_back({r, id(i, j, k + 1), -1.0});
            }
        }
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

inline Vector random_vector(Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(n);
    for (double& x : v) x = u(rng);
    return v;
}

} // namespace testing
