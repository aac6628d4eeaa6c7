#include "mdprec/direct_solver.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "mdprec/errors.hpp"

namespace mdprec {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct SparseLu::Impl {
    Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>> lu;
    Index n = 0;
};

namespace {

EigenSparse to_eigen(const CsrMatrix& a) {
    std::vector<Eigen::Triplet<double, int>> t;
    t.reserve(a.nnz());
    for (Index i = 0; i < a.rows(); ++i) {
        auto c = a.row_cols(i);
        auto v = a.row_values(i);
        for (Index k = 0; k < c.size(); ++k) {
            t.emplace_back(static_cast<int>(i), static_cast<int>(c[k]), v[k]);
        }
    }
    EigenSparse m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

} // namespace

SparseLu::SparseLu(const CsrMatrix& a) : impl_(std::make_unique<Impl>()) {
    if (!a.square()) throw DimensionError("SparseLu: matrix not square");
    impl_->n = a.rows();
    if (impl_->n == 0) return;
    EigenSparse m = to_eigen(a);
    impl_->lu.analyzePattern(m);
    impl_->lu.factorize(m);
    if (impl_->lu.info() != Eigen::Success) {
        throw NumericalError("SparseLu: factorization failed: " + impl_->lu.lastErrorMessage());
    }
}

SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

Index SparseLu::size() const { return impl_->n; }

Vector SparseLu::solve(std::span<const double> b) const {
    if (b.size() != impl_->n) throw DimensionError("SparseLu::solve: rhs length");
    if (impl_->n == 0) return {};
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = impl_->lu.solve(rhs);
    return Vector(x.data(), x.data() + x.size());
}

Vector SparseLu::solve_transposed(std::span<const double> b) const {
    if (b.size() != impl_->n) throw DimensionError("SparseLu::solve_transposed: rhs length");
    if (impl_->n == 0) return {};
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = impl_->lu.transpose().solve(rhs);
    return Vector(x.data(), x.data() + x.size());
}

} // namespace mdprec
