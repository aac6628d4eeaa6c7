#pragma once

#include <span>

#include "mdprec/csr_matrix.hpp"

namespace mdprec {

struct MatrixNorms {
    double frobenius = 0.0;
    double one_norm = 0.0; ///< max column sum
    double inf_norm = 0.0; ///< max row sum
};

/// y = M x.
Vector spmv(const CsrMatrix& m, std::span<const double> x);
/// y = M x into caller storage.
void spmv(const CsrMatrix& m, std::span<const double> x, std::span<double> y);
/// y += alpha M x.
void spmv_add(const CsrMatrix& m, double alpha, std::span<const double> x, std::span<double> y);
/// r = b - M x.
void residual(const CsrMatrix& m, std::span<const double> b, std::span<const double> x,
              std::span<double> r);

/// C = A B. Rows sorted and deduplicated; cancelled entries stay stored.
CsrMatrix spgemm(const CsrMatrix& a, const CsrMatrix& b);
CsrMatrix transpose(const CsrMatrix& m);
/// A + alpha B on the union pattern.
CsrMatrix add_scaled(const CsrMatrix& a, double alpha, const CsrMatrix& b);
CsrMatrix scaled(const CsrMatrix& m, double alpha);
MatrixNorms matrix_norms(const CsrMatrix& m);

SparsityGraph extract_graph(const CsrMatrix& m);
SparsityGraph transpose(const SparsityGraph& g);
SparsityGraph graph_union(const SparsityGraph& a, const SparsityGraph& b);
/// Boolean product pattern of A B.
SparsityGraph graph_product(const SparsityGraph& a, const SparsityGraph& b);
bool is_subset(const SparsityGraph& sub, const SparsityGraph& super);

/// Same shape, pattern and identical bit patterns of the values.
bool bitwise_equal(const CsrMatrix& a, const CsrMatrix& b);
/// m restricted to rows [r0, r1) and columns [c0, c1), reindexed from zero.
CsrMatrix submatrix(const CsrMatrix& m, Index r0, Index r1, Index c0, Index c1);
/// Largest |a_ij - a_ji| over the union pattern.
double asymmetry(const CsrMatrix& m);

// Dense vector helpers.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
/// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
bool all_finite(std::span<const double> x);

} // namespace mdprec
