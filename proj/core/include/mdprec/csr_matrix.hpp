#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mdprec {

using Index = std::size_t;
using Vector = std::vector<double>;

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Boolean row-compressed pattern.
class SparsityGraph {
public:
    SparsityGraph() = default;
    /// Empty pattern of the given shape.
    SparsityGraph(Index rows, Index cols);
    /// Takes ownership of the arrays; throws InvariantError when they do not
    /// form a valid sorted, duplicate-free row-compressed pattern.
    SparsityGraph(Index rows, Index cols, std::vector<Index> row_offsets,
                  std::vector<Index> col_indices);

    static SparsityGraph identity(Index n);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index nnz() const { return col_indices_.size(); }

    std::span<const Index> row_offsets() const { return row_offsets_; }
    std::span<const Index> col_indices() const { return col_indices_; }
    std::span<const Index> row(Index i) const {
        return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }

    bool contains(Index i, Index j) const;

    friend bool operator==(const SparsityGraph&, const SparsityGraph&) = default;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> row_offsets_{0};
    std::vector<Index> col_indices_;
};

/// Compressed sparse row matrix. Immutable after construction; stored
/// explicit zeros are kept.
class CsrMatrix {
public:
    CsrMatrix() = default;
    /// Zero matrix (no stored entries) of the given shape.
    CsrMatrix(Index rows, Index cols);
    /// Takes ownership of the arrays; throws InvariantError on malformed input.
    CsrMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
              std::vector<Index> col_indices, std::vector<double> values);

    static CsrMatrix identity(Index n);
    static CsrMatrix diagonal(std::span<const double> diag);
    /// Duplicates are summed; explicit zeros are kept.
    static CsrMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);
    /// Row-major dense input. Zeros are dropped unless keep_zeros is set.
    static CsrMatrix from_dense(Index rows, Index cols, std::span<const double> row_major,
                                bool keep_zeros = false);

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }
    Index nnz() const { return values_.size(); }
    bool square() const { return rows_ == cols_; }

    std::span<const Index> row_offsets() const { return row_offsets_; }
    std::span<const Index> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }

    std::span<const Index> row_cols(Index i) const {
        return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }
    std::span<const double> row_values(Index i) const {
        return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }

    /// Stored value at (i, j), zero when not stored.
    double at(Index i, Index j) const;
    Vector diagonal() const;
    /// Row-major dense copy.
    std::vector<double> to_dense() const;

    /// Bitwise equality of shape, pattern and values.
    friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

private:
    Index rows_ = 0;
    Index cols_ = 0;
    std::vector<Index> row_offsets_{0};
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

/// Checks the CSR layout invariants. Returns an empty string when valid,
/// otherwise a description of the first violation.
std::string check_csr_layout(Index rows, Index cols, std::span<const Index> row_offsets,
                             std::span<const Index> col_indices, Index n_values);

} // namespace mdprec
