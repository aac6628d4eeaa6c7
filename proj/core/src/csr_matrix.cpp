#include "mdprec/csr_matrix.hpp"

#include <algorithm>
#include <sstream>

#include "mdprec/errors.hpp"

namespace mdprec {

std::string check_csr_layout(Index rows, Index cols, std::span<const Index> row_offsets,
                             std::span<const Index> col_indices, Index n_values) {
    std::ostringstream why;
    if (row_offsets.size() != rows + 1) {
        why << "row_offsets has length " << row_offsets.size() << ", expected " << rows + 1;
        return why.str();
    }
    if (row_offsets[0] != 0) return "row_offsets[0] != 0";
    if (row_offsets[rows] != col_indices.size() || col_indices.size() != n_values) {
        why << "row_offsets[n_rows]=" << row_offsets[rows] << " but " << col_indices.size()
            << " column indices and " << n_values << " values";
        return why.str();
    }
    for (Index i = 0; i < rows; ++i) {
        if (row_offsets[i + 1] < row_offsets[i]) {
            why << "row_offsets decreases at row " << i;
            return why.str();
        }
        for (Index k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
            if (col_indices[k] >= cols) {
                why << "column index " << col_indices[k] << " out of range in row " << i;
                return why.str();
            }
            if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1]) {
                why << "column indices not strictly increasing in row " << i;
                return why.str();
            }
        }
    }
    return {};
}

// ---------------------------------------------------------------------------

SparsityGraph::SparsityGraph(Index rows, Index cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

SparsityGraph::SparsityGraph(Index rows, Index cols, std::vector<Index> row_offsets,
                             std::vector<Index> col_indices)
    : rows_(rows), cols_(cols), row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)) {
    auto why = check_csr_layout(rows_, cols_, row_offsets_, col_indices_, col_indices_.size());
    if (!why.empty()) throw InvariantError("SparsityGraph: " + why);
}

SparsityGraph SparsityGraph::identity(Index n) {
    std::vector<Index> offsets(n + 1);
    std::vector<Index> cols(n);
    for (Index i = 0; i < n; ++i) {
        offsets[i + 1] = i + 1;
        cols[i] = i;
    }
    return {n, n, std::move(offsets), std::move(cols)};
}

bool SparsityGraph::contains(Index i, Index j) const {
    auto r = row(i);
    return std::binary_search(r.begin(), r.end(), j);
}

// ---------------------------------------------------------------------------

CsrMatrix::CsrMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

CsrMatrix::CsrMatrix(Index rows, Index cols, std::vector<Index> row_offsets,
                     std::vector<Index> col_indices, std::vector<double> values)
    : rows_(rows), cols_(cols), row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)), values_(std::move(values)) {
    auto why = check_csr_layout(rows_, cols_, row_offsets_, col_indices_, values_.size());
    if (!why.empty()) throw InvariantError("CsrMatrix: " + why);
}

CsrMatrix CsrMatrix::identity(Index n) {
    Vector ones(n, 1.0);
    return diagonal(ones);
}

CsrMatrix CsrMatrix::diagonal(std::span<const double> diag) {
    const Index n = diag.size();
    std::vector<Index> offsets(n + 1);
    std::vector<Index> cols(n);
    for (Index i = 0; i < n; ++i) {
        offsets[i + 1] = i + 1;
        cols[i] = i;
    }
    return {n, n, std::move(offsets), std::move(cols), Vector(diag.begin(), diag.end())};
}

CsrMatrix CsrMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row >= rows || t.col >= cols) {
            std::ostringstream why;
            why << "triplet (" << t.row << ", " << t.col << ") outside " << rows << "x" << cols;
            throw DimensionError(why.str());
        }
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Index> offsets(rows + 1, 0);
    std::vector<Index> col_idx;
    Vector vals;
    col_idx.reserve(triplets.size());
    vals.reserve(triplets.size());
    for (Index k = 0; k < triplets.size();) {
        const auto& t = triplets[k];
        double sum = t.value;
        Index next = k + 1;
        while (next < triplets.size() && triplets[next].row == t.row && triplets[next].col == t.col) {
            sum += triplets[next].value;
            ++next;
        }
        col_idx.push_back(t.col);
        vals.push_back(sum);
        ++offsets[t.row + 1];
        k = next;
    }
    for (Index i = 0; i < rows; ++i) offsets[i + 1] += offsets[i];
    return {rows, cols, std::move(offsets), std::move(col_idx), std::move(vals)};
}

CsrMatrix CsrMatrix::from_dense(Index rows, Index cols, std::span<const double> row_major,
                                bool keep_zeros) {
    if (row_major.size() != rows * cols) throw DimensionError("from_dense: size mismatch");
    std::vector<Index> offsets(rows + 1, 0);
    std::vector<Index> col_idx;
    Vector vals;
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            const double v = row_major[i * cols + j];
            if (keep_zeros || v != 0.0) {
                col_idx.push_back(j);
                vals.push_back(v);
            }
        }
        offsets[i + 1] = col_idx.size();
    }
    return {rows, cols, std::move(offsets), std::move(col_idx), std::move(vals)};
}

double CsrMatrix::at(Index i, Index j) const {
    auto c = row_cols(i);
    auto it = std::lower_bound(c.begin(), c.end(), j);
    if (it == c.end() || *it != j) return 0.0;
    return values_[row_offsets_[i] + static_cast<Index>(it - c.begin())];
}

Vector CsrMatrix::diagonal() const {
    Vector d(std::min(rows_, cols_), 0.0);
    for (Index i = 0; i < d.size(); ++i) d[i] = at(i, i);
    return d;
}

std::vector<double> CsrMatrix::to_dense() const {
    std::vector<double> out(rows_ * cols_, 0.0);
    for (Index i = 0; i < rows_; ++i) {
        for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
            out[i * cols_ + col_indices_[k]] = values_[k];
        }
    }
    return out;
}

} // namespace mdprec
