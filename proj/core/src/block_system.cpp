#include "mdprec/block_system.hpp"

#include <sstream>

#include "mdprec/errors.hpp"
#include "mdprec/sparse_ops.hpp"

namespace mdprec {

Vector BlockVector::concatenated() const {
    Vector out;
    out.reserve(beam.size() + solid.size());
    out.insert(out.end(), beam.begin(), beam.end());
    out.insert(out.end(), solid.begin(), solid.end());
    return out;
}

BlockVector BlockVector::split(std::span<const double> x, Index n_beam) {
    if (n_beam > x.size()) throw DimensionError("BlockVector::split: beam size exceeds vector");
    return {Vector(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n_beam)),
            Vector(x.begin() + static_cast<std::ptrdiff_t>(n_beam), x.end())};
}

void validate(const BlockSystem& sys) {
    const Index m = sys.a.rows();
    const Index n = sys.c.rows();
    auto dim = [](bool ok, const char* what) {
        if (!ok) throw DimensionError(std::string("BlockSystem: ") + what);
    };
    dim(sys.a.cols() == m, "A is not square");
    dim(sys.c.cols() == n, "C is not square");
    dim(sys.b1t.rows() == m && sys.b1t.cols() == n, "B1^T must be M x N");
    dim(sys.b2.rows() == n && sys.b2.cols() == m, "B2 must be N x M");
    dim(sys.rhs_beam.size() == m, "rhs_beam length differs from M");
    dim(sys.rhs_solid.size() == n, "rhs_solid length differs from N");

    const auto& bounds = sys.beam_block_boundaries;
    if (bounds.empty() || bounds.front() != 0 || bounds.back() != m) {
        throw InvariantError("BlockSystem: beam_block_boundaries must start at 0 and end at M");
    }
    for (Index b = 1; b < bounds.size(); ++b) {
        if (bounds[b] <= bounds[b - 1]) {
            throw InvariantError("BlockSystem: beam_block_boundaries not strictly increasing");
        }
    }
    for (Index b = 0; b + 1 < bounds.size(); ++b) {
        for (Index i = bounds[b]; i < bounds[b + 1]; ++i) {
            for (Index j : sys.a.row_cols(i)) {
                if (j < bounds[b] || j >= bounds[b + 1]) {
                    std::ostringstream why;
                    why << "BlockSystem: A entry (" << i << ", " << j
                        << ") lies outside its diagonal block [" << bounds[b] << ", "
                        << bounds[b + 1] << ")";
                    throw InvariantError(why.str());
                }
            }
        }
    }
    for (const Vector* v : {&sys.rhs_beam, &sys.rhs_solid}) {
        if (!all_finite(*v)) throw InvariantError("BlockSystem: non-finite right-hand side");
    }
}

BlockVector block_operator_apply(const BlockSystem& sys, const BlockVector& x) {
    if (x.beam.size() != sys.n_beam() || x.solid.size() != sys.n_solid()) {
        throw DimensionError("block_operator_apply: partition sizes do not match");
    }
    BlockVector y{Vector(sys.n_beam()), Vector(sys.n_solid())};
    spmv(sys.a, x.beam, y.beam);
    spmv_add(sys.b1t, 1.0, x.solid, y.beam);
    spmv(sys.c, x.solid, y.solid);
    spmv_add(sys.b2, 1.0, x.beam, y.solid);
    return y;
}

void block_operator_apply(const BlockSystem& sys, std::span<const double> x, std::span<double> y) {
    const Index m = sys.n_beam();
    if (x.size() != sys.size() || y.size() != sys.size()) {
        throw DimensionError("block_operator_apply: vector length differs from system size");
    }
    auto xb = x.first(m);
    auto xs = x.subspan(m);
    auto yb = y.first(m);
    auto ys = y.subspan(m);
    spmv(sys.a, xb, yb);
    spmv_add(sys.b1t, 1.0, xs, yb);
    spmv(sys.c, xs, ys);
    spmv_add(sys.b2, 1.0, xb, ys);
}

CsrMatrix assemble_monolithic(const BlockSystem& sys) {
    const Index m = sys.n_beam();
    const Index total = sys.size();
    std::vector<Index> offsets(total + 1, 0);
    std::vector<Index> col_idx;
    Vector vals;
    col_idx.reserve(sys.a.nnz() + sys.b1t.nnz() + sys.b2.nnz() + sys.c.nnz());
    vals.reserve(col_idx.capacity());
    auto append = [&](const CsrMatrix& left, const CsrMatrix& right, Index i) {
        for (Index k = 0; k < left.row_cols(i).size(); ++k) {
            col_idx.push_back(left.row_cols(i)[k]);
            vals.push_back(left.row_values(i)[k]);
        }
        for (Index k = 0; k < right.row_cols(i).size(); ++k) {
            col_idx.push_back(m + right.row_cols(i)[k]);
            vals.push_back(right.row_values(i)[k]);
        }
    };
    for (Index i = 0; i < m; ++i) {
        append(sys.a, sys.b1t, i);
        offsets[i + 1] = col_idx.size();
    }
    for (Index i = 0; i < sys.n_solid(); ++i) {
        append(sys.b2, sys.c, i);
        offsets[m + i + 1] = col_idx.size();
    }
    return {total, total, std::move(offsets), std::move(col_idx), std::move(vals)};
}

Vector monolithic_rhs(const BlockSystem& sys) {
    return BlockVector{sys.rhs_beam, sys.rhs_solid}.concatenated();
}

} // namespace mdprec
