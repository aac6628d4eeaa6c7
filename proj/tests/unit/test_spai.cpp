#include <doctest.h>

#include <set>

#include "helpers.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/probgen.hpp"
#include "mdprec/spai.hpp"

using namespace mdprec;
using testing::dense;

namespace {

double inverse_error(const CsrMatrix& a, const CsrMatrix& m) {
    const Eigen::MatrixXd inv = dense(a).inverse();
    return (dense(m) - inv).norm() / inv.norm();
}

// Column k restricted to J: normal equations (A_J^T A_J) z = A_J^T e_k.
Eigen::MatrixXd normal_equations_oracle(const CsrMatrix& a, const SparsityGraph& pattern) {
    const Eigen::MatrixXd ad = dense(a);
    const SparsityGraph pt = transpose(pattern);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ad.rows(), ad.cols());
    for (Index k = 0; k < a.cols(); ++k) {
        const auto j = pt.row(k);
        Eigen::MatrixXd aj(ad.rows(), static_cast<Eigen::Index>(j.size()));
        for (Index c = 0; c < j.size(); ++c) aj.col(static_cast<Eigen::Index>(c)) = ad.col(static_cast<Eigen::Index>(j[c]));
        Eigen::VectorXd e = Eigen::VectorXd::Zero(ad.rows());
        e(static_cast<Eigen::Index>(k)) = 1.0;
        const Eigen::VectorXd z = (aj.transpose() * aj).ldlt().solve(aj.transpose() * e);
        for (Index c = 0; c < j.size(); ++c) m(static_cast<Eigen::Index>(j[c]), static_cast<Eigen::Index>(k)) = z(static_cast<Eigen::Index>(c));
    }
    return m;
}

// Block-diagonal matrix with random well-conditioned blocks of random sizes.
CsrMatrix random_block_diagonal(Index n, std::mt19937_64& rng, double density,
                                std::vector<Index>* block_of = nullptr) {
    std::uniform_int_distribution<Index> bs(1, 8);
    std::uniform_real_distribution<double> u(-1.0, 1.0), p(0.0, 1.0);
    std::vector<Triplet> t;
    Index start = 0;
    while (start < n) {
        const Index size = std::min(bs(rng), n - start);
        if (block_of) block_of->insert(block_of->end(), size, start);
        for (Index i = 0; i < size; ++i) {
            double rowsum = 0.0;
            for (Index j = 0; j < size; ++j) {
                if (i == j || p(rng) >= density) continue;
                const double v = u(rng);
                rowsum += std::abs(v);
                t.push_back({start + i, start + j, v});
            }
            t.push_back({start + i, start + i, rowsum + 0.5 + p(rng)});
        }
        start += size;
    }
    return CsrMatrix::from_triplets(n, n, std::move(t));
}

} // namespace

TEST_CASE("prefilter examples") {
    CHECK(spai::prefilter(CsrMatrix::identity(3), 0.5) == SparsityGraph::identity(3));
    const CsrMatrix a = CsrMatrix::from_dense(2, 2, std::vector<double>{4, 0.1, 0.1, 4});
    CHECK(spai::prefilter(a, 0.1) == SparsityGraph::identity(2));
    const CsrMatrix z = CsrMatrix::from_dense(2, 2, std::vector<double>{0, 2, 2, 0});
    const SparsityGraph gz = spai::prefilter(z, 1.0);
    CHECK(gz.nnz() == 4);
    CHECK(gz.contains(0, 0));
    CHECK(gz.contains(1, 1));
    const CsrMatrix d = CsrMatrix::diagonal(std::vector<double>{1, 2});
    CHECK(spai::prefilter(d, 0.5) == SparsityGraph::identity(2));
    const CsrMatrix tiny = CsrMatrix::from_dense(2, 2, std::vector<double>{1, 1e-9, 1e-9, 1});
    CHECK(spai::prefilter(tiny, 1e-8) == SparsityGraph::identity(2));
    std::mt19937_64 rng(1);
    const CsrMatrix r = testing::random_diag_dominant(12, 0.3, rng);
    const SparsityGraph g0 = spai::prefilter(r, 0.0);
    CHECK(g0 == graph_union(extract_graph(r), SparsityGraph::identity(12)));
}

TEST_CASE("graph power examples") {
    std::mt19937_64 rng(2);
    const SparsityGraph g = extract_graph(testing::random_sparse(10, 10, 0.2, rng));
    CHECK(spai::graph_power(g, 1) == g);
    const SparsityGraph path = extract_graph(testing::laplacian_1d(3));
    const SparsityGraph p2 = spai::graph_power(path, 2);
    CHECK(p2.nnz() == 9);
    CHECK(p2.contains(0, 2));
    CHECK(p2.contains(2, 0));

    std::vector<Index> block_of;
    const CsrMatrix bd = random_block_diagonal(30, rng, 0.6, &block_of);
    const SparsityGraph gb = graph_union(extract_graph(bd), SparsityGraph::identity(30));
    for (int ell = 1; ell <= 4; ++ell) {
        const SparsityGraph gp = spai::graph_power(gb, ell);
        CHECK(is_subset(gb, gp));
        CHECK(is_subset(gp, spai::graph_power(gb, ell + 1)));
        for (Index i = 0; i < 30; ++i) {
            for (Index j : gp.row(i)) CHECK(block_of[i] == block_of[j]);
        }
    }
}

TEST_CASE("minimization examples") {
    const CsrMatrix d = CsrMatrix::diagonal(std::vector<double>{2, 4});
    const SparsityGraph full(2, 2, {0, 2, 4}, {0, 1, 0, 1});
    const spai::SpaiResult rd = spai::spai_minimize(d, full);
    CHECK(rd.approx_inverse.at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(rd.approx_inverse.at(1, 1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(std::abs(rd.approx_inverse.at(0, 1)) <= 1e-15);
    CHECK(rd.residual_fro <= 1e-15);

    const CsrMatrix a = CsrMatrix::from_dense(2, 2, std::vector<double>{3, 1, 2, 5});
    const Eigen::MatrixXd inv = dense(a).inverse();
    const CsrMatrix m = spai::spai_minimize(a, full).approx_inverse;
    CHECK((dense(m) - inv).cwiseAbs().maxCoeff() <= 1e-14);

    CHECK_THROWS_AS(spai::spai_minimize(CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}}), full), NumericalError);
}

TEST_CASE("postfilter examples") {
    const CsrMatrix d = CsrMatrix::diagonal(std::vector<double>{1, 2});
    CHECK(bitwise_equal(spai::postfilter(d, 0.5), d));
    const CsrMatrix m = CsrMatrix::from_dense(2, 2, std::vector<double>{1e-9, 0.5, 1e-9, -3});
    const CsrMatrix f = spai::postfilter(m, 1e-8);
    CHECK(f.nnz() == 3);
    CHECK(f.at(0, 0) == 1e-9);
    CHECK(f.at(1, 0) == 0.0);
    std::mt19937_64 rng(4);
    const CsrMatrix r = testing::random_sparse(8, 8, 0.5, rng);
    CHECK(bitwise_equal(spai::postfilter(r, 0.0), r));
}

TEST_CASE("build_spai examples") {
    spai::SpaiConfig cfg;
    CHECK(bitwise_equal(spai::build_spai(CsrMatrix::identity(5), cfg).approx_inverse, CsrMatrix::identity(5)));

    std::mt19937_64 rng(6);
    const CsrMatrix a = testing::random_diag_dominant(15, 0.3, rng);
    double maxabs = 0.0;
    for (double v : a.values()) maxabs = std::max(maxabs, std::abs(v));
    spai::SpaiConfig huge;
    huge.sigma = 1e3 * maxabs;
    const CsrMatrix md = spai::build_spai(a, huge).approx_inverse;
    CHECK(md.nnz() == 15);
    for (Index i = 0; i < 15; ++i) CHECK(md.row_cols(i)[0] == i);

    const CsrMatrix diag = CsrMatrix::diagonal(std::vector<double>{2, -5, 0.5});
    const CsrMatrix mdiag = spai::build_spai(diag, huge).approx_inverse;
    CHECK(mdiag.at(0, 0) == doctest::Approx(0.5));
    CHECK(mdiag.at(1, 1) == doctest::Approx(-0.2));
    CHECK(mdiag.at(2, 2) == doctest::Approx(2.0));

    spai::SpaiConfig bad;
    bad.ell = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {};
    bad.sigma = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("exact recovery on dense fiber blocks") {
    probgen::GenConfig g;
    g.solid_grid = {6, 6, 6};
    g.fiber_count = 20;
    const CsrMatrix a = probgen::generate(g).system.a;
    spai::SpaiConfig cfg; // sigma 1e-8, ell 2
    const spai::SpaiResult r = spai::build_spai(a, cfg);
    CHECK(inverse_error(a, r.approx_inverse) <= 1e-10);
    CHECK(extract_graph(r.approx_inverse) == extract_graph(a));
}

TEST_CASE("property: columnwise QR matches normal equations, 100 seeds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const Index n = std::uniform_int_distribution<Index>(5, 50)(rng);
        const CsrMatrix a = random_block_diagonal(n, rng, 0.5);
        const SparsityGraph pattern = spai::graph_power(spai::prefilter(a, 0.0), 1 + static_cast<int>(seed % 2));
        const Eigen::MatrixXd m = dense(spai::spai_minimize(a, pattern, 1 + seed % 3).approx_inverse);
        const Eigen::MatrixXd ref = normal_equations_oracle(a, pattern);
        CHECK((m - ref).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("property: residual never grows with the pattern") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(seed + 1000);
        const CsrMatrix a = testing::random_diag_dominant(25, 0.15, rng);
        const SparsityGraph g = spai::prefilter(a, 0.0);
        double prev = std::numeric_limits<double>::infinity();
        for (int ell = 1; ell <= 4; ++ell) {
            const spai::SpaiResult r = spai::spai_minimize(a, spai::graph_power(g, ell));
            CHECK(r.residual_fro <= prev * (1 + 1e-12));
            CHECK(std::abs(r.residual_fro - spai::residual_frobenius(a, r.approx_inverse)) <= 1e-12);
            prev = r.residual_fro;
        }
    }
}

TEST_CASE("parallel columns are bitwise identical to serial") {
    std::mt19937_64 rng(9);
    const CsrMatrix a = random_block_diagonal(200, rng, 0.7);
    const SparsityGraph p = spai::graph_power(spai::prefilter(a, 0.0), 2);
    CHECK(bitwise_equal(spai::spai_minimize(a, p, 1).approx_inverse, spai::spai_minimize(a, p, 4).approx_inverse));
}

TEST_CASE("spai smoother examples") {
    std::mt19937_64 rng(10);
    const CsrMatrix a = testing::random_diag_dominant(12, 0.3, rng);
    const CsrMatrix inv = testing::csr(dense(a).inverse());
    const Vector b = testing::random_vector(12, rng);
    const Vector x = spai::spai_smooth(a, inv, b, Vector(12, 0.0), 1);
    const Eigen::VectorXd ref = dense(a).inverse() * testing::evec(b);
    for (Index i = 0; i < 12; ++i) CHECK(std::abs(x[i] - ref(static_cast<Eigen::Index>(i))) <= 1e-13);

    const Vector x0 = testing::random_vector(12, rng);
    const Vector ax0 = spmv(a, x0);
    const CsrMatrix rough = spai::build_spai(a, {}).approx_inverse;
    for (int m : {1, 2, 5}) {
        const Vector xs = spai::spai_smooth(a, rough, ax0, x0, m);
        for (Index i = 0; i < 12; ++i) CHECK(std::abs(xs[i] - x0[i]) <= 1e-13);
    }

    const CsrMatrix two = CsrMatrix::diagonal(std::vector<double>{2});
    const CsrMatrix quarter = CsrMatrix::diagonal(std::vector<double>{0.25});
    // x1 = 0.25, x2 = 0.25 + 0.25 * 0.5, x3 = x2 + 0.25 * 0.25.
    CHECK(spai::spai_smooth(two, quarter, Vector{1}, Vector{0}, 2)[0] == 0.375);
    CHECK(spai::spai_smooth(two, quarter, Vector{1}, Vector{0}, 3)[0] == 0.4375);
    // Fixed residual: 0.25 added twice.
    CHECK(spai::spai_smooth(two, quarter, Vector{1}, Vector{0}, 2, true)[0] == 0.5);
}
