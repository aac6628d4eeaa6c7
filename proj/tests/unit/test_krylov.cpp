#include <doctest.h>

#include "helpers.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/krylov.hpp"
#include "mdprec/spectrum.hpp"

using namespace mdprec;
using testing::dense;

TEST_CASE("gmres examples") {
    krylov::GmresConfig cfg;
    const Vector b{1, -2, 3, 0.5};
    const krylov::GmresResult id = krylov::gmres(krylov::matrix_operator(CsrMatrix::identity(4)), {}, b, cfg);
    CHECK(id.report.converged);
    CHECK(id.report.iterations == 1);
    for (Index i = 0; i < 4; ++i) CHECK(id.x[i] == doctest::Approx(b[i]).epsilon(1e-15));
    CHECK(id.report.residual_history.front() == 1.0);

    std::mt19937_64 rng(41);
    const CsrMatrix a = testing::random_diag_dominant(40, 0.2, rng);
    const Eigen::MatrixXd inv = dense(a).inverse();
    const CsrMatrix ainv = testing::csr(inv);
    const Vector rhs = testing::random_vector(40, rng);
    cfg.rel_tol = 1e-12;
    const krylov::GmresResult ex = krylov::gmres(krylov::matrix_operator(a), krylov::matrix_operator(ainv), rhs, cfg);
    CHECK(ex.report.converged);
    CHECK(ex.report.iterations <= 2);
    CHECK(ex.report.true_relative_residual <= 1e-12);
}

TEST_CASE("gmres terminates on a dense random system") {
    std::mt19937_64 rng(43);
    const Eigen::MatrixXd d = Eigen::MatrixXd::Random(30, 30) + 0.1 * Eigen::MatrixXd::Identity(30, 30);
    const CsrMatrix a = testing::csr(d);
    const Vector b = testing::random_vector(30, rng);
    krylov::GmresConfig cfg;
    cfg.rel_tol = 1e-300;
    cfg.max_iters = 30;
    cfg.restart = 30;
    const krylov::GmresResult r = krylov::gmres(krylov::matrix_operator(a), {}, b, cfg);
    REQUIRE(r.report.residual_history.size() >= 2);
    CHECK(r.report.iterations <= 30);
    CHECK(r.report.true_relative_residual <= 1e-10);
    const Eigen::VectorXd xs = d.partialPivLu().solve(testing::evec(b));
    CHECK((testing::evec(r.x) - xs).norm() <= 1e-8 * xs.norm());
}

TEST_CASE("restarted gmres reaches the tolerance and reports honestly") {
    const CsrMatrix a = testing::laplacian_1d(100);
    std::mt19937_64 rng(45);
    const Vector b = testing::random_vector(100, rng);
    krylov::GmresConfig cfg;
    cfg.rel_tol = 1e-8;
    cfg.restart = 10;
    cfg.max_iters = 5000;
    const krylov::GmresResult r = krylov::gmres(krylov::matrix_operator(a), {}, b, cfg);
    CHECK(r.report.converged);
    CHECK(r.report.true_relative_residual <= 1.5e-8);
    CHECK(r.report.residual_history.size() == r.report.iterations + 1);
    for (Index i = 1; i < r.report.residual_history.size(); ++i) {
        CHECK(r.report.residual_history[i] <= r.report.residual_history[i - 1] * (1 + 1e-12));
    }

    cfg.max_iters = 3;
    const krylov::GmresResult f = krylov::gmres(krylov::matrix_operator(a), {}, b, cfg);
    CHECK_FALSE(f.report.converged);
    CHECK(f.report.iterations == 3);

    const Vector x0 = testing::random_vector(100, rng);
    cfg.max_iters = 5000;
    const krylov::GmresResult g0 = krylov::gmres(krylov::matrix_operator(a), {}, spmv(a, x0), cfg, x0);
    CHECK(g0.report.converged);
    CHECK(g0.report.iterations == 0);
    CHECK(g0.x == x0);
}

TEST_CASE("gmres input checks") {
    krylov::GmresConfig cfg;
    cfg.restart = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.rel_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    const Vector b{1, 1};
    krylov::LinearOperator nan_op = [](std::span<const double>, std::span<double> y) {
        for (double& v : y) v = std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(krylov::gmres(nan_op, {}, b, cfg), NumericalError);
    const krylov::GmresResult z = krylov::gmres(krylov::matrix_operator(CsrMatrix::identity(2)), {}, Vector{0, 0}, cfg);
    CHECK(z.report.converged);
    CHECK(z.x == Vector{0, 0});
}

TEST_CASE("spectrum examples") {
    const krylov::SpectrumReport d = krylov::lambda_extremes(CsrMatrix::diagonal(std::vector<double>{1, 2, 3}));
    CHECK(d.lambda_min == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d.lambda_max == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(d.ratio == doctest::Approx(3.0).epsilon(1e-9));
    CHECK_FALSE(d.symmetrized);
    CHECK(krylov::lambda_extremes(CsrMatrix::identity(7)).one_norm_condition == doctest::Approx(1.0));

    const CsrMatrix lap = testing::laplacian_1d(50);
    const krylov::SpectrumReport l = krylov::lambda_extremes(lap);
    const double pi = std::acos(-1.0);
    CHECK(l.lambda_min == doctest::Approx(2 - 2 * std::cos(pi / 51)).epsilon(1e-8));
    CHECK(l.lambda_max == doctest::Approx(2 - 2 * std::cos(50 * pi / 51)).epsilon(1e-8));
    const Eigen::MatrixXd ld = dense(lap);
    const double cond1 = ld.cwiseAbs().colwise().sum().maxCoeff() * ld.inverse().cwiseAbs().colwise().sum().maxCoeff();
    CHECK(l.one_norm_condition <= cond1 * (1 + 1e-12));
    CHECK(l.one_norm_condition >= 0.3 * cond1);

    std::mt19937_64 rng(47);
    const CsrMatrix ns = testing::random_diag_dominant(20, 0.3, rng);
    const krylov::SpectrumReport s = krylov::lambda_extremes(ns);
    CHECK(s.symmetrized);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense(ns));
    CHECK(s.lambda_max == doctest::Approx(svd.singularValues()(0)).epsilon(1e-8));
    CHECK(s.lambda_min == doctest::Approx(svd.singularValues()(19)).epsilon(1e-8));
    CHECK_THROWS_AS(krylov::lambda_extremes(CsrMatrix(3, 3)), NumericalError);
}
