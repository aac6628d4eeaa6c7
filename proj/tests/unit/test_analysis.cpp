#include <doctest.h>

#include "mdprec/analysis.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/probgen.hpp"

using namespace mdprec;

namespace {

ExperimentConfig base_config() {
    ExperimentConfig c;
    c.gen = probgen::GenConfig{};
    c.gen->solid_grid = {6, 6, 6};
    c.gen->fiber_count = 20;
    c.prec.amg.nullspace_dim = 3;
    c.gmres.rel_tol = 1e-6;
    return c;
}

double num(const Table& t, std::size_t row, const std::string& col) { return std::stod(t.rows[row][t.column(col)]); }
const std::string& str(const Table& t, std::size_t row, const std::string& col) { return t.rows[row][t.column(col)]; }

} // namespace

TEST_CASE("newton right-hand sides") {
    const BlockSystem s = probgen::generate(*base_config().gen).system;
    const Vector b = monolithic_rhs(s);
    const Vector r = analysis::newton_rhs(s, 1, 0, 4, 0.0, 1);
    for (Index i = 0; i < b.size(); ++i) CHECK(r[i] == 0.5 * b[i]);
    const Vector p1 = analysis::newton_rhs(s, 3, 2, 4, 0.01, 1);
    const Vector p2 = analysis::newton_rhs(s, 3, 2, 4, 0.01, 1);
    const Vector p3 = analysis::newton_rhs(s, 3, 3, 4, 0.01, 1);
    CHECK(p1 == p2);
    CHECK(p1 != p3);
    for (Index i = 0; i < b.size(); ++i) CHECK(std::abs(p1[i] - b[i]) <= 0.01 * std::abs(b[i]) + 1e-300);
}

TEST_CASE("reuse policy counts setups") {
    const ExperimentConfig c = base_config();
    const BlockSystem s = probgen::generate(*c.gen).system;
    block::BlockPrecConfig p = c.prec;
    p.reuse_policy = block::ReusePolicy::reuse_within_load_step;
    const analysis::LoadStepSummary reuse = analysis::run_block_load_steps(s, p, c.gmres, 4, 5, 0.01, 1);
    p.reuse_policy = block::ReusePolicy::rebuild_each_solve;
    const analysis::LoadStepSummary rebuild = analysis::run_block_load_steps(s, p, c.gmres, 4, 5, 0.01, 1);
    CHECK(reuse.setup_count == 4);
    CHECK(rebuild.setup_count == 20);
    CHECK(reuse.solves.size() == 20);
    CHECK(reuse.all_converged);
    CHECK(reuse.mean_iterations <= 1.2 * rebuild.mean_iterations);
    CHECK(reuse.mean_iterations_per_load_step == doctest::Approx(5 * reuse.mean_iterations));
}

TEST_CASE("spai study rows") {
    ExperimentConfig c = base_config();
    c.gen->solid_grid = {14, 14, 14};
    c.gen->fiber_count = 50;
    c.sweep.sigma = {1e-8};
    c.sweep.ell = {1, 2, 3};
    const Table t = analysis::run_spai_study(c);
    REQUIRE(t.rows.size() == 3);
    CHECK(num(t, 1, "ell") == 2);
    CHECK(num(t, 1, "rel_error_fro") <= 1e-10);
    CHECK(str(t, 1, "converged") == "true");
    for (std::size_t r = 1; r < 3; ++r) CHECK(num(t, r, "rel_error_fro") <= num(t, r - 1, "rel_error_fro"));
    CHECK(num(t, 0, "nnz_a") == 7200);
}

TEST_CASE("spai study on the sparse element family") {
    ExperimentConfig c = base_config();
    c.gen->solid_grid = {14, 14, 14};
    c.gen->fiber_count = 50;
    c.gen->dofs_per_beam_node = 9;
    c.gen->penalty_rot = 1.0;
    c.gen->skew_perturbation = 1.0;
    c.prec.kappa = 1;
    c.prec.smoother_iters = 1;
    c.gmres.rel_tol = 1e-8;
    c.gmres.max_iters = 100;
    c.sweep.sigma = {1e300, 1e-11};
    c.sweep.ell = {1, 2};
    c.sweep.zip_sigma_ell = true;
    const Table t = analysis::run_spai_study(c);
    REQUIRE(t.rows.size() == 2);
    // Diagonal approximate inverse: no convergence within the budget.
    CHECK(num(t, 0, "nnz_result") == 900);
    CHECK(str(t, 0, "converged") == "false");
    CHECK(num(t, 0, "iterations_per_solve") == 100);
    CHECK(num(t, 0, "rel_error_fro") > 0.5);
    CHECK(str(t, 1, "converged") == "true");
    CHECK(num(t, 1, "rel_error_fro") <= 1e-10);

    c.sweep.sigma = {1e-12};
    c.sweep.ell = {1, 2, 3};
    c.sweep.zip_sigma_ell = false;
    const Table m = analysis::run_spai_study(c);
    for (std::size_t r = 1; r < 3; ++r) CHECK(num(m, r, "rel_error_fro") <= num(m, r - 1, "rel_error_fro"));
}

TEST_CASE("penalty sweep") {
    ExperimentConfig c = base_config();
    c.gen->solid_grid = {8, 8, 8};
    c.sweep.epsilon = {1, 10, 100, 1000};
    const Table t = analysis::run_penalty_sweep(c);
    REQUIRE(t.rows.size() == 4);
    double lo = 1e300, hi = 0;
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(std::abs(num(t, r, "lambda_min") - num(t, 0, "lambda_min")) <= 0.01 * num(t, 0, "lambda_min"));
        if (r > 0) CHECK(num(t, r, "lambda_max") > num(t, r - 1, "lambda_max"));
        CHECK(str(t, r, "converged") == "true");
        lo = std::min(lo, num(t, r, "iterations_per_solve"));
        hi = std::max(hi, num(t, r, "iterations_per_solve"));
    }
    CHECK(hi <= 2 * lo);

    c.compute_spectrum = false;
    c.sweep.stiffness_ratio = {2, 32};
    const Table u = analysis::run_penalty_sweep(c);
    CHECK(u.rows.size() == 8);
    CHECK(str(u, 0, "lambda_min").empty());
    CHECK(num(u, 4, "beam_modulus") == 32);
}

TEST_CASE("refinement sweep") {
    ExperimentConfig c = base_config();
    c.sweep.grid = {{6, 6, 6}, {10, 10, 10}, {14, 14, 14}};
    c.load_steps = 1;
    c.newton_steps_per_load_step = 2;
    const Table t = analysis::run_refinement_sweep(c);
    REQUIRE(t.rows.size() == 12);
    auto iters = [&](const std::string& transfer, std::size_t grid) {
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (str(t, r, "transfer") == transfer && str(t, r, "reuse") == "false" &&
                num(t, r, "nx") == c.sweep.grid[grid][0]) {
                return num(t, r, "iterations_per_solve");
            }
        }
        return -1.0;
    };
    CHECK(iters("plain", 2) / iters("plain", 0) >= iters("smoothed", 2) / iters("smoothed", 0));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        CHECK(num(t, r, "setup_count") == (str(t, r, "reuse") == "true" ? 1 : 2));
    }
}

TEST_CASE("solver comparison") {
    ExperimentConfig c = base_config();
    c.gen->solid_grid = {10, 10, 10};
    c.gen->penalty_pos = c.gen->beam_modulus;
    c.newton_steps_per_load_step = 2;
    const Table t = analysis::run_solver_compare(c);
    REQUIRE(t.rows.size() == 4);
    CHECK(str(t, 0, "method") == "direct");
    CHECK(str(t, 1, "method") == "naive");
    CHECK(str(t, 2, "method") == "block_rebuild");
    CHECK(str(t, 3, "method") == "block_reuse");
    const bool naive_failed = str(t, 1, "converged") == "false";
    CHECK((naive_failed || num(t, 1, "iterations_per_solve") >= 3 * num(t, 2, "iterations_per_solve")));
    CHECK(num(t, 3, "setup_count") * 2 == num(t, 2, "setup_count"));
    CHECK_FALSE(str(t, 2, "speedup").empty());

    c.direct_max_dofs = 10;
    const Table s = analysis::run_solver_compare(c);
    CHECK(str(s, 0, "converged") == "skipped");
}

TEST_CASE("sweeps are deterministic across worker counts") {
    ExperimentConfig c = base_config();
    c.sweep.epsilon = {1, 100};
    c.compute_spectrum = false;
    const Table a = analysis::run_penalty_sweep(c);
    c.jobs = 2;
    const Table b = analysis::run_penalty_sweep(c);
    CHECK(equal_modulo_timing(a, b));
}

TEST_CASE("single solve report") {
    ExperimentConfig c = base_config();
    const analysis::SingleSolveOutcome o = analysis::run_single_solve(c);
    CHECK(o.report.converged);
    CHECK(o.solution.size() == probgen::generate(*c.gen).system.size());
    CHECK(o.json.find("\"report\"") != std::string::npos);
    CHECK(o.json.find("\"amg\"") != std::string::npos);
    c.gen->solid_grid = {12, 12, 12};
    c.gmres.max_iters = 1;
    c.gmres.rel_tol = 1e-14;
    CHECK_FALSE(analysis::run_single_solve(c).report.converged);
}
