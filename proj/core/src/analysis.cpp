#include "mdprec/analysis.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <random>
#include <thread>

#include "json_convert.hpp"
#include "mdprec/dense.hpp"
#include "mdprec/direct_solver.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/probgen.hpp"
#include "mdprec/sparse_ops.hpp"
#include "mdprec/spectrum.hpp"
#include "mdprec/system_io.hpp"

namespace mdprec::analysis {

using detail::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; results in index order.
template <class T, class Fn>
std::vector<T> parallel_map(Index n, Index jobs, Fn fn) {
    std::vector<T> out(n);
    if (jobs <= 1 || n <= 1) {
        for (Index i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::exception_ptr> errors(n);
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    for (Index w = 0; w < std::min(jobs, n); ++w) {
        pool.emplace_back([&] {
            for (Index i = next++; i < n; i = next++) {
                try {
                    out[i] = fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

} // namespace

Vector newton_rhs(const BlockSystem& sys, Index s, Index k, Index load_steps, double perturbation,
                  std::uint64_t seed) {
    Vector rhs = monolithic_rhs(sys);
    const double scale = static_cast<double>(s + 1) / static_cast<double>(load_steps);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (double& v : rhs) v *= scale * (1.0 + perturbation * unif(rng));
    return rhs;
}

LoadStepSummary run_load_steps(const BlockSystem& sys, block::ReusePolicy policy, Index load_steps,
                               Index newton_steps, double perturbation, std::uint64_t seed,
                               const SolverHooks& hooks) {
    LoadStepSummary out;
    double total_iters = 0.0;
    for (Index s = 0; s < load_steps; ++s) {
        for (Index k = 0; k < newton_steps; ++k) {
            if (k == 0 || policy == block::ReusePolicy::rebuild_each_solve) {
                const auto t0 = Clock::now();
                hooks.setup();
                out.setup_seconds += seconds_since(t0);
                ++out.setup_count;
            }
            const Vector rhs = newton_rhs(sys, s, k, load_steps, perturbation, seed);
            krylov::GmresResult res = hooks.solve(rhs);
            out.solve_seconds += res.report.solve_seconds;
            total_iters += static_cast<double>(res.report.iterations);
            out.all_converged = out.all_converged && res.report.converged;
            out.solves.push_back(std::move(res.report));
            out.last_solution = std::move(res.x);
        }
    }
    const double n_solves = static_cast<double>(load_steps * newton_steps);
    out.mean_iterations = total_iters / n_solves;
    out.mean_iterations_per_load_step = total_iters / static_cast<double>(load_steps);
    return out;
}

krylov::GmresResult solve_block(const BlockSystem& sys, const block::BlockPreconditioner& prec,
                                std::span<const double> rhs, const krylov::GmresConfig& gmres) {
    krylov::LinearOperator op = [&sys](std::span<const double> x, std::span<double> y) {
        block_operator_apply(sys, x, y);
    };
    krylov::LinearOperator p = [&](std::span<const double> r, std::span<double> z) {
        prec.apply(sys, r, z);
    };
    return krylov::gmres(op, p, rhs, gmres);
}

LoadStepSummary run_block_load_steps(const BlockSystem& sys, const block::BlockPrecConfig& prec,
                                     const krylov::GmresConfig& gmres, Index load_steps,
                                     Index newton_steps, double perturbation, std::uint64_t seed) {
    std::optional<block::BlockPreconditioner> p;
    SolverHooks hooks;
    hooks.setup = [&] {
        if (p) {
            p->rebuild(sys);
        } else {
            p.emplace(block::setup(sys, prec));
        }
    };
    hooks.solve = [&](std::span<const double> rhs) {
        krylov::GmresResult r = solve_block(sys, *p, rhs, gmres);
        r.report.setup_seconds = p->last_setup_seconds();
        return r;
    };
    LoadStepSummary out =
        run_load_steps(sys, prec.reuse_policy, load_steps, newton_steps, perturbation, seed, hooks);
    if (p && p->setup_counter() != out.setup_count) {
        throw InvariantError("setup counter disagrees with the load-step driver");
    }
    return out;
}

std::optional<double> inverse_relative_error(const CsrMatrix& a, const CsrMatrix& m, Index max_rows) {
    if (a.rows() > max_rows || a.rows() == 0) return std::nullopt;
    const DenseMatrix inv = DenseLu(DenseMatrix::from_csr(a)).inverse();
    const DenseMatrix md = DenseMatrix::from_csr(m);
    double num = 0.0, den = 0.0;
    for (Index j = 0; j < inv.cols(); ++j) {
        for (Index i = 0; i < inv.rows(); ++i) {
            const double d = md(i, j) - inv(i, j);
            num += d * d;
            den += inv(i, j) * inv(i, j);
        }
    }
    return std::sqrt(num / den);
}

std::uint64_t experiment_seed(const ExperimentConfig& cfg) { return cfg.gen ? cfg.gen->seed : 0; }

SystemSource obtain_system(const ExperimentConfig& cfg) {
    SystemSource src;
    if (cfg.gen) {
        probgen::Generated g = probgen::generate(*cfg.gen);
        src.system = std::move(g.system);
        src.meta = std::move(g.meta);
    } else if (cfg.input) {
        LoadedSystem l = load_system(*cfg.input);
        src.system = std::move(l.system);
        src.rhs_defaulted = l.rhs_defaulted;
    } else {
        throw ConfigError("config: a gen section or an input directory is required");
    }
    return src;
}

namespace {

const char* transfer_label(amg::TransferKind k) {
    return k == amg::TransferKind::smoothed ? "smoothed" : "plain";
}

} // namespace

Table run_spai_study(const ExperimentConfig& cfg) {
    cfg.validate_for(Mode::spai_study);
    const SystemSource src = obtain_system(cfg);
    const BlockSystem& sys = src.system;
    std::vector<std::pair<double, int>> points;
    if (cfg.sweep.zip_sigma_ell) {
        for (std::size_t i = 0; i < cfg.sweep.sigma.size(); ++i) points.emplace_back(cfg.sweep.sigma[i], cfg.sweep.ell[i]);
    } else {
        for (double s : cfg.sweep.sigma) {
            for (int l : cfg.sweep.ell) points.emplace_back(s, l);
        }
    }
    Table t;
    t.header = {"sigma", "ell", "nnz_a", "nnz_filtered", "nnz_pattern", "nnz_result", "residual_fro",
                "rel_error_fro", "iterations_per_solve", "iterations_per_load_step", "converged",
                "setup_seconds", "solve_seconds", "total_seconds"};
    const std::uint64_t seed = experiment_seed(cfg);
    auto rows = parallel_map<std::vector<std::string>>(points.size(), cfg.jobs, [&](Index i) {
        block::BlockPrecConfig prec = cfg.prec;
        prec.spai.sigma = points[i].first;
        prec.spai.ell = points[i].second;
        const spai::SpaiResult sp = spai::build_spai(sys.a, prec.spai);
        const std::optional<double> err = inverse_relative_error(sys.a, sp.approx_inverse);
        const LoadStepSummary sum = run_block_load_steps(sys, prec, cfg.gmres, cfg.load_steps,
                                                         cfg.newton_steps_per_load_step,
                                                         cfg.newton_perturbation, seed);
        return std::vector<std::string>{
            cell(points[i].first), cell(points[i].second), cell(sys.a.nnz()), cell(sp.filtered_graph_nnz),
            cell(sp.pattern_nnz), cell(sp.approx_inverse.nnz()), cell(sp.residual_fro),
            err ? cell(*err) : std::string(), cell(sum.mean_iterations),
            cell(sum.mean_iterations_per_load_step), cell(sum.all_converged),
            seconds_cell(sum.setup_seconds), seconds_cell(sum.solve_seconds),
            seconds_cell(sum.setup_seconds + sum.solve_seconds)};
    });
    for (auto& r : rows) t.add_row(std::move(r));
    return t;
}

Table run_penalty_sweep(const ExperimentConfig& cfg) {
    cfg.validate_for(Mode::penalty_sweep);
    std::vector<std::pair<double, double>> points; // (epsilon, beam modulus)
    const std::vector<double> ratios =
        cfg.sweep.stiffness_ratio.empty() ? std::vector<double>{cfg.gen->beam_modulus / cfg.gen->solid_modulus}
                                          : cfg.sweep.stiffness_ratio;
    for (double r : ratios) {
        for (double e : cfg.sweep.epsilon) points.emplace_back(e, r * cfg.gen->solid_modulus);
    }
    Table t;
    t.header = {"epsilon", "beam_modulus", "solid_modulus", "n_dofs", "lambda_min", "lambda_max", "ratio",
                "one_norm_condition", "symmetrized", "iterations_per_solve", "iterations_per_load_step",
                "converged", "setup_seconds", "solve_seconds", "total_seconds"};
    auto rows = parallel_map<std::vector<std::string>>(points.size(), cfg.jobs, [&](Index i) {
        probgen::GenConfig gen = *cfg.gen;
        gen.penalty_pos = points[i].first;
        gen.beam_modulus = points[i].second;
        const probgen::Generated g = probgen::generate(gen);
        std::vector<std::string> row{cell(gen.penalty_pos), cell(gen.beam_modulus), cell(gen.solid_modulus),
                                     cell(g.system.size())};
        if (cfg.compute_spectrum) {
            const krylov::SpectrumReport sr = krylov::lambda_extremes(assemble_monolithic(g.system));
            row.insert(row.end(), {cell(sr.lambda_min), cell(sr.lambda_max), cell(sr.ratio),
                                   cell(sr.one_norm_condition), cell(sr.symmetrized)});
        } else {
            row.insert(row.end(), 5, std::string());
        }
        const LoadStepSummary sum = run_block_load_steps(g.system, cfg.prec, cfg.gmres, cfg.load_steps,
                                                         cfg.newton_steps_per_load_step,
                                                         cfg.newton_perturbation, gen.seed);
        row.insert(row.end(), {cell(sum.mean_iterations), cell(sum.mean_iterations_per_load_step),
                               cell(sum.all_converged), seconds_cell(sum.setup_seconds),
                               seconds_cell(sum.solve_seconds),
                               seconds_cell(sum.setup_seconds + sum.solve_seconds)});
        return row;
    });
    for (auto& r : rows) t.add_row(std::move(r));
    return t;
}

Table run_refinement_sweep(const ExperimentConfig& cfg) {
    cfg.validate_for(Mode::refinement_sweep);
    struct Point {
        Index grid;
        amg::TransferKind transfer;
        bool reuse;
    };
    std::vector<Point> points;
    for (Index g = 0; g < cfg.sweep.grid.size(); ++g) {
        for (amg::TransferKind tk : cfg.sweep.transfer) {
            for (bool reuse : {false, true}) points.push_back({g, tk, reuse});
        }
    }
    // One system per grid, shared by its variants.
    auto systems = parallel_map<std::shared_ptr<const BlockSystem>>(cfg.sweep.grid.size(), cfg.jobs, [&](Index g) {
        probgen::GenConfig gen = *cfg.gen;
        gen.solid_grid = cfg.sweep.grid[g];
        return std::make_shared<const BlockSystem>(probgen::generate(gen).system);
    });
    Table t;
    t.header = {"nx", "ny", "nz", "n_dofs", "n_beam", "n_solid", "transfer", "reuse", "amg_levels",
                "operator_complexity", "iterations_per_solve", "iterations_per_load_step", "converged",
                "setup_count", "setup_seconds", "solve_seconds", "total_seconds"};
    auto rows = parallel_map<std::vector<std::string>>(points.size(), cfg.jobs, [&](Index i) {
        const Point& p = points[i];
        const BlockSystem& sys = *systems[p.grid];
        block::BlockPrecConfig prec = cfg.prec;
        prec.amg.transfer_kind = p.transfer;
        prec.reuse_policy = p.reuse ? block::ReusePolicy::reuse_within_load_step
                                    : block::ReusePolicy::rebuild_each_solve;
        const LoadStepSummary sum = run_block_load_steps(sys, prec, cfg.gmres, cfg.load_steps,
                                                         cfg.newton_steps_per_load_step,
                                                         cfg.newton_perturbation, cfg.gen->seed);
        const block::BlockPreconditioner probe = block::setup(sys, prec);
        const auto& g = cfg.sweep.grid[p.grid];
        return std::vector<std::string>{
            cell(g[0]), cell(g[1]), cell(g[2]), cell(sys.size()), cell(sys.n_beam()), cell(sys.n_solid()),
            transfer_label(p.transfer), cell(p.reuse), cell(probe.amg_hierarchy().num_levels()),
            cell(probe.amg_hierarchy().operator_complexity()), cell(sum.mean_iterations),
            cell(sum.mean_iterations_per_load_step), cell(sum.all_converged), cell(sum.setup_count),
            seconds_cell(sum.setup_seconds), seconds_cell(sum.solve_seconds),
            seconds_cell(sum.setup_seconds + sum.solve_seconds)};
    });
    for (auto& r : rows) t.add_row(std::move(r));
    return t;
}

Table run_solver_compare(const ExperimentConfig& cfg) {
    cfg.validate_for(Mode::solver_compare);
    std::vector<std::optional<std::array<Index, 3>>> grids;
    if (cfg.sweep.grid.empty()) {
        grids.emplace_back(std::nullopt);
    } else {
        if (!cfg.gen) throw ConfigError("solver_compare with sweep.grid needs a gen section");
        for (const auto& g : cfg.sweep.grid) grids.emplace_back(g);
    }
    Table t;
    t.header = {"nx", "ny", "nz", "n_dofs", "method", "iterations_per_solve", "iterations_per_load_step",
                "converged", "setup_count", "setup_seconds", "solve_seconds", "total_seconds", "speedup"};
    const std::uint64_t seed = experiment_seed(cfg);
    for (const auto& grid : grids) {
        BlockSystem sys;
        std::array<Index, 3> g{0, 0, 0};
        if (grid) {
            probgen::GenConfig gen = *cfg.gen;
            gen.solid_grid = *grid;
            sys = probgen::generate(gen).system;
            g = *grid;
        } else {
            sys = obtain_system(cfg).system;
            if (cfg.gen) g = cfg.gen->solid_grid;
        }
        const Index n = sys.size();
        const CsrMatrix mono = assemble_monolithic(sys);
        struct MethodRow {
            std::string name;
            LoadStepSummary sum;
            bool skipped = false;
        };
        std::vector<MethodRow> methods;

        // Direct: one sparse LU per load step on the monolithic matrix.
        if (n <= cfg.direct_max_dofs) {
            std::optional<SparseLu> lu;
            SolverHooks h;
            h.setup = [&] { lu.emplace(mono); };
            h.solve = [&](std::span<const double> rhs) {
                const auto t0 = Clock::now();
                krylov::GmresResult r;
                r.x = lu->solve(rhs);
                r.report.solve_seconds = seconds_since(t0);
                Vector res(n);
                residual(mono, rhs, r.x, res);
                const double nb = norm2(rhs);
                r.report.true_relative_residual = nb > 0 ? norm2(res) / nb : 0.0;
                r.report.converged = std::isfinite(r.report.true_relative_residual);
                r.report.residual_history = {1.0};
                return r;
            };
            methods.push_back({"direct", run_load_steps(sys, block::ReusePolicy::reuse_within_load_step,
                                                         cfg.load_steps, cfg.newton_steps_per_load_step,
                                                         cfg.newton_perturbation, seed, h)});
        } else {
            methods.push_back({"direct", {}, true});
        }

        // Naive: one-level ILUT of the monolithic matrix, rebuilt per solve.
        {
            std::optional<block::IlutPreconditioner> ilu;
            krylov::GmresConfig gc = cfg.gmres;
            gc.max_iters = cfg.baseline.max_iters;
            SolverHooks h;
            bool factor_failed = false;
            h.setup = [&] {
                try {
                    ilu.emplace(mono, cfg.baseline.ilut_fill, cfg.baseline.ilut_drop);
                } catch (const NumericalError&) {
                    ilu.reset();
                    factor_failed = true;
                }
            };
            h.solve = [&](std::span<const double> rhs) {
                if (!ilu) {
                    krylov::GmresResult r;
                    r.x.assign(n, 0.0);
                    r.report.iterations = gc.max_iters;
                    r.report.converged = false;
                    return r;
                }
                krylov::LinearOperator p = [&](std::span<const double> r, std::span<double> z) {
                    ilu->apply(r, z);
                };
                return krylov::gmres(krylov::matrix_operator(mono), p, rhs, gc);
            };
            methods.push_back({"naive", run_load_steps(sys, block::ReusePolicy::rebuild_each_solve,
                                                        cfg.load_steps, cfg.newton_steps_per_load_step,
                                                        cfg.newton_perturbation, seed, h)});
            (void)factor_failed;
        }

        for (block::ReusePolicy policy :
             {block::ReusePolicy::rebuild_each_solve, block::ReusePolicy::reuse_within_load_step}) {
            block::BlockPrecConfig prec = cfg.prec;
            prec.reuse_policy = policy;
            methods.push_back({policy == block::ReusePolicy::rebuild_each_solve ? "block_rebuild" : "block_reuse",
                               run_block_load_steps(sys, prec, cfg.gmres, cfg.load_steps,
                                                    cfg.newton_steps_per_load_step, cfg.newton_perturbation,
                                                    seed)});
        }

        const double t_direct =
            methods[0].skipped ? 0.0 : methods[0].sum.setup_seconds + methods[0].sum.solve_seconds;
        for (const MethodRow& m : methods) {
            if (m.skipped) {
                t.add_row({cell(g[0]), cell(g[1]), cell(g[2]), cell(n), m.name, "", "", "skipped", "0", "", "",
                           "", ""});
                continue;
            }
            const double total = m.sum.setup_seconds + m.sum.solve_seconds;
            t.add_row({cell(g[0]), cell(g[1]), cell(g[2]), cell(n), m.name, cell(m.sum.mean_iterations),
                       cell(m.sum.mean_iterations_per_load_step), cell(m.sum.all_converged),
                       cell(m.sum.setup_count), seconds_cell(m.sum.setup_seconds),
                       seconds_cell(m.sum.solve_seconds), seconds_cell(total),
                       t_direct > 0.0 && total > 0.0 ? seconds_cell(t_direct / total) : std::string()});
        }
    }
    return t;
}

SingleSolveOutcome run_single_solve(const ExperimentConfig& cfg) {
    cfg.validate_for(Mode::single_solve);
    const SystemSource src = obtain_system(cfg);
    const BlockSystem& sys = src.system;
    const auto t0 = Clock::now();
    const block::BlockPreconditioner prec = block::setup(sys, cfg.prec);
    const double setup_seconds = seconds_since(t0);
    krylov::GmresResult res = solve_block(sys, prec, monolithic_rhs(sys), cfg.gmres);
    res.report.setup_seconds = setup_seconds;

    json j;
    j["sizes"] = {{"beam", sys.n_beam()}, {"solid", sys.n_solid()}};
    j["report"] = detail::report_to_json(res.report);
    j["spai"] = json::parse(spai_record_json(cfg.prec.spai, prec.spai_stats(), prec.ainv().nnz(), std::nullopt));
    j["schur_nnz"] = prec.schur_hat().nnz();
    j["amg"] = sys.n_solid() > 0 ? json::parse(amg_summary_json(prec.amg_hierarchy())) : json::object();
    j["setup_counter"] = prec.setup_counter();
    j["prec"] = detail::prec_to_json(cfg.prec);
    if (src.rhs_defaulted) j["warnings"] = json::array({"rhs.vec missing; right-hand sides set to zero"});

    SingleSolveOutcome out;
    out.report = res.report;
    out.solution = std::move(res.x);
    out.json = j.dump(2);
    return out;
}

} // namespace mdprec::analysis
