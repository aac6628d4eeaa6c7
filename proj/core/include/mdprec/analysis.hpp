#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "mdprec/block_preconditioner.hpp"
#include "mdprec/config.hpp"
#include "mdprec/csv.hpp"
#include "mdprec/krylov.hpp"

namespace mdprec::analysis {

struct LoadStepSummary {
    std::vector<krylov::SolveReport> solves; ///< in load-step / Newton-step order
    Index setup_count = 0;
    double setup_seconds = 0.0;
    double solve_seconds = 0.0;
    double mean_iterations = 0.0;          ///< per linear solve
    double mean_iterations_per_load_step = 0.0;
    bool all_converged = true;
    Vector last_solution;
};

/// Right-hand side of Newton step k in load step s: the load scaled by
/// (s + 1) / load_steps with a seeded relative perturbation of the given size.
Vector newton_rhs(const BlockSystem& sys, Index s, Index k, Index load_steps, double perturbation,
                  std::uint64_t seed);

struct SolverHooks {
    /// Called before the first solve and whenever the reuse policy asks for it.
    std::function<void()> setup;
    /// Solves with zero initial guess.
    std::function<krylov::GmresResult(std::span<const double> rhs)> solve;
};

/// Quasi-static loop: load_steps x newton_steps solves on the same matrix.
LoadStepSummary run_load_steps(const BlockSystem& sys, block::ReusePolicy policy, Index load_steps,
                               Index newton_steps, double perturbation, std::uint64_t seed,
                               const SolverHooks& hooks);

/// The same loop with the block preconditioner inside GMRES.
LoadStepSummary run_block_load_steps(const BlockSystem& sys, const block::BlockPrecConfig& prec,
                                     const krylov::GmresConfig& gmres, Index load_steps,
                                     Index newton_steps, double perturbation, std::uint64_t seed);

/// One GMRES solve with the given preconditioner.
krylov::GmresResult solve_block(const BlockSystem& sys, const block::BlockPreconditioner& prec,
                                std::span<const double> rhs, const krylov::GmresConfig& gmres);

/// ||M - A^{-1}||_F / ||A^{-1}||_F with a dense inverse; nullopt above max_rows.
std::optional<double> inverse_relative_error(const CsrMatrix& a, const CsrMatrix& m,
                                             Index max_rows = 2000);

/// The system described by cfg (generated or loaded), plus notes for reports.
struct SystemSource {
    BlockSystem system;
    std::optional<probgen::GenMetadata> meta;
    bool rhs_defaulted = false;
};
SystemSource obtain_system(const ExperimentConfig& cfg);

std::uint64_t experiment_seed(const ExperimentConfig& cfg);

Table run_spai_study(const ExperimentConfig& cfg);
Table run_penalty_sweep(const ExperimentConfig& cfg);
Table run_refinement_sweep(const ExperimentConfig& cfg);
Table run_solver_compare(const ExperimentConfig& cfg);

struct SingleSolveOutcome {
    krylov::SolveReport report;
    Vector solution;
    std::string json;
};
SingleSolveOutcome run_single_solve(const ExperimentConfig& cfg);

} // namespace mdprec::analysis
