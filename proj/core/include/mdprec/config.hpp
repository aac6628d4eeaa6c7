#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdprec/block_preconditioner.hpp"
#include "mdprec/krylov.hpp"
#include "mdprec/probgen.hpp"

namespace mdprec {

enum class Mode { generate, single_solve, spai_study, penalty_sweep, refinement_sweep, solver_compare };

std::string_view mode_name(Mode m);

struct SweepLists {
    std::vector<double> sigma;
    std::vector<int> ell;
    bool zip_sigma_ell = false; ///< pair sigma[i] with ell[i] instead of the product
    std::vector<double> epsilon;
    /// E^B / E^S values; empty keeps gen.beam_modulus.
    std::vector<double> stiffness_ratio;
    std::vector<std::array<Index, 3>> grid;
    std::vector<amg::TransferKind> transfer{amg::TransferKind::smoothed, amg::TransferKind::plain};
};

struct BaselineConfig {
    double ilut_fill = 1.0;
    double ilut_drop = 1e-4;
    Index max_iters = 1000;
};

struct ExperimentConfig {
    std::optional<Mode> mode;
    std::optional<probgen::GenConfig> gen;
    std::optional<std::filesystem::path> input; ///< directory written by save_system
    block::BlockPrecConfig prec;
    krylov::GmresConfig gmres;
    Index load_steps = 1;
    Index newton_steps_per_load_step = 1;
    double newton_perturbation = 0.01;
    SweepLists sweep;
    BaselineConfig baseline;
    Index direct_max_dofs = 20000;
    bool compute_spectrum = true;
    bool write_solution = false;
    Index jobs = 1;

    /// Mode-independent checks; throws ConfigError.
    void validate() const;
    /// Checks the lists a mode needs; throws ConfigError.
    void validate_for(Mode m) const;
};

/// Unknown keys are rejected with ConfigError naming the key path.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

probgen::GenConfig parse_gen_config(std::string_view json_text);
block::BlockPrecConfig parse_block_prec_config(std::string_view json_text);

std::string to_json(const probgen::GenConfig& cfg);
std::string to_json(const block::BlockPrecConfig& cfg);
std::string to_json(const krylov::SolveReport& r);
/// {sigma, ell, nnz_filtered, nnz_pattern, nnz_result, residual_fro[, rel_error_fro]}
std::string spai_record_json(const spai::SpaiConfig& cfg, const spai::SpaiResult& r, Index nnz_result,
                             std::optional<double> rel_error_fro);
/// Per-level rows / nnz and the total operator complexity.
std::string amg_summary_json(const amg::AmgHierarchy& h);

} // namespace mdprec
