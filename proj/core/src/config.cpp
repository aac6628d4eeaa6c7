#include "mdprec/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json_convert.hpp"
#include "mdprec/errors.hpp"

namespace mdprec {

std::string_view mode_name(Mode m) {
    switch (m) {
    case Mode::generate: return "gen";
    case Mode::single_solve: return "single_solve";
    case Mode::spai_study: return "spai_study";
    case Mode::penalty_sweep: return "penalty_sweep";
    case Mode::refinement_sweep: return "refinement_sweep";
    case Mode::solver_compare: return "solver_compare";
    }
    return "?";
}

namespace detail {

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError((path.empty() ? "config" : path) + " must be an object");
}

void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    require_object(j, path);
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) throw ConfigError("unknown key " + join(path, item.key()));
    }
}

template <class T>
void read(const json& j, const std::string& path, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ConfigError(join(path, key) + " must be a boolean");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ConfigError(join(path, key) + " must be an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (it->is_number_integer() && !it->is_number_unsigned() && it->get<long long>() < 0) {
                    throw ConfigError(join(path, key) + " must be non-negative");
                }
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw ConfigError(join(path, key) + " must be a number");
        }
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(join(path, key) + ": " + e.what());
    }
}

std::string read_string(const json& j, const std::string& path, const char* key, std::string dflt) {
    auto it = j.find(key);
    if (it == j.end()) return dflt;
    if (!it->is_string()) throw ConfigError(join(path, key) + " must be a string");
    return it->get<std::string>();
}

amg::TransferKind transfer_from(const std::string& s, const std::string& where) {
    if (s == "smoothed") return amg::TransferKind::smoothed;
    if (s == "plain") return amg::TransferKind::plain;
    throw ConfigError(where + ": expected \"smoothed\" or \"plain\", got \"" + s + "\"");
}

const char* transfer_name(amg::TransferKind k) {
    return k == amg::TransferKind::smoothed ? "smoothed" : "plain";
}

const char* smoother_name(amg::SmootherKind k) {
    switch (k) {
    case amg::SmootherKind::jacobi: return "jacobi";
    case amg::SmootherKind::gauss_seidel: return "gauss_seidel";
    case amg::SmootherKind::ilut: return "ilut";
    }
    return "?";
}

std::array<Index, 3> grid_from(const json& j, const std::string& where) {
    if (j.is_number_unsigned()) {
        const Index n = j.get<Index>();
        return {n, n, n};
    }
    if (!j.is_array() || j.size() != 3) throw ConfigError(where + " must be an integer or [nx, ny, nz]");
    std::array<Index, 3> g{};
    for (std::size_t i = 0; i < 3; ++i) {
        if (!j[i].is_number_unsigned()) throw ConfigError(where + " entries must be positive integers");
        g[i] = j[i].get<Index>();
    }
    return g;
}

spai::SpaiConfig spai_from_json(const json& j, const std::string& path) {
    reject_unknown(j, path, {"sigma", "ell", "enable_prefilter", "enable_postfilter",
                             "max_pattern_nnz_per_column", "jobs"});
    spai::SpaiConfig c;
    read(j, path, "sigma", c.sigma);
    read(j, path, "ell", c.ell);
    read(j, path, "enable_prefilter", c.enable_prefilter);
    read(j, path, "enable_postfilter", c.enable_postfilter);
    if (j.contains("max_pattern_nnz_per_column") && !j["max_pattern_nnz_per_column"].is_null()) {
        Index cap = 0;
        read(j, path, "max_pattern_nnz_per_column", cap);
        c.max_pattern_nnz_per_column = cap;
    }
    read(j, path, "jobs", c.jobs);
    return c;
}

amg::AmgConfig amg_from_json(const json& j, const std::string& path) {
    reject_unknown(j, path, {"transfer_kind", "prolongator_damping", "max_coarse_size", "max_levels",
                             "smoother_kind", "smoother_sweeps", "jacobi_damping", "ilut_fill",
                             "ilut_drop", "nullspace_dim", "strength_threshold", "smoother_overlap"});
    amg::AmgConfig c;
    c.transfer_kind = transfer_from(read_string(j, path, "transfer_kind", "smoothed"),
                                    join(path, "transfer_kind"));
    read(j, path, "prolongator_damping", c.prolongator_damping);
    read(j, path, "max_coarse_size", c.max_coarse_size);
    read(j, path, "max_levels", c.max_levels);
    const std::string sk = read_string(j, path, "smoother_kind", "ilut");
    if (sk == "jacobi") {
        c.smoother_kind = amg::SmootherKind::jacobi;
    } else if (sk == "gauss_seidel") {
        c.smoother_kind = amg::SmootherKind::gauss_seidel;
    } else if (sk == "ilut") {
        c.smoother_kind = amg::SmootherKind::ilut;
    } else {
        throw ConfigError(join(path, "smoother_kind") + ": unknown smoother \"" + sk + "\"");
    }
    read(j, path, "smoother_sweeps", c.smoother_sweeps);
    read(j, path, "jacobi_damping", c.jacobi_damping);
    read(j, path, "ilut_fill", c.ilut_fill);
    read(j, path, "ilut_drop", c.ilut_drop);
    read(j, path, "nullspace_dim", c.nullspace_dim);
    read(j, path, "strength_threshold", c.strength_threshold);
    read(j, path, "smoother_overlap", c.smoother_overlap);
    return c;
}

krylov::GmresConfig gmres_from_json(const json& j, const std::string& path) {
    reject_unknown(j, path, {"rel_tol", "max_iters", "restart"});
    krylov::GmresConfig c;
    read(j, path, "rel_tol", c.rel_tol);
    read(j, path, "max_iters", c.max_iters);
    read(j, path, "restart", c.restart);
    return c;
}

} // namespace

probgen::GenConfig gen_from_json(const json& j, const std::string& path) {
    reject_unknown(j, path, {"solid_grid", "dofs_per_node", "solid_modulus", "fiber_count",
                             "elements_per_fiber", "element_count_mode", "beam_modulus",
                             "penalty_pos", "penalty_rot", "fiber_length", "fiber_radius",
                             "dofs_per_beam_node", "soft_mode_ratio", "skew_perturbation",
                             "rot_asymmetry", "max_placement_attempts", "seed"});
    probgen::GenConfig c;
    if (j.contains("solid_grid")) c.solid_grid = grid_from(j["solid_grid"], join(path, "solid_grid"));
    read(j, path, "dofs_per_node", c.dofs_per_node);
    read(j, path, "solid_modulus", c.solid_modulus);
    read(j, path, "fiber_count", c.fiber_count);
    read(j, path, "elements_per_fiber", c.elements_per_fiber);
    const std::string mode = read_string(j, path, "element_count_mode", "fixed");
    if (mode == "fixed") {
        c.element_count_mode = probgen::ElementCountMode::fixed;
    } else if (mode == "uniform") {
        c.element_count_mode = probgen::ElementCountMode::uniform;
    } else {
        throw ConfigError(join(path, "element_count_mode") + ": expected \"fixed\" or \"uniform\"");
    }
    read(j, path, "beam_modulus", c.beam_modulus);
    read(j, path, "penalty_pos", c.penalty_pos);
    read(j, path, "penalty_rot", c.penalty_rot);
    read(j, path, "fiber_length", c.fiber_length);
    read(j, path, "fiber_radius", c.fiber_radius);
    read(j, path, "dofs_per_beam_node", c.dofs_per_beam_node);
    read(j, path, "soft_mode_ratio", c.soft_mode_ratio);
    read(j, path, "skew_perturbation", c.skew_perturbation);
    read(j, path, "rot_asymmetry", c.rot_asymmetry);
    read(j, path, "max_placement_attempts", c.max_placement_attempts);
    read(j, path, "seed", c.seed);
    c.validate();
    return c;
}

json gen_to_json(const probgen::GenConfig& c) {
    return json{{"solid_grid", c.solid_grid},
                {"dofs_per_node", c.dofs_per_node},
                {"solid_modulus", c.solid_modulus},
                {"fiber_count", c.fiber_count},
                {"elements_per_fiber", c.elements_per_fiber},
                {"element_count_mode",
                 c.element_count_mode == probgen::ElementCountMode::fixed ? "fixed" : "uniform"},
                {"beam_modulus", c.beam_modulus},
                {"penalty_pos", c.penalty_pos},
                {"penalty_rot", c.penalty_rot},
                {"fiber_length", c.fiber_length},
                {"fiber_radius", c.fiber_radius},
                {"dofs_per_beam_node", c.dofs_per_beam_node},
                {"soft_mode_ratio", c.soft_mode_ratio},
                {"skew_perturbation", c.skew_perturbation},
                {"rot_asymmetry", c.rot_asymmetry},
                {"max_placement_attempts", c.max_placement_attempts},
                {"seed", c.seed}};
}

block::BlockPrecConfig prec_from_json(const json& j, const std::string& path) {
    reject_unknown(j, path, {"kappa", "smoother_iters", "spai", "amg", "schur_cycles", "reuse_policy",
                             "literal_fixed_residual"});
    block::BlockPrecConfig c;
    read(j, path, "kappa", c.kappa);
    read(j, path, "smoother_iters", c.smoother_iters);
    if (j.contains("spai")) c.spai = spai_from_json(j["spai"], join(path, "spai"));
    if (j.contains("amg")) c.amg = amg_from_json(j["amg"], join(path, "amg"));
    read(j, path, "schur_cycles", c.schur_cycles);
    const std::string reuse = read_string(j, path, "reuse_policy", "rebuild_each_solve");
    if (reuse == "rebuild_each_solve") {
        c.reuse_policy = block::ReusePolicy::rebuild_each_solve;
    } else if (reuse == "reuse_within_load_step") {
        c.reuse_policy = block::ReusePolicy::reuse_within_load_step;
    } else {
        throw ConfigError(join(path, "reuse_policy") + ": unknown policy \"" + reuse + "\"");
    }
    read(j, path, "literal_fixed_residual", c.literal_fixed_residual);
    c.validate();
    return c;
}

json prec_to_json(const block::BlockPrecConfig& c) {
    json spai{{"sigma", c.spai.sigma},
              {"ell", c.spai.ell},
              {"enable_prefilter", c.spai.enable_prefilter},
              {"enable_postfilter", c.spai.enable_postfilter},
              {"jobs", c.spai.jobs}};
    spai["max_pattern_nnz_per_column"] =
        c.spai.max_pattern_nnz_per_column ? json(*c.spai.max_pattern_nnz_per_column) : json(nullptr);
    json amg{{"transfer_kind", transfer_name(c.amg.transfer_kind)},
             {"prolongator_damping", c.amg.prolongator_damping},
             {"max_coarse_size", c.amg.max_coarse_size},
             {"max_levels", c.amg.max_levels},
             {"smoother_kind", smoother_name(c.amg.smoother_kind)},
             {"smoother_sweeps", c.amg.smoother_sweeps},
             {"jacobi_damping", c.amg.jacobi_damping},
             {"ilut_fill", c.amg.ilut_fill},
             {"ilut_drop", c.amg.ilut_drop},
             {"nullspace_dim", c.amg.nullspace_dim},
             {"strength_threshold", c.amg.strength_threshold},
             {"smoother_overlap", c.amg.smoother_overlap}};
    return json{{"kappa", c.kappa},
                {"smoother_iters", c.smoother_iters},
                {"spai", spai},
                {"amg", amg},
                {"schur_cycles", c.schur_cycles},
                {"reuse_policy", c.reuse_policy == block::ReusePolicy::rebuild_each_solve
                                     ? "rebuild_each_solve"
                                     : "reuse_within_load_step"},
                {"literal_fixed_residual", c.literal_fixed_residual}};
}

json report_to_json(const krylov::SolveReport& r) {
    return json{{"iterations", r.iterations},
                {"converged", r.converged},
                {"residual_history", r.residual_history},
                {"true_relative_residual", r.true_relative_residual},
                {"setup_seconds", r.setup_seconds},
                {"solve_seconds", r.solve_seconds},
                {"total_seconds", r.total_seconds()}};
}

} // namespace detail

using detail::json;

void ExperimentConfig::validate() const {
    if (gen && input) throw ConfigError("config: give either gen or input, not both");
    prec.validate();
    gmres.validate();
    if (load_steps < 1) throw ConfigError("load_steps must be >= 1");
    if (newton_steps_per_load_step < 1) throw ConfigError("newton_steps_per_load_step must be >= 1");
    if (!(newton_perturbation >= 0.0)) throw ConfigError("newton_perturbation must be >= 0");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (baseline.max_iters < 1) throw ConfigError("baseline.max_iters must be >= 1");
    for (double s : sweep.sigma) {
        if (!(s >= 0.0)) throw ConfigError("sweep.sigma entries must be >= 0");
    }
    for (int l : sweep.ell) {
        if (l < 1) throw ConfigError("sweep.ell entries must be >= 1");
    }
    for (double e : sweep.epsilon) {
        if (!(e >= 0.0)) throw ConfigError("sweep.epsilon entries must be >= 0");
    }
    for (double r : sweep.stiffness_ratio) {
        if (!(r > 0.0)) throw ConfigError("sweep.stiffness_ratio entries must be > 0");
    }
    if (sweep.zip_sigma_ell && sweep.sigma.size() != sweep.ell.size()) {
        throw ConfigError("sweep.pairing \"zip\" needs sigma and ell of equal length");
    }
}

void ExperimentConfig::validate_for(Mode m) const {
    validate();
    const bool needs_grid_source = m == Mode::refinement_sweep;
    if (!gen && !input && !(needs_grid_source && !sweep.grid.empty())) {
        throw ConfigError("config: a gen section or an input directory is required");
    }
    switch (m) {
    case Mode::spai_study:
        if (sweep.sigma.empty() || sweep.ell.empty()) {
            throw ConfigError("spai_study needs nonempty sweep.sigma and sweep.ell");
        }
        break;
    case Mode::penalty_sweep:
        if (sweep.epsilon.empty()) throw ConfigError("penalty_sweep needs a nonempty sweep.epsilon");
        if (!gen) throw ConfigError("penalty_sweep needs a gen section");
        break;
    case Mode::refinement_sweep:
        if (sweep.grid.size() < 2) throw ConfigError("refinement_sweep needs at least two sweep.grid entries");
        if (!gen) throw ConfigError("refinement_sweep needs a gen section");
        for (std::size_t i = 1; i < sweep.grid.size(); ++i) {
            const auto& a = sweep.grid[i - 1];
            const auto& b = sweep.grid[i];
            if (!(b[0] >= a[0] && b[1] >= a[1] && b[2] >= a[2]) || b == a) {
                throw ConfigError("sweep.grid must be strictly refining");
            }
        }
        if (sweep.transfer.empty()) throw ConfigError("sweep.transfer must be nonempty");
        break;
    default: break;
    }
}

ExperimentConfig parse_experiment_config(std::string_view text) {
    json j;
    try {
        j = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    using detail::reject_unknown;
    reject_unknown(j, "", {"mode", "gen", "input", "prec", "gmres", "load_steps",
                           "newton_steps_per_load_step", "newton_perturbation", "sweep", "baseline",
                           "direct_max_dofs", "compute_spectrum", "write_solution", "jobs"});
    ExperimentConfig c;
    if (j.contains("mode")) {
        const std::string m = detail::read_string(j, "", "mode", "");
        if (m == "gen") {
            c.mode = Mode::generate;
        } else if (m == "single_solve" || m == "solve") {
            c.mode = Mode::single_solve;
        } else if (m == "spai_study") {
            c.mode = Mode::spai_study;
        } else if (m == "penalty_sweep") {
            c.mode = Mode::penalty_sweep;
        } else if (m == "refinement_sweep") {
            c.mode = Mode::refinement_sweep;
        } else if (m == "solver_compare") {
            c.mode = Mode::solver_compare;
        } else {
            throw ConfigError("mode: unknown mode \"" + m + "\"");
        }
    }
    if (j.contains("gen")) c.gen = detail::gen_from_json(j["gen"], "gen");
    if (j.contains("input")) c.input = detail::read_string(j, "", "input", "");
    if (j.contains("prec")) c.prec = detail::prec_from_json(j["prec"], "prec");
    if (j.contains("gmres")) c.gmres = detail::gmres_from_json(j["gmres"], "gmres");
    detail::read(j, "", "load_steps", c.load_steps);
    detail::read(j, "", "newton_steps_per_load_step", c.newton_steps_per_load_step);
    detail::read(j, "", "newton_perturbation", c.newton_perturbation);
    detail::read(j, "", "direct_max_dofs", c.direct_max_dofs);
    detail::read(j, "", "compute_spectrum", c.compute_spectrum);
    detail::read(j, "", "write_solution", c.write_solution);
    detail::read(j, "", "jobs", c.jobs);
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        reject_unknown(s, "sweep", {"sigma", "ell", "pairing", "epsilon", "stiffness_ratio", "grid", "transfer"});
        auto list = [&](const char* key, auto& out) {
            if (!s.contains(key)) return;
            if (!s[key].is_array()) throw ConfigError(std::string("sweep.") + key + " must be an array");
            try {
                out = s[key].get<std::decay_t<decltype(out)>>();
            } catch (const json::exception& e) {
                throw ConfigError(std::string("sweep.") + key + ": " + e.what());
            }
        };
        list("sigma", c.sweep.sigma);
        list("ell", c.sweep.ell);
        list("epsilon", c.sweep.epsilon);
        list("stiffness_ratio", c.sweep.stiffness_ratio);
        const std::string pairing = detail::read_string(s, "sweep", "pairing", "product");
        if (pairing != "product" && pairing != "zip") {
            throw ConfigError("sweep.pairing: expected \"product\" or \"zip\"");
        }
        c.sweep.zip_sigma_ell = pairing == "zip";
        if (s.contains("grid")) {
            if (!s["grid"].is_array()) throw ConfigError("sweep.grid must be an array");
            for (const auto& g : s["grid"]) c.sweep.grid.push_back(detail::grid_from(g, "sweep.grid"));
        }
        if (s.contains("transfer")) {
            if (!s["transfer"].is_array()) throw ConfigError("sweep.transfer must be an array");
            c.sweep.transfer.clear();
            for (const auto& t : s["transfer"]) {
                if (!t.is_string()) throw ConfigError("sweep.transfer entries must be strings");
                c.sweep.transfer.push_back(detail::transfer_from(t.get<std::string>(), "sweep.transfer"));
            }
        }
    }
    if (j.contains("baseline")) {
        const json& b = j["baseline"];
        reject_unknown(b, "baseline", {"ilut_fill", "ilut_drop", "max_iters"});
        detail::read(b, "baseline", "ilut_fill", c.baseline.ilut_fill);
        detail::read(b, "baseline", "ilut_drop", c.baseline.ilut_drop);
        detail::read(b, "baseline", "max_iters", c.baseline.max_iters);
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return parse_experiment_config(s.str());
}

probgen::GenConfig parse_gen_config(std::string_view text) {
    try {
        return detail::gen_from_json(json::parse(text.begin(), text.end()), "gen");
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("gen config is not valid JSON: ") + e.what());
    }
}

block::BlockPrecConfig parse_block_prec_config(std::string_view text) {
    try {
        return detail::prec_from_json(json::parse(text.begin(), text.end()), "prec");
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("prec config is not valid JSON: ") + e.what());
    }
}

std::string to_json(const probgen::GenConfig& cfg) { return detail::gen_to_json(cfg).dump(); }
std::string to_json(const block::BlockPrecConfig& cfg) { return detail::prec_to_json(cfg).dump(); }
std::string to_json(const krylov::SolveReport& r) { return detail::report_to_json(r).dump(); }

std::string spai_record_json(const spai::SpaiConfig& cfg, const spai::SpaiResult& r, Index nnz_result,
                             std::optional<double> rel_error_fro) {
    json j{{"sigma", cfg.sigma},
           {"ell", cfg.ell},
           {"nnz_filtered", r.filtered_graph_nnz},
           {"nnz_pattern", r.pattern_nnz},
           {"nnz_result", nnz_result},
           {"residual_fro", r.residual_fro}};
    if (rel_error_fro) j["rel_error_fro"] = *rel_error_fro;
    return j.dump();
}

std::string amg_summary_json(const amg::AmgHierarchy& h) {
    json levels = json::array();
    const double nnz0 = h.num_levels() ? static_cast<double>(h.levels()[0].a.nnz()) : 1.0;
    for (const auto& lv : h.levels()) {
        levels.push_back({{"rows", lv.a.rows()},
                          {"nnz", lv.a.nnz()},
                          {"operator_complexity_contribution",
                           nnz0 > 0 ? static_cast<double>(lv.a.nnz()) / nnz0 : 0.0}});
    }
    return json{{"levels", levels},
                {"operator_complexity", h.operator_complexity()},
                {"stagnated", h.stagnated()}}
        .dump();
}

} // namespace mdprec
