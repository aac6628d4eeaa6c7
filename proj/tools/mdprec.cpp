// mdprec command line driver.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mdprec/analysis.hpp"
#include "mdprec/config.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/matrix_market.hpp"
#include "mdprec/probgen.hpp"
#include "mdprec/system_io.hpp"

namespace fs = std::filesystem;
using namespace mdprec;

namespace {

enum ExitCode : int { ok = 0, generic_failure = 1, config_error = 2, io_error = 3, not_converged = 4 };

struct Options {
    std::string command;
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<Index> jobs;
    bool to_stdout = false;
};

Mode command_mode(const std::string& cmd) {
    if (cmd == "gen") return Mode::generate;
    if (cmd == "solve") return Mode::single_solve;
    if (cmd == "spai-study") return Mode::spai_study;
    if (cmd == "penalty-sweep") return Mode::penalty_sweep;
    if (cmd == "refine-sweep") return Mode::refinement_sweep;
    return Mode::solver_compare;
}

fs::path output_dir(const Options& o) {
    const fs::path dir = o.out_dir ? fs::path(*o.out_dir) : fs::current_path();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void emit_table(const Options& o, const Table& t, const std::string& stem) {
    if (o.to_stdout) {
        write_csv(std::cout, t);
        std::cout.flush();
        return;
    }
    const fs::path path = output_dir(o) / (stem + ".csv");
    write_csv(path, t);
    std::cerr << "wrote " << path.string() << " (" << t.rows.size() << " rows)\n";
}

int run(const Options& o) {
    ExperimentConfig cfg = load_experiment_config(o.config_path);
    const Mode mode = command_mode(o.command);
    if (cfg.mode && *cfg.mode != mode) {
        throw ConfigError("config mode '" + std::string(mode_name(*cfg.mode)) + "' does not match command '" +
                          o.command + "'");
    }
    if (o.seed) {
        if (!cfg.gen) throw ConfigError("--seed needs a gen section in the config");
        cfg.gen->seed = *o.seed;
    }
    if (o.jobs) {
        cfg.jobs = *o.jobs;
        cfg.prec.spai.jobs = static_cast<unsigned>(*o.jobs);
    }
    cfg.validate();

    switch (mode) {
    case Mode::generate: {
        if (!cfg.gen) throw ConfigError("gen needs a gen section in the config");
        if (o.to_stdout) throw ConfigError("gen writes a directory; --stdout is not supported");
        const probgen::Generated g = probgen::generate(*cfg.gen);
        const fs::path dir = output_dir(o);
        save_system(g.system, dir, &g.meta, &*cfg.gen);
        std::cerr << "wrote system with " << g.system.n_beam() << " beam and " << g.system.n_solid()
                  << " solid dofs to " << dir.string() << "\n";
        return ok;
    }
    case Mode::single_solve: {
        const analysis::SingleSolveOutcome res = analysis::run_single_solve(cfg);
        if (o.to_stdout) {
            std::cout << res.json << "\n";
            std::cout.flush();
        } else {
            const fs::path dir = output_dir(o);
            write_text(dir / "report.json", res.json + "\n");
            if (cfg.write_solution) mm::write_vector(dir / "solution.vec", res.solution);
            std::cerr << "wrote " << (dir / "report.json").string() << "\n";
        }
        std::cerr << (res.report.converged ? "converged" : "did not converge") << " after "
                  << res.report.iterations << " iterations, relative residual "
                  << res.report.true_relative_residual << "\n";
        return res.report.converged ? ok : not_converged;
    }
    case Mode::spai_study:
        emit_table(o, analysis::run_spai_study(cfg), "spai_study");
        return ok;
    case Mode::penalty_sweep:
        emit_table(o, analysis::run_penalty_sweep(cfg), "penalty_sweep");
        return ok;
    case Mode::refinement_sweep:
        emit_table(o, analysis::run_refinement_sweep(cfg), "refinement_sweep");
        return ok;
    case Mode::solver_compare:
        emit_table(o, analysis::run_solver_compare(cfg), "solver_compare");
        return ok;
    }
    return generic_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block preconditioners for beam-solid penalty systems"};
    app.require_subcommand(1, 1);
    Options o;
    for (const char* name : {"gen", "solve", "spai-study", "penalty-sweep", "refine-sweep", "compare"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", o.config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", o.out_dir, "output directory");
        sub->add_option("--seed", o.seed, "overrides gen.seed");
        sub->add_option("--jobs", o.jobs, "concurrent sweep points")->check(CLI::PositiveNumber);
        sub->add_flag("--stdout", o.to_stdout, "write the data stream to stdout");
        sub->callback([&o, sub] { o.command = sub->get_name(); });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        return config_error;
    }

    try {
        return run(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return io_error;
    } catch (const DimensionError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return io_error;
    } catch (const InvariantError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return io_error;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return not_converged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return generic_failure;
    }
}
