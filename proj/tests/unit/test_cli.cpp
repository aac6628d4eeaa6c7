#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "mdprec/block_system.hpp"
#include "mdprec/csv.hpp"
#include "mdprec/system_io.hpp"

using namespace mdprec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mdprec_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run(const std::string& args, const fs::path& out_file = {}, const fs::path& err_file = {}) {
    std::string cmd = std::string(MDPREC_CLI_PATH) + " " + args;
    cmd += " > " + (out_file.empty() ? std::string("/dev/null") : out_file.string());
    cmd += " 2> " + (err_file.empty() ? std::string("/dev/null") : err_file.string());
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* small_gen = R"("gen": {"solid_grid": [5, 5, 5], "fiber_count": 10})";

} // namespace

TEST_CASE("identity system converges in one iteration") {
    const fs::path dir = scratch("identity");
    BlockSystem s;
    s.a = CsrMatrix::identity(2);
    s.c = CsrMatrix::identity(3);
    s.b1t = CsrMatrix(2, 3);
    s.b2 = CsrMatrix(3, 2);
    s.rhs_beam = {1, 2};
    s.rhs_solid = {3, 4, 5};
    s.beam_block_boundaries = {0, 1, 2};
    save_system(s, dir / "sys");
    write(dir / "cfg.json", R"({"input": ")" + (dir / "sys").string() + R"(", "write_solution": true})");
    CHECK(run("solve --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()) == 0);
    const std::string report = slurp(dir / "out" / "report.json");
    CHECK(report.find("\"iterations\": 1") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "solution.vec"));
    fs::remove_all(dir);
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("codes");
    write(dir / "hard.json", R"({"gen": {"solid_grid": [12, 12, 12], "fiber_count": 10}, "gmres": {"max_iters": 1, "rel_tol": 1e-14}})");
    CHECK(run("solve --config " + (dir / "hard.json").string() + " --stdout") == 4);

    write(dir / "unknown.json", R"({"gen": {"no_such_key": 1}})");
    CHECK(run("solve --config " + (dir / "unknown.json").string()) == 2);
    write(dir / "notjson.json", "{");
    CHECK(run("solve --config " + (dir / "notjson.json").string()) == 2);
    CHECK(run("solve") == 2);
    CHECK(run("frobnicate --config x") == 2);
    write(dir / "mismatch.json", std::string("{\"mode\": \"penalty_sweep\", ") + small_gen + "}");
    CHECK(run("solve --config " + (dir / "mismatch.json").string()) == 2);

    CHECK(run("solve --config " + (dir / "missing.json").string()) == 3);
    write(dir / "noinput.json", R"({"input": ")" + (dir / "nowhere").string() + R"("})");
    CHECK(run("solve --config " + (dir / "noinput.json").string()) == 3);
    fs::remove_all(dir);
}

TEST_CASE("gen then solve and deterministic solutions") {
    const fs::path dir = scratch("gen");
    write(dir / "gen.json", std::string("{") + small_gen + "}");
    CHECK(run("gen --config " + (dir / "gen.json").string() + " --out " + (dir / "sys").string() + " --seed 5") == 0);
    const LoadedSystem l = load_system(dir / "sys");
    CHECK(l.system.n_beam() == 120);
    CHECK(l.meta_json.find("\"seed\": 5") != std::string::npos);

    write(dir / "solve.json", std::string("{") + small_gen + R"(, "write_solution": true, "prec": {"amg": {"nullspace_dim": 3}}})");
    CHECK(run("solve --config " + (dir / "solve.json").string() + " --out " + (dir / "r1").string()) == 0);
    CHECK(run("solve --config " + (dir / "solve.json").string() + " --out " + (dir / "r2").string()) == 0);
    CHECK(slurp(dir / "r1" / "solution.vec") == slurp(dir / "r2" / "solution.vec"));
    fs::remove_all(dir);
}

TEST_CASE("stdout carries only the csv stream") {
    const fs::path dir = scratch("stdout");
    write(dir / "pen.json", std::string("{") + small_gen + R"(, "compute_spectrum": false, "sweep": {"epsilon": [1, 10]}})");
    CHECK(run("penalty-sweep --config " + (dir / "pen.json").string() + " --stdout --jobs 2", dir / "out.csv", dir / "err.txt") == 0);
    const Table t = parse_csv(slurp(dir / "out.csv"));
    CHECK(t.header.front() == "epsilon");
    CHECK(t.rows.size() == 2);
    CHECK(run("penalty-sweep --config " + (dir / "pen.json").string() + " --out " + (dir / "o").string(), dir / "quiet.txt") == 0);
    CHECK(slurp(dir / "quiet.txt").empty());
    CHECK(equal_modulo_timing(parse_csv(slurp(dir / "o" / "penalty_sweep.csv")), t));
    fs::remove_all(dir);
}
