#include <doctest.h>

#include <filesystem>
#include <set>
#include <fstream>
#include <json.hpp>

#include "helpers.hpp"
#include "mdprec/block_system.hpp"
#include "mdprec/errors.hpp"
#include "mdprec/matrix_market.hpp"
#include "mdprec/probgen.hpp"
#include "mdprec/spai.hpp"
#include "mdprec/spectrum.hpp"
#include "mdprec/system_io.hpp"

using namespace mdprec;
using testing::dense;
namespace fs = std::filesystem;

namespace {

probgen::GenConfig small_gen() {
    probgen::GenConfig g;
    g.solid_grid = {6, 6, 6};
    g.fiber_count = 20;
    return g;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mdprec_unit_" + name);
    fs::remove_all(p);
    return p;
}

bool all_zero(const CsrMatrix& m) {
    for (double v : m.values()) {
        if (v != 0.0) return false;
    }
    return true;
}

} // namespace

TEST_CASE("generator examples") {
    probgen::GenConfig g = small_gen();
    g.fiber_count = 0;
    const probgen::Generated none = probgen::generate(g);
    CHECK(none.system.n_beam() == 0);
    CHECK(none.system.b1t.nnz() == 0);
    CHECK(none.system.b2.nnz() == 0);
    CHECK(bitwise_equal(none.system.c, probgen::solid_stiffness(g)));
    CHECK(none.system.n_solid() == probgen::solid_dof_count(g));
    CHECK(none.system.n_solid() == 3 * 7 * 7 * 6);

    g = small_gen();
    g.penalty_pos = 0.0;
    const probgen::Generated free = probgen::generate(g);
    CHECK(all_zero(free.system.b1t));
    CHECK(all_zero(free.system.b2));
    CHECK(dense(free.system.c) == dense(probgen::solid_stiffness(g)));

    g = probgen::GenConfig{};
    g.solid_grid = {14, 14, 14};
    g.fiber_count = 50;
    const probgen::Generated tc1 = probgen::generate(g);
    const CsrMatrix& a = tc1.system.a;
    CHECK(a.rows() == 600);
    CHECK(a.nnz() == 7200);
    CHECK(tc1.meta.beam_block_boundaries.size() == 51);
    for (Index b = 0; b < 50; ++b) {
        const Index s = tc1.meta.beam_block_boundaries[b];
        CHECK(tc1.meta.beam_block_boundaries[b + 1] - s == 12);
        for (Index i = s; i < s + 12; ++i) {
            CHECK(a.row_cols(i).size() == 12);
            CHECK(a.row_cols(i).front() == s);
        }
    }
}

TEST_CASE("generator invariants") {
    const probgen::GenConfig g = small_gen();
    const probgen::Generated gen = probgen::generate(g);
    const BlockSystem& s = gen.system;
    CHECK_NOTHROW(validate(s));
    CHECK(asymmetry(s.a) <= 1e-13 * matrix_norms(s.a).frobenius);
    CHECK(asymmetry(s.c) <= 1e-13 * matrix_norms(s.c).frobenius);
    CHECK((dense(s.b1t) - dense(s.b2).transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    const Eigen::LLT<Eigen::MatrixXd> llt(dense(s.a));
    CHECK(llt.info() == Eigen::Success);
    const Eigen::MatrixXd mono = dense(assemble_monolithic(s));
    CHECK(mono.ldlt().isPositive());
    CHECK(gen.meta.n_beam_dofs == s.n_beam());
    CHECK(gen.meta.n_solid_dofs == s.n_solid());
    CHECK(gen.meta.fibers.size() == g.fiber_count);
    for (const auto& f : gen.meta.fibers) {
        for (int c = 0; c < 3; ++c) {
            CHECK(f.start[c] >= 0.0);
            CHECK(f.start[c] <= 1.0);
            CHECK(f.end[c] >= 0.0);
            CHECK(f.end[c] <= 1.0);
        }
        double len = 0.0;
        for (int c = 0; c < 3; ++c) len += (f.end[c] - f.start[c]) * (f.end[c] - f.start[c]);
        CHECK(std::sqrt(len) == doctest::Approx(g.fiber_length));
    }
    double load = 0.0;
    for (double v : s.rhs_solid) load += v;
    CHECK(load > 0.0);

    const probgen::Generated again = probgen::generate(g);
    CHECK(bitwise_equal(again.system.a, s.a));
    CHECK(bitwise_equal(again.system.b1t, s.b1t));
    CHECK(bitwise_equal(again.system.b2, s.b2));
    CHECK(bitwise_equal(again.system.c, s.c));
    CHECK(again.system.rhs_solid == s.rhs_solid);
    probgen::GenConfig other = g;
    other.seed = 2;
    CHECK_FALSE(bitwise_equal(probgen::generate(other).system.a, s.a));
}

TEST_CASE("element count modes and sparse element family") {
    probgen::GenConfig g = small_gen();
    g.elements_per_fiber = 4;
    g.element_count_mode = probgen::ElementCountMode::uniform;
    const probgen::Generated u = probgen::generate(g);
    std::set<Index> seen;
    for (Index f = 0; f < u.meta.fibers.size(); ++f) {
        const Index e = u.meta.fibers[f].elements;
        CHECK(e >= 1);
        CHECK(e <= 4);
        seen.insert(e);
        CHECK(u.meta.beam_block_boundaries[f + 1] - u.meta.beam_block_boundaries[f] == 6 * (e + 1));
    }
    CHECK(seen.size() > 1);

    g = small_gen();
    g.dofs_per_beam_node = 9;
    g.penalty_rot = 1.0;
    const probgen::Generated sr = probgen::generate(g);
    CHECK(sr.system.n_beam() == 18 * g.fiber_count);
    CHECK(sr.system.a.nnz() < 18 * 18 * g.fiber_count);
    CHECK(asymmetry(sr.system.a) <= 1e-13 * matrix_norms(sr.system.a).frobenius);
    // Rotational coupling makes B2 differ from B1.
    CHECK((dense(sr.system.b1t) - dense(sr.system.b2).transpose()).cwiseAbs().maxCoeff() > 0.0);
    // Graph of diameter two: exact inverse pattern at ell = 2 but not at 1.
    spai::SpaiConfig c2;
    const Eigen::MatrixXd inv = dense(sr.system.a).inverse();
    const double e2 = (dense(spai::build_spai(sr.system.a, c2).approx_inverse) - inv).norm() / inv.norm();
    c2.ell = 1;
    const double e1 = (dense(spai::build_spai(sr.system.a, c2).approx_inverse) - inv).norm() / inv.norm();
    CHECK(e2 <= 1e-10);
    CHECK(e1 > 0.1);

    g.skew_perturbation = 0.3;
    CHECK(asymmetry(probgen::generate(g).system.a) > 0.0);
}

TEST_CASE("generator config errors") {
    probgen::GenConfig g = small_gen();
    g.fiber_length = 0.999;
    g.max_placement_attempts = 5;
    CHECK_THROWS_AS(probgen::generate(g), ConfigError);
    g = small_gen();
    g.dofs_per_node = 2;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = small_gen();
    g.penalty_rot = 1.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = small_gen();
    g.solid_modulus = 0.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("penalty trend at property level") {
    probgen::GenConfig g = small_gen();
    g.solid_grid = {8, 8, 8};
    std::vector<krylov::SpectrumReport> r;
    for (double e : {1.0, 10.0, 100.0, 1000.0}) {
        g.penalty_pos = e * g.solid_modulus;
        r.push_back(krylov::lambda_extremes(assemble_monolithic(probgen::generate(g).system)));
    }
    for (Index i = 1; i < r.size(); ++i) {
        CHECK(std::abs(r[i].lambda_min - r[0].lambda_min) <= 0.01 * r[0].lambda_min);
        CHECK(r[i].lambda_max > r[i - 1].lambda_max);
        CHECK(r[i].one_norm_condition > r[i - 1].one_norm_condition);
    }
}

TEST_CASE("save and load") {
    const probgen::GenConfig g = small_gen();
    const probgen::Generated gen = probgen::generate(g);
    const fs::path dir = scratch("roundtrip");
    save_system(gen.system, dir, &gen.meta, &g);
    for (const char* f : {"a.mtx", "b1t.mtx", "b2.mtx", "c.mtx", "rhs.vec", "meta.json"}) CHECK(fs::exists(dir / f));
    const LoadedSystem l = load_system(dir);
    CHECK_FALSE(l.rhs_defaulted);
    CHECK(bitwise_equal(l.system.a, gen.system.a));
    CHECK(bitwise_equal(l.system.b1t, gen.system.b1t));
    CHECK(bitwise_equal(l.system.b2, gen.system.b2));
    CHECK(bitwise_equal(l.system.c, gen.system.c));
    CHECK(l.system.rhs_beam == gen.system.rhs_beam);
    CHECK(l.system.rhs_solid == gen.system.rhs_solid);
    CHECK(l.system.beam_block_boundaries == gen.system.beam_block_boundaries);

    const auto meta = nlohmann::json::parse(l.meta_json);
    CHECK(meta["version"] == 1);
    CHECK(meta["sizes"]["beam"] == gen.system.n_beam());
    CHECK(meta["nnz"]["a"] == mm::read_matrix(dir / "a.mtx").nnz());
    CHECK(meta["nnz"]["c"] == mm::read_matrix(dir / "c.mtx").nnz());
    CHECK(meta["fibers"].size() == g.fiber_count);
    CHECK(meta["gen_config"]["seed"] == g.seed);

    fs::remove(dir / "rhs.vec");
    const LoadedSystem d = load_system(dir);
    CHECK(d.rhs_defaulted);
    CHECK(d.system.rhs_beam == Vector(gen.system.n_beam(), 0.0));
    CHECK(d.system.rhs_solid == Vector(gen.system.n_solid(), 0.0));
    fs::remove_all(dir);
}

TEST_CASE("load rejects bad inputs") {
    const probgen::GenConfig g = small_gen();
    const probgen::Generated gen = probgen::generate(g);
    const fs::path dir = scratch("bad");
    save_system(gen.system, dir, &gen.meta, &g);
    auto meta = nlohmann::json::parse(std::ifstream(dir / "meta.json"));
    auto broken = meta;
    broken["beam_block_boundaries"] = {0, 6, gen.system.n_beam()};
    std::ofstream(dir / "meta.json") << broken.dump();
    try {
        load_system(dir);
        FAIL("expected rejection");
    } catch (const InvariantError& e) {
        CHECK(std::string(e.what()).find("(") != std::string::npos);
    }
    broken = meta;
    broken["sizes"]["beam"] = 7;
    std::ofstream(dir / "meta.json") << broken.dump();
    CHECK_THROWS_AS(load_system(dir), DimensionError);
    std::ofstream(dir / "meta.json") << meta.dump();
    std::ofstream(dir / "c.mtx") << "not a matrix\n";
    CHECK_THROWS_AS(load_system(dir), IoError);
    CHECK_THROWS_AS(load_system(dir / "missing"), IoError);
    fs::remove_all(dir);
}

TEST_CASE("empty beam block round trip") {
    probgen::GenConfig g = small_gen();
    g.fiber_count = 0;
    const probgen::Generated gen = probgen::generate(g);
    const fs::path dir = scratch("empty");
    save_system(gen.system, dir);
    std::ifstream in(dir / "a.mtx");
    std::string banner, size;
    std::getline(in, banner);
    std::getline(in, size);
    CHECK(size == "0 0 0");
    const LoadedSystem l = load_system(dir);
    CHECK(l.system.n_beam() == 0);
    CHECK(bitwise_equal(l.system.c, gen.system.c));
    fs::remove_all(dir);
}
