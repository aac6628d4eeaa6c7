#include <benchmark/benchmark.h>

#include <map>

#include "mdprec/amg.hpp"
#include "mdprec/block_preconditioner.hpp"
#include "mdprec/probgen.hpp"
#include "mdprec/sparse_ops.hpp"
#include "mdprec/spai.hpp"

using namespace mdprec;

namespace {

const probgen::Generated& problem(Index cells) {
    static std::map<Index, probgen::Generated> cache;
    auto it = cache.find(cells);
    if (it == cache.end()) {
        probgen::GenConfig cfg;
        cfg.solid_grid = {cells, cells, cells};
        cfg.fiber_count = 50;
        it = cache.emplace(cells, probgen::generate(cfg)).first;
    }
    return it->second;
}

void BM_Spmv(benchmark::State& state) {
    const CsrMatrix& k = problem(static_cast<Index>(state.range(0))).system.c;
    Vector x(k.cols(), 1.0), y(k.rows());
    for (auto _ : state) {
        spmv(k, x, y);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * k.nnz()));
}
BENCHMARK(BM_Spmv)->Arg(10)->Arg(20);

void BM_Spgemm(benchmark::State& state) {
    const CsrMatrix& k = problem(static_cast<Index>(state.range(0))).system.c;
    for (auto _ : state) benchmark::DoNotOptimize(spgemm(k, k).nnz());
}
BENCHMARK(BM_Spgemm)->Arg(10)->Arg(20);

void BM_SpaiBuild(benchmark::State& state) {
    const CsrMatrix& a = problem(10).system.a;
    spai::SpaiConfig cfg;
    cfg.ell = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(spai::build_spai(a, cfg).pattern_nnz);
}
BENCHMARK(BM_SpaiBuild)->Arg(1)->Arg(2);

void BM_VCycle(benchmark::State& state) {
    const CsrMatrix& k = problem(static_cast<Index>(state.range(0))).system.c;
    amg::AmgConfig cfg;
    cfg.nullspace_dim = 3;
    const amg::AmgHierarchy h = amg::build_hierarchy(k, cfg);
    Vector b(k.rows(), 1.0), x0(k.rows(), 0.0);
    for (auto _ : state) benchmark::DoNotOptimize(h.vcycle(b, x0).data());
}
BENCHMARK(BM_VCycle)->Arg(10)->Arg(20);

void BM_BlockApply(benchmark::State& state) {
    const BlockSystem& sys = problem(static_cast<Index>(state.range(0))).system;
    block::BlockPrecConfig cfg;
    cfg.amg.nullspace_dim = 3;
    const block::BlockPreconditioner p = block::setup(sys, cfg);
    Vector r(sys.size(), 1.0), z(sys.size());
    for (auto _ : state) {
        p.apply(sys, r, z);
        benchmark::DoNotOptimize(z.data());
    }
}
BENCHMARK(BM_BlockApply)->Arg(10)->Arg(20);

} // namespace

BENCHMARK_MAIN();
