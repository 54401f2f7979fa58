// Hot paths of one design step on lattices of growing size.

#include <benchmark/benchmark.h>

#include <random>

#include "modalsyn/base_solver.hpp"
#include "modalsyn/frame_model.hpp"
#include "modalsyn/lp_update.hpp"
#include "modalsyn/mode_spec.hpp"
#include "modalsyn/reduction.hpp"
#include "modalsyn/simplex.hpp"
#include "modalsyn/spectra.hpp"
#include "modalsyn/synthesis.hpp"

namespace {

using namespace modalsyn;

// n x n lattice, bottom clamped, the two top corners active.
SynthesisProblem lattice(int n) {
    auto layout = build_grid((n - 1) * 10.0, (n - 1) * 10.0, 10.0, 1);
    std::vector<Index> bottom;
    for (int c = 0; c < n; ++c) bottom.push_back(layout.grid.node_at(c, 0));
    const Index left = layout.grid.node_at(0, n - 1), right = layout.grid.node_at(n - 1, n - 1);
    GroundStructure g(layout.grid, layout.elements, {SectionProperties{20.0, 210000.0, 6.66}}, clamp_nodes(bottom));
    const std::vector<Index> act{g.free_dof(left, NodeDof::x), g.free_dof(left, NodeDof::y),
                                 g.free_dof(right, NodeDof::x), g.free_dof(right, NodeDof::y)};
    DofPartition dofs(g.dof_count(), act);
    return SynthesisProblem{std::move(g), std::move(dofs), rotation_translation_modes()};
}

Vector design(Index r) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Vector x(r);
    for (Index i = 0; i < r; ++i) x[i] = u(rng);
    return x;
}

void BM_Assemble(benchmark::State& state) {
    const auto p = lattice(static_cast<int>(state.range(0)));
    const Vector x = design(p.ground.element_count());
    for (auto _ : state) benchmark::DoNotOptimize(assemble(p.ground, x));
    state.counters["elements"] = static_cast<double>(p.ground.element_count());
}

void BM_Condense(benchmark::State& state) {
    const auto p = lattice(static_cast<int>(state.range(0)));
    const SparseMatrix k = assemble(p.ground, design(p.ground.element_count()));
    Condenser condenser(p.dofs);
    for (auto _ : state) benchmark::DoNotOptimize(condenser(k));
}

void BM_ConstrainedBase(benchmark::State& state) {
    const auto p = lattice(static_cast<int>(state.range(0)));
    const auto sys = condense(assemble(p.ground, design(p.ground.element_count())), p.dofs);
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigen(sys.kbar, p.modes.m()));
        benchmark::DoNotOptimize(expand_base(solve_constrained_base(sys.kbar, p.modes.phibar), sys));
    }
}

void BM_DesignLp(benchmark::State& state) {
    const auto p = lattice(static_cast<int>(state.range(0)));
    const Vector x = design(p.ground.element_count());
    const auto sys = condense(assemble(p.ground, x), p.dofs);
    const auto base = expand_base(solve_constrained_base(sys.kbar, p.modes.phibar), sys);
    LpSettings s;
    s.mu = 1000;
    s.volume = 0.5 * static_cast<double>(x.size());
    s.nu = 0.02;
    s.eq_band = 1e-3;
    const LinearProgram lp = build_lp(p.ground, base, s, x);
    for (auto _ : state) benchmark::DoNotOptimize(solve_lp(lp));
}

void BM_IterationStep(benchmark::State& state) {
    const auto p = lattice(static_cast<int>(state.range(0)));
    SynthesisConfig c;
    c.mu = 1000;
    c.volume = 0.5 * static_cast<double>(p.ground.element_count());
    c.nu = 0.02;
    c.max_iters = 1;
    const Vector x0 = random_start(p.ground.element_count(), c.x_lower, c.x_upper, 3);
    for (auto _ : state) benchmark::DoNotOptimize(iterate(p, c, x0));
}

}  // namespace

BENCHMARK(BM_Assemble)->Arg(9)->Arg(17)->Arg(33)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Condense)->Arg(9)->Arg(17)->Arg(33)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ConstrainedBase)->Arg(9)->Arg(17)->Arg(33)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_DesignLp)->Arg(9)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IterationStep)->Arg(9)->Arg(17)->Arg(33)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
