#include "phswing/fbssm.hpp"
#include "phswing/kinetics.hpp"
#include "phswing/params.hpp"
#include "phswing/psd_transport.hpp"
#include "phswing/simulator.hpp"

#include <benchmark/benchmark.h>

using namespace phswing;

namespace {

RunConfig bench_run(std::size_t n_t, std::size_t paths)
{
    RunConfig run;
    run.params = preset_params(ParamPreset::Table);
    run.grid = make_grid(0.01, n_t, 10.0, 64, run.params.k_g);
    run.controls = constant_controls(run.grid, 0.05, 0.5, 0.4 * run.grid.t_end(), true);
    run.psd = InitialPsd{InitialPsdKind::Gaussian, 2.0, 0.5, 1.0};
    run.n_paths = paths;
    run.seed = 1;
    run.record_every = 100;
    return run;
}

}  // namespace

static void BM_PsdStep(benchmark::State& state)
{
    const auto n_x = static_cast<std::size_t>(state.range(0));
    auto grid = make_grid(0.01, 1, 10.0, n_x, 0.459);
    auto F = gaussian_bump(grid, 2.0, 0.5, 1.0);
    std::vector<double> scratch(F.size());
    for (auto _ : state) {
        psd_step_inplace(F, scratch, 0.3, 1e-3, grid.tau, grid.h, true);
        benchmark::DoNotOptimize(F.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n_x));
}
BENCHMARK(BM_PsdStep)->Arg(64)->Arg(256)->Arg(1024);

static void BM_EmStep(benchmark::State& state)
{
    auto p = preset_params(ParamPreset::Table);
    KineticState s{7.0, 0.05, 1e-3, p.R0};
    NoiseDraw z{0.1, -0.2, 0.3};
    for (auto _ : state) {
        s = em_step(s, 1.0, 0.0, 0.1, 0.0, z, p, 1e-3);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_EmStep);

static void BM_Simulate(benchmark::State& state)
{
    auto run = bench_run(10000, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto paths = simulate(run, 1);
        benchmark::DoNotOptimize(paths.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 10000);
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_GradientSweep(benchmark::State& state)
{
    FbssmProblem problem;
    problem.base = bench_run(2000, 1);
    problem.base.params.sigma_C = problem.base.params.sigma_Q = problem.base.params.sigma_H = 0.0;
    problem.Q_target.assign(2001, 0.04);
    SweepConfig sweep;
    sweep.full_adjoint = state.range(0) != 0;
    std::vector<double> U(2001, 0.1);
    for (auto _ : state) {
        auto ev = fbssm_gradient(problem, U, sweep);
        benchmark::DoNotOptimize(ev.J);
    }
}
BENCHMARK(BM_GradientSweep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
