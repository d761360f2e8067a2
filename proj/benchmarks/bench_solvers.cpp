#include <benchmark/benchmark.h>

#include <random>

#include "ksinsense/carleman.hpp"
#include "ksinsense/hum.hpp"

namespace {

ksi::SpaceTimeField random_field(const ksi::Grid& grid, const ksi::TimeGrid& tg,
                                 std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    ksi::SpaceTimeField f = ksi::SpaceTimeField::zeros(grid, tg);
    for (double& v : f.data()) v = normal(rng);
    return f;
}

void BM_ForwardSolve(benchmark::State& state) {
    const ksi::Grid grid(static_cast<int>(state.range(0)));
    const ksi::TimeGrid tg(1.0, 2 * static_cast<int>(state.range(0)));
    const ksi::PhysicsParams params{1.0, 0.5, 0.5};
    std::mt19937_64 rng(7);
    const ksi::SpaceTimeField f1 = random_field(grid, tg, rng);
    const ksi::SpaceTimeField f2 = random_field(grid, tg, rng);
    for (auto _ : state) {
        ksi::ForwardSolution sol = ksi::solve_forward(
            grid, tg, params, {}, {}, &f1, &f2, nullptr, nullptr, nullptr);
        benchmark::DoNotOptimize(sol.y.data().data());
    }
}
BENCHMARK(BM_ForwardSolve)->Arg(64)->Arg(128)->Arg(256);

void BM_GramianApply(benchmark::State& state) {
    const ksi::Grid grid(static_cast<int>(state.range(0)));
    const ksi::TimeGrid tg(1.0, 2 * static_cast<int>(state.range(0)));
    const ksi::PhysicsParams params{1.0, 0.5, 0.5};
    const ksi::IndicatorMask omega = ksi::IndicatorMask::build(grid, 0.3, 0.6);
    const ksi::IndicatorMask obs = ksi::IndicatorMask::build(grid, 0.5, 0.8);
    const ksi::StepOperators ops = ksi::StepOperators::build(grid, tg, params);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> zeta0(grid.n_interior()), theta0(grid.n_interior());
    for (double& v : zeta0) v = normal(rng);
    for (double& v : theta0) v = normal(rng);
    for (auto _ : state) {
        ksi::GramianApplication g = ksi::gramian_apply(
            ops, grid, tg, params, omega, obs, zeta0, theta0);
        benchmark::DoNotOptimize(g.p0.data());
    }
}
BENCHMARK(BM_GramianApply)->Arg(32)->Arg(64);

void BM_BuildWeights(benchmark::State& state) {
    const ksi::Grid grid(static_cast<int>(state.range(0)));
    const ksi::TimeGrid tg(8.0, 2 * static_cast<int>(state.range(0)));
    const ksi::NuFunction nu = ksi::build_nu(grid, 0.4, 0.6);
    const ksi::CarlemanParams params{2.0, 3.6, 1.0, 2.0};
    for (auto _ : state) {
        ksi::WeightSet ws = ksi::build_weights(nu, params, grid, tg);
        benchmark::DoNotOptimize(ws.phi.data());
    }
}
BENCHMARK(BM_BuildWeights)->Arg(64)->Arg(128);

} // namespace

BENCHMARK_MAIN();
