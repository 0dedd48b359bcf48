#include <benchmark/benchmark.h>

#include "pandexit/control_law.hpp"
#include "pandexit/oracle.hpp"
#include "pandexit/solver.hpp"
#include "support.hpp"

using namespace pandexit;

namespace {

void BM_SweepS0(benchmark::State& state) {
    Scenario s = fixtures::s0();
    s.numerics.step_days = 0.01 * static_cast<double>(state.range(0));
    for (auto _ : state) {
        auto r = solve(s);
        benchmark::DoNotOptimize(r.report.objective);
    }
    state.SetLabel("step " + std::to_string(s.numerics.step_days));
}
BENCHMARK(BM_SweepS0)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_ControlLaw(benchmark::State& state) {
    const Scenario s = fixtures::s0();
    const QuadraticContagion m(s.contagion.v_qa, s.contagion.v_a);
    double lambda1 = 1e-6;
    for (auto _ : state) {
        auto c = optimal_control(10.0, 5e4, lambda1, s, m);
        benchmark::DoNotOptimize(c.a);
        lambda1 = lambda1 < 1e2 ? lambda1 * 1.1 : 1e-6;
    }
}
BENCHMARK(BM_ControlLaw);

void BM_OracleScore(benchmark::State& state) {
    Scenario s = fixtures::s0();
    s.numerics.step_days = 0.05;
    const std::vector<double> levels(static_cast<std::size_t>(state.range(0)), 0.3 * s.a_max);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_and_score(levels, s));
}
BENCHMARK(BM_OracleScore)->Arg(1)->Arg(30);

void BM_OracleOptimizeS0(benchmark::State& state) {
    Scenario s = fixtures::s0();
    s.numerics.step_days = 0.05;
    for (auto _ : state) benchmark::DoNotOptimize(optimize(s, 30).objective);
}
BENCHMARK(BM_OracleOptimizeS0)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
