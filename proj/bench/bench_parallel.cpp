// Serial reference vs OpenMP kernels: per-level DP and per-run simulation.
#include "riskmdp/engine.hpp"
#include "riskmdp/sim.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace riskmdp;

namespace {

ModelSpec bench_model(int horizon) {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    ModelSpec m = blank_model(horizon, 3, 3, 4);
    for (int p = 0; p < 4; ++p)
        for (int x = 0; x < 3; ++x)
            for (int u = 0; u < 3; ++u) {
                auto row = m.kernel_row(p, x, u);
                double total = 0.0;
                for (double &k : row)
                    total += (k = unif(gen));
                for (double &k : row)
                    k /= total;
            }
    for (double &c : m.cost)
        c = 3.0 * unif(gen);
    return m;
}

struct Fixture {
    ModelSpec model = bench_model(7);
    CriterionSpec crit = make_entropic(1.0);
    std::shared_ptr<const BeliefGraph> graph =
        std::make_shared<const BeliefGraph>(build_reachable_belief_graph(model, kDefaultNodeCap, crit.belief_tilt));
    HistoryPolicy policy = to_history_policy(solve_dp_serial(model, crit, graph).policy, model);
};

const Fixture &fixture() {
    static const Fixture f;
    return f;
}

void BM_SolveDpSerial(benchmark::State &state) {
    const auto &f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_dp_serial(f.model, f.crit, f.graph).values.root_value);
    state.counters["nodes"] = static_cast<double>(f.graph->size());
}

void BM_SolveDpOpenMP(benchmark::State &state) {
    const auto &f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_dp(f.model, f.crit, f.graph, static_cast<int>(state.range(0))).values.root_value);
    state.counters["nodes"] = static_cast<double>(f.graph->size());
}

void BM_SimulateSerial(benchmark::State &state) {
    const auto &f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_runs_serial(f.model, f.policy, 1, 20000, 7).size());
}

void BM_SimulateOpenMP(benchmark::State &state) {
    const auto &f = fixture();
    for (auto _ : state)
        benchmark::DoNotOptimize(simulate_runs(f.model, f.policy, 1, 20000, 7, static_cast<int>(state.range(0))).size());
}

} // namespace

BENCHMARK(BM_SolveDpSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveDpOpenMP)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateOpenMP)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
