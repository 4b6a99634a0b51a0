#include <benchmark/benchmark.h>

#include <filesystem>

#include "gridsync/case_io.hpp"
#include "gridsync/linearize.hpp"
#include "gridsync/modal.hpp"
#include "gridsync/simulate.hpp"
#include "gridsync/sweep.hpp"

using namespace gridsync;

namespace {

NetworkCase load_bench_case(const std::string& name) {
    return load_case(std::filesystem::path(GRIDSYNC_DATA_DIR) / name, CaseFormat::Json);
}

const NetworkCase& ieee9() {
    static const NetworkCase net = load_bench_case("ieee9.json");
    return net;
}

const NetworkCase& ieee39() {
    static const NetworkCase net = load_bench_case("ieee39.json");
    return net;
}

void bm_power_flow(benchmark::State& state, const NetworkCase& net) {
    const AdmittanceMatrix Y = build_admittance(net);
    for (auto _ : state) {
        PowerFlowSolution sol = solve_power_flow(net, Y);
        benchmark::DoNotOptimize(sol.max_mismatch);
    }
}
void bm_power_flow_9(benchmark::State& s) { bm_power_flow(s, ieee9()); }
void bm_power_flow_39(benchmark::State& s) { bm_power_flow(s, ieee39()); }

void bm_kron_reduce(benchmark::State& state, const NetworkCase& net) {
    const AdmittanceMatrix Y = build_admittance(net);
    const PowerFlowSolution sol = solve_power_flow(net, Y);
    const AdmittanceMatrix folded = fold_constant_elements(net, Y, sol);
    std::vector<int> boundary;
    for (const auto& g : net.generators)
        if (g.is_dynamic()) boundary.push_back(g.bus);
    for (auto _ : state) {
        ReducedNetwork red = kron_reduce(folded, boundary, net, sol);
        benchmark::DoNotOptimize(red.Y_red.data());
    }
}
void bm_kron_9(benchmark::State& s) { bm_kron_reduce(s, ieee9()); }
void bm_kron_39(benchmark::State& s) { bm_kron_reduce(s, ieee39()); }

void bm_eigen_analysis_39(benchmark::State& state) {
    const StateSpaceModel model = linearize_case(ieee39());
    for (auto _ : state) {
        ModalResult res = eigen_analysis(model);
        benchmark::DoNotOptimize(res.max_re);
    }
}

void bm_simulate_39(benchmark::State& state) {
    const StateSpaceModel model = linearize_case(ieee39());
    Perturbation pert;
    pert.magnitude = -0.05;
    for (auto _ : state) {
        SimulationTrace trace = simulate_response(model, pert, {.horizon = 10.0, .dt = 1e-3});
        benchmark::DoNotOptimize(trace.speeds.data());
    }
}

void bm_sweep_scenario_9(benchmark::State& state) {
    SweepConfig cfg;
    cfg.n_scenarios = 1;
    cfg.threads = 1;
    int sid = 0;
    for (auto _ : state) {
        cfg.seed = static_cast<std::uint64_t>(++sid);
        auto records = run_sweep(cfg, ieee9());
        benchmark::DoNotOptimize(records.front().nadir_hz);
    }
}

}  // namespace

BENCHMARK(bm_power_flow_9);
BENCHMARK(bm_power_flow_39);
BENCHMARK(bm_kron_9);
BENCHMARK(bm_kron_39);
BENCHMARK(bm_eigen_analysis_39);
BENCHMARK(bm_simulate_39);
BENCHMARK(bm_sweep_scenario_9)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
