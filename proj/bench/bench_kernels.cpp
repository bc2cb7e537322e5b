// SPDX-License-Identifier: Apache-2.0
// Serial reference against the OpenMP path for the block-level kernels.
#include <benchmark/benchmark.h>

#include "cffd/cf_fd_link.hpp"
#include "cffd/estimation.hpp"
#include "cffd/nafd.hpp"
#include "cffd/parallel.hpp"

using namespace cffd;

namespace {

Scenario reference_network() {
    ScenarioConfig c;  // M=16, Nt=Nr=4, K=L=2
    return build_scenario(c);
}

ExecPolicy policy_of(const benchmark::State& st) {
    return st.range(0) == 0 ? ExecPolicy::serial : ExecPolicy::parallel;
}

void BM_EstimationStatistics(benchmark::State& st) {
    const Scenario s = reference_network();
    const ExecPolicy pol = policy_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(estimation_statistics(s, 2000, 1, pol));
    st.SetItemsProcessed(st.iterations() * 2000);
}

void BM_MonteCarloTerms(benchmark::State& st) {
    const Scenario s = reference_network();
    const EstimateVariances g = estimate_variances(s);
    const PowerAllocation a = equal_power_allocation(s, g.gamma_dl);
    const ExecPolicy pol = policy_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(monte_carlo_terms(s, a, 2000, 1, DuplexMode::full, pol));
    st.SetItemsProcessed(st.iterations() * 2000);
}

void BM_ClosedFormTerms(benchmark::State& st) {
    const Scenario s = reference_network();
    const EstimateVariances g = estimate_variances(s);
    const PowerAllocation a = equal_power_allocation(s, g.gamma_dl);
    for (auto _ : st) benchmark::DoNotOptimize(closed_form_terms(s, g, a));
}

void BM_ExhaustiveModeSearch(benchmark::State& st) {
    ScenarioConfig c;
    c.num_aps = static_cast<int>(st.range(0));
    const Scenario s = build_scenario(c);
    const EstimateVariances g = estimate_variances(s);
    const PowerModelParams p = default_power_model(s);
    P2Options o;
    o.qos = {0.2, 0.2};
    for (auto _ : st) benchmark::DoNotOptimize(solve_p2(s, g, p, o));
}

}  // namespace

BENCHMARK(BM_EstimationStatistics)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloTerms)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClosedFormTerms)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ExhaustiveModeSearch)->Arg(4)->Arg(6)->ArgName("M")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
