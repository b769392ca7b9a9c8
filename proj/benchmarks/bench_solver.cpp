#include <benchmark/benchmark.h>

#include "opfrelax/builders.hpp"
#include "opfrelax/orchestrator.hpp"
#include "opfrelax/solver.hpp"
#include "support/helpers.hpp"

using namespace opf;
using namespace opf::test;

static void BM_SocpSolve(benchmark::State& state) {
  Network net = load_case(state.range(0) == 0 ? "case5_ring.m" : "case3_cycle.m");
  ModelInstance socp = build_socp(net);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve(socp));
  }
}
BENCHMARK(BM_SocpSolve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_AcHeuristic(benchmark::State& state) {
  Network net = load_case("case5_ring.m");
  ModelInstance ac = build_ac(net);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_ac_heuristic(ac));
  }
}
BENCHMARK(BM_AcHeuristic)->Unit(benchmark::kMillisecond);

static void BM_LazyPipeline(benchmark::State& state) {
  RunConfig cfg;
  cfg.case_path = case_path("case3_cycle.m");
  cfg.tier = RelaxationTier::Psdp;
  cfg.lazy = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run(cfg));
  }
}
BENCHMARK(BM_LazyPipeline)->Unit(benchmark::kMillisecond);
