#include <benchmark/benchmark.h>

#include "opfrelax/graph.hpp"
#include "support/helpers.hpp"

using namespace opf;
using namespace opf::test;

namespace {

Network meshed_net(int n) {
  // ring plus skip-2 chords: treewidth stays small while bags multiply
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.push_back({i, i + 1});
  edges.push_back({n, 1});
  for (int i = 1; i + 2 <= n; i += 2) edges.push_back({i, i + 2});
  return make_net(n, edges);
}

}  // namespace

static void BM_TreeDecomposition(benchmark::State& state) {
  Network net = meshed_net(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tree_decomposition(net));
  }
}
BENCHMARK(BM_TreeDecomposition)->Arg(16)->Arg(64)->Arg(256);

static void BM_CycleBasis(benchmark::State& state) {
  Network net = meshed_net(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cycle_basis(net));
  }
}
BENCHMARK(BM_CycleBasis)->Arg(16)->Arg(64)->Arg(256);

static void BM_PathTable(benchmark::State& state) {
  Network net = meshed_net(static_cast<int>(state.range(0)));
  auto cycles = cycle_basis(net);
  for (auto _ : state) {
    for (const Cycle& c : cycles) benchmark::DoNotOptimize(path_table(net, c, c.nodes().front()));
  }
}
BENCHMARK(BM_PathTable)->Arg(16)->Arg(64);

BENCHMARK_MAIN();
