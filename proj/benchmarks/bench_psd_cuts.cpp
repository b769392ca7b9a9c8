#include <benchmark/benchmark.h>

#include <random>

#include "opfrelax/builders.hpp"
#include "opfrelax/psd_cuts.hpp"
#include "support/helpers.hpp"

using namespace opf;
using namespace opf::test;

static void BM_DetValue(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  std::vector<int> nodes;
  for (int i = 1; i <= k; ++i) nodes.push_back(i);
  VariableRegistry reg = dense_registry(nodes);
  std::mt19937 rng(1);
  Eigen::VectorXd x = random_hermitian_point(nodes, reg, rng, true);
  MinorIndex minor{nodes, nodes};
  for (auto _ : state) {
    benchmark::DoNotOptimize(det_value(minor, reg, x));
  }
}
BENCHMARK(BM_DetValue)->Arg(2)->Arg(3)->Arg(4)->Arg(5);

static void BM_DetGradient(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  std::vector<int> nodes;
  for (int i = 1; i <= k; ++i) nodes.push_back(i);
  VariableRegistry reg = dense_registry(nodes);
  std::mt19937 rng(2);
  Eigen::VectorXd x = random_hermitian_point(nodes, reg, rng, true);
  MinorIndex minor{nodes, nodes};
  for (auto _ : state) {
    benchmark::DoNotOptimize(det_gradient(minor, reg, x));
  }
}
BENCHMARK(BM_DetGradient)->Arg(2)->Arg(3)->Arg(4);

static void BM_DetPolynomialEval(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  std::vector<int> nodes;
  for (int i = 1; i <= k; ++i) nodes.push_back(i);
  VariableRegistry reg = dense_registry(nodes);
  Polynomial det = det_polynomial(nodes, reg);
  std::mt19937 rng(3);
  Eigen::VectorXd x = random_hermitian_point(nodes, reg, rng, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(det.eval(x));
  }
}
BENCHMARK(BM_DetPolynomialEval)->Arg(3)->Arg(4);

static void BM_Separate(benchmark::State& state) {
  // ring with one chord per third node: several 3-bags to scan
  const int n = static_cast<int>(state.range(0));
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.push_back({i, i + 1});
  edges.push_back({n, 1});
  for (int i = 1; i + 3 <= n; i += 3) edges.push_back({i, i + 3});
  Network net = make_net(n, edges);
  TreeDecomposition td = tree_decomposition(net);
  ModelInstance model = build_wspace(net, {}, true, &td.bags);
  std::mt19937 rng(4);
  Eigen::VectorXd x = model.interior;
  // nudge the pair entries outward so some cuts are violated
  for (int v = 0; v < model.registry.size(); ++v) {
    if (model.registry.info(v).role == VarRole::PairWR) x[v] *= 2.2;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(separate(td.bags, model.registry, x, 1e-6, 3));
  }
}
BENCHMARK(BM_Separate)->Arg(12)->Arg(24)->Arg(48);
