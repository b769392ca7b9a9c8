#ifndef OPFRELAX_TESTS_HELPERS_HPP
#define OPFRELAX_TESTS_HELPERS_HPP

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "opfrelax/model.hpp"
#include "opfrelax/network.hpp"

namespace opf::test {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string case_path(const std::string& name) {
  return std::string(OPFRELAX_CASES_DIR) + "/" + name;
}

inline Network load_case(const std::string& name) { return parse_case(read_file(case_path(name))); }

// Synthetic network over the given undirected edges: voltage band [0.9, 1.1],
// r = 0.04, x = 0.2 per line, +-30 degree angle bounds, a generator at every
// bus with wide symmetric limits and linear cost = bus id, modest loads.
inline Network make_net(int num_buses, const std::vector<std::pair<int, int>>& edges) {
  Network net;
  net.base_mva = 1.0;
  for (int i = 1; i <= num_buses; ++i) {
    Bus b;
    b.id = i;
    b.vmin = 0.9;
    b.vmax = 1.1;
    b.pd = 0.1 + 0.02 * i;
    b.qd = 0.02 + 0.01 * i;
    net.buses.push_back(b);
    Generator g;
    g.bus = i;
    g.pmin = -10.0;
    g.pmax = 10.0;
    g.qmin = -10.0;
    g.qmax = 10.0;
    g.c1 = static_cast<double>(i);
    net.generators.push_back(g);
  }
  for (auto [a, b] : edges) {
    Branch br;
    br.from = a;
    br.to = b;
    br.r = 0.04;
    br.x = 0.2;
    double z2 = br.r * br.r + br.x * br.x;
    br.g = br.r / z2;
    br.b = -br.x / z2;
    br.rate_a = 0.0;
    br.angmin = -0.5235987755982988;
    br.angmax = 0.5235987755982988;
    net.branches.push_back(br);
  }
  return net;
}

inline Network ring_net(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.push_back({i, i + 1});
  edges.push_back({n, 1});
  return make_net(n, edges);
}

// Five-node ring plus the (2,5) chord; shortest paths then match the worked
// separator-set examples used across the graph tests.
inline Network chorded_ring_net() {
  return make_net(5, {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 1}, {2, 5}});
}

inline Network triangle_net() { return make_net(3, {{1, 2}, {2, 3}, {1, 3}}); }

// ---------------------------------------------------------------------------
// independent graph oracles (exhaustive, small n only)

// exact treewidth by dynamic programming over elimination subsets
inline int brute_force_treewidth(int n, const std::set<std::pair<int, int>>& edges,
                                 const std::vector<int>& nodes) {
  // degree of v once the vertex set `done` is eliminated: neighbors reachable
  // through eliminated vertices
  auto elim_degree = [&](unsigned done, int v) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{v};
    seen[v] = 1;
    int deg = 0;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w = 0; w < n; ++w) {
        if (seen[w]) continue;
        auto pr = std::minmax(nodes[u], nodes[w]);
        if (!edges.count({pr.first, pr.second})) continue;
        seen[w] = 1;
        if (done & (1u << w))
          stack.push_back(w);  // pass through eliminated vertices
        else
          ++deg;
      }
    }
    return deg;
  };
  std::vector<int> best(1u << n, 1 << 20);
  best[0] = 0;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    for (int v = 0; v < n; ++v) {
      if (!(mask & (1u << v))) continue;
      unsigned prev = mask & ~(1u << v);
      if (best[prev] == (1 << 20)) continue;
      best[mask] = std::min(best[mask], std::max(best[prev], elim_degree(prev, v)));
    }
  }
  return best[(1u << n) - 1];
}

inline int brute_force_treewidth(const Network& net) {
  std::vector<int> nodes;
  for (const Bus& b : net.buses) nodes.push_back(b.id);
  std::set<std::pair<int, int>> edges;
  for (const Branch& br : net.branches) edges.insert(std::minmax(br.from, br.to));
  return brute_force_treewidth(static_cast<int>(nodes.size()), edges, nodes);
}

// all simple cycles as edge bitmasks (edge order = net.branches order)
inline std::vector<std::vector<char>> enumerate_simple_cycles(const Network& net) {
  const int m = static_cast<int>(net.branches.size());
  std::map<std::pair<int, int>, int> edge_index;
  std::map<int, std::vector<std::pair<int, int>>> adj;  // node -> (neighbor, edge idx)
  for (int e = 0; e < m; ++e) {
    auto pr = std::minmax(net.branches[e].from, net.branches[e].to);
    edge_index[pr] = e;
    adj[net.branches[e].from].push_back({net.branches[e].to, e});
    adj[net.branches[e].to].push_back({net.branches[e].from, e});
  }
  std::set<std::vector<char>> found;
  std::vector<int> path;
  std::vector<char> used_edge(m, 0);
  std::function<void(int, int)> dfs = [&](int start, int u) {
    for (auto [v, e] : adj[u]) {
      if (used_edge[e]) continue;
      if (v == start && path.size() >= 3) {
        std::vector<char> mask(m, 0);
        used_edge[e] = 1;
        for (int k = 0; k < m; ++k) mask[k] = used_edge[k];
        used_edge[e] = 0;
        found.insert(mask);
        continue;
      }
      if (std::find(path.begin(), path.end(), v) != path.end()) continue;
      if (v < start) continue;  // canonical: cycles rooted at their smallest node
      path.push_back(v);
      used_edge[e] = 1;
      dfs(start, v);
      used_edge[e] = 0;
      path.pop_back();
    }
  };
  for (const Bus& b : net.buses) {
    path = {b.id};
    dfs(b.id, b.id);
  }
  return {found.begin(), found.end()};
}

// GF(2) rank of a set of edge-bitmask vectors
inline int gf2_rank(std::vector<std::vector<char>> rows) {
  int rank = 0;
  const int cols = rows.empty() ? 0 : static_cast<int>(rows[0].size());
  for (int c = 0; c < cols && rank < static_cast<int>(rows.size()); ++c) {
    int pivot = -1;
    for (int r = rank; r < static_cast<int>(rows.size()); ++r)
      if (rows[r][c]) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    std::swap(rows[rank], rows[pivot]);
    for (int r = 0; r < static_cast<int>(rows.size()); ++r) {
      if (r != rank && rows[r][c])
        for (int k = 0; k < cols; ++k) rows[r][k] ^= rows[rank][k];
    }
    ++rank;
  }
  return rank;
}

// is `target` in the GF(2) span of `basis`?
inline bool gf2_in_span(const std::vector<std::vector<char>>& basis, const std::vector<char>& target) {
  auto rows = basis;
  int base_rank = gf2_rank(rows);
  rows.push_back(target);
  return gf2_rank(rows) == base_rank;
}

// ---------------------------------------------------------------------------
// numeric helpers

// central finite difference of a constraint's value
inline Eigen::VectorXd fd_gradient(const Constraint& c, const Eigen::VectorXd& x) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (int v : c.support()) {
    double h = 1e-5 * std::max(1.0, std::abs(x[v]));
    Eigen::VectorXd xp = x, xm = x;
    xp[v] += h;
    xm[v] -= h;
    g[v] = (c.value(xp) - c.value(xm)) / (2.0 * h);
  }
  return g;
}

// registry with one w per node and every pair registered; for synthetic
// Hermitian matrices in the determinant/PSD tests
inline VariableRegistry dense_registry(const std::vector<int>& nodes) {
  VariableRegistry reg;
  for (int n : nodes) reg.add(VarRole::BusW, n, -1, 0.0, 10.0, "w[" + std::to_string(n) + "]");
  for (size_t i = 0; i < nodes.size(); ++i) {
    for (size_t j = i + 1; j < nodes.size(); ++j) {
      int a = std::min(nodes[i], nodes[j]), b = std::max(nodes[i], nodes[j]);
      reg.add(VarRole::PairWR, a, b, -10.0, 10.0, "wR");
      reg.add(VarRole::PairWI, a, b, -10.0, 10.0, "wI");
    }
  }
  return reg;
}

// random Hermitian assignment; `psd` draws it as B*B^H (plus tiny diagonal)
inline Eigen::VectorXd random_hermitian_point(const std::vector<int>& nodes,
                                              const VariableRegistry& reg, std::mt19937& rng,
                                              bool psd) {
  const int k = static_cast<int>(nodes.size());
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd m(k, k);
  if (psd) {
    Eigen::MatrixXcd b(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) b(i, j) = std::complex<double>(gauss(rng), gauss(rng));
    m = b * b.adjoint();
  } else {
    for (int i = 0; i < k; ++i) {
      m(i, i) = gauss(rng);
      for (int j = i + 1; j < k; ++j) {
        m(i, j) = std::complex<double>(gauss(rng), gauss(rng));
        m(j, i) = std::conj(m(i, j));
      }
    }
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(reg.size());
  for (int i = 0; i < k; ++i) {
    x[reg.w(nodes[i])] = m(i, i).real();
    for (int j = i + 1; j < k; ++j) {
      auto [wr, wi] = reg.pair_vars(nodes[i], nodes[j]);
      double sigma = VariableRegistry::orientation(nodes[i], nodes[j]);
      x[wr] = m(i, j).real();
      x[wi] = sigma * m(i, j).imag();
    }
  }
  return x;
}

}  // namespace opf::test

#endif  // OPFRELAX_TESTS_HELPERS_HPP
