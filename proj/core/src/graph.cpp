#include "opfrelax/graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace opf {

namespace {

// Adjacency over bus ids, neighbor lists sorted ascending.
std::map<int, std::vector<int>> adjacency(const Network& net) {
  std::map<int, std::vector<int>> adj;
  for (const Bus& b : net.buses) adj[b.id];
  for (const Branch& br : net.branches) {
    adj[br.from].push_back(br.to);
    adj[br.to].push_back(br.from);
  }
  for (auto& [id, nb] : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return adj;
}

// BFS parents from root, exploring neighbors in ascending id order.
std::map<int, int> bfs_parents(const std::map<int, std::vector<int>>& adj, int root) {
  std::map<int, int> parent;
  parent[root] = root;
  std::deque<int> queue{root};
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : adj.at(u)) {
      if (!parent.count(v)) {
        parent[v] = u;
        queue.push_back(v);
      }
    }
  }
  return parent;
}

std::vector<int> path_to_root(const std::map<int, int>& parent, int node) {
  std::vector<int> path{node};
  while (parent.at(path.back()) != path.back()) path.push_back(parent.at(path.back()));
  return path;
}

}  // namespace

std::vector<int> Cycle::nodes() const {
  std::vector<int> out;
  for (auto [a, b] : edges) {
    out.push_back(a);
    out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Cycle::contains(int bus) const {
  for (auto [a, b] : edges)
    if (a == bus || b == bus) return true;
  return false;
}

std::set<int> PathTable::path_nodes(int node) const {
  std::set<int> out;
  for (auto [a, b] : paths.at(node)) {
    out.insert(a);
    out.insert(b);
  }
  return out;
}

std::vector<Cycle> cycle_basis(const Network& net) {
  if (net.buses.empty()) return {};
  auto adj = adjacency(net);
  int root = net.buses.front().id;
  auto parent = bfs_parents(adj, root);

  std::set<std::pair<int, int>> tree_edges;
  for (auto& [node, par] : parent) {
    if (node != par) tree_edges.insert(std::minmax(node, par));
  }

  std::vector<Cycle> basis;
  for (const Branch& br : net.branches) {
    auto key = std::minmax(br.from, br.to);
    if (tree_edges.count({key.first, key.second})) continue;
    int a = key.first, b = key.second;

    // chord a->b, then the tree path b -> lca -> a closes the walk
    std::vector<int> pa = path_to_root(parent, a);
    std::vector<int> pb = path_to_root(parent, b);
    std::set<int> on_pa(pa.begin(), pa.end());
    int lca = root;
    for (int n : pb) {
      if (on_pa.count(n)) {
        lca = n;
        break;
      }
    }
    Cycle c;
    c.edges.push_back({a, b});
    for (int n : pb) {
      if (n == lca) break;
      c.edges.push_back({n, parent.at(n)});
    }
    std::vector<std::pair<int, int>> up_a;
    for (int n : pa) {
      if (n == lca) break;
      up_a.push_back({parent.at(n), n});
    }
    std::reverse(up_a.begin(), up_a.end());
    c.edges.insert(c.edges.end(), up_a.begin(), up_a.end());
    basis.push_back(std::move(c));
  }
  return basis;
}

PathTable path_table(const Network& net, const Cycle& cycle, int source) {
  if (!cycle.contains(source)) throw std::invalid_argument("reference node is not on the cycle");
  auto adj = adjacency(net);
  auto parent = bfs_parents(adj, source);

  PathTable table;
  table.source = source;
  table.union_separator.insert(source);
  for (int node : cycle.nodes()) {
    std::vector<std::pair<int, int>> edges;
    if (node != source) {
      std::vector<int> chain = path_to_root(parent, node);  // node .. source
      std::reverse(chain.begin(), chain.end());
      for (size_t i = 0; i + 1 < chain.size(); ++i) edges.push_back({chain[i], chain[i + 1]});
    }
    std::set<int> interior;
    for (size_t i = 1; i < edges.size(); ++i) interior.insert(edges[i].first);
    table.paths[node] = std::move(edges);
    table.separators[node] = interior;
    table.union_separator.insert(interior.begin(), interior.end());
  }
  return table;
}

TreeDecomposition tree_decomposition(const Network& net) {
  std::map<int, std::set<int>> adj;
  for (const Bus& b : net.buses) adj[b.id];
  for (const Branch& br : net.branches) {
    adj[br.from].insert(br.to);
    adj[br.to].insert(br.from);
  }

  std::vector<Bag> raw_bags;
  while (!adj.empty()) {
    int best = -1;
    size_t best_deg = SIZE_MAX;
    for (const auto& [node, nb] : adj) {
      if (nb.size() < best_deg) {
        best = node;
        best_deg = nb.size();
      }
    }
    std::set<int> nb = adj[best];
    Bag bag;
    bag.nodes.push_back(best);
    bag.nodes.insert(bag.nodes.end(), nb.begin(), nb.end());
    std::sort(bag.nodes.begin(), bag.nodes.end());
    raw_bags.push_back(std::move(bag));

    for (int u : nb) {
      for (int v : nb) {
        if (u != v) adj[u].insert(v);
      }
      adj[u].erase(best);
    }
    adj.erase(best);
  }

  // keep only maximal bags
  std::sort(raw_bags.begin(), raw_bags.end(), [](const Bag& a, const Bag& b) {
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() > b.nodes.size();
    return a.nodes < b.nodes;
  });
  std::vector<Bag> bags;
  for (auto& bag : raw_bags) {
    bool contained = false;
    for (const Bag& kept : bags) {
      if (std::includes(kept.nodes.begin(), kept.nodes.end(), bag.nodes.begin(), bag.nodes.end())) {
        contained = true;
        break;
      }
    }
    if (!contained) bags.push_back(std::move(bag));
  }
  std::sort(bags.begin(), bags.end(), [](const Bag& a, const Bag& b) { return a.nodes < b.nodes; });

  std::set<std::pair<int, int>> edges;
  for (const Branch& br : net.branches) edges.insert(std::minmax(br.from, br.to));
  TreeDecomposition td;
  for (Bag& bag : bags) {
    for (size_t i = 0; i < bag.nodes.size(); ++i) {
      for (size_t j = i + 1; j < bag.nodes.size(); ++j) {
        std::pair<int, int> pr{bag.nodes[i], bag.nodes[j]};
        if (!edges.count(pr)) bag.fillins.push_back(pr);
      }
    }
    td.width = std::max(td.width, static_cast<int>(bag.nodes.size()) - 1);
    td.bags.push_back(std::move(bag));
  }
  return td;
}

bool verify_decomposition(const Network& net, const std::vector<Bag>& bags) {
  std::set<int> covered;
  for (const Bag& bag : bags) covered.insert(bag.nodes.begin(), bag.nodes.end());
  for (const Bus& b : net.buses)
    if (!covered.count(b.id)) return false;

  for (const Branch& br : net.branches) {
    bool found = false;
    for (const Bag& bag : bags) {
      if (std::binary_search(bag.nodes.begin(), bag.nodes.end(), br.from) &&
          std::binary_search(bag.nodes.begin(), bag.nodes.end(), br.to)) {
        found = true;
        break;
      }
    }
    if (!found) return false;
  }

  // Running intersection on a maximum-weight spanning forest of the bag
  // intersection graph; if that tree fails, no junction tree exists.
  const size_t n = bags.size();
  if (n == 0) return net.buses.empty();
  struct Link {
    size_t a, b;
    int weight;
  };
  std::vector<Link> links;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      std::vector<int> common;
      std::set_intersection(bags[i].nodes.begin(), bags[i].nodes.end(), bags[j].nodes.begin(),
                            bags[j].nodes.end(), std::back_inserter(common));
      if (!common.empty()) links.push_back({i, j, static_cast<int>(common.size())});
    }
  }
  std::stable_sort(links.begin(), links.end(), [](const Link& a, const Link& b) { return a.weight > b.weight; });
  std::vector<size_t> uf(n);
  for (size_t i = 0; i < n; ++i) uf[i] = i;
  auto find = [&uf](size_t v) {
    while (uf[v] != v) v = uf[v] = uf[uf[v]];
    return v;
  };
  std::vector<std::vector<size_t>> tree(n);
  for (const Link& l : links) {
    size_t ra = find(l.a), rb = find(l.b);
    if (ra == rb) continue;
    uf[ra] = rb;
    tree[l.a].push_back(l.b);
    tree[l.b].push_back(l.a);
  }

  for (int node : covered) {
    // bags containing `node` must form one connected subtree
    std::vector<char> has(n, 0);
    size_t total = 0, start = SIZE_MAX;
    for (size_t i = 0; i < n; ++i) {
      if (std::binary_search(bags[i].nodes.begin(), bags[i].nodes.end(), node)) {
        has[i] = 1;
        ++total;
        start = i;
      }
    }
    if (total <= 1) continue;
    std::vector<size_t> stack{start};
    std::vector<char> seen(n, 0);
    seen[start] = 1;
    size_t reached = 1;
    while (!stack.empty()) {
      size_t u = stack.back();
      stack.pop_back();
      for (size_t v : tree[u]) {
        if (has[v] && !seen[v]) {
          seen[v] = 1;
          ++reached;
          stack.push_back(v);
        }
      }
    }
    if (reached != total) return false;
  }
  return true;
}

}  // namespace opf
