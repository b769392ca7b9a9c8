#ifndef OPFRELAX_GRAPH_HPP
#define OPFRELAX_GRAPH_HPP

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "opfrelax/network.hpp"

namespace opf {

// A closed walk through the bus graph, stored as directed bus pairs in
// traversal order. Simple: no repeated node except the closure.
struct Cycle {
  std::vector<std::pair<int, int>> edges;

  std::vector<int> nodes() const;  // sorted, unique
  bool contains(int bus) const;
};

// Shortest undirected paths from one reference node to every node of a cycle,
// with the interior-node separator sets they induce. Paths live in the whole
// graph, not just the cycle.
struct PathTable {
  int source = 0;
  // node -> directed edge list walking source -> node (empty for the source)
  std::map<int, std::vector<std::pair<int, int>>> paths;
  // node -> interior nodes of that path (path nodes minus its endpoints)
  std::map<int, std::set<int>> separators;
  // {source} union of all separator sets
  std::set<int> union_separator;

  std::set<int> path_nodes(int node) const;
};

// One node subset of a tree decomposition plus the pairs inside it that the
// chordal completion added (pairs absent from the branch list).
struct Bag {
  std::vector<int> nodes;  // sorted bus ids
  std::vector<std::pair<int, int>> fillins;
};

struct TreeDecomposition {
  std::vector<Bag> bags;
  int width = 0;  // max bag size - 1
};

// Fundamental cycles of a breadth-first spanning tree rooted at the lowest
// bus id; one cycle per non-tree branch, |E| - |N| + 1 in total.
std::vector<Cycle> cycle_basis(const Network& net);

// Shortest paths from `source` to each node of `cycle` with deterministic tie
// breaking (BFS exploring neighbors in ascending bus-id order). Throws
// std::invalid_argument when source is not on the cycle.
PathTable path_table(const Network& net, const Cycle& cycle, int source);

// Maximal cliques of the chordal completion induced by minimum-degree
// elimination (ties broken toward the lowest bus id).
TreeDecomposition tree_decomposition(const Network& net);

// True iff `bags` admits a junction tree: every bus and branch covered and
// the running-intersection property holds on a maximum-weight spanning tree
// of the bag-intersection graph.
bool verify_decomposition(const Network& net, const std::vector<Bag>& bags);

}  // namespace opf

#endif  // OPFRELAX_GRAPH_HPP
