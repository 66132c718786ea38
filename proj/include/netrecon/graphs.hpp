#pragma once

#include <set>
#include <utility>
#include <vector>

namespace netrecon {

/// Set of 0-based node indices.
using NodeSet = std::set<int>;

/// Undirected edge, stored with first < second.
using Edge = std::pair<int, int>;

inline Edge make_edge(int i, int j) {
  return i < j ? Edge{i, j} : Edge{j, i};
}

/// Directed graph over dense 0-based node indices. No self-loops.
struct DirectedGraph {
  int n = 0;
  std::set<std::pair<int, int>> arcs;  // ordered (from, to)

  DirectedGraph() = default;
  explicit DirectedGraph(int node_count);

  void add_arc(int from, int to);
  bool has_arc(int from, int to) const { return arcs.count({from, to}) > 0; }

  std::vector<int> children(int j) const;
  std::vector<int> parents(int j) const;
};

/// Undirected graph over dense 0-based node indices. No self-loops;
/// edges are stored normalized so symmetry holds by construction.
struct UndirectedGraph {
  int n = 0;
  std::set<Edge> edges;

  UndirectedGraph() = default;
  explicit UndirectedGraph(int node_count);

  void add_edge(int i, int j);
  bool has_edge(int i, int j) const { return edges.count(make_edge(i, j)) > 0; }

  std::vector<int> neighbors(int i) const;
};

/// Kins of node j: children, parents and co-parents of shared children,
/// excluding j itself.
NodeSet kins(const DirectedGraph& g, int j);

/// Connects every node to each of its kins.
UndirectedGraph moral_graph(const DirectedGraph& g);

/// Adds an edge {i, j} for every pair joined by a path whose intermediate
/// nodes all lie in z. The input edges are always retained.
UndirectedGraph perturbed_graph(const UndirectedGraph& g, const NodeSet& z);

/// True iff removing c disconnects every a-node from every b-node.
/// The three sets must be pairwise disjoint.
bool is_separated(const UndirectedGraph& g, const NodeSet& a, const NodeSet& b,
                  const NodeSet& c);

/// Exact maximal-clique enumeration (Bron-Kerbosch with pivoting).
/// Graphs in this project are small, so the exponential worst case is
/// accepted.
std::vector<NodeSet> maximal_cliques(const UndirectedGraph& g);

struct GraphDiff {
  std::set<Edge> spurious;  // in candidate but not in reference
  std::set<Edge> missing;   // in reference but not in candidate
};

GraphDiff diff_graphs(const UndirectedGraph& reference,
                      const UndirectedGraph& candidate);

}  // namespace netrecon
