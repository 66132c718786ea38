#include "netrecon/graphs.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>

#include "netrecon/errors.hpp"

namespace netrecon {

namespace {

void check_node(int i, int n, const char* what) {
  if (i < 0 || i >= n) {
    throw DimensionError(std::string(what) + ": node index out of range");
  }
}

}  // namespace

DirectedGraph::DirectedGraph(int node_count) : n(node_count) {
  if (node_count < 0) throw DimensionError("DirectedGraph: negative node count");
}

void DirectedGraph::add_arc(int from, int to) {
  check_node(from, n, "add_arc");
  check_node(to, n, "add_arc");
  if (from == to) throw DimensionError("add_arc: self-loops are not allowed");
  arcs.insert({from, to});
}

std::vector<int> DirectedGraph::children(int j) const {
  check_node(j, n, "children");
  std::vector<int> out;
  for (const auto& [from, to] : arcs) {
    if (from == j) out.push_back(to);
  }
  return out;
}

std::vector<int> DirectedGraph::parents(int j) const {
  check_node(j, n, "parents");
  std::vector<int> out;
  for (const auto& [from, to] : arcs) {
    if (to == j) out.push_back(from);
  }
  return out;
}

UndirectedGraph::UndirectedGraph(int node_count) : n(node_count) {
  if (node_count < 0) throw DimensionError("UndirectedGraph: negative node count");
}

void UndirectedGraph::add_edge(int i, int j) {
  check_node(i, n, "add_edge");
  check_node(j, n, "add_edge");
  if (i == j) throw DimensionError("add_edge: self-loops are not allowed");
  edges.insert(make_edge(i, j));
}

std::vector<int> UndirectedGraph::neighbors(int i) const {
  check_node(i, n, "neighbors");
  std::vector<int> out;
  for (const auto& [a, b] : edges) {
    if (a == i) out.push_back(b);
    if (b == i) out.push_back(a);
  }
  return out;
}

NodeSet kins(const DirectedGraph& g, int j) {
  check_node(j, g.n, "kins");
  NodeSet out;
  for (int c : g.children(j)) out.insert(c);
  for (int p : g.parents(j)) out.insert(p);
  for (int c : g.children(j)) {
    for (int spouse : g.parents(c)) out.insert(spouse);
  }
  out.erase(j);
  return out;
}

UndirectedGraph moral_graph(const DirectedGraph& g) {
  UndirectedGraph out(g.n);
  for (int j = 0; j < g.n; ++j) {
    for (int i : kins(g, j)) out.add_edge(i, j);
  }
  return out;
}

UndirectedGraph perturbed_graph(const UndirectedGraph& g, const NodeSet& z) {
  for (int v : z) check_node(v, g.n, "perturbed_graph");

  // Connected components of the subgraph induced by z. A pair {i, j} gains
  // an edge exactly when both endpoints are adjacent to the same component:
  // the component supplies the all-intermediate-nodes-in-z path.
  std::vector<int> component(g.n, -1);
  int num_components = 0;
  for (int start : z) {
    if (component[start] != -1) continue;
    const int id = num_components++;
    std::deque<int> queue{start};
    component[start] = id;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w : g.neighbors(v)) {
        if (z.count(w) && component[w] == -1) {
          component[w] = id;
          queue.push_back(w);
        }
      }
    }
  }

  // touches[c] = nodes adjacent to component c (members included; an edge
  // from a member to an outside node is an adjacency of that component).
  std::vector<NodeSet> touches(num_components);
  for (int v = 0; v < g.n; ++v) {
    for (int w : g.neighbors(v)) {
      if (component[w] != -1) touches[component[w]].insert(v);
    }
  }

  UndirectedGraph out = g;
  for (const auto& nodes : touches) {
    for (auto it = nodes.begin(); it != nodes.end(); ++it) {
      for (auto jt = std::next(it); jt != nodes.end(); ++jt) {
        out.add_edge(*it, *jt);
      }
    }
  }
  return out;
}

bool is_separated(const UndirectedGraph& g, const NodeSet& a, const NodeSet& b,
                  const NodeSet& c) {
  auto overlaps = [](const NodeSet& x, const NodeSet& y) {
    return std::any_of(x.begin(), x.end(),
                       [&](int v) { return y.count(v) > 0; });
  };
  if (overlaps(a, b) || overlaps(a, c) || overlaps(b, c)) {
    throw DimensionError("is_separated: sets must be pairwise disjoint");
  }
  for (int v : a) check_node(v, g.n, "is_separated");
  for (int v : b) check_node(v, g.n, "is_separated");
  for (int v : c) check_node(v, g.n, "is_separated");

  std::vector<char> visited(g.n, 0);
  std::deque<int> queue;
  for (int v : a) {
    visited[v] = 1;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    if (b.count(v)) return false;
    for (int w : g.neighbors(v)) {
      if (!visited[w] && !c.count(w)) {
        visited[w] = 1;
        queue.push_back(w);
      }
    }
  }
  return true;
}

namespace {

void bron_kerbosch(const std::vector<NodeSet>& adj, NodeSet r, NodeSet p,
                   NodeSet x, std::vector<NodeSet>& out) {
  if (p.empty() && x.empty()) {
    out.push_back(r);
    return;
  }
  // Pivot on the candidate with the most neighbors in p.
  int pivot = -1;
  std::size_t best = 0;
  for (const NodeSet& pool : {std::cref(p).get(), std::cref(x).get()}) {
    for (int u : pool) {
      std::size_t deg = std::count_if(adj[u].begin(), adj[u].end(),
                                      [&](int v) { return p.count(v) > 0; });
      if (pivot == -1 || deg > best) {
        pivot = u;
        best = deg;
      }
    }
  }
  NodeSet candidates;
  for (int v : p) {
    if (pivot == -1 || !adj[pivot].count(v)) candidates.insert(v);
  }
  for (int v : candidates) {
    NodeSet r2 = r;
    r2.insert(v);
    NodeSet p2, x2;
    for (int w : adj[v]) {
      if (p.count(w)) p2.insert(w);
      if (x.count(w)) x2.insert(w);
    }
    bron_kerbosch(adj, std::move(r2), std::move(p2), std::move(x2), out);
    p.erase(v);
    x.insert(v);
  }
}

}  // namespace

std::vector<NodeSet> maximal_cliques(const UndirectedGraph& g) {
  std::vector<NodeSet> adj(g.n);
  for (const auto& [a, b] : g.edges) {
    adj[a].insert(b);
    adj[b].insert(a);
  }
  NodeSet all;
  for (int v = 0; v < g.n; ++v) all.insert(v);
  std::vector<NodeSet> out;
  bron_kerbosch(adj, {}, std::move(all), {}, out);
  std::sort(out.begin(), out.end());
  return out;
}

GraphDiff diff_graphs(const UndirectedGraph& reference,
                      const UndirectedGraph& candidate) {
  if (reference.n != candidate.n) {
    throw DimensionError("diff_graphs: node-count mismatch");
  }
  GraphDiff out;
  for (const Edge& e : candidate.edges) {
    if (!reference.edges.count(e)) out.spurious.insert(e);
  }
  for (const Edge& e : reference.edges) {
    if (!candidate.edges.count(e)) out.missing.insert(e);
  }
  return out;
}

}  // namespace netrecon
