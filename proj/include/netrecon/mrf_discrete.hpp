#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "netrecon/graphs.hpp"

namespace netrecon {

/// Nonnegative factor over a clique of variables. The table is laid out
/// row-major with the last listed variable varying fastest.
struct Factor {
  std::vector<int> nodes;
  std::vector<double> table;
};

/// Finite Markov random field given by its clique factorization.
struct DiscreteMrf {
  std::vector<int> alphabet;  // per-variable state counts
  std::vector<Factor> factors;
  UndirectedGraph graph;  // declared dependency graph

  void validate() const;  // factors cover cliques, tables nonnegative
};

/// Corruption of one node: a nonnegative pairwise table between the node's
/// value and its observed stand-in.
struct PerturbFactor {
  int node = 0;
  int alphabet = 2;           // states of the stand-in variable
  std::vector<double> table;  // (node state, stand-in state), row-major
};

/// Joint field over the original variables plus one stand-in per
/// perturbation, appended in order. The graph gains the pair edges.
DiscreteMrf join_with_perturbations(const DiscreteMrf& mrf,
                                    const std::vector<PerturbFactor>& perts);

/// Normalized distribution over a subset of variables.
struct ProbabilityTable {
  std::vector<int> nodes;     // original variable ids, ascending
  std::vector<int> alphabet;  // state counts, same order
  std::vector<double> p;      // row-major, last variable fastest

  std::size_t index_of(const std::vector<int>& states) const;
};

/// Exact marginal by exhaustive summation. Throws once the joint state
/// count exceeds the cap.
ProbabilityTable brute_marginal(const DiscreteMrf& mrf, const NodeSet& keep,
                                std::uint64_t state_cap = std::uint64_t{1} << 20);

struct CiVerdict {
  bool independent = true;
  bool had_zero_mass_cells = false;  // positivity violated somewhere
  double max_deviation = 0.0;        // worst |P(ij|rest) - P(i|rest)P(j|rest)|
};

/// Conditional independence of variables i and j given all remaining
/// variables of the table, tested cellwise to the given tolerance.
CiVerdict conditional_independence(const ProbabilityTable& table, int i, int j,
                                   double tol = 1e-10);

struct PairVerdict {
  Edge pair;
  bool expected_edge = false;  // adjacency in the perturbed graph
  bool dependent = false;      // CI test said "not independent"
  double max_deviation = 0.0;
};

struct PairwiseMarkovSummary {
  UndirectedGraph perturbed;  // ground-truth envelope
  std::vector<PairVerdict> pairs;
  int agreements = 0;
  /// Pairs adjacent in the perturbed graph that still tested independent;
  /// possible only for degenerate factor choices.
  std::vector<Edge> genericity_exceptions;
  /// Pairs that tested dependent outside the perturbed graph. Never
  /// expected; a nonempty list is a soundness violation.
  std::vector<Edge> violations;

  bool all_pairs_agree() const { return pairs.size() == static_cast<std::size_t>(agreements); }
};

/// Marginalizes the perturbed nodes' originals out of the joint field and
/// compares every observed pair's conditional-independence verdict against
/// adjacency in the perturbed graph.
PairwiseMarkovSummary verify_pairwise_markov(
    const DiscreteMrf& mrf, const std::vector<PerturbFactor>& perts,
    double tol = 1e-10);

}  // namespace netrecon
