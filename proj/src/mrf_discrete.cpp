#include "netrecon/mrf_discrete.hpp"

#include <algorithm>
#include <cmath>

#include "netrecon/errors.hpp"

namespace netrecon {

namespace {

std::size_t table_size(const std::vector<int>& alphabet,
                       const std::vector<int>& nodes) {
  std::size_t size = 1;
  for (int v : nodes) size *= static_cast<std::size_t>(alphabet[v]);
  return size;
}

}  // namespace

void DiscreteMrf::validate() const {
  const int n = static_cast<int>(alphabet.size());
  if (graph.n != n) {
    throw DimensionError("DiscreteMrf: graph and alphabet sizes differ");
  }
  for (int a : alphabet) {
    if (a < 1) throw DimensionError("DiscreteMrf: alphabet sizes must be >= 1");
  }
  for (const Factor& f : factors) {
    for (int v : f.nodes) {
      if (v < 0 || v >= n) {
        throw DimensionError("DiscreteMrf: factor references unknown variable");
      }
    }
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      for (std::size_t j = i + 1; j < f.nodes.size(); ++j) {
        if (f.nodes[i] == f.nodes[j]) {
          throw DimensionError("DiscreteMrf: duplicate variable in factor");
        }
        if (!graph.has_edge(f.nodes[i], f.nodes[j])) {
          throw DimensionError(
              "DiscreteMrf: factor scope is not a clique of the graph");
        }
      }
    }
    if (f.table.size() != table_size(alphabet, f.nodes)) {
      throw DimensionError("DiscreteMrf: factor table size mismatch");
    }
    for (double x : f.table) {
      if (!(x >= 0.0)) {
        throw DimensionError("DiscreteMrf: factor tables must be nonnegative");
      }
    }
  }
}

DiscreteMrf join_with_perturbations(const DiscreteMrf& mrf,
                                    const std::vector<PerturbFactor>& perts) {
  mrf.validate();
  const int n = static_cast<int>(mrf.alphabet.size());
  DiscreteMrf joint = mrf;
  joint.graph = UndirectedGraph(n + static_cast<int>(perts.size()));
  for (const Edge& e : mrf.graph.edges) joint.graph.add_edge(e.first, e.second);

  for (std::size_t k = 0; k < perts.size(); ++k) {
    const PerturbFactor& pert = perts[k];
    if (pert.node < 0 || pert.node >= n) {
      throw DimensionError("join_with_perturbations: node out of range");
    }
    if (pert.alphabet < 1) {
      throw DimensionError("join_with_perturbations: bad stand-in alphabet");
    }
    const std::size_t expect =
        static_cast<std::size_t>(mrf.alphabet[pert.node]) * pert.alphabet;
    if (pert.table.size() != expect) {
      throw DimensionError("join_with_perturbations: table size mismatch");
    }
    const int standin = n + static_cast<int>(k);
    joint.alphabet.push_back(pert.alphabet);
    joint.graph.add_edge(pert.node, standin);
    joint.factors.push_back(Factor{{pert.node, standin}, pert.table});
  }
  joint.validate();
  return joint;
}

std::size_t ProbabilityTable::index_of(const std::vector<int>& states) const {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    idx = idx * alphabet[k] + states[k];
  }
  return idx;
}

ProbabilityTable brute_marginal(const DiscreteMrf& mrf, const NodeSet& keep,
                                std::uint64_t state_cap) {
  mrf.validate();
  const int n = static_cast<int>(mrf.alphabet.size());
  for (int v : keep) {
    if (v < 0 || v >= n) {
      throw DimensionError("brute_marginal: kept variable out of range");
    }
  }

  std::uint64_t joint_states = 1;
  for (int a : mrf.alphabet) {
    joint_states *= static_cast<std::uint64_t>(a);
    if (joint_states > state_cap) {
      throw EnumerationCapError("brute_marginal: joint state count exceeds cap");
    }
  }

  ProbabilityTable out;
  out.nodes.assign(keep.begin(), keep.end());
  for (int v : out.nodes) out.alphabet.push_back(mrf.alphabet[v]);
  out.p.assign(table_size(mrf.alphabet, out.nodes), 0.0);

  std::vector<int> state(n, 0);
  std::vector<int> kept_states(out.nodes.size(), 0);
  double total = 0.0;
  for (std::uint64_t counter = 0;; ++counter) {
    double weight = 1.0;
    for (const Factor& f : mrf.factors) {
      std::size_t idx = 0;
      for (int v : f.nodes) idx = idx * mrf.alphabet[v] + state[v];
      weight *= f.table[idx];
      if (weight == 0.0) break;
    }
    if (weight != 0.0) {
      for (std::size_t k = 0; k < out.nodes.size(); ++k) {
        kept_states[k] = state[out.nodes[k]];
      }
      out.p[out.index_of(kept_states)] += weight;
      total += weight;
    }
    // Advance the mixed-radix counter (last variable fastest).
    int pos = n - 1;
    while (pos >= 0 && ++state[pos] == mrf.alphabet[pos]) state[pos--] = 0;
    if (pos < 0) break;
  }
  if (total <= 0.0) {
    throw DimensionError("brute_marginal: distribution is not normalizable");
  }
  for (double& x : out.p) x /= total;
  return out;
}

CiVerdict conditional_independence(const ProbabilityTable& table, int i, int j,
                                   double tol) {
  const auto pos_of = [&](int v) {
    const auto it = std::find(table.nodes.begin(), table.nodes.end(), v);
    if (it == table.nodes.end()) {
      throw DimensionError("conditional_independence: variable not in table");
    }
    return static_cast<std::size_t>(it - table.nodes.begin());
  };
  const std::size_t pi = pos_of(i), pj = pos_of(j);
  if (pi == pj) throw DimensionError("conditional_independence: i == j");

  const std::size_t m = table.nodes.size();
  const int ai = table.alphabet[pi], aj = table.alphabet[pj];
  std::size_t rest_count = 1;
  for (std::size_t k = 0; k < m; ++k) {
    if (k != pi && k != pj) rest_count *= table.alphabet[k];
  }

  // Bucket cells by the assignment of the conditioning variables.
  std::vector<double> buckets(rest_count * ai * aj, 0.0);
  std::vector<int> state(m, 0);
  for (std::size_t flat = 0; flat < table.p.size(); ++flat) {
    std::size_t rest_idx = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k != pi && k != pj) rest_idx = rest_idx * table.alphabet[k] + state[k];
    }
    buckets[(rest_idx * ai + state[pi]) * aj + state[pj]] += table.p[flat];
    int pos = static_cast<int>(m) - 1;
    while (pos >= 0 && ++state[pos] == table.alphabet[pos]) state[pos--] = 0;
  }

  CiVerdict verdict;
  std::vector<double> pi_marg(ai), pj_marg(aj);
  for (std::size_t r = 0; r < rest_count; ++r) {
    const double* cell = &buckets[r * ai * aj];
    double mass = 0.0;
    for (int a = 0; a < ai * aj; ++a) mass += cell[a];
    if (mass <= 0.0) {
      verdict.had_zero_mass_cells = true;
      continue;
    }
    std::fill(pi_marg.begin(), pi_marg.end(), 0.0);
    std::fill(pj_marg.begin(), pj_marg.end(), 0.0);
    for (int a = 0; a < ai; ++a) {
      for (int b = 0; b < aj; ++b) {
        pi_marg[a] += cell[a * aj + b];
        pj_marg[b] += cell[a * aj + b];
      }
    }
    for (int a = 0; a < ai; ++a) {
      for (int b = 0; b < aj; ++b) {
        const double joint = cell[a * aj + b] / mass;
        const double product = (pi_marg[a] / mass) * (pj_marg[b] / mass);
        verdict.max_deviation =
            std::max(verdict.max_deviation, std::abs(joint - product));
      }
    }
  }
  verdict.independent = verdict.max_deviation < tol;
  return verdict;
}

PairwiseMarkovSummary verify_pairwise_markov(
    const DiscreteMrf& mrf, const std::vector<PerturbFactor>& perts,
    double tol) {
  const int n = static_cast<int>(mrf.alphabet.size());
  NodeSet z;
  for (const PerturbFactor& pert : perts) {
    if (!z.insert(pert.node).second) {
      throw DimensionError("verify_pairwise_markov: node perturbed twice");
    }
  }

  const DiscreteMrf joint = join_with_perturbations(mrf, perts);
  NodeSet keep;
  for (int v = 0; v < n; ++v) {
    if (!z.count(v)) keep.insert(v);
  }
  for (std::size_t k = 0; k < perts.size(); ++k) {
    keep.insert(n + static_cast<int>(k));
  }
  const ProbabilityTable marginal = brute_marginal(joint, keep);

  // Each original node is represented by itself when observed directly and
  // by its stand-in when perturbed.
  std::vector<int> representative(n);
  for (int v = 0; v < n; ++v) representative[v] = v;
  for (std::size_t k = 0; k < perts.size(); ++k) {
    representative[perts[k].node] = n + static_cast<int>(k);
  }

  PairwiseMarkovSummary summary;
  summary.perturbed = perturbed_graph(mrf.graph, z);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const CiVerdict ci = conditional_independence(
          marginal, representative[a], representative[b], tol);
      PairVerdict pv;
      pv.pair = make_edge(a, b);
      pv.expected_edge = summary.perturbed.has_edge(a, b);
      pv.dependent = !ci.independent;
      pv.max_deviation = ci.max_deviation;
      if (pv.expected_edge == pv.dependent) {
        ++summary.agreements;
      } else if (pv.expected_edge) {
        summary.genericity_exceptions.push_back(pv.pair);
      } else {
        summary.violations.push_back(pv.pair);
      }
      summary.pairs.push_back(pv);
    }
  }
  return summary;
}

}  // namespace netrecon
