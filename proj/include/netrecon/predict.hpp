#pragma once

#include <map>
#include <optional>
#include <vector>

#include "netrecon/graphs.hpp"
#include "netrecon/spectral_matrix.hpp"

namespace netrecon {

enum class EdgeClass { kTrueKin, kPredictedSpurious, kViolation };

/// Where spurious links may appear under a given corruption set, and how a
/// recovered graph measures up against that envelope.
struct PredictionReport {
  UndirectedGraph true_moral;
  UndirectedGraph perturbed;
  std::set<Edge> admissible_spurious;  // perturbed minus moral

  std::optional<UndirectedGraph> recovered;
  std::set<Edge> violations;  // recovered edges outside the perturbed graph
  std::set<Edge> missing;     // moral edges absent from recovered
  std::map<Edge, EdgeClass> classification;
};

/// Moral graph, its perturbation by z, and the admissible spurious edges.
PredictionReport predict_spurious(const DirectedGraph& g, const NodeSet& z);

/// Inverse of psi0 + sum_v b_v theta_v b_v^T computed per frequency by
/// iterated rank-one downdates of the inverse. Nodes whose theta vanishes
/// at a frequency are skipped there (the update is a no-op).
SpectralMatrix woodbury_sequence(
    const SpectralMatrix& psi0, const std::vector<int>& z_order,
    const std::map<int, std::vector<double>>& thetas);

/// Fills in the recovered-graph fields of a prediction report and
/// classifies every recovered edge.
PredictionReport grade(const DirectedGraph& true_digraph, const NodeSet& z,
                       const UndirectedGraph& recovered);

}  // namespace netrecon
