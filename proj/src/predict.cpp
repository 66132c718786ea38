#include "netrecon/predict.hpp"

#include <cmath>

#include "netrecon/errors.hpp"

namespace netrecon {

PredictionReport predict_spurious(const DirectedGraph& g, const NodeSet& z) {
  PredictionReport report;
  report.true_moral = moral_graph(g);
  report.perturbed = perturbed_graph(report.true_moral, z);
  for (const Edge& e : report.perturbed.edges) {
    if (!report.true_moral.edges.count(e)) report.admissible_spurious.insert(e);
  }
  return report;
}

SpectralMatrix woodbury_sequence(
    const SpectralMatrix& psi0, const std::vector<int>& z_order,
    const std::map<int, std::vector<double>>& thetas) {
  const int n = psi0.n();
  for (int v : z_order) {
    if (v < 0 || v >= n) {
      throw DimensionError("woodbury_sequence: node out of range");
    }
    const auto it = thetas.find(v);
    if (it == thetas.end() || it->second.size() != psi0.freqs.size()) {
      throw DimensionError("woodbury_sequence: theta grid mismatch");
    }
    for (double t : it->second) {
      if (t < 0.0) throw DimensionError("woodbury_sequence: negative theta");
    }
  }

  SpectralMatrix out(psi0.freqs, n);
  std::vector<double> bad;
  for (int k = 0; k < psi0.num_freqs(); ++k) {
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(psi0.values[k]);
    if (std::abs(lu.determinant()) < 1e-300) {
      bad.push_back(psi0.freqs[k]);
      continue;
    }
    Eigen::MatrixXcd inv = lu.inverse();
    inv = 0.5 * (inv + inv.adjoint()).eval();
    for (int v : z_order) {
      const double theta = thetas.at(v)[k];
      if (theta == 0.0) continue;
      const Eigen::VectorXcd col = inv.col(v);
      const std::complex<double> delta = 1.0 / theta + inv(v, v);
      if (std::abs(delta) < 1e-14) {
        bad.push_back(psi0.freqs[k]);
        break;
      }
      inv -= (col * col.adjoint()) / delta;
    }
    out.values[k] = inv;
  }
  if (!bad.empty()) {
    throw SingularFrequencyError(
        "woodbury_sequence: degenerate update at " +
            std::to_string(bad.size()) + " grid frequencies",
        std::move(bad));
  }
  return out;
}

PredictionReport grade(const DirectedGraph& true_digraph, const NodeSet& z,
                       const UndirectedGraph& recovered) {
  if (recovered.n != true_digraph.n) {
    throw DimensionError("grade: node-count mismatch");
  }
  PredictionReport report = predict_spurious(true_digraph, z);
  report.recovered = recovered;
  for (const Edge& e : recovered.edges) {
    if (report.true_moral.edges.count(e)) {
      report.classification[e] = EdgeClass::kTrueKin;
    } else if (report.perturbed.edges.count(e)) {
      report.classification[e] = EdgeClass::kPredictedSpurious;
    } else {
      report.classification[e] = EdgeClass::kViolation;
      report.violations.insert(e);
    }
  }
  for (const Edge& e : report.true_moral.edges) {
    if (!recovered.edges.count(e)) report.missing.insert(e);
  }
  return report;
}

}  // namespace netrecon
