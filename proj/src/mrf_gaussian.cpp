#include "netrecon/mrf_gaussian.hpp"

#include <cmath>

#include "netrecon/errors.hpp"

namespace netrecon {

GaussianNetworkModel::GaussianNetworkModel(Eigen::MatrixXd m,
                                           Eigen::VectorXd noise_variances)
    : n(static_cast<int>(m.rows())),
      coefficients(std::move(m)),
      variances(std::move(noise_variances)) {
  if (coefficients.rows() != coefficients.cols() || variances.size() != n) {
    throw DimensionError("GaussianNetworkModel: dimension mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (coefficients(i, i) != 0.0) {
      throw DimensionError("GaussianNetworkModel: diagonal must be zero");
    }
    if (variances(i) <= 0.0) {
      throw DimensionError("GaussianNetworkModel: variances must be positive");
    }
  }
  // Acyclic support: repeatedly peel nodes with no remaining parents.
  std::vector<int> indegree(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (coefficients(i, j) != 0.0) ++indegree[i];
    }
  }
  std::vector<int> open;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) open.push_back(i);
  }
  int peeled = 0;
  while (!open.empty()) {
    const int j = open.back();
    open.pop_back();
    ++peeled;
    for (int i = 0; i < n; ++i) {
      if (coefficients(i, j) != 0.0 && --indegree[i] == 0) open.push_back(i);
    }
  }
  if (peeled != n) {
    throw DimensionError("GaussianNetworkModel: coefficient support is cyclic");
  }
}

DirectedGraph GaussianNetworkModel::generative_graph() const {
  DirectedGraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (coefficients(i, j) != 0.0) g.add_arc(j, i);
    }
  }
  return g;
}

Eigen::MatrixXd precision_of(const GaussianNetworkModel& gm) {
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(gm.n, gm.n) - gm.coefficients;
  return a.transpose() * gm.variances.cwiseInverse().asDiagonal() * a;
}

Eigen::MatrixXd marginal_precision(const Eigen::MatrixXd& p,
                                   const NodeSet& hidden) {
  const int n = static_cast<int>(p.rows());
  if (p.cols() != n) throw DimensionError("marginal_precision: not square");
  for (int v : hidden) {
    if (v < 0 || v >= n) {
      throw DimensionError("marginal_precision: hidden node out of range");
    }
  }
  if (static_cast<int>(hidden.size()) >= n) {
    throw DimensionError("marginal_precision: no observed nodes left");
  }
  if (hidden.empty()) return p;

  std::vector<int> observed;
  for (int v = 0; v < n; ++v) {
    if (!hidden.count(v)) observed.push_back(v);
  }
  const int no = static_cast<int>(observed.size());
  const int nh = static_cast<int>(hidden.size());
  std::vector<int> hid(hidden.begin(), hidden.end());

  Eigen::MatrixXd poo(no, no), poh(no, nh), phh(nh, nh);
  for (int i = 0; i < no; ++i) {
    for (int j = 0; j < no; ++j) poo(i, j) = p(observed[i], observed[j]);
    for (int j = 0; j < nh; ++j) poh(i, j) = p(observed[i], hid[j]);
  }
  for (int i = 0; i < nh; ++i) {
    for (int j = 0; j < nh; ++j) phh(i, j) = p(hid[i], hid[j]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(phh);
  if (llt.info() != Eigen::Success) {
    throw DimensionError("marginal_precision: hidden block not positive definite");
  }
  Eigen::MatrixXd out = poo - poh * llt.solve(poh.transpose());
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd joint_precision_with_perturbations(
    const GaussianNetworkModel& gm,
    const std::vector<GaussianPerturbation>& perturbations) {
  const int n = gm.n;
  const int k = static_cast<int>(perturbations.size());
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(n + k, n + k);
  joint.topLeftCorner(n, n) = precision_of(gm);
  for (int idx = 0; idx < k; ++idx) {
    const auto& pert = perturbations[idx];
    if (pert.node < 0 || pert.node >= n) {
      throw DimensionError("joint_precision: perturbed node out of range");
    }
    if (pert.variance <= 0.0) {
      throw DimensionError("joint_precision: perturbation variance must be positive");
    }
    // u = gain * y_node + w contributes the conditional-density quadratic
    // (u - gain y)^2 / variance to the exponent.
    const int u = n + idx;
    const double inv_var = 1.0 / pert.variance;
    joint(u, u) += inv_var;
    joint(pert.node, pert.node) += pert.gain * pert.gain * inv_var;
    joint(u, pert.node) -= pert.gain * inv_var;
    joint(pert.node, u) -= pert.gain * inv_var;
  }
  return joint;
}

UndirectedGraph support_of_matrix(const Eigen::MatrixXd& m, double rel_tol) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw DimensionError("support_of_matrix: not square");
  const double cutoff = rel_tol * m.cwiseAbs().maxCoeff();
  UndirectedGraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::max(std::abs(m(i, j)), std::abs(m(j, i))) > cutoff) {
        g.add_edge(i, j);
      }
    }
  }
  return g;
}

}  // namespace netrecon
