#pragma once

#include <Eigen/Dense>
#include <vector>

#include "netrecon/graphs.hpp"

namespace netrecon {

/// Static linear network y = M y + e with acyclic coefficient support and
/// independent Gaussian noise; the finite-dimensional counterpart of the
/// dynamic model.
struct GaussianNetworkModel {
  int n = 0;
  Eigen::MatrixXd coefficients;  // coefficients(i, j): weight of y_j in y_i
  Eigen::VectorXd variances;

  GaussianNetworkModel() = default;
  GaussianNetworkModel(Eigen::MatrixXd m, Eigen::VectorXd noise_variances);

  /// Arc j -> i for every nonzero coefficient (i, j).
  DirectedGraph generative_graph() const;
};

/// Precision (inverse covariance) of y: (I - M)^T E^-1 (I - M). Its
/// off-diagonal support never exceeds the moral graph of the generative
/// digraph.
Eigen::MatrixXd precision_of(const GaussianNetworkModel& gm);

/// Precision of the observed variables after hiding the given nodes:
/// the Schur complement P_oo - P_oh P_hh^-1 P_ho. Rows and columns of the
/// result follow the ascending order of the observed indices.
Eigen::MatrixXd marginal_precision(const Eigen::MatrixXd& p,
                                   const NodeSet& hidden);

/// Observed-but-corrupted copy u = gain * y_node + noise attached to a
/// node; keeps the joint Gaussian and everywhere positive.
struct GaussianPerturbation {
  int node = 0;
  double gain = 1.0;
  double variance = 1.0;
};

/// Precision of the joint (y_1..y_n, u_1..u_k) with one extra variable per
/// perturbation, appended after the y block in the given order.
Eigen::MatrixXd joint_precision_with_perturbations(
    const GaussianNetworkModel& gm,
    const std::vector<GaussianPerturbation>& perturbations);

/// Off-diagonal support of a symmetric matrix; an entry counts when its
/// magnitude exceeds rel_tol * max(|entries|).
UndirectedGraph support_of_matrix(const Eigen::MatrixXd& m, double rel_tol);

}  // namespace netrecon
