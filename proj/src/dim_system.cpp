#include "netrecon/dim_system.hpp"

#include <cmath>
#include <numbers>

#include "netrecon/errors.hpp"
#include "netrecon/rng.hpp"

namespace netrecon {

NoiseSpec::NoiseSpec(double var, std::optional<TransferFunction> shape)
    : variance(var), shaping(std::move(shape)) {
  if (variance <= 0.0) throw DimensionError("NoiseSpec: variance must be positive");
  if (shaping && !shaping->is_stable()) {
    throw UnstableSystemError("NoiseSpec: shaping filter is unstable");
  }
}

double NoiseSpec::spectrum(double omega) const {
  if (!shaping) return variance;
  return variance * std::norm(shaping->evaluate(omega));
}

DimSystem::DimSystem(int node_count) : n(node_count) {
  if (node_count <= 0) throw DimensionError("DimSystem: need at least one node");
  filters.assign(n, std::vector<std::optional<TransferFunction>>(n));
  noise.assign(n, NoiseSpec{});
}

void DimSystem::set_arc(int from, int to, TransferFunction tf) {
  if (from < 0 || from >= n || to < 0 || to >= n) {
    throw DimensionError("DimSystem::set_arc: node index out of range");
  }
  if (from == to) {
    throw DimensionError(
        "DimSystem::set_arc: diagonal entries are zero by construction; "
        "model self-dependence through the noise shaping");
  }
  filters[to][from] = std::move(tf);
}

DirectedGraph DimSystem::generative_graph() const {
  DirectedGraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (filters[i][j]) g.add_arc(j, i);
    }
  }
  return g;
}

Eigen::MatrixXcd DimSystem::coupling_at(double omega) const {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (filters[i][j]) g(i, j) = filters[i][j]->evaluate(omega);
    }
  }
  return g;
}

bool check_stability(const DimSystem& sys, double tolerance, int grid_points) {
  for (int i = 0; i < sys.n; ++i) {
    for (int j = 0; j < sys.n; ++j) {
      if (sys.filters[i][j] && !sys.filters[i][j]->is_stable()) return false;
    }
    if (sys.noise[i].shaping && !sys.noise[i].shaping->is_stable()) return false;
  }
  for (double omega : uniform_grid(grid_points)) {
    const Eigen::MatrixXcd a =
        Eigen::MatrixXcd::Identity(sys.n, sys.n) - sys.coupling_at(omega);
    if (std::abs(a.determinant()) < tolerance) return false;
  }
  return true;
}

SpectralMatrix analytic_psd(const DimSystem& sys,
                            const std::vector<double>& freqs) {
  if (!check_stability(sys)) {
    throw UnstableSystemError("analytic_psd: system is not stable");
  }
  SpectralMatrix out(freqs, sys.n);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(sys.n, sys.n);
  for (int k = 0; k < out.num_freqs(); ++k) {
    const double omega = freqs[k];
    const Eigen::MatrixXcd a = eye - sys.coupling_at(omega);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    if (std::abs(lu.determinant()) < 1e-12) {
      throw SingularFrequencyError("analytic_psd: I - G singular", {omega});
    }
    const Eigen::MatrixXcd ainv = lu.inverse();
    Eigen::VectorXd phi_e(sys.n);
    for (int i = 0; i < sys.n; ++i) phi_e(i) = sys.noise[i].spectrum(omega);
    Eigen::MatrixXcd value =
        ainv * phi_e.cast<std::complex<double>>().asDiagonal() * ainv.adjoint();
    out.values[k] = 0.5 * (value + value.adjoint().eval());
  }
  return out;
}

SpectralMatrix analytic_inverse_psd(const DimSystem& sys,
                                    const std::vector<double>& freqs) {
  if (!check_stability(sys)) {
    throw UnstableSystemError("analytic_inverse_psd: system is not stable");
  }
  SpectralMatrix out(freqs, sys.n);
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(sys.n, sys.n);
  for (int k = 0; k < out.num_freqs(); ++k) {
    const double omega = freqs[k];
    const Eigen::MatrixXcd a = eye - sys.coupling_at(omega);
    Eigen::VectorXd inv_phi_e(sys.n);
    for (int i = 0; i < sys.n; ++i) {
      const double s = sys.noise[i].spectrum(omega);
      if (s <= 0.0) {
        throw SingularFrequencyError(
            "analytic_inverse_psd: noise spectrum vanishes", {omega});
      }
      inv_phi_e(i) = 1.0 / s;
    }
    Eigen::MatrixXcd value =
        a.adjoint() * inv_phi_e.cast<std::complex<double>>().asDiagonal() * a;
    out.values[k] = 0.5 * (value + value.adjoint().eval());
  }
  return out;
}

TimeSeriesPanel simulate_dim(const DimSystem& sys, long t, std::uint64_t seed,
                             long burn_in) {
  if (t <= 0) throw DimensionError("simulate_dim: sample count must be positive");
  if (burn_in < 0) throw DimensionError("simulate_dim: negative burn-in");
  if (!check_stability(sys)) {
    throw UnstableSystemError("simulate_dim: system is not stable");
  }

  struct ArcFilter {
    int to, from;
    TfFilter filter;
  };
  std::vector<ArcFilter> arcs;
  Eigen::MatrixXd instant = Eigen::MatrixXd::Zero(sys.n, sys.n);
  bool any_feedthrough = false;
  for (int i = 0; i < sys.n; ++i) {
    for (int j = 0; j < sys.n; ++j) {
      if (!sys.filters[i][j]) continue;
      arcs.push_back({i, j, TfFilter(*sys.filters[i][j])});
      const double d = sys.filters[i][j]->direct_gain();
      instant(i, j) = d;
      if (d != 0.0) any_feedthrough = true;
    }
  }

  // With instantaneous coupling present, each step solves
  // (I - G0) y[t] = e[t] + lagged filter contributions.
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> lu;
  if (any_feedthrough) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(sys.n, sys.n) - instant;
    lu.emplace(a);
    if (std::abs(lu->determinant()) < 1e-12) {
      throw UnstableSystemError(
          "simulate_dim: instantaneous coupling matrix I - G0 is singular");
    }
  }

  std::vector<Rng> node_rng;
  std::vector<std::optional<TfFilter>> noise_filter(sys.n);
  node_rng.reserve(sys.n);
  for (int i = 0; i < sys.n; ++i) {
    node_rng.emplace_back(derive_seed(seed, {static_cast<std::uint64_t>(i)}));
    if (sys.noise[i].shaping) noise_filter[i].emplace(*sys.noise[i].shaping);
  }

  TimeSeriesPanel panel;
  panel.samples.resize(t, sys.n);
  for (int i = 0; i < sys.n; ++i) {
    panel.labels.push_back(std::to_string(i + 1));
  }

  Eigen::VectorXd rhs(sys.n), y(sys.n);
  for (long step = 0; step < burn_in + t; ++step) {
    for (int i = 0; i < sys.n; ++i) {
      double e = node_rng[i].normal(0.0, std::sqrt(sys.noise[i].variance));
      if (noise_filter[i]) e = noise_filter[i]->step(e);
      rhs(i) = e;
    }
    for (const auto& arc : arcs) rhs(arc.to) += arc.filter.partial();
    if (lu) {
      y = lu->solve(rhs);
    } else {
      y = rhs;
    }
    for (auto& arc : arcs) arc.filter.step(y(arc.from));
    if (step >= burn_in) panel.samples.row(step - burn_in) = y.transpose();
  }
  return panel;
}

}  // namespace netrecon
