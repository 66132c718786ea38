#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netrecon/graphs.hpp"
#include "netrecon/spectral_matrix.hpp"
#include "netrecon/transfer_function.hpp"

namespace netrecon {

/// Per-node innovation: white Gaussian noise of the given variance,
/// optionally shaped by a stable filter for colored noise.
struct NoiseSpec {
  double variance = 1.0;
  std::optional<TransferFunction> shaping;

  NoiseSpec() = default;
  explicit NoiseSpec(double var,
                     std::optional<TransferFunction> shape = std::nullopt);

  /// Power spectral density of the noise at the given angle.
  double spectrum(double omega) const;
};

/// Networked LTI generative model: y = G(z) y + e with zero diagonal and
/// independent per-node noise.
struct DimSystem {
  int n = 0;
  /// filters[i][j] is the filter applied to y_j in the equation for y_i;
  /// absent means no arc j -> i.
  std::vector<std::vector<std::optional<TransferFunction>>> filters;
  std::vector<NoiseSpec> noise;

  DimSystem() = default;
  explicit DimSystem(int node_count);

  /// Adds the arc from -> to carrying the given filter. Rejects diagonal
  /// entries.
  void set_arc(int from, int to, TransferFunction tf);

  DirectedGraph generative_graph() const;

  /// G(e^{j omega}).
  Eigen::MatrixXcd coupling_at(double omega) const;
};

/// True iff every filter is stable and |det(I - G)| stays above tolerance
/// on a fine unit-circle grid (the closed loop is well defined).
bool check_stability(const DimSystem& sys, double tolerance = 1e-6,
                     int grid_points = 512);

/// Phi_yy(omega) = (I-G)^-1 Phi_e (I-G)^-*, Hermitian per frequency.
SpectralMatrix analytic_psd(const DimSystem& sys,
                            const std::vector<double>& freqs);

/// (I-G)* Phi_e^-1 (I-G), computed directly without matrix inversion.
SpectralMatrix analytic_inverse_psd(const DimSystem& sys,
                                    const std::vector<double>& freqs);

/// Multichannel record: samples(t, i) is node i at time t. One column per
/// node to match the CSV layout.
struct TimeSeriesPanel {
  Eigen::MatrixXd samples;
  std::vector<std::string> labels;

  int n() const { return static_cast<int>(samples.cols()); }
  long length() const { return static_cast<long>(samples.rows()); }
};

/// Simulates the network for `t` samples after discarding `burn_in`
/// start-up samples. Deterministic given the seed; per-node noise streams
/// are derived independently, so results do not depend on node evaluation
/// order.
TimeSeriesPanel simulate_dim(const DimSystem& sys, long t, std::uint64_t seed,
                             long burn_in = 1000);

}  // namespace netrecon
