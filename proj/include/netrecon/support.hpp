#pragma once

#include <Eigen/Dense>

#include "netrecon/graphs.hpp"
#include "netrecon/spectral_matrix.hpp"
#include "netrecon/welch.hpp"

namespace netrecon {

/// How per-frequency inverse-spectrum magnitudes are collapsed to an edge
/// decision.
struct SupportConfig {
  enum class Aggregate { kMaxOverFrequency, kMeanOverFrequency };
  enum class ThresholdMode { kRelativeToMax, kAbsolute };

  Aggregate aggregate = Aggregate::kMaxOverFrequency;
  ThresholdMode threshold_mode = ThresholdMode::kRelativeToMax;
  double tau = 0.08;
  /// Ridge added to the diagonal before inversion; negative selects the
  /// per-frequency default 1e-8 * trace / n.
  double ridge = -1.0;
  double condition_cap = 1e12;
};

/// Per-frequency inverse of (S + epsilon I) through a Hermitian
/// eigendecomposition; output is Hermitian by construction. Frequencies
/// whose conditioning exceeds the cap are collected into the error.
SpectralMatrix invert_spectrum(const SpectralMatrix& s, double ridge_epsilon,
                               double condition_cap = 1e12);

/// Aggregated magnitude of each entry over the grid.
Eigen::MatrixXd support_scores(const SpectralMatrix& inv,
                               SupportConfig::Aggregate aggregate);

/// Edge {i, j} iff its aggregated score exceeds the threshold
/// (tau times the largest off-diagonal score in relative mode, tau itself
/// in absolute mode). The diagonal never votes.
UndirectedGraph support_graph(const SpectralMatrix& inv,
                              const SupportConfig& cfg);

/// estimate -> invert -> threshold.
UndirectedGraph reconstruct(const TimeSeriesPanel& panel,
                            const WelchConfig& welch,
                            const SupportConfig& support);

/// Inverse of a spectrum with the config's ridge policy applied
/// (auto ridge when cfg.ridge < 0).
SpectralMatrix invert_spectrum_with_config(const SpectralMatrix& s,
                                           const SupportConfig& cfg);

}  // namespace netrecon
