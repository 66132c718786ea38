#pragma once

#include <Eigen/Dense>
#include <vector>

namespace netrecon {

/// Matrix-valued spectrum sampled on a grid of unit-circle angles in
/// [0, pi]. Holds joint spectra, their inverses and intermediate products.
struct SpectralMatrix {
  std::vector<double> freqs;
  std::vector<Eigen::MatrixXcd> values;

  SpectralMatrix() = default;
  SpectralMatrix(std::vector<double> frequencies, int n);

  int n() const { return values.empty() ? 0 : static_cast<int>(values[0].rows()); }
  int num_freqs() const { return static_cast<int>(freqs.size()); }

  bool is_hermitian(double tol = 1e-9) const;

  /// Replaces each matrix with its Hermitian part.
  void hermitianize();

  /// Smallest eigenvalue over all grid frequencies (Hermitian input).
  double min_eigenvalue() const;
};

/// `count` angles uniformly spaced over [0, pi], endpoints included.
std::vector<double> uniform_grid(int count);

/// One-sided DFT angles 2*pi*k/nfft for k = 0..nfft/2.
std::vector<double> welch_grid(int nfft);

/// Autocorrelation lags 0..max_lag of a real scalar process recovered from
/// its power spectral density by trapezoid quadrature on a fine grid:
/// r[k] = (1/pi) * integral of phi(w) cos(w k) over [0, pi].
std::vector<double> autocorr_from_spectrum(const std::vector<double>& freqs,
                                           const std::vector<double>& phi,
                                           int max_lag);

}  // namespace netrecon
