#include "netrecon/spectral_matrix.hpp"

#include <cmath>
#include <numbers>

#include "netrecon/errors.hpp"

namespace netrecon {

SpectralMatrix::SpectralMatrix(std::vector<double> frequencies, int n)
    : freqs(std::move(frequencies)) {
  values.assign(freqs.size(), Eigen::MatrixXcd::Zero(n, n));
}

bool SpectralMatrix::is_hermitian(double tol) const {
  for (const auto& m : values) {
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

void SpectralMatrix::hermitianize() {
  for (auto& m : values) m = 0.5 * (m + m.adjoint()).eval();
}

double SpectralMatrix::min_eigenvalue() const {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& m : values) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

std::vector<double> uniform_grid(int count) {
  if (count < 2) throw DimensionError("uniform_grid: need at least two points");
  std::vector<double> out(count);
  for (int k = 0; k < count; ++k) {
    out[k] = std::numbers::pi * k / (count - 1);
  }
  return out;
}

std::vector<double> welch_grid(int nfft) {
  if (nfft < 2) throw DimensionError("welch_grid: nfft too small");
  std::vector<double> out(nfft / 2 + 1);
  for (int k = 0; k <= nfft / 2; ++k) {
    out[k] = 2.0 * std::numbers::pi * k / nfft;
  }
  return out;
}

std::vector<double> autocorr_from_spectrum(const std::vector<double>& freqs,
                                           const std::vector<double>& phi,
                                           int max_lag) {
  if (freqs.size() != phi.size() || freqs.size() < 2) {
    throw DimensionError("autocorr_from_spectrum: grid mismatch");
  }
  std::vector<double> r(max_lag + 1, 0.0);
  for (int k = 0; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < freqs.size(); ++i) {
      const double f0 = phi[i] * std::cos(freqs[i] * k);
      const double f1 = phi[i + 1] * std::cos(freqs[i + 1] * k);
      acc += 0.5 * (f0 + f1) * (freqs[i + 1] - freqs[i]);
    }
    r[k] = acc / std::numbers::pi;
  }
  return r;
}

}  // namespace netrecon
