#pragma once

#include <complex>
#include <string>
#include <vector>

#include "netrecon/dim_system.hpp"
#include "netrecon/spectral_matrix.hpp"

namespace netrecon {

/// Averaged-periodogram estimator settings.
struct WelchConfig {
  int segment_length = 512;
  double overlap = 0.5;  // fraction of a segment shared with the next
  std::string window = "hann";
  int nfft = 512;  // power of two, >= segment_length

  void validate(long record_length) const;
};

/// In-place radix-2 FFT; the length must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& data);

std::vector<double> make_window(const std::string& name, int length);

/// Cross power spectral density of all channel pairs by Welch's method:
/// windowed overlapping segments, averaged modified cross-periodograms,
/// identical treatment of every pair. Output is Hermitian per frequency on
/// the one-sided grid 2*pi*k/nfft, k = 0..nfft/2, and scaled so that unit
/// white noise has unit spectral density.
SpectralMatrix estimate_cross_psd(const TimeSeriesPanel& panel,
                                  const WelchConfig& cfg);

}  // namespace netrecon
