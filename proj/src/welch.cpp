#include "netrecon/welch.hpp"

#include <cmath>
#include <numbers>

#include "netrecon/errors.hpp"

namespace netrecon {

namespace {

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

}  // namespace

void WelchConfig::validate(long record_length) const {
  if (segment_length < 2) {
    throw ConfigError("WelchConfig: segment length too small");
  }
  if (segment_length > record_length) {
    throw ConfigError("WelchConfig: segment longer than the record");
  }
  if (overlap < 0.0 || overlap >= 1.0) {
    throw ConfigError("WelchConfig: overlap must be in [0, 1)");
  }
  if (nfft < segment_length) {
    throw ConfigError("WelchConfig: nfft must be >= segment length");
  }
  if (!is_power_of_two(nfft)) {
    throw ConfigError("WelchConfig: nfft must be a power of two");
  }
  make_window(window, segment_length);  // rejects unknown names
}

void fft_inplace(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(static_cast<int>(n))) {
    throw DimensionError("fft_inplace: length must be a power of two");
  }
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> root = std::polar(1.0, angle);
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w = 1.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> even = data[i + k];
        const std::complex<double> odd = data[i + k + len / 2] * w;
        data[i + k] = even + odd;
        data[i + k + len / 2] = even - odd;
        w *= root;
      }
    }
  }
}

std::vector<double> make_window(const std::string& name, int length) {
  std::vector<double> w(length, 1.0);
  if (name == "rectangular" || name == "boxcar") return w;
  const double step = 2.0 * std::numbers::pi / length;
  if (name == "hann") {
    for (int t = 0; t < length; ++t) w[t] = 0.5 * (1.0 - std::cos(step * t));
  } else if (name == "hamming") {
    for (int t = 0; t < length; ++t) w[t] = 0.54 - 0.46 * std::cos(step * t);
  } else {
    throw ConfigError("unknown window: " + name);
  }
  return w;
}

SpectralMatrix estimate_cross_psd(const TimeSeriesPanel& panel,
                                  const WelchConfig& cfg) {
  const long t_len = panel.length();
  const int n = panel.n();
  cfg.validate(t_len);
  if (!panel.samples.allFinite()) {
    throw DimensionError("estimate_cross_psd: panel contains non-finite values");
  }

  const std::vector<double> window = make_window(cfg.window, cfg.segment_length);
  double window_energy = 0.0;
  for (double w : window) window_energy += w * w;

  const long hop = std::max<long>(
      1, static_cast<long>(std::lround(cfg.segment_length * (1.0 - cfg.overlap))));
  const int num_bins = cfg.nfft / 2 + 1;

  SpectralMatrix out(welch_grid(cfg.nfft), n);

  // DFT of each windowed, zero-padded segment per channel.
  std::vector<std::vector<std::complex<double>>> dft(
      n, std::vector<std::complex<double>>(cfg.nfft));
  long segments = 0;
  for (long start = 0; start + cfg.segment_length <= t_len; start += hop) {
    ++segments;
    for (int ch = 0; ch < n; ++ch) {
      auto& buf = dft[ch];
      for (int s = 0; s < cfg.segment_length; ++s) {
        buf[s] = window[s] * panel.samples(start + s, ch);
      }
      std::fill(buf.begin() + cfg.segment_length, buf.end(), 0.0);
      fft_inplace(buf);
    }
    for (int k = 0; k < num_bins; ++k) {
      Eigen::MatrixXcd& acc = out.values[k];
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          acc(i, j) += dft[i][k] * std::conj(dft[j][k]);
        }
      }
    }
  }

  const double scale = 1.0 / (static_cast<double>(segments) * window_energy);
  for (auto& m : out.values) m *= scale;
  out.hermitianize();
  return out;
}

}  // namespace netrecon
