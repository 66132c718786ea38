#pragma once

#include <complex>
#include <vector>

namespace netrecon {

/// Rational discrete-time transfer function in powers of z^-1:
/// H(z) = (num[0] + num[1] z^-1 + ...) / (den[0] + den[1] z^-1 + ...).
/// den[0] must be nonzero.
struct TransferFunction {
  std::vector<double> num;
  std::vector<double> den{1.0};

  TransferFunction() = default;
  TransferFunction(std::vector<double> numerator,
                   std::vector<double> denominator = {1.0});

  /// Value at z = e^{j omega}.
  std::complex<double> evaluate(double omega) const;

  /// True iff every pole lies strictly inside the unit circle.
  bool is_stable() const;

  bool is_fir() const { return den.size() == 1; }

  /// Coefficient of the direct (lag-zero) input-output path.
  double direct_gain() const { return num.empty() ? 0.0 : num[0] / den[0]; }

  static TransferFunction delay(int lag, double gain = 1.0);
  static TransferFunction constant(double value);
};

/// Roots of coeffs[0] x^m + coeffs[1] x^{m-1} + ... + coeffs[m]
/// via the companion-matrix eigenvalues.
std::vector<std::complex<double>> polynomial_roots(
    const std::vector<double>& coeffs);

/// Streaming single-channel filter (direct form II transposed).
class TfFilter {
 public:
  explicit TfFilter(const TransferFunction& tf);

  /// Advances one sample and returns the output.
  double step(double x);

  /// Output this step would produce for a zero input, without advancing.
  /// Used to split off the instantaneous feedthrough when solving a
  /// static coupling system.
  double partial() const { return state_.empty() ? 0.0 : state_[0]; }

  double feedthrough() const { return b_[0]; }

  void reset();

  /// Runs the filter over a whole sequence from zero initial state.
  static std::vector<double> filter(const TransferFunction& tf,
                                    const std::vector<double>& x);

 private:
  std::vector<double> b_;      // numerator, normalized by den[0]
  std::vector<double> a_;      // denominator, normalized by den[0]
  std::vector<double> state_;  // max(len(b), len(a)) - 1 entries
};

}  // namespace netrecon
