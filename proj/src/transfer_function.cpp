#include "netrecon/transfer_function.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "netrecon/errors.hpp"

namespace netrecon {

TransferFunction::TransferFunction(std::vector<double> numerator,
                                   std::vector<double> denominator)
    : num(std::move(numerator)), den(std::move(denominator)) {
  if (den.empty() || den[0] == 0.0) {
    throw DimensionError("TransferFunction: den[0] must be nonzero");
  }
}

std::complex<double> TransferFunction::evaluate(double omega) const {
  const std::complex<double> x = std::polar(1.0, -omega);  // e^{-j omega}
  auto horner = [&x](const std::vector<double>& c) {
    std::complex<double> acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
  };
  const std::complex<double> d = horner(den);
  double scale = 0.0;
  for (double c : den) scale = std::max(scale, std::abs(c));
  if (std::abs(d) < 1e-12 * scale) {
    throw SingularEvaluationError(
        "TransferFunction::evaluate: denominator vanishes on the unit circle");
  }
  return horner(num) / d;
}

std::vector<std::complex<double>> polynomial_roots(
    const std::vector<double>& coeffs) {
  // Strip leading zeros, then build the companion matrix.
  std::size_t first = 0;
  while (first < coeffs.size() && coeffs[first] == 0.0) ++first;
  const std::size_t m = coeffs.size() - first;
  if (m <= 1) return {};
  const double lead = coeffs[first];
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m - 1, m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    companion(0, k) = -coeffs[first + 1 + k] / lead;
    if (k + 1 < m - 1) companion(k + 1, k) = 1.0;
  }
  Eigen::VectorXcd eig = companion.eigenvalues();
  return {eig.data(), eig.data() + eig.size()};
}

bool TransferFunction::is_stable() const {
  // den is in powers of z^-1; the poles in z are the roots of
  // den[0] z^m + den[1] z^{m-1} + ... + den[m].
  if (is_fir()) return true;
  for (const auto& root : polynomial_roots(den)) {
    if (std::abs(root) >= 1.0 - 1e-10) return false;
  }
  return true;
}

TransferFunction TransferFunction::delay(int lag, double gain) {
  if (lag < 0) throw DimensionError("TransferFunction::delay: negative lag");
  std::vector<double> num(lag + 1, 0.0);
  num[lag] = gain;
  return TransferFunction(std::move(num));
}

TransferFunction TransferFunction::constant(double value) {
  return TransferFunction({value});
}

TfFilter::TfFilter(const TransferFunction& tf) {
  const double d0 = tf.den[0];
  const std::size_t len = std::max(tf.num.size(), tf.den.size());
  b_.assign(len, 0.0);
  a_.assign(len, 0.0);
  for (std::size_t k = 0; k < tf.num.size(); ++k) b_[k] = tf.num[k] / d0;
  for (std::size_t k = 0; k < tf.den.size(); ++k) a_[k] = tf.den[k] / d0;
  state_.assign(len > 0 ? len - 1 : 0, 0.0);
}

double TfFilter::step(double x) {
  const double y = b_[0] * x + (state_.empty() ? 0.0 : state_[0]);
  for (std::size_t k = 0; k + 1 < state_.size(); ++k) {
    state_[k] = state_[k + 1] + b_[k + 1] * x - a_[k + 1] * y;
  }
  if (!state_.empty()) {
    state_.back() = b_[state_.size()] * x - a_[state_.size()] * y;
  }
  return y;
}

void TfFilter::reset() { std::fill(state_.begin(), state_.end(), 0.0); }

std::vector<double> TfFilter::filter(const TransferFunction& tf,
                                     const std::vector<double>& x) {
  TfFilter f(tf);
  std::vector<double> y(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) y[t] = f.step(x[t]);
  return y;
}

}  // namespace netrecon
