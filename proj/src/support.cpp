#include "netrecon/support.hpp"

#include <cmath>
#include <functional>

#include "netrecon/errors.hpp"

namespace netrecon {

namespace {

SpectralMatrix invert_impl(const SpectralMatrix& s,
                           const std::function<double(int)>& epsilon_at,
                           double condition_cap) {
  if (!s.is_hermitian(1e-6)) {
    throw DimensionError("invert_spectrum: input is not Hermitian");
  }
  SpectralMatrix out(s.freqs, s.n());
  std::vector<double> bad;
  for (int k = 0; k < s.num_freqs(); ++k) {
    const double eps = epsilon_at(k);
    const Eigen::MatrixXcd m =
        0.5 * (s.values[k] + s.values[k].adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    const Eigen::VectorXd shifted = es.eigenvalues().array() + eps;
    if (shifted.minCoeff() <= 0.0 ||
        shifted.maxCoeff() / shifted.minCoeff() > condition_cap) {
      bad.push_back(s.freqs[k]);
      continue;
    }
    out.values[k] = es.eigenvectors() *
                    shifted.cwiseInverse().asDiagonal() *
                    es.eigenvectors().adjoint();
  }
  if (!bad.empty()) {
    throw SingularFrequencyError(
        "invert_spectrum: ill-conditioned at " + std::to_string(bad.size()) +
            " grid frequencies",
        std::move(bad));
  }
  return out;
}

}  // namespace

SpectralMatrix invert_spectrum(const SpectralMatrix& s, double ridge_epsilon,
                               double condition_cap) {
  if (ridge_epsilon < 0.0) {
    throw DimensionError("invert_spectrum: negative ridge");
  }
  return invert_impl(
      s, [ridge_epsilon](int) { return ridge_epsilon; }, condition_cap);
}

SpectralMatrix invert_spectrum_with_config(const SpectralMatrix& s,
                                           const SupportConfig& cfg) {
  if (cfg.ridge >= 0.0) {
    return invert_impl(
        s, [&](int) { return cfg.ridge; }, cfg.condition_cap);
  }
  return invert_impl(
      s,
      [&](int k) {
        return 1e-8 * s.values[k].real().trace() / s.n();
      },
      cfg.condition_cap);
}

Eigen::MatrixXd support_scores(const SpectralMatrix& inv,
                               SupportConfig::Aggregate aggregate) {
  const int n = inv.n();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n, n);
  for (const auto& m : inv.values) {
    if (aggregate == SupportConfig::Aggregate::kMaxOverFrequency) {
      scores = scores.cwiseMax(m.cwiseAbs());
    } else {
      scores += m.cwiseAbs();
    }
  }
  if (aggregate == SupportConfig::Aggregate::kMeanOverFrequency &&
      !inv.values.empty()) {
    scores /= static_cast<double>(inv.values.size());
  }
  return scores;
}

UndirectedGraph support_graph(const SpectralMatrix& inv,
                              const SupportConfig& cfg) {
  if (cfg.tau <= 0.0) throw ConfigError("support_graph: tau must be positive");
  const Eigen::MatrixXd scores = support_scores(inv, cfg.aggregate);
  const int n = inv.n();

  double threshold = cfg.tau;
  if (cfg.threshold_mode == SupportConfig::ThresholdMode::kRelativeToMax) {
    double max_off = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        max_off = std::max(max_off, std::max(scores(i, j), scores(j, i)));
      }
    }
    threshold = cfg.tau * max_off;
  }

  UndirectedGraph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double score = std::max(scores(i, j), scores(j, i));
      if (score > threshold) g.add_edge(i, j);
    }
  }
  return g;
}

UndirectedGraph reconstruct(const TimeSeriesPanel& panel,
                            const WelchConfig& welch,
                            const SupportConfig& support) {
  const SpectralMatrix psd = estimate_cross_psd(panel, welch);
  const SpectralMatrix inv = invert_spectrum_with_config(psd, support);
  return support_graph(inv, support);
}

}  // namespace netrecon
