#include "netrecon/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netrecon/errors.hpp"
#include "netrecon/rng.hpp"

namespace netrecon {

namespace {

double r_at(const std::vector<double>& r_yy, long lag) {
  const std::size_t k = static_cast<std::size_t>(std::labs(lag));
  return k < r_yy.size() ? r_yy[k] : 0.0;
}

void check_tail(const std::vector<double>& r_yy) {
  if (r_yy.empty()) throw DimensionError("autocorrelation sequence is empty");
  if (r_yy.size() > 1 &&
      std::abs(r_yy.back()) > 1e-6 * std::max(std::abs(r_yy[0]), 1e-300)) {
    throw Error(
        "autocorrelation truncated too early: tail mass above tolerance");
  }
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Powers of the mean state matrix, truncated once negligible.
std::vector<Eigen::MatrixXd> decaying_powers(const Eigen::MatrixXd& a,
                                             int hard_cap) {
  std::vector<Eigen::MatrixXd> powers{
      Eigen::MatrixXd::Identity(a.rows(), a.cols())};
  for (int k = 1; k <= hard_cap; ++k) {
    Eigen::MatrixXd next = a * powers.back();
    if (next.cwiseAbs().maxCoeff() < 1e-15) break;
    powers.push_back(std::move(next));
  }
  return powers;
}

}  // namespace

void RandomStateSpace::validate() const {
  if (state_dim < 1) {
    throw DimensionError("RandomStateSpace: state dimension must be >= 1");
  }
  if (outcomes.empty()) {
    throw DimensionError("RandomStateSpace: empty outcome mixture");
  }
  double total = 0.0;
  for (const auto& o : outcomes) {
    if (o.probability <= 0.0) {
      throw DimensionError("RandomStateSpace: probabilities must be positive");
    }
    total += o.probability;
    if (o.a.rows() != state_dim || o.a.cols() != state_dim ||
        o.b.size() != state_dim || o.c.size() != state_dim) {
      throw DimensionError("RandomStateSpace: inconsistent matrix dimensions");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DimensionError("RandomStateSpace: probabilities must sum to one");
  }
  if (w_cov.rows() != state_dim || w_cov.cols() != state_dim ||
      s_cov.size() != state_dim) {
    throw DimensionError("RandomStateSpace: noise covariance dimensions");
  }
  if ((w_cov - w_cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw DimensionError("RandomStateSpace: W must be symmetric");
  }
  Eigen::MatrixXd joint(state_dim + 1, state_dim + 1);
  joint.topLeftCorner(state_dim, state_dim) = w_cov;
  joint.topRightCorner(state_dim, 1) = s_cov;
  joint.bottomLeftCorner(1, state_dim) = s_cov.transpose();
  joint(state_dim, state_dim) = v_cov;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(joint,
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) {
    throw DimensionError(
        "RandomStateSpace: joint noise covariance is not positive "
        "semidefinite");
  }
}

Eigen::MatrixXd RandomStateSpace::mean_a() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(state_dim, state_dim);
  for (const auto& o : outcomes) m += o.probability * o.a;
  return m;
}

Eigen::VectorXd RandomStateSpace::mean_b() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(state_dim);
  for (const auto& o : outcomes) m += o.probability * o.b;
  return m;
}

Eigen::RowVectorXd RandomStateSpace::mean_c() const {
  Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(state_dim);
  for (const auto& o : outcomes) m += o.probability * o.c;
  return m;
}

double RandomStateSpace::mean_d() const {
  double m = 0.0;
  for (const auto& o : outcomes) m += o.probability * o.d;
  return m;
}

Eigen::MatrixXd RandomStateSpace::mean_kron_a() const {
  Eigen::MatrixXd m =
      Eigen::MatrixXd::Zero(state_dim * state_dim, state_dim * state_dim);
  for (const auto& o : outcomes) m += o.probability * kron(o.a, o.a);
  return m;
}

namespace {

RandomStateSpace trivial_state(double d, double v_variance) {
  RandomStateSpace ss;
  ss.state_dim = 1;
  RandomStateSpace::Outcome o;
  o.probability = 1.0;
  o.a = Eigen::MatrixXd::Zero(1, 1);
  o.b = Eigen::VectorXd::Zero(1);
  o.c = Eigen::RowVectorXd::Zero(1);
  o.d = d;
  ss.outcomes.push_back(std::move(o));
  ss.w_cov = Eigen::MatrixXd::Zero(1, 1);
  ss.s_cov = Eigen::VectorXd::Zero(1);
  ss.v_cov = v_variance;
  return ss;
}

// Controllable-canonical realization of a shaped noise stream
// v = (num/den) * xi with xi white of the given variance, written into the
// corruption form with the direct y path set to `d_gain`.
RandomStateSpace shaped_noise_state(const NoiseSpec& noise, double d_gain) {
  if (!noise.shaping) return trivial_state(d_gain, noise.variance);

  const TransferFunction& tf = *noise.shaping;
  const double d0 = tf.den[0];
  const int m = static_cast<int>(std::max(tf.num.size(), tf.den.size())) - 1;
  if (m == 0) {
    const double gain = tf.num.empty() ? 0.0 : tf.num[0] / d0;
    return trivial_state(d_gain, noise.variance * gain * gain);
  }
  std::vector<double> b(m + 1, 0.0), a(m + 1, 0.0);
  for (std::size_t k = 0; k < tf.num.size(); ++k) b[k] = tf.num[k] / d0;
  for (std::size_t k = 0; k < tf.den.size(); ++k) a[k] = tf.den[k] / d0;

  RandomStateSpace ss;
  ss.state_dim = m;
  RandomStateSpace::Outcome o;
  o.probability = 1.0;
  o.a = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) o.a(0, k) = -a[k + 1];
  for (int k = 0; k + 1 < m; ++k) o.a(k + 1, k) = 1.0;
  o.b = Eigen::VectorXd::Zero(m);
  o.c = Eigen::RowVectorXd::Zero(m);
  for (int k = 0; k < m; ++k) o.c(k) = b[k + 1] - b[0] * a[k + 1];
  o.d = d_gain;
  ss.outcomes.push_back(std::move(o));

  // State noise enters the first register; the output sees b0 * xi.
  ss.w_cov = Eigen::MatrixXd::Zero(m, m);
  ss.w_cov(0, 0) = noise.variance;
  ss.s_cov = Eigen::VectorXd::Zero(m);
  ss.s_cov(0) = noise.variance * b[0];
  ss.v_cov = noise.variance * b[0] * b[0];
  return ss;
}

}  // namespace

RandomStateSpace lower_to_state_space(const CorruptionModel& model) {
  RandomStateSpace out = std::visit(
      [](const auto& m) -> RandomStateSpace {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RandomDelay>) {
          if (m.delays.empty()) {
            throw DimensionError("RandomDelay: empty delay distribution");
          }
          double total = 0.0;
          int max_d = 0;
          for (const auto& [lag, p] : m.delays) {
            if (lag < 0) throw DimensionError("RandomDelay: negative delay");
            if (p <= 0.0) {
              throw DimensionError("RandomDelay: probabilities must be positive");
            }
            total += p;
            max_d = std::max(max_d, lag);
          }
          if (std::abs(total - 1.0) > 1e-9) {
            throw DimensionError("RandomDelay: probabilities must sum to one");
          }
          const bool has_zero = std::any_of(
              m.delays.begin(), m.delays.end(),
              [](const auto& dp) { return dp.first == 0; });
          if (has_zero && m.delays.size() > 1) {
            throw DimensionError(
                "RandomDelay: delay 0 mixed with other delays needs direct "
                "feedthrough in the register and is not supported");
          }
          if (max_d == 0) return trivial_state(1.0, 0.0);  // identity copy

          RandomStateSpace ss;
          ss.state_dim = max_d;
          for (const auto& [lag, p] : m.delays) {
            RandomStateSpace::Outcome o;
            o.probability = p;
            o.a = Eigen::MatrixXd::Zero(max_d, max_d);
            for (int k = 1; k < max_d; ++k) o.a(k, k - 1) = 1.0;
            o.b = Eigen::VectorXd::Zero(max_d);
            o.b(0) = 1.0;
            o.c = Eigen::RowVectorXd::Zero(max_d);
            o.c(lag - 1) = 1.0;  // the register holds y[t-1]..y[t-max_d]
            o.d = 0.0;
            ss.outcomes.push_back(std::move(o));
          }
          ss.w_cov = Eigen::MatrixXd::Zero(max_d, max_d);
          ss.s_cov = Eigen::VectorXd::Zero(max_d);
          ss.v_cov = 0.0;
          return ss;
        } else if constexpr (std::is_same_v<T, MeasurementNoise>) {
          return shaped_noise_state(m.noise, 1.0);
        } else if constexpr (std::is_same_v<T, PacketDrop>) {
          if (m.success_probability <= 0.0 || m.success_probability > 1.0) {
            throw DimensionError(
                "PacketDrop: success probability must be in (0, 1]");
          }
          RandomStateSpace ss;
          ss.state_dim = 1;
          RandomStateSpace::Outcome keep;
          keep.probability = m.success_probability;
          keep.a = Eigen::MatrixXd::Zero(1, 1);
          keep.b = Eigen::VectorXd::Ones(1);
          keep.c = Eigen::RowVectorXd::Zero(1);
          keep.d = 1.0;
          RandomStateSpace::Outcome drop;
          drop.probability = 1.0 - m.success_probability;
          drop.a = Eigen::MatrixXd::Ones(1, 1);
          drop.b = Eigen::VectorXd::Zero(1);
          drop.c = Eigen::RowVectorXd::Ones(1);
          drop.d = 0.0;
          ss.outcomes.push_back(std::move(keep));
          if (drop.probability > 0.0) ss.outcomes.push_back(std::move(drop));
          ss.w_cov = Eigen::MatrixXd::Zero(1, 1);
          ss.s_cov = Eigen::VectorXd::Zero(1);
          ss.v_cov = 0.0;
          return ss;
        } else if constexpr (std::is_same_v<T, Disinformation>) {
          return shaped_noise_state(m.noise, 0.0);
        } else {
          return m;  // already a RandomStateSpace
        }
      },
      model);
  out.validate();
  return out;
}

TransferFunction mean_tf(const CorruptionModel& model) {
  return std::visit(
      [](const auto& m) -> TransferFunction {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RandomDelay>) {
          int max_d = 0;
          for (const auto& [lag, p] : m.delays) max_d = std::max(max_d, lag);
          std::vector<double> num(max_d + 1, 0.0);
          for (const auto& [lag, p] : m.delays) num[lag] += p;
          return TransferFunction(std::move(num));
        } else if constexpr (std::is_same_v<T, MeasurementNoise>) {
          return TransferFunction::constant(1.0);
        } else if constexpr (std::is_same_v<T, PacketDrop>) {
          const double p = m.success_probability;
          return TransferFunction({p}, {1.0, -(1.0 - p)});
        } else if constexpr (std::is_same_v<T, Disinformation>) {
          return TransferFunction::constant(0.0);
        } else {
          // Faddeev-LeVerrier on the mean system: builds the characteristic
          // polynomial and C adj(zI - A) B in one sweep.
          m.validate();
          const Eigen::MatrixXd a = m.mean_a();
          const Eigen::VectorXd b = m.mean_b();
          const Eigen::RowVectorXd c = m.mean_c();
          const double d = m.mean_d();
          const int dim = m.state_dim;
          if (a.eigenvalues().cwiseAbs().maxCoeff() >= 1.0 - 1e-10) {
            throw UnstableSystemError("mean_tf: mean system is unstable");
          }
          std::vector<double> charpoly{1.0};
          std::vector<double> markov;  // C M_k B for k = 1..dim
          Eigen::MatrixXd mk = Eigen::MatrixXd::Identity(dim, dim);
          for (int k = 1; k <= dim; ++k) {
            markov.push_back((c * mk * b).value());
            const Eigen::MatrixXd am = a * mk;
            const double ck = -am.trace() / k;
            charpoly.push_back(ck);
            mk = am + ck * Eigen::MatrixXd::Identity(dim, dim);
          }
          std::vector<double> num(dim + 1, 0.0);
          for (int k = 0; k <= dim; ++k) {
            num[k] = d * charpoly[k] + (k >= 1 ? markov[k - 1] : 0.0);
          }
          return TransferFunction(std::move(num), std::move(charpoly));
        }
      },
      model);
}

double corruption_contraction_radius(const RandomStateSpace& ss) {
  return ss.mean_kron_a().eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd solve_generalized_lyapunov(const RandomStateSpace& ss,
                                           const Eigen::MatrixXd& q) {
  ss.validate();
  const int m = ss.state_dim;
  if (q.rows() != m || q.cols() != m) {
    throw DimensionError("solve_generalized_lyapunov: Q dimension mismatch");
  }
  const Eigen::MatrixXd kaa = ss.mean_kron_a();
  if (kaa.eigenvalues().cwiseAbs().maxCoeff() >= 1.0 - 1e-9) {
    throw NoStationarySolutionError(
        "solve_generalized_lyapunov: E[A (x) A] is not contractive");
  }
  const Eigen::MatrixXd lhs =
      Eigen::MatrixXd::Identity(m * m, m * m) - kaa;
  Eigen::VectorXd vec_q(m * m);
  for (int j = 0; j < m; ++j) {
    vec_q.segment(j * m, m) = q.col(j);
  }
  const Eigen::VectorXd vec_p = lhs.partialPivLu().solve(vec_q);
  Eigen::MatrixXd p(m, m);
  for (int j = 0; j < m; ++j) p.col(j) = vec_p.segment(j * m, m);
  return 0.5 * (p + p.transpose());
}

std::vector<double> apply_corruption(const CorruptionModel& model,
                                     std::span<const double> y,
                                     std::uint64_t seed) {
  const RandomStateSpace ss = lower_to_state_space(model);
  if (corruption_contraction_radius(ss) >= 1.0 - 1e-9) {
    throw UnstableSystemError("apply_corruption: corruption dynamics unstable");
  }
  const int m = ss.state_dim;

  // Square root of the joint (w, v) covariance for sampling.
  Eigen::MatrixXd joint(m + 1, m + 1);
  joint.topLeftCorner(m, m) = ss.w_cov;
  joint.topRightCorner(m, 1) = ss.s_cov;
  joint.bottomLeftCorner(1, m) = ss.s_cov.transpose();
  joint(m, m) = ss.v_cov;
  const bool has_noise = joint.cwiseAbs().maxCoeff() > 0.0;
  Eigen::MatrixXd noise_sqrt;
  if (has_noise) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(joint);
    noise_sqrt = es.eigenvectors() *
                 es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }

  std::vector<double> probs;
  for (const auto& o : ss.outcomes) probs.push_back(o.probability);

  Rng rng(seed);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd wv(m + 1);
  std::vector<double> u(y.size());
  for (std::size_t t = 0; t < y.size(); ++t) {
    const auto& o = ss.outcomes[rng.categorical(probs)];
    double w_v = 0.0;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    if (has_noise) {
      for (int k = 0; k <= m; ++k) wv(k) = rng.normal();
      const Eigen::VectorXd sample = noise_sqrt * wv;
      w = sample.head(m);
      w_v = sample(m);
    }
    u[t] = o.c.dot(x) + o.d * y[t] + w_v;
    x = (o.a * x + o.b * y[t] + w).eval();
  }
  return u;
}

namespace {

struct MeanStateMoments {
  Eigen::MatrixXd r_xbar_xbar;  // E[xbar xbar^T] at lag 0
  Eigen::VectorXd r_xbar_y;     // E[xbar[t] y[t]]
};

// Second moments of the mean-system state xbar[t] = sum_k Abar^{k-1} Bbar
// y[t-k], from the truncated channel autocorrelation.
MeanStateMoments mean_state_moments(const RandomStateSpace& ss,
                                    const std::vector<double>& r_yy) {
  const Eigen::MatrixXd abar = ss.mean_a();
  const Eigen::VectorXd bbar = ss.mean_b();
  const auto powers = decaying_powers(abar, 4096);
  const int m = ss.state_dim;

  std::vector<Eigen::VectorXd> f;  // f[k] = Abar^{k-1} Bbar, k >= 1
  f.reserve(powers.size());
  for (const auto& pw : powers) f.push_back(pw * bbar);

  MeanStateMoments out;
  out.r_xbar_y = Eigen::VectorXd::Zero(m);
  for (std::size_t k = 0; k < f.size(); ++k) {
    out.r_xbar_y += f[k] * r_at(r_yy, static_cast<long>(k) + 1);
  }
  out.r_xbar_xbar = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t k = 0; k < f.size(); ++k) {
    for (std::size_t l = 0; l < f.size(); ++l) {
      const double r = r_at(r_yy, static_cast<long>(l) - static_cast<long>(k));
      if (r != 0.0) out.r_xbar_xbar += r * (f[k] * f[l].transpose());
    }
  }
  return out;
}

// E[[dM1 dM2] R [dN1 dN2]^T] over the outcome mixture, with R the joint
// second-moment matrix of (x-like, y). Selector indices: 0 = (A, B) rows,
// 1 = (C, D) row.
Eigen::MatrixXd mixture_quadratic(const RandomStateSpace& ss,
                                  const Eigen::MatrixXd& r_joint, int left,
                                  int right) {
  const Eigen::MatrixXd abar = ss.mean_a();
  const Eigen::VectorXd bbar = ss.mean_b();
  const Eigen::RowVectorXd cbar = ss.mean_c();
  const double dbar = ss.mean_d();
  const int m = ss.state_dim;

  auto block = [&](const RandomStateSpace::Outcome& o,
                   int which) -> Eigen::MatrixXd {
    Eigen::MatrixXd out;
    if (which == 0) {
      out.resize(m, m + 1);
      out.leftCols(m) = o.a - abar;
      out.col(m) = o.b - bbar;
    } else {
      out.resize(1, m + 1);
      out.leftCols(m) = o.c - cbar;
      out(0, m) = o.d - dbar;
    }
    return out;
  };

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(left == 0 ? m : 1,
                                              right == 0 ? m : 1);
  for (const auto& o : ss.outcomes) {
    acc += o.probability *
           (block(o, left) * r_joint * block(o, right).transpose());
  }
  return acc;
}

Eigen::MatrixXd joint_moment(const Eigen::MatrixXd& r_xx,
                             const Eigen::VectorXd& r_xy, double r0) {
  const int m = static_cast<int>(r_xx.rows());
  Eigen::MatrixXd joint(m + 1, m + 1);
  joint.topLeftCorner(m, m) = r_xx;
  joint.topRightCorner(m, 1) = r_xy;
  joint.bottomLeftCorner(1, m) = r_xy.transpose();
  joint(m, m) = r0;
  return joint;
}

}  // namespace

std::vector<Eigen::MatrixXd> delta_x_autocorr(const RandomStateSpace& ss,
                                              const std::vector<double>& r_yy,
                                              int max_lag) {
  ss.validate();
  check_tail(r_yy);
  const MeanStateMoments mm = mean_state_moments(ss, r_yy);
  const Eigen::MatrixXd r_bar =
      joint_moment(mm.r_xbar_xbar, mm.r_xbar_y, r_at(r_yy, 0));
  const Eigen::MatrixXd q = ss.w_cov + mixture_quadratic(ss, r_bar, 0, 0);
  const Eigen::MatrixXd p = solve_generalized_lyapunov(ss, q);

  std::vector<Eigen::MatrixXd> out;
  out.reserve(max_lag + 1);
  out.push_back(p);
  const Eigen::MatrixXd abar = ss.mean_a();
  for (int k = 1; k <= max_lag; ++k) out.push_back(abar * out.back());
  return out;
}

std::vector<double> delta_u_autocorr(const RandomStateSpace& ss,
                                     const std::vector<double>& r_yy,
                                     int max_lag) {
  ss.validate();
  check_tail(r_yy);
  const MeanStateMoments mm = mean_state_moments(ss, r_yy);
  const double r0 = r_at(r_yy, 0);
  const Eigen::MatrixXd r_bar = joint_moment(mm.r_xbar_xbar, mm.r_xbar_y, r0);
  const Eigen::MatrixXd q = ss.w_cov + mixture_quadratic(ss, r_bar, 0, 0);
  const Eigen::MatrixXd p = solve_generalized_lyapunov(ss, q);

  // The output-deviation formulas take second moments of the full state,
  // E[x x^T] = E[xbar xbar^T] + E[dx dx^T]; the state/channel cross moment
  // is unchanged by the deviation.
  const Eigen::MatrixXd r_full =
      joint_moment(mm.r_xbar_xbar + p, mm.r_xbar_y, r0);

  const Eigen::RowVectorXd cbar = ss.mean_c();
  const Eigen::MatrixXd abar = ss.mean_a();

  std::vector<double> out(max_lag + 1, 0.0);
  out[0] = (cbar * p * cbar.transpose()).value() + ss.v_cov +
           mixture_quadratic(ss, r_full, 1, 1)(0, 0);

  const Eigen::VectorXd cross =
      mixture_quadratic(ss, r_full, 0, 1).col(0) + ss.s_cov;
  Eigen::MatrixXd a_pow = Eigen::MatrixXd::Identity(ss.state_dim, ss.state_dim);
  for (int k = 1; k <= max_lag; ++k) {
    // a_pow holds Abar^{k-1} here.
    out[k] = (cbar * (abar * a_pow * p) * cbar.transpose()).value() +
             (cbar * a_pow * cross).value();
    a_pow = (abar * a_pow).eval();
  }
  return out;
}

std::vector<double> packet_drop_delta_autocorr(double p,
                                               const std::vector<double>& r_yy,
                                               int max_lag) {
  if (p <= 0.0 || p > 1.0) {
    throw DimensionError("packet_drop_delta_autocorr: p must be in (0, 1]");
  }
  check_tail(r_yy);
  const double a = 1.0 - p;
  // sum_{j<=0} sum_{k>=j} a^{k-2j} r[k], with the k-sums collapsed to a
  // one-sided weighted sum and the j-tail summed as a geometric series:
  //   = (r[0] + 2 sum_{k>=1} a^k r[k]) / (1 - a^2).
  double one_sided = r_yy[0];
  double ak = 1.0;
  for (std::size_t k = 1; k < r_yy.size(); ++k) {
    ak *= a;
    one_sided += 2.0 * ak * r_yy[k];
  }
  const double d0 =
      r_yy[0] - (a < 1.0 ? p * p * one_sided / (1.0 - a * a) : 0.0);
  std::vector<double> out(max_lag + 1);
  double scale = d0;
  for (int k = 0; k <= max_lag; ++k) {
    out[k] = scale;
    scale *= a;
  }
  return out;
}

int default_max_lag(const std::vector<double>& r_yy) {
  if (r_yy.empty()) return 0;
  const double floor = 1e-10 * std::abs(r_yy[0]);
  int lag = std::min<int>(200, static_cast<int>(r_yy.size()) - 1);
  while (lag > 0 && std::abs(r_yy[lag]) < floor) --lag;
  return lag;
}

std::vector<double> theta_spectrum(const CorruptionModel& model,
                                   const std::vector<double>& r_yy,
                                   const std::vector<double>& freqs) {
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        std::vector<double> out(freqs.size(), 0.0);
        if constexpr (std::is_same_v<T, MeasurementNoise> ||
                      std::is_same_v<T, Disinformation>) {
          for (std::size_t k = 0; k < freqs.size(); ++k) {
            out[k] = m.noise.spectrum(freqs[k]);
          }
        } else if constexpr (std::is_same_v<T, RandomDelay>) {
          check_tail(r_yy);
          // Deviation only at lag zero: the quadratic form of the delay
          // distribution against the channel autocorrelation. Lags beyond
          // the stored sequence are zero by the tail guarantee.
          double quad = 0.0;
          for (const auto& [di, pi] : m.delays) {
            for (const auto& [dj, pj] : m.delays) {
              quad += pi * pj * r_at(r_yy, static_cast<long>(dj) - di);
            }
          }
          std::fill(out.begin(), out.end(), r_yy[0] - quad);
        } else if constexpr (std::is_same_v<T, PacketDrop>) {
          const double p = m.success_probability;
          const double a = 1.0 - p;
          const double d0 = packet_drop_delta_autocorr(p, r_yy, 0)[0];
          for (std::size_t k = 0; k < freqs.size(); ++k) {
            const double denom =
                1.0 + a * a - 2.0 * a * std::cos(freqs[k]);
            out[k] = d0 * (1.0 - a * a) / denom;
          }
        } else {
          const RandomStateSpace& ss = m;
          const auto seq =
              delta_u_autocorr(ss, r_yy, default_max_lag(r_yy));
          for (std::size_t k = 0; k < freqs.size(); ++k) {
            double acc = seq[0];
            for (std::size_t lag = 1; lag < seq.size(); ++lag) {
              acc += 2.0 * seq[lag] * std::cos(freqs[k] * lag);
            }
            out[k] = acc;
          }
        }
        return out;
      },
      model);
}

CorruptedSpectra corrupted_psd(const SpectralMatrix& clean,
                               const CorruptionAssignment& assignment,
                               const std::map<int, std::vector<double>>& thetas) {
  const int n = clean.n();
  for (const auto& [node, model] : assignment) {
    if (node < 0 || node >= n) {
      throw DimensionError("corrupted_psd: corrupted node out of range");
    }
    const auto it = thetas.find(node);
    if (it == thetas.end() ||
        it->second.size() != clean.freqs.size()) {
      throw DimensionError("corrupted_psd: theta grid mismatch");
    }
  }

  std::map<int, TransferFunction> h;
  for (const auto& [node, model] : assignment) h.emplace(node, mean_tf(model));

  CorruptedSpectra out{SpectralMatrix(clean.freqs, n),
                       SpectralMatrix(clean.freqs, n)};
  for (int k = 0; k < clean.num_freqs(); ++k) {
    Eigen::VectorXcd diag_h = Eigen::VectorXcd::Ones(n);
    Eigen::VectorXd diag_theta = Eigen::VectorXd::Zero(n);
    for (const auto& [node, tf] : h) {
      diag_h(node) = tf.evaluate(clean.freqs[k]);
      diag_theta(node) = thetas.at(node)[k];
    }
    const Eigen::MatrixXcd hy = diag_h.asDiagonal() * clean.values[k];
    out.uy.values[k] = hy;
    Eigen::MatrixXcd uu = hy * diag_h.conjugate().asDiagonal();
    uu += diag_theta.cast<std::complex<double>>().asDiagonal();
    out.uu.values[k] = 0.5 * (uu + uu.adjoint().eval());
  }
  return out;
}

}  // namespace netrecon
