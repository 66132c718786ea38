#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "netrecon/dim_system.hpp"
#include "netrecon/spectral_matrix.hpp"
#include "netrecon/transfer_function.hpp"

namespace netrecon {

/// Randomized state-space corruption of a scalar data stream:
///   x[t+1] = A[t] x[t] + B[t] y[t] + w[t]
///   u[t]   = C[t] x[t] + D[t] y[t] + v[t]
/// where (A, B, C, D) is drawn IID per step from a finite mixture and
/// (w, v) is zero-mean IID noise with the given joint covariance.
/// Channels are scalar throughout; the vector-valued case would need a
/// transposed symmetric extension of the deviation autocorrelation.
struct RandomStateSpace {
  struct Outcome {
    double probability = 1.0;
    Eigen::MatrixXd a;  // state_dim x state_dim
    Eigen::VectorXd b;  // state_dim
    Eigen::RowVectorXd c;  // state_dim
    double d = 0.0;
  };

  int state_dim = 0;
  std::vector<Outcome> outcomes;
  Eigen::MatrixXd w_cov;  // state noise covariance W
  Eigen::VectorXd s_cov;  // cross covariance S between w and v
  double v_cov = 0.0;     // output noise variance V

  void validate() const;

  Eigen::MatrixXd mean_a() const;
  Eigen::VectorXd mean_b() const;
  Eigen::RowVectorXd mean_c() const;
  double mean_d() const;

  /// E[A (x) A] over the mixture.
  Eigen::MatrixXd mean_kron_a() const;
};

/// u[t] = y[t - d[t]] with d drawn IID from a finite distribution.
struct RandomDelay {
  std::vector<std::pair<int, double>> delays;  // (lag, probability)
};

/// u[t] = y[t] + v[t], optionally colored v.
struct MeasurementNoise {
  NoiseSpec noise;
};

/// u[t] = y[t] with the given success probability, else the previous u.
struct PacketDrop {
  double success_probability = 1.0;
};

/// The true stream is concealed and replaced by an unrelated noise stream.
struct Disinformation {
  NoiseSpec noise;
};

using CorruptionModel = std::variant<RandomDelay, MeasurementNoise, PacketDrop,
                                     Disinformation, RandomStateSpace>;

/// Node -> corruption; unlisted nodes are measured perfectly.
using CorruptionAssignment = std::map<int, CorruptionModel>;

/// Lowers any corruption variant to the common random state-space form.
/// A delay of 0 mixed with other delay values would need direct
/// feedthrough in the register and is rejected.
RandomStateSpace lower_to_state_space(const CorruptionModel& model);

/// Transfer function of the mean system (Abar, Bbar, Cbar, Dbar);
/// the conditional mean of the corrupted stream is this filter applied
/// to the clean stream.
TransferFunction mean_tf(const CorruptionModel& model);

/// Solves P = E[A P A^T] + Q through the linear system
/// (I - E[A (x) A]) vec(P) = vec(Q). Requires the spectral radius of
/// E[A (x) A] to be below one; otherwise no stationary solution exists.
Eigen::MatrixXd solve_generalized_lyapunov(const RandomStateSpace& ss,
                                           const Eigen::MatrixXd& q);

/// Spectral radius of E[A (x) A].
double corruption_contraction_radius(const RandomStateSpace& ss);

/// Simulates the corruption forward from x[0] = 0. Deterministic given
/// the seed.
std::vector<double> apply_corruption(const CorruptionModel& model,
                                     std::span<const double> y,
                                     std::uint64_t seed);

/// Autocorrelation R[k] = E[dx[t+k] dx[t]^T] of the state deviation
/// dx = x - E[x | y], for k = 0..max_lag. r_yy holds the clean-channel
/// autocorrelation at lags 0..len-1 (symmetric extension implied).
std::vector<Eigen::MatrixXd> delta_x_autocorr(const RandomStateSpace& ss,
                                              const std::vector<double>& r_yy,
                                              int max_lag);

/// Autocorrelation of the output deviation du = u - E[u | y] at lags
/// 0..max_lag. Negative lags mirror the positive ones (scalar channel).
std::vector<double> delta_u_autocorr(const RandomStateSpace& ss,
                                     const std::vector<double>& r_yy,
                                     int max_lag);

/// Closed-form deviation autocorrelation for a packet drop with success
/// probability p on a channel with autocorrelation r_yy:
/// R[k] = (1-p)^|k| * (r[0] - p^2 * sum_{j<=0} sum_{k>=j} (1-p)^{k-2j} r[k]).
/// The double sum is evaluated with its geometric tails in closed form.
std::vector<double> packet_drop_delta_autocorr(double p,
                                               const std::vector<double>& r_yy,
                                               int max_lag);

/// Spectrum of the deviation du on the given angle grid. Uses the
/// dedicated closed form per variant where one exists and the general
/// state-space route otherwise.
std::vector<double> theta_spectrum(const CorruptionModel& model,
                                   const std::vector<double>& r_yy,
                                   const std::vector<double>& freqs);

struct CorruptedSpectra {
  SpectralMatrix uu;  // H Phi_yy H* + diag(theta)
  SpectralMatrix uy;  // H Phi_yy
};

/// Joint spectrum of the corrupted streams given the clean spectrum.
/// H is diagonal with the per-node mean transfer function (one for
/// unperturbed nodes); theta enters only on the diagonal because
/// corruptions of distinct nodes are independent.
CorruptedSpectra corrupted_psd(
    const SpectralMatrix& clean, const CorruptionAssignment& assignment,
    const std::map<int, std::vector<double>>& thetas);

/// Truncation lag for autocorrelation sequences: 200, or earlier once the
/// tail falls below 1e-10 of the lag-0 value.
int default_max_lag(const std::vector<double>& r_yy);

}  // namespace netrecon
