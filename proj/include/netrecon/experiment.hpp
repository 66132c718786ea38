#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "netrecon/corruption.hpp"
#include "netrecon/dim_system.hpp"
#include "netrecon/mrf_discrete.hpp"
#include "netrecon/mrf_gaussian.hpp"
#include "netrecon/predict.hpp"
#include "netrecon/support.hpp"
#include "netrecon/welch.hpp"

namespace netrecon {

struct SimulationParams {
  long samples = 10000;
  int trials = 100;
  long burn_in = 1000;
};

struct AnalyticParams {
  int grid_points = 256;
  double support_tau = 1e-7;  // relative support threshold for exact inverses
};

/// Markov-random-field experiment description; either a discrete
/// factorized field or a static Gaussian network.
struct MrfSpec {
  enum class Kind { kDiscrete, kGaussian };
  Kind kind = Kind::kDiscrete;

  DiscreteMrf discrete;
  std::vector<PerturbFactor> discrete_perturbations;

  GaussianNetworkModel gaussian;
  std::vector<GaussianPerturbation> gaussian_perturbations;
};

/// Everything needed to rerun an experiment: generative system or MRF,
/// corruption assignment, estimator settings and the master seed.
struct ExperimentConfig {
  std::string name;
  std::uint64_t seed = 0;
  std::optional<DimSystem> system;
  std::vector<std::string> labels;
  CorruptionAssignment corruption;
  SimulationParams simulation;
  WelchConfig welch;
  SupportConfig support;
  AnalyticParams analytic;
  std::optional<MrfSpec> mrf;
  std::string output_dir = "out";

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);

  /// Canonical serialization; also the basis of the config hash and the
  /// echo embedded in reports.
  nlohmann::json to_json() const;

  NodeSet corrupted_nodes() const;
};

struct ExperimentReport {
  nlohmann::json body;  // deterministic part, timing excluded
  double timing_ms = 0.0;
  int exit_code = 0;

  Eigen::MatrixXd scores;
  UndirectedGraph recovered;
  PredictionReport prediction;
  std::vector<std::string> labels;
  bool has_graphs = false;

  nlohmann::json full() const;
};

/// simulate -> corrupt -> trial-averaged spectra -> invert -> support ->
/// grade. threads <= 0 picks a default worker count; results are
/// independent of the worker count.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads = 0);

/// Pure-math pipeline: exact spectra, exact inversion, rank-one-update
/// cross-check, no Monte Carlo.
ExperimentReport run_analytic(const ExperimentConfig& cfg);

/// Discrete enumeration or Gaussian marginalization suite.
ExperimentReport run_mrf(const ExperimentConfig& cfg);

/// Writes report.json, scores.csv, recovered.dot and predicted.dot.
void write_report_files(const ExperimentReport& report,
                        const std::string& out_dir);

/// FNV-1a hash of the canonical config serialization.
std::string config_hash(const nlohmann::json& canonical);

}  // namespace netrecon
