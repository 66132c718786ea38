#include "netrecon/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "netrecon/errors.hpp"
#include "netrecon/io.hpp"
#include "netrecon/rng.hpp"
#include "netrecon/version.hpp"

namespace netrecon {

using nlohmann::json;

namespace {

void expect_keys(const json& j, const char* ctx,
                 std::initializer_list<const char*> allowed) {
  if (!j.is_object()) {
    throw ConfigError(std::string(ctx) + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw ConfigError(std::string(ctx) + ": unknown key '" + key + "'");
    }
  }
}

TransferFunction parse_tf(const json& j, const char* ctx) {
  expect_keys(j, ctx, {"num", "den"});
  std::vector<double> num = j.at("num").get<std::vector<double>>();
  std::vector<double> den =
      j.contains("den") ? j.at("den").get<std::vector<double>>()
                        : std::vector<double>{1.0};
  return TransferFunction(std::move(num), std::move(den));
}

json tf_to_json(const TransferFunction& tf) {
  return json{{"num", tf.num}, {"den", tf.den}};
}

NoiseSpec parse_noise_spec(const json& j, const char* ctx) {
  expect_keys(j, ctx, {"variance", "shaping"});
  const double variance = j.value("variance", 1.0);
  std::optional<TransferFunction> shaping;
  if (j.contains("shaping")) shaping = parse_tf(j.at("shaping"), ctx);
  return NoiseSpec(variance, std::move(shaping));
}

json noise_to_json(const NoiseSpec& spec) {
  json j{{"variance", spec.variance}};
  if (spec.shaping) j["shaping"] = tf_to_json(*spec.shaping);
  return j;
}

Eigen::MatrixXd parse_matrix(const json& j, const char* ctx) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(std::string(ctx) + ": expected a matrix");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.at(0).size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = j.at(r).get<std::vector<double>>();
    if (row.size() != cols) {
      throw ConfigError(std::string(ctx) + ": ragged matrix");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

CorruptionModel parse_corruption_model(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "random_delay") {
    expect_keys(j, "corruption", {"node", "type", "delays"});
    RandomDelay m;
    for (const auto& pair : j.at("delays")) {
      m.delays.emplace_back(pair.at(0).get<int>(), pair.at(1).get<double>());
    }
    return m;
  }
  if (type == "measurement_noise") {
    expect_keys(j, "corruption", {"node", "type", "variance", "shaping"});
    json noise = j;
    noise.erase("node");
    noise.erase("type");
    return MeasurementNoise{parse_noise_spec(noise, "measurement_noise")};
  }
  if (type == "packet_drop") {
    expect_keys(j, "corruption", {"node", "type", "success_probability"});
    return PacketDrop{j.at("success_probability").get<double>()};
  }
  if (type == "disinformation") {
    expect_keys(j, "corruption", {"node", "type", "variance", "shaping"});
    json noise = j;
    noise.erase("node");
    noise.erase("type");
    return Disinformation{parse_noise_spec(noise, "disinformation")};
  }
  if (type == "state_space") {
    expect_keys(j, "corruption", {"node", "type", "state_dim", "outcomes", "noise"});
    RandomStateSpace ss;
    ss.state_dim = j.at("state_dim").get<int>();
    for (const auto& oj : j.at("outcomes")) {
      expect_keys(oj, "state_space outcome", {"probability", "a", "b", "c", "d"});
      RandomStateSpace::Outcome o;
      o.probability = oj.at("probability").get<double>();
      o.a = parse_matrix(oj.at("a"), "outcome a");
      const auto b = oj.at("b").get<std::vector<double>>();
      const auto c = oj.at("c").get<std::vector<double>>();
      o.b = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
      o.c = Eigen::Map<const Eigen::RowVectorXd>(c.data(), c.size());
      o.d = oj.at("d").get<double>();
      ss.outcomes.push_back(std::move(o));
    }
    const json& nj = j.at("noise");
    expect_keys(nj, "state_space noise", {"w", "s", "v"});
    ss.w_cov = parse_matrix(nj.at("w"), "noise w");
    const auto s = nj.at("s").get<std::vector<double>>();
    ss.s_cov = Eigen::Map<const Eigen::VectorXd>(s.data(), s.size());
    ss.v_cov = nj.at("v").get<double>();
    ss.validate();
    return ss;
  }
  throw ConfigError("corruption: unknown type '" + type + "'");
}

json corruption_model_to_json(int node, const CorruptionModel& model) {
  json j{{"node", node}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RandomDelay>) {
          j["type"] = "random_delay";
          json delays = json::array();
          for (const auto& [lag, p] : m.delays) delays.push_back({lag, p});
          j["delays"] = delays;
        } else if constexpr (std::is_same_v<T, MeasurementNoise>) {
          j["type"] = "measurement_noise";
          j.update(noise_to_json(m.noise));
        } else if constexpr (std::is_same_v<T, PacketDrop>) {
          j["type"] = "packet_drop";
          j["success_probability"] = m.success_probability;
        } else if constexpr (std::is_same_v<T, Disinformation>) {
          j["type"] = "disinformation";
          j.update(noise_to_json(m.noise));
        } else {
          j["type"] = "state_space";
          j["state_dim"] = m.state_dim;
          json outcomes = json::array();
          for (const auto& o : m.outcomes) {
            json oj;
            oj["probability"] = o.probability;
            oj["a"] = matrix_to_json(o.a);
            oj["b"] = std::vector<double>(o.b.data(), o.b.data() + o.b.size());
            oj["c"] = std::vector<double>(o.c.data(), o.c.data() + o.c.size());
            oj["d"] = o.d;
            outcomes.push_back(oj);
          }
          j["outcomes"] = outcomes;
          j["noise"] = {
              {"w", matrix_to_json(m.w_cov)},
              {"s", std::vector<double>(m.s_cov.data(),
                                        m.s_cov.data() + m.s_cov.size())},
              {"v", m.v_cov}};
        }
      },
      model);
  return j;
}

DimSystem parse_system(const json& j) {
  expect_keys(j, "system", {"nodes", "arcs", "noise"});
  DimSystem sys(j.at("nodes").get<int>());
  for (const auto& arc : j.at("arcs")) {
    expect_keys(arc, "arc", {"from", "to", "tf"});
    sys.set_arc(arc.at("from").get<int>(), arc.at("to").get<int>(),
                parse_tf(arc.at("tf"), "arc tf"));
  }
  if (j.contains("noise")) {
    const auto& noise = j.at("noise");
    if (static_cast<int>(noise.size()) != sys.n) {
      throw ConfigError("system: noise list must have one entry per node");
    }
    for (int i = 0; i < sys.n; ++i) {
      sys.noise[i] = parse_noise_spec(noise.at(i), "noise");
    }
  }
  return sys;
}

json system_to_json(const DimSystem& sys) {
  json arcs = json::array();
  for (int i = 0; i < sys.n; ++i) {
    for (int jdx = 0; jdx < sys.n; ++jdx) {
      if (sys.filters[i][jdx]) {
        arcs.push_back({{"from", jdx},
                        {"to", i},
                        {"tf", tf_to_json(*sys.filters[i][jdx])}});
      }
    }
  }
  json noise = json::array();
  for (const auto& spec : sys.noise) noise.push_back(noise_to_json(spec));
  return json{{"nodes", sys.n}, {"arcs", arcs}, {"noise", noise}};
}

MrfSpec parse_mrf(const json& j) {
  MrfSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "discrete") {
    expect_keys(j, "mrf",
                {"kind", "alphabet", "edges", "factors", "perturbations"});
    spec.kind = MrfSpec::Kind::kDiscrete;
    spec.discrete.alphabet = j.at("alphabet").get<std::vector<int>>();
    spec.discrete.graph =
        UndirectedGraph(static_cast<int>(spec.discrete.alphabet.size()));
    for (const auto& e : j.at("edges")) {
      spec.discrete.graph.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
    }
    for (const auto& f : j.at("factors")) {
      expect_keys(f, "factor", {"nodes", "table"});
      spec.discrete.factors.push_back(
          Factor{f.at("nodes").get<std::vector<int>>(),
                 f.at("table").get<std::vector<double>>()});
    }
    if (j.contains("perturbations")) {
      for (const auto& p : j.at("perturbations")) {
        expect_keys(p, "perturbation", {"node", "alphabet", "table"});
        spec.discrete_perturbations.push_back(
            PerturbFactor{p.at("node").get<int>(), p.at("alphabet").get<int>(),
                          p.at("table").get<std::vector<double>>()});
      }
    }
    spec.discrete.validate();
  } else if (kind == "gaussian") {
    expect_keys(j, "mrf",
                {"kind", "nodes", "coefficients", "variances", "perturbations"});
    spec.kind = MrfSpec::Kind::kGaussian;
    const int n = j.at("nodes").get<int>();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& c : j.at("coefficients")) {
      expect_keys(c, "coefficient", {"from", "to", "value"});
      m(c.at("to").get<int>(), c.at("from").get<int>()) =
          c.at("value").get<double>();
    }
    Eigen::VectorXd variances = Eigen::VectorXd::Ones(n);
    if (j.contains("variances")) {
      const auto v = j.at("variances").get<std::vector<double>>();
      if (static_cast<int>(v.size()) != n) {
        throw ConfigError("mrf: variances length mismatch");
      }
      variances = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
    }
    spec.gaussian = GaussianNetworkModel(std::move(m), std::move(variances));
    if (j.contains("perturbations")) {
      for (const auto& p : j.at("perturbations")) {
        expect_keys(p, "perturbation", {"node", "gain", "variance"});
        spec.gaussian_perturbations.push_back(
            GaussianPerturbation{p.at("node").get<int>(),
                                 p.value("gain", 1.0),
                                 p.value("variance", 1.0)});
      }
    }
  } else {
    throw ConfigError("mrf: unknown kind '" + kind + "'");
  }
  return spec;
}

json mrf_to_json(const MrfSpec& spec) {
  json j;
  if (spec.kind == MrfSpec::Kind::kDiscrete) {
    j["kind"] = "discrete";
    j["alphabet"] = spec.discrete.alphabet;
    json edges = json::array();
    for (const auto& [a, b] : spec.discrete.graph.edges) edges.push_back({a, b});
    j["edges"] = edges;
    json factors = json::array();
    for (const auto& f : spec.discrete.factors) {
      factors.push_back({{"nodes", f.nodes}, {"table", f.table}});
    }
    j["factors"] = factors;
    json perts = json::array();
    for (const auto& p : spec.discrete_perturbations) {
      perts.push_back(
          {{"node", p.node}, {"alphabet", p.alphabet}, {"table", p.table}});
    }
    j["perturbations"] = perts;
  } else {
    j["kind"] = "gaussian";
    j["nodes"] = spec.gaussian.n;
    json coeffs = json::array();
    for (int r = 0; r < spec.gaussian.n; ++r) {
      for (int c = 0; c < spec.gaussian.n; ++c) {
        if (spec.gaussian.coefficients(r, c) != 0.0) {
          coeffs.push_back({{"from", c},
                            {"to", r},
                            {"value", spec.gaussian.coefficients(r, c)}});
        }
      }
    }
    j["coefficients"] = coeffs;
    j["variances"] = std::vector<double>(
        spec.gaussian.variances.data(),
        spec.gaussian.variances.data() + spec.gaussian.n);
    json perts = json::array();
    for (const auto& p : spec.gaussian_perturbations) {
      perts.push_back(
          {{"node", p.node}, {"gain", p.gain}, {"variance", p.variance}});
    }
    j["perturbations"] = perts;
  }
  return j;
}

SupportConfig parse_support(const json& j) {
  expect_keys(j, "support",
              {"aggregate", "threshold_mode", "tau", "ridge", "condition_cap"});
  SupportConfig cfg;
  const std::string agg = j.value("aggregate", "max");
  if (agg == "max") {
    cfg.aggregate = SupportConfig::Aggregate::kMaxOverFrequency;
  } else if (agg == "mean") {
    cfg.aggregate = SupportConfig::Aggregate::kMeanOverFrequency;
  } else {
    throw ConfigError("support: unknown aggregate '" + agg + "'");
  }
  const std::string mode = j.value("threshold_mode", "relative");
  if (mode == "relative") {
    cfg.threshold_mode = SupportConfig::ThresholdMode::kRelativeToMax;
  } else if (mode == "absolute") {
    cfg.threshold_mode = SupportConfig::ThresholdMode::kAbsolute;
  } else {
    throw ConfigError("support: unknown threshold_mode '" + mode + "'");
  }
  cfg.tau = j.value("tau", 0.08);
  cfg.ridge = j.value("ridge", -1.0);
  cfg.condition_cap = j.value("condition_cap", 1e12);
  return cfg;
}

json support_to_json(const SupportConfig& cfg) {
  json j;
  j["aggregate"] = cfg.aggregate == SupportConfig::Aggregate::kMaxOverFrequency
                       ? "max"
                       : "mean";
  j["threshold_mode"] =
      cfg.threshold_mode == SupportConfig::ThresholdMode::kRelativeToMax
          ? "relative"
          : "absolute";
  j["tau"] = cfg.tau;
  if (cfg.ridge >= 0.0) j["ridge"] = cfg.ridge;
  j["condition_cap"] = cfg.condition_cap;
  return j;
}

json edges_to_json(const std::set<Edge>& edges) {
  json out = json::array();
  for (const auto& [i, j] : edges) out.push_back({i, j});
  return out;
}

json graph_to_json(const UndirectedGraph& g) { return edges_to_json(g.edges); }

json prediction_to_json(const PredictionReport& report) {
  json j;
  j["moral_edges"] = graph_to_json(report.true_moral);
  j["perturbed_edges"] = graph_to_json(report.perturbed);
  j["admissible_spurious"] = edges_to_json(report.admissible_spurious);
  j["violations"] = edges_to_json(report.violations);
  j["missing"] = edges_to_json(report.missing);
  json classes = json::array();
  for (const auto& [edge, cls] : report.classification) {
    const char* name = cls == EdgeClass::kTrueKin ? "true-kin"
                       : cls == EdgeClass::kPredictedSpurious
                           ? "predicted-spurious"
                           : "violation";
    classes.push_back({{"edge", {edge.first, edge.second}}, {"class", name}});
  }
  j["classification"] = classes;
  return j;
}

/// Channel autocorrelations of the clean system, then per-node deviation
/// spectra on the requested grid.
std::map<int, std::vector<double>> compute_thetas(
    const DimSystem& sys, const CorruptionAssignment& corruption,
    const std::vector<double>& grid) {
  std::map<int, std::vector<double>> thetas;
  if (corruption.empty()) return thetas;
  const std::vector<double> fine = uniform_grid(4097);
  const SpectralMatrix psd = analytic_psd(sys, fine);
  for (const auto& [node, model] : corruption) {
    std::vector<double> phi(fine.size());
    for (std::size_t k = 0; k < fine.size(); ++k) {
      phi[k] = psd.values[k](node, node).real();
    }
    std::vector<double> r = autocorr_from_spectrum(fine, phi, 200);
    r.resize(default_max_lag(r) + 1);
    thetas[node] = theta_spectrum(model, r, grid);
  }
  return thetas;
}

void run_pool(int jobs, int threads, const std::function<void(int)>& work) {
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = static_cast<int>(std::clamp(hw, 1u, 8u));
  }
  threads = std::min(threads, jobs);
  if (threads <= 1) {
    for (int t = 0; t < jobs; ++t) work(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto body = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= jobs) return;
      try {
        work(t);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 0; k < threads; ++k) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

json report_header(const ExperimentConfig& cfg, const char* mode) {
  const json echo = cfg.to_json();
  json j;
  j["tool_version"] = kVersion;
  j["config_hash"] = config_hash(echo);
  j["mode"] = mode;
  j["config"] = echo;
  return j;
}

json scores_to_json(const Eigen::MatrixXd& scores) {
  return matrix_to_json(scores);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  try {
    expect_keys(j, "config",
                {"name", "seed", "system", "labels", "corruption", "simulation",
                 "welch", "support", "analytic", "mrf", "output_dir"});
    ExperimentConfig cfg;
    cfg.name = j.value("name", "experiment");
    if (!j.contains("seed")) {
      throw ConfigError("config: 'seed' is mandatory (reproducibility)");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("system")) cfg.system = parse_system(j.at("system"));
    if (j.contains("labels")) {
      cfg.labels = j.at("labels").get<std::vector<std::string>>();
    }
    if (j.contains("corruption")) {
      for (const auto& cj : j.at("corruption")) {
        const int node = cj.at("node").get<int>();
        if (cfg.corruption.count(node)) {
          throw ConfigError("corruption: node listed twice");
        }
        cfg.corruption.emplace(node, parse_corruption_model(cj));
      }
    }
    if (j.contains("simulation")) {
      const json& sj = j.at("simulation");
      expect_keys(sj, "simulation", {"samples", "trials", "burn_in"});
      cfg.simulation.samples = sj.value("samples", 10000L);
      cfg.simulation.trials = sj.value("trials", 100);
      cfg.simulation.burn_in = sj.value("burn_in", 1000L);
      if (cfg.simulation.samples <= 0 || cfg.simulation.trials <= 0 ||
          cfg.simulation.burn_in < 0) {
        throw ConfigError("simulation: invalid parameters");
      }
    }
    if (j.contains("welch")) {
      const json& wj = j.at("welch");
      expect_keys(wj, "welch", {"segment_length", "overlap", "window", "nfft"});
      cfg.welch.segment_length = wj.value("segment_length", 512);
      cfg.welch.overlap = wj.value("overlap", 0.5);
      cfg.welch.window = wj.value("window", "hann");
      cfg.welch.nfft = wj.value("nfft", cfg.welch.segment_length);
    }
    if (j.contains("support")) cfg.support = parse_support(j.at("support"));
    if (j.contains("analytic")) {
      const json& aj = j.at("analytic");
      expect_keys(aj, "analytic", {"grid_points", "support_tau"});
      cfg.analytic.grid_points = aj.value("grid_points", 256);
      cfg.analytic.support_tau = aj.value("support_tau", 1e-7);
    }
    if (j.contains("mrf")) cfg.mrf = parse_mrf(j.at("mrf"));
    cfg.output_dir = j.value("output_dir", "out");

    if (cfg.system) {
      for (const auto& [node, model] : cfg.corruption) {
        if (node < 0 || node >= cfg.system->n) {
          throw ConfigError("corruption: node out of range");
        }
      }
      if (!cfg.labels.empty() &&
          static_cast<int>(cfg.labels.size()) != cfg.system->n) {
        throw ConfigError("labels: length must match the node count");
      }
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  json j;
  j["name"] = name;
  j["seed"] = seed;
  if (system) j["system"] = system_to_json(*system);
  if (!labels.empty()) j["labels"] = labels;
  json corr = json::array();
  for (const auto& [node, model] : corruption) {
    corr.push_back(corruption_model_to_json(node, model));
  }
  j["corruption"] = corr;
  j["simulation"] = {{"samples", simulation.samples},
                     {"trials", simulation.trials},
                     {"burn_in", simulation.burn_in}};
  j["welch"] = {{"segment_length", welch.segment_length},
                {"overlap", welch.overlap},
                {"window", welch.window},
                {"nfft", welch.nfft}};
  j["support"] = support_to_json(support);
  j["analytic"] = {{"grid_points", analytic.grid_points},
                   {"support_tau", analytic.support_tau}};
  if (mrf) j["mrf"] = mrf_to_json(*mrf);
  j["output_dir"] = output_dir;
  return j;
}

NodeSet ExperimentConfig::corrupted_nodes() const {
  NodeSet z;
  for (const auto& [node, model] : corruption) z.insert(node);
  return z;
}

std::string config_hash(const json& canonical) {
  const std::string dump = canonical.dump();
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : dump) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

json ExperimentReport::full() const {
  json j = body;
  j["timing_ms"] = timing_ms;
  return j;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads) {
  const auto start = std::chrono::steady_clock::now();
  if (!cfg.system) throw ConfigError("run: config has no system block");
  const DimSystem& sys = *cfg.system;
  if (!check_stability(sys)) {
    throw UnstableSystemError("run: generative system is unstable");
  }
  cfg.welch.validate(cfg.simulation.samples);

  const DirectedGraph generative = sys.generative_graph();
  const NodeSet z = cfg.corrupted_nodes();
  const long total_len = cfg.simulation.burn_in + cfg.simulation.samples;

  std::vector<SpectralMatrix> per_trial(cfg.simulation.trials);
  run_pool(cfg.simulation.trials, threads, [&](int trial) {
    TimeSeriesPanel panel = simulate_dim(
        sys, total_len,
        derive_seed(cfg.seed, {0, static_cast<std::uint64_t>(trial)}), 0);
    for (const auto& [node, model] : cfg.corruption) {
      const Eigen::VectorXd clean = panel.samples.col(node);
      const std::vector<double> u = apply_corruption(
          model, {clean.data(), static_cast<std::size_t>(clean.size())},
          derive_seed(cfg.seed, {1, static_cast<std::uint64_t>(trial),
                                 static_cast<std::uint64_t>(node)}));
      for (long t = 0; t < total_len; ++t) panel.samples(t, node) = u[t];
    }
    TimeSeriesPanel observed;
    observed.samples = panel.samples.bottomRows(cfg.simulation.samples);
    observed.labels = panel.labels;
    per_trial[trial] = estimate_cross_psd(observed, cfg.welch);
  });

  // Trials are averaged on the spectra, in trial order, before inversion.
  SpectralMatrix averaged = per_trial[0];
  for (int trial = 1; trial < cfg.simulation.trials; ++trial) {
    for (int k = 0; k < averaged.num_freqs(); ++k) {
      averaged.values[k] += per_trial[trial].values[k];
    }
  }
  for (auto& m : averaged.values) m /= static_cast<double>(cfg.simulation.trials);

  const SpectralMatrix inverse = invert_spectrum_with_config(averaged, cfg.support);

  ExperimentReport report;
  report.labels =
      cfg.labels.empty() ? default_labels(sys.n) : cfg.labels;
  report.scores = support_scores(inverse, cfg.support.aggregate);
  report.recovered = support_graph(inverse, cfg.support);
  report.prediction = grade(generative, z, report.recovered);
  report.has_graphs = true;

  // Deviation of the trial-averaged estimate from the analytic corrupted
  // spectrum, scaled by the local diagonal.
  const auto thetas = compute_thetas(sys, cfg.corruption, averaged.freqs);
  const SpectralMatrix clean = analytic_psd(sys, averaged.freqs);
  const CorruptedSpectra analytic = corrupted_psd(clean, cfg.corruption, thetas);
  Eigen::MatrixXd deviation = Eigen::MatrixXd::Zero(sys.n, sys.n);
  double max_diag_rel = 0.0;
  for (int k = 0; k < averaged.num_freqs(); ++k) {
    const Eigen::MatrixXcd& est = averaged.values[k];
    const Eigen::MatrixXcd& ana = analytic.uu.values[k];
    for (int i = 0; i < sys.n; ++i) {
      for (int j = 0; j < sys.n; ++j) {
        const double scale =
            std::sqrt(ana(i, i).real() * ana(j, j).real());
        deviation(i, j) = std::max(deviation(i, j),
                                   std::abs(est(i, j) - ana(i, j)) / scale);
      }
      max_diag_rel = std::max(
          max_diag_rel,
          std::abs(est(i, i).real() - ana(i, i).real()) / ana(i, i).real());
    }
  }

  report.body = report_header(cfg, "simulate");
  report.body["grid_size"] = averaged.num_freqs();
  report.body["scores"] = scores_to_json(report.scores);
  report.body["recovered_edges"] = graph_to_json(report.recovered);
  report.body["prediction"] = prediction_to_json(report.prediction);
  report.body["deviations"] = {{"max_diag_rel", max_diag_rel},
                               {"per_entry_scaled", matrix_to_json(deviation)}};
  report.exit_code = report.prediction.violations.empty() ? 0 : 2;
  report.body["exit_code"] = report.exit_code;
  report.timing_ms = elapsed_ms(start);
  return report;
}

ExperimentReport run_analytic(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (!cfg.system) throw ConfigError("analytic: config has no system block");
  const DimSystem& sys = *cfg.system;
  if (!check_stability(sys)) {
    throw UnstableSystemError("analytic: generative system is unstable");
  }

  const DirectedGraph generative = sys.generative_graph();
  const NodeSet z = cfg.corrupted_nodes();
  const std::vector<double> grid = uniform_grid(cfg.analytic.grid_points);

  const SpectralMatrix clean = analytic_psd(sys, grid);
  const auto thetas = compute_thetas(sys, cfg.corruption, grid);
  const CorruptedSpectra corrupted = corrupted_psd(clean, cfg.corruption, thetas);
  const SpectralMatrix inverse = invert_spectrum(corrupted.uu, 0.0, 1e14);

  // Rank-one-update cross-check. Skipped when some corruption erases its
  // channel entirely (zero mean transfer function), which leaves the
  // uncorrupted part of the spectrum singular.
  std::optional<double> woodbury_dev;
  const bool any_erasing = std::any_of(
      cfg.corruption.begin(), cfg.corruption.end(), [](const auto& entry) {
        return std::holds_alternative<Disinformation>(entry.second);
      });
  if (!any_erasing) {
    std::map<int, std::vector<double>> zero_thetas;
    for (const auto& [node, theta] : thetas) {
      zero_thetas[node] = std::vector<double>(theta.size(), 0.0);
    }
    const SpectralMatrix psi0 =
        corrupted_psd(clean, cfg.corruption, zero_thetas).uu;
    const SpectralMatrix wood = woodbury_sequence(
        psi0, std::vector<int>(z.begin(), z.end()), thetas);
    double dev = 0.0;
    for (int k = 0; k < inverse.num_freqs(); ++k) {
      dev = std::max(
          dev, (inverse.values[k] - wood.values[k]).cwiseAbs().maxCoeff());
    }
    woodbury_dev = dev;
  }

  SupportConfig analytic_support;
  analytic_support.tau = cfg.analytic.support_tau;

  ExperimentReport report;
  report.labels = cfg.labels.empty() ? default_labels(sys.n) : cfg.labels;
  report.scores = support_scores(inverse, analytic_support.aggregate);
  report.recovered = support_graph(inverse, analytic_support);
  report.prediction = grade(generative, z, report.recovered);
  report.has_graphs = true;

  report.body = report_header(cfg, "analytic");
  report.body["grid_size"] = inverse.num_freqs();
  report.body["scores"] = scores_to_json(report.scores);
  report.body["recovered_edges"] = graph_to_json(report.recovered);
  report.body["prediction"] = prediction_to_json(report.prediction);
  if (woodbury_dev) {
    report.body["woodbury_max_deviation"] = *woodbury_dev;
  } else {
    report.body["woodbury_max_deviation"] = nullptr;
  }
  report.exit_code = report.prediction.violations.empty() ? 0 : 2;
  report.body["exit_code"] = report.exit_code;
  report.timing_ms = elapsed_ms(start);
  return report;
}

ExperimentReport run_mrf(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (!cfg.mrf) throw ConfigError("mrf: config has no mrf block");
  const MrfSpec& spec = *cfg.mrf;

  ExperimentReport report;
  report.body = report_header(cfg, "mrf");

  if (spec.kind == MrfSpec::Kind::kDiscrete) {
    const PairwiseMarkovSummary summary =
        verify_pairwise_markov(spec.discrete, spec.discrete_perturbations);
    json pairs = json::array();
    for (const auto& pv : summary.pairs) {
      pairs.push_back({{"pair", {pv.pair.first, pv.pair.second}},
                       {"expected_edge", pv.expected_edge},
                       {"dependent", pv.dependent},
                       {"max_deviation", pv.max_deviation}});
    }
    json violations = json::array();
    for (const auto& e : summary.violations) violations.push_back({e.first, e.second});
    json exceptions = json::array();
    for (const auto& e : summary.genericity_exceptions) {
      exceptions.push_back({e.first, e.second});
    }
    report.body["mrf_summary"] = {
        {"kind", "discrete"},
        {"perturbed_edges", graph_to_json(summary.perturbed)},
        {"pairs", pairs},
        {"agreements", summary.agreements},
        {"pair_count", summary.pairs.size()},
        {"genericity_exceptions", exceptions},
        {"violations", violations}};
    report.exit_code = summary.violations.empty() ? 0 : 2;

    const int n = static_cast<int>(spec.discrete.alphabet.size());
    report.labels = cfg.labels.empty() ? default_labels(n) : cfg.labels;
    UndirectedGraph dependent(n);
    for (const auto& pv : summary.pairs) {
      if (pv.dependent) dependent.add_edge(pv.pair.first, pv.pair.second);
    }
    report.recovered = dependent;
    report.prediction.true_moral = spec.discrete.graph;
    report.prediction.perturbed = summary.perturbed;
    report.prediction.recovered = dependent;
    for (const Edge& e : summary.perturbed.edges) {
      if (!spec.discrete.graph.edges.count(e)) {
        report.prediction.admissible_spurious.insert(e);
      }
    }
    for (const Edge& e : dependent.edges) {
      if (spec.discrete.graph.edges.count(e)) {
        report.prediction.classification[e] = EdgeClass::kTrueKin;
      } else if (summary.perturbed.edges.count(e)) {
        report.prediction.classification[e] = EdgeClass::kPredictedSpurious;
      } else {
        report.prediction.classification[e] = EdgeClass::kViolation;
        report.prediction.violations.insert(e);
      }
    }
    for (const Edge& e : spec.discrete.graph.edges) {
      if (!dependent.edges.count(e)) report.prediction.missing.insert(e);
    }
    report.has_graphs = true;
    report.scores = Eigen::MatrixXd::Zero(n, n);
    for (const auto& pv : summary.pairs) {
      report.scores(pv.pair.first, pv.pair.second) = pv.max_deviation;
      report.scores(pv.pair.second, pv.pair.first) = pv.max_deviation;
    }
  } else {
    const GaussianNetworkModel& gm = spec.gaussian;
    const DirectedGraph generative = gm.generative_graph();
    NodeSet z;
    for (const auto& p : spec.gaussian_perturbations) {
      if (!z.insert(p.node).second) {
        throw ConfigError("mrf: node perturbed twice");
      }
    }
    const Eigen::MatrixXd joint =
        joint_precision_with_perturbations(gm, spec.gaussian_perturbations);
    const Eigen::MatrixXd observed = marginal_precision(joint, z);

    // Map observed positions back to original node ids: unperturbed nodes
    // ascending, then one stand-in per perturbation in listed order.
    std::vector<int> position_to_node;
    for (int v = 0; v < gm.n; ++v) {
      if (!z.count(v)) position_to_node.push_back(v);
    }
    for (const auto& p : spec.gaussian_perturbations) {
      position_to_node.push_back(p.node);
    }
    const UndirectedGraph obs_support = support_of_matrix(observed, 1e-9);
    UndirectedGraph recovered(gm.n);
    for (const auto& [a, b] : obs_support.edges) {
      if (position_to_node[a] != position_to_node[b]) {
        recovered.add_edge(position_to_node[a], position_to_node[b]);
      }
    }
    report.recovered = recovered;
    report.prediction = grade(generative, z, recovered);
    report.has_graphs = true;
    report.labels = cfg.labels.empty() ? default_labels(gm.n) : cfg.labels;
    report.scores = Eigen::MatrixXd::Zero(gm.n, gm.n);
    for (std::size_t a = 0; a < position_to_node.size(); ++a) {
      for (std::size_t b = 0; b < position_to_node.size(); ++b) {
        report.scores(position_to_node[a], position_to_node[b]) =
            std::abs(observed(a, b));
      }
    }
    report.body["mrf_summary"] = {
        {"kind", "gaussian"},
        {"observed_precision", matrix_to_json(observed)},
        {"perturbed_edges", graph_to_json(report.prediction.perturbed)},
        {"recovered_edges", graph_to_json(recovered)},
        {"violations", edges_to_json(report.prediction.violations)}};
    report.exit_code = report.prediction.violations.empty() ? 0 : 2;
  }

  if (report.has_graphs) {
    report.body["recovered_edges"] = graph_to_json(report.recovered);
    report.body["prediction"] = prediction_to_json(report.prediction);
    report.body["scores"] = scores_to_json(report.scores);
  }
  report.body["exit_code"] = report.exit_code;
  report.timing_ms = elapsed_ms(start);
  return report;
}

void write_report_files(const ExperimentReport& report,
                        const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream os(fs::path(out_dir) / "report.json");
    os << report.full().dump(2) << "\n";
  }
  if (report.has_graphs) {
    {
      std::ofstream os(fs::path(out_dir) / "scores.csv");
      write_matrix_csv(os, report.scores, report.labels);
    }
    {
      std::ofstream os(fs::path(out_dir) / "recovered.dot");
      os << to_dot(report.recovered, report.labels);
    }
    {
      std::ofstream os(fs::path(out_dir) / "predicted.dot");
      os << to_dot_classified(report.prediction, report.labels);
    }
  }
}

}  // namespace netrecon
