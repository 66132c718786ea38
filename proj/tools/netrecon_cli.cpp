#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "netrecon/errors.hpp"
#include "netrecon/experiment.hpp"
#include "netrecon/io.hpp"
#include "netrecon/version.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  int trials = -1;
  int threads = 0;
};

netrecon::ExperimentConfig load_config(const CommonOptions& opts) {
  auto cfg = netrecon::ExperimentConfig::from_file(opts.config_path);
  if (opts.seed >= 0) cfg.seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.trials > 0) cfg.simulation.trials = opts.trials;
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_sim_flags) {
  cmd->add_option("--config", opts.config_path, "Experiment config (JSON)")
      ->required();
  cmd->add_option("--out", opts.out_dir, "Output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "Master seed (overrides config)");
  if (with_sim_flags) {
    cmd->add_option("--trials", opts.trials, "Trial count (overrides config)");
    cmd->add_option("--threads", opts.threads,
                    "Worker threads (0 = automatic)");
  }
}

int finish(const netrecon::ExperimentReport& report, const std::string& out) {
  netrecon::write_report_files(report, out);
  const auto& pred = report.body.contains("prediction")
                         ? report.body.at("prediction")
                         : nlohmann::json{};
  std::cout << "report: " << (std::filesystem::path(out) / "report.json").string()
            << "\n";
  if (pred.contains("violations")) {
    std::cout << "violations: " << pred.at("violations").size() << "\n";
  }
  std::cout << "exit code: " << report.exit_code << "\n";
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network structure recovery from corrupted data streams"};
  app.set_version_flag("--version", netrecon::kVersion);
  app.require_subcommand(1);

  CommonOptions run_opts, analytic_opts, mrf_opts, validate_opts;
  std::string dot_config, dot_edges, dot_out;

  CLI::App* run = app.add_subcommand(
      "run", "Simulate, corrupt, estimate spectra and grade the recovery");
  add_common(run, run_opts, true);

  CLI::App* analytic = app.add_subcommand(
      "analytic", "Exact-spectrum pipeline with rank-one-update cross-check");
  add_common(analytic, analytic_opts, false);

  CLI::App* mrf = app.add_subcommand(
      "mrf", "Markov-random-field marginalization suite");
  add_common(mrf, mrf_opts, false);

  CLI::App* validate =
      app.add_subcommand("validate-config", "Check a config file and exit");
  validate->add_option("--config", validate_opts.config_path, "Config (JSON)")
      ->required();

  CLI::App* export_dot =
      app.add_subcommand("export-dot", "Write DOT files for a config's graphs");
  export_dot->add_option("--config", dot_config, "Experiment config (JSON)");
  export_dot->add_option("--edges", dot_edges, "Edge-list file");
  export_dot->add_option("--out", dot_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      const auto cfg = load_config(run_opts);
      return finish(netrecon::run_experiment(cfg, run_opts.threads),
                    cfg.output_dir);
    }
    if (analytic->parsed()) {
      const auto cfg = load_config(analytic_opts);
      return finish(netrecon::run_analytic(cfg), cfg.output_dir);
    }
    if (mrf->parsed()) {
      const auto cfg = load_config(mrf_opts);
      return finish(netrecon::run_mrf(cfg), cfg.output_dir);
    }
    if (validate->parsed()) {
      const auto cfg =
          netrecon::ExperimentConfig::from_file(validate_opts.config_path);
      if (cfg.system && !netrecon::check_stability(*cfg.system)) {
        std::cerr << "invalid: generative system is unstable\n";
        return 1;
      }
      if (cfg.system) cfg.welch.validate(cfg.simulation.samples);
      std::cout << "valid (" << netrecon::config_hash(cfg.to_json()) << ")\n";
      return 0;
    }
    if (export_dot->parsed()) {
      namespace fs = std::filesystem;
      fs::create_directories(dot_out);
      if (!dot_edges.empty()) {
        std::ifstream in(dot_edges);
        if (!in) throw netrecon::ConfigError("cannot open " + dot_edges);
        const auto g = netrecon::read_edge_list(in);
        std::ofstream os(fs::path(dot_out) / "graph.dot");
        os << netrecon::to_dot(g);
        return 0;
      }
      if (dot_config.empty()) {
        throw netrecon::ConfigError("export-dot needs --config or --edges");
      }
      const auto cfg = netrecon::ExperimentConfig::from_file(dot_config);
      if (!cfg.system) {
        throw netrecon::ConfigError("export-dot: config has no system block");
      }
      const auto labels = cfg.labels.empty()
                              ? netrecon::default_labels(cfg.system->n)
                              : cfg.labels;
      const auto generative = cfg.system->generative_graph();
      const auto prediction =
          netrecon::predict_spurious(generative, cfg.corrupted_nodes());
      {
        std::ofstream os(fs::path(dot_out) / "generative.dot");
        os << netrecon::to_dot(generative, labels);
      }
      {
        std::ofstream os(fs::path(dot_out) / "moral.dot");
        os << netrecon::to_dot(prediction.true_moral, labels);
      }
      {
        std::ofstream os(fs::path(dot_out) / "perturbed.dot");
        os << netrecon::to_dot(prediction.perturbed, labels);
      }
      return 0;
    }
  } catch (const netrecon::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
