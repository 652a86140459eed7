#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "spreadbound/experiment.hpp"
#include "spreadbound/model_io.hpp"

namespace {

// Exit codes: 0 success, 1 usage/config error, 2 containment failure,
// 3 internal error.
int run_config(const std::string& path, const spb::RunOptions& options, bool exact_only) {
  spb::ExperimentConfig config = spb::load_experiment_config(path);
  if (exact_only) {
    std::vector<spb::SystemRequest> kept;
    for (const auto& req : config.systems)
      if (req.kind == spb::SystemRequest::Kind::Exact) kept.push_back(req);
    if (kept.empty()) kept.push_back(spb::parse_system_request("exact"));
    config.systems = std::move(kept);
    config.eliminate = false;
    config.combine = false;
  }
  spb::ExperimentResult result = spb::run_experiment(config, options);
  if (!options.quiet) {
    for (const auto& file : result.written_files) std::cout << file << "\n";
    for (const auto& [system, checks] : result.report["containment"].items())
      for (const auto& [ref, body] : checks.items()) {
        const bool pass = body.value("pass", true);
        std::cout << (pass ? "PASS" : "FAIL") << " containment " << system << " vs " << ref
                  << "\n";
      }
  }
  return result.exit_code;
}

int validate_model_file(const std::string& path, bool quiet) {
  spb::CompartmentalModel model = spb::load_model(path);
  if (!quiet) {
    std::cout << "valid model: " << model.node_count() << " nodes, "
              << model.compartment_count() << " compartments, "
              << model.internal_transitions().size() << " internal and "
              << model.external_transitions().size() << " external transitions\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Networked spreading processes: stochastic simulation, exact solves, and "
               "deterministic bounding systems"};
  app.require_subcommand(1);

  std::string config_path, model_path, out_dir;
  spb::RunOptions options;
  std::uint64_t seed = 0;
  double grid_step = 0.0;
  bool quiet = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory (overrides config)");
    cmd->add_option("--seed", seed, "Master seed (overrides config)");
    cmd->add_option("--grid-step", grid_step, "Output grid step (overrides config)");
    cmd->add_flag("--quiet", quiet, "Suppress progress output");
  };

  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment config JSON")->required();
  add_common(run);

  CLI::App* oracle = app.add_subcommand("oracle", "Run only the exact solve of a config");
  oracle->add_option("config", config_path, "Experiment config JSON")->required();
  add_common(oracle);

  CLI::App* validate = app.add_subcommand("validate", "Validate a model description file");
  validate->add_option("model", model_path, "Model JSON")->required();
  validate->add_flag("--quiet", quiet, "Suppress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (run->count("--seed") || oracle->count("--seed")) options.seed = seed;
    if (run->count("--grid-step") || oracle->count("--grid-step")) options.grid_step = grid_step;
    options.quiet = quiet;

    if (app.got_subcommand(run)) return run_config(config_path, options, false);
    if (app.got_subcommand(oracle)) return run_config(config_path, options, true);
    if (app.got_subcommand(validate)) return validate_model_file(model_path, quiet);
  } catch (const spb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case spb::Errc::ConfigError:
      case spb::Errc::IoError:
      case spb::Errc::UnknownCompartment:
      case spb::Errc::UnknownNode:
      case spb::Errc::UnknownVariant:
      case spb::Errc::InvalidProbability:
      case spb::Errc::NegativeRate:
      case spb::Errc::NonFiniteRate:
      case spb::Errc::DuplicateTransitionKind:
      case spb::Errc::EmptyAffectorSet:
      case spb::Errc::StateSpaceTooLarge:
        return 1;
      default:
        return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
