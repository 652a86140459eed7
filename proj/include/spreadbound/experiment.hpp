#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spreadbound/bounding.hpp"
#include "spreadbound/catalog.hpp"
#include "spreadbound/model.hpp"

namespace spb {

inline constexpr const char* kVersion = "0.1.0";

// One requested system: how to approximate (or exactly compute) the
// compartment membership probabilities.
struct SystemRequest {
  enum class Kind { Generic, Refined, MeanField, Adhoc, Exact, Mc };
  Kind kind = Kind::Generic;
  AdhocVariant adhoc = AdhocVariant::Eq10;  // when kind == Adhoc
  long trials = 0;                          // when kind == Mc

  std::string name() const;       // e.g. "adhoc:eq10", "mc:100"
  std::string file_stem() const;  // e.g. "adhoc_eq10", "mc"
};

SystemRequest parse_system_request(const std::string& text);

// Declarative experiment: model + graph + initial condition + horizon +
// systems to run. Mirrors the JSON config schema documented in the README.
struct ExperimentConfig {
  std::string name;
  std::optional<CatalogKind> catalog;          // catalog model...
  std::map<std::string, double> catalog_rates;
  std::optional<nlohmann::json> model_doc;     // ...or a raw model document
  std::optional<nlohmann::json> graph_doc;     // required with catalog
  nlohmann::json init_doc;                     // resolved against the model at run time
  double t0 = 0.0;
  double horizon = 10.0;
  double grid_step = 0.1;
  double max_step = 0.01;
  std::vector<SystemRequest> systems;
  bool eliminate = false;
  bool combine = true;
  std::uint64_t seed = 0;
  std::string out_dir;

  nlohmann::json source = nlohmann::json::object();  // parsed document, echoed in metadata
};

// Strict parse; paths inside the document resolve relative to `base_dir`.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc, const std::string& base_dir);
ExperimentConfig load_experiment_config(const std::string& path);

struct ExperimentResult {
  // 0 ok, 2 a requested containment check failed (process exit code
  // contract; 1/3 are reported via exceptions).
  int exit_code = 0;
  std::vector<std::string> written_files;
  nlohmann::json report;
  nlohmann::json metadata;
};

struct RunOptions {
  std::optional<std::string> out_dir;        // overrides config
  std::optional<std::uint64_t> seed;         // overrides config
  std::optional<double> grid_step;           // overrides config
  bool quiet = false;
  std::int64_t state_cap = 0;                // 0 = default / env
};

// Builds the model, runs every requested system, applies elimination and
// combination, writes per-system and graph-mean CSVs plus report.json and
// metadata.json into the output directory, and runs containment checks of
// every paired system against whichever references (exact, mc) were
// requested.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace spb
