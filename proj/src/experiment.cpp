#include "spreadbound/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "spreadbound/exact.hpp"
#include "spreadbound/metrics.hpp"
#include "spreadbound/model_io.hpp"
#include "spreadbound/ssa.hpp"

namespace spb {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kContainmentTolerance = 1e-4;

std::uint64_t text_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void reject_unknown(const json& doc, const std::set<std::string>& allowed, const char* what) {
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!allowed.count(it.key()))
      throw Error(Errc::ConfigError, std::string("unknown field \"") + it.key() + "\" in " + what);
}

}  // namespace

std::string SystemRequest::name() const {
  switch (kind) {
    case Kind::Generic: return "generic";
    case Kind::Refined: return "refined";
    case Kind::MeanField: return "mean_field";
    case Kind::Adhoc: return std::string("adhoc:") + adhoc_variant_name(adhoc);
    case Kind::Exact: return "exact";
    case Kind::Mc: return "mc:" + std::to_string(trials);
  }
  return "?";
}

std::string SystemRequest::file_stem() const {
  switch (kind) {
    case Kind::Adhoc: return std::string("adhoc_") + adhoc_variant_name(adhoc);
    case Kind::Mc: return "mc";
    default: return name();
  }
}

SystemRequest parse_system_request(const std::string& text) {
  SystemRequest req;
  if (text == "generic") {
    req.kind = SystemRequest::Kind::Generic;
  } else if (text == "refined") {
    req.kind = SystemRequest::Kind::Refined;
  } else if (text == "mean_field") {
    req.kind = SystemRequest::Kind::MeanField;
  } else if (text == "exact") {
    req.kind = SystemRequest::Kind::Exact;
  } else if (text.rfind("adhoc:", 0) == 0) {
    req.kind = SystemRequest::Kind::Adhoc;
    req.adhoc = parse_adhoc_variant(text.substr(6));
  } else if (text.rfind("mc:", 0) == 0) {
    req.kind = SystemRequest::Kind::Mc;
    try {
      req.trials = std::stol(text.substr(3));
    } catch (const std::exception&) {
      throw Error(Errc::ConfigError, "bad trial count in \"" + text + "\"");
    }
    if (req.trials < 1) throw Error(Errc::ConfigError, "mc needs at least one trial");
  } else {
    throw Error(Errc::ConfigError, "unknown system \"" + text + "\"");
  }
  return req;
}

ExperimentConfig parse_experiment_config(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) throw Error(Errc::ConfigError, "config must be an object");
  reject_unknown(doc,
                 {"name", "model", "graph", "init", "t0", "horizon", "grid_step", "max_step",
                  "systems", "eliminate", "combine", "seed", "ledger", "out"},
                 "config");

  ExperimentConfig config;
  config.source = doc;
  config.name = doc.value("name", std::string(""));

  if (!doc.contains("model")) throw Error(Errc::ConfigError, "config is missing \"model\"");
  const json& model = doc["model"];
  if (!model.is_object()) throw Error(Errc::ConfigError, "config.model must be an object");
  reject_unknown(model, {"catalog", "file", "inline"}, "config.model");
  if (model.contains("catalog")) {
    const json& cat = model["catalog"];
    reject_unknown(cat, {"kind", "rates"}, "config.model.catalog");
    if (!cat.contains("kind") || !cat["kind"].is_string())
      throw Error(Errc::ConfigError, "catalog model needs a string \"kind\"");
    config.catalog = parse_catalog_kind(cat["kind"].get<std::string>());
    if (!cat.contains("rates") || !cat["rates"].is_object())
      throw Error(Errc::ConfigError, "catalog model needs a \"rates\" object");
    for (auto it = cat["rates"].begin(); it != cat["rates"].end(); ++it) {
      if (!it.value().is_number())
        throw Error(Errc::ConfigError, "rate \"" + it.key() + "\" must be a number");
      config.catalog_rates[it.key()] = it.value().get<double>();
    }
    if (!doc.contains("graph"))
      throw Error(Errc::ConfigError, "catalog models need a top-level \"graph\"");
    config.graph_doc = doc["graph"];
  } else if (model.contains("file")) {
    if (!model["file"].is_string())
      throw Error(Errc::ConfigError, "config.model.file must be a string path");
    fs::path path = model["file"].get<std::string>();
    if (path.is_relative()) path = fs::path(base_dir) / path;
    std::ifstream file(path);
    if (!file) throw Error(Errc::IoError, "cannot open model file " + path.string());
    json mdoc;
    try {
      file >> mdoc;
    } catch (const json::exception& e) {
      throw Error(Errc::ConfigError, path.string() + ": " + e.what());
    }
    config.model_doc = mdoc;
    if (doc.contains("graph"))
      throw Error(Errc::ConfigError, "model files carry their own graph; drop config.graph");
  } else if (model.contains("inline")) {
    config.model_doc = model["inline"];
    if (doc.contains("graph"))
      throw Error(Errc::ConfigError, "inline models carry their own graph; drop config.graph");
  } else {
    throw Error(Errc::ConfigError, "config.model needs \"catalog\", \"file\" or \"inline\"");
  }

  if (!doc.contains("init")) throw Error(Errc::ConfigError, "config is missing \"init\"");
  config.init_doc = doc["init"];

  config.t0 = doc.value("t0", 0.0);
  if (!doc.contains("horizon")) throw Error(Errc::ConfigError, "config is missing \"horizon\"");
  config.horizon = doc["horizon"].get<double>();
  config.grid_step = doc.value("grid_step", 0.1);
  config.max_step = doc.value("max_step", 0.01);

  if (!doc.contains("systems") || !doc["systems"].is_array() || doc["systems"].empty())
    throw Error(Errc::ConfigError, "config needs a nonempty \"systems\" array");
  for (const auto& s : doc["systems"]) {
    if (!s.is_string()) throw Error(Errc::ConfigError, "systems entries must be strings");
    config.systems.push_back(parse_system_request(s.get<std::string>()));
  }

  std::set<std::string> stems;
  for (const auto& req : config.systems)
    if (!stems.insert(req.file_stem()).second)
      throw Error(Errc::ConfigError, "duplicate system output \"" + req.file_stem() + "\"");

  config.eliminate = doc.value("eliminate", false);
  config.combine = doc.value("combine", true);
  if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
  // Relative output paths resolve against the invoking directory, not the
  // config location.
  config.out_dir = doc.value("out", std::string(""));

  if (doc.contains("ledger")) {
    // Resolved against the model's compartments at run time.
    reject_unknown(doc["ledger"], {"nonnegative", "nonpositive"}, "config.ledger");
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw Error(Errc::IoError, "cannot open " + path);
  json doc;
  try {
    file >> doc;
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path + ": " + e.what());
  }
  return parse_experiment_config(doc, fs::path(path).parent_path().string());
}

namespace {

Eigen::ArrayXXd build_init(const json& doc, const CompartmentalModel& model) {
  const int n = model.node_count();
  const int comps = model.compartment_count();
  Eigen::ArrayXXd init = Eigen::ArrayXXd::Zero(n, comps);
  if (!doc.is_object()) throw Error(Errc::ConfigError, "init must be an object");
  reject_unknown(doc, {"all", "nodes", "product"}, "init");
  if (doc.contains("all")) {
    const int c = model.compartment_index(doc["all"].get<std::string>());
    if (c < 0) throw Error(Errc::UnknownCompartment, doc["all"].get<std::string>());
    init.col(c).setOnes();
    return init;
  }
  if (doc.contains("nodes")) {
    const auto& nodes = doc["nodes"];
    if (!nodes.is_array() || static_cast<int>(nodes.size()) != n)
      throw Error(Errc::ConfigError, "init.nodes must list one compartment per node");
    for (int i = 0; i < n; ++i) {
      const int c = model.compartment_index(nodes[i].get<std::string>());
      if (c < 0) throw Error(Errc::UnknownCompartment, nodes[i].get<std::string>());
      init(i, c) = 1.0;
    }
    return init;
  }
  if (doc.contains("product")) {
    double total = 0.0;
    for (auto it = doc["product"].begin(); it != doc["product"].end(); ++it) {
      const int c = model.compartment_index(it.key());
      if (c < 0) throw Error(Errc::UnknownCompartment, it.key());
      const double p = it.value().get<double>();
      if (p < 0.0 || p > 1.0) throw Error(Errc::InvalidProbability, "init probability " + it.key());
      init.col(c).setConstant(p);
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw Error(Errc::InvalidProbability, "init.product must sum to 1");
    return init;
  }
  throw Error(Errc::ConfigError, "init needs \"all\", \"nodes\" or \"product\"");
}

CorrelationLedger build_ledger(const json& doc, const CompartmentalModel& model) {
  CorrelationLedger ledger(model.compartment_count());
  auto apply = [&](const char* key, CovarianceSign sign) {
    if (!doc.contains(key)) return;
    for (const auto& pair : doc[key]) {
      if (!pair.is_array() || pair.size() != 2)
        throw Error(Errc::ConfigError, "ledger entries are compartment pairs");
      const int a = model.compartment_index(pair[0].get<std::string>());
      const int b = model.compartment_index(pair[1].get<std::string>());
      if (a < 0 || b < 0) throw Error(Errc::UnknownCompartment, "ledger pair");
      ledger.set(a, b, sign);
    }
  };
  apply("nonnegative", CovarianceSign::Nonnegative);
  apply("nonpositive", CovarianceSign::Nonpositive);
  return ledger;
}

struct NamedBundle {
  std::string stem;
  TrajectoryBundle bundle;
  bool paired = false;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const double grid_step = options.grid_step.value_or(config.grid_step);
  const std::uint64_t seed = options.seed.value_or(config.seed);
  std::string out_dir = options.out_dir.value_or(config.out_dir);
  if (out_dir.empty()) throw Error(Errc::ConfigError, "no output directory (set \"out\" or --out)");
  const std::int64_t state_cap = options.state_cap > 0 ? options.state_cap : default_state_cap();

  // Model.
  CompartmentalModel model = [&] {
    if (config.catalog) {
      EdgeList graph = parse_graph(*config.graph_doc);
      return build_catalog_model(*config.catalog, graph, config.catalog_rates);
    }
    return parse_model(*config.model_doc);
  }();

  const Eigen::ArrayXXd init = build_init(config.init_doc, model);

  CorrelationLedger ledger(model.compartment_count());
  if (config.source.contains("ledger"))
    ledger = build_ledger(config.source["ledger"], model);
  else if (config.catalog)
    ledger = default_ledger(*config.catalog, model);

  IntegrationPolicy bound_policy{config.max_step, grid_step, true};
  IntegrationPolicy point_policy{config.max_step, grid_step, false};

  std::vector<NamedBundle> bundles;
  json preclip = json::object();
  auto run_deterministic = [&](const RhsSpec& rhs, const std::string& stem, bool paired) {
    IntegrationResult res =
        integrate(rhs, init, config.t0, config.horizon, paired ? bound_policy : point_policy,
                  model.compartments());
    preclip[stem] = {{"min", res.preclip_min}, {"max", res.preclip_max}};
    bundles.push_back({stem, std::move(res.bundle), paired});
  };

  for (const auto& req : config.systems) {
    switch (req.kind) {
      case SystemRequest::Kind::Generic:
        run_deterministic(generic_bounding_rhs(model), req.file_stem(), true);
        break;
      case SystemRequest::Kind::Refined:
        run_deterministic(refined_bounding_rhs(model, ledger), req.file_stem(), true);
        break;
      case SystemRequest::Kind::MeanField:
        run_deterministic(mean_field_rhs(model), req.file_stem(), false);
        break;
      case SystemRequest::Kind::Adhoc: {
        if (!config.catalog)
          throw Error(Errc::ConfigError, "adhoc systems need a catalog model");
        RhsSpec rhs = adhoc_rhs(model, *config.catalog, req.adhoc);
        run_deterministic(rhs, req.file_stem(), rhs.layout.paired);
        break;
      }
      case SystemRequest::Kind::Exact: {
        MasterSolveOptions mopts;
        mopts.max_step = config.max_step;
        mopts.state_cap = state_cap;
        JointSolution sol =
            solve_master(model, init, config.t0, config.horizon, grid_step, mopts);
        bundles.push_back({req.file_stem(), sol.as_bundle(), false});
        break;
      }
      case SystemRequest::Kind::Mc: {
        const int cells = static_cast<int>(std::floor((config.horizon - config.t0) / grid_step + 1e-9));
        Eigen::VectorXd grid(cells + 1);
        for (int k = 0; k <= cells; ++k) grid[k] = config.t0 + k * grid_step;
        EnsembleEstimate est =
            ensemble_estimate(model, init, config.t0, config.horizon, req.trials, grid, seed);
        bundles.push_back({req.file_stem(), est.as_bundle(), false});
        break;
      }
    }
  }

  // Post-processing: simplex elimination per paired bundle, then the
  // combined envelope over every paired bundle available.
  if (config.eliminate) {
    std::vector<NamedBundle> extra;
    for (const auto& nb : bundles)
      if (nb.paired) extra.push_back({nb.stem + "_elim", eliminate_impossible(nb.bundle), true});
    for (auto& nb : extra) bundles.push_back(std::move(nb));
  }
  if (config.combine) {
    std::vector<TrajectoryBundle> paired;
    for (const auto& nb : bundles)
      if (nb.paired) paired.push_back(nb.bundle);
    if (paired.size() > 1) bundles.push_back({"combined", combine_bounds(paired), true});
  }

  // Metrics and containment.
  json report;
  report["gaps"] = json::object();
  report["d_metric"] = json::object();
  report["containment"] = json::object();
  bool any_containment_failure = false;

  const TrajectoryBundle* exact_ref = nullptr;
  const TrajectoryBundle* mc_ref = nullptr;
  for (const auto& nb : bundles) {
    if (nb.bundle.has(SeriesRole::Exact)) exact_ref = &nb.bundle;
    if (nb.bundle.has(SeriesRole::Mc)) mc_ref = &nb.bundle;
  }

  for (const auto& nb : bundles) {
    if (!nb.paired) continue;
    json gaps = json::object();
    const auto stats = bundle_gap_stats(nb.bundle);
    for (int c = 0; c < nb.bundle.comps(); ++c) {
      gaps[nb.bundle.compartments[c]] = stats[c].to_json();
      report["d_metric"][nb.stem][nb.bundle.compartments[c]] =
          d_metric(nb.bundle.mean_series(SeriesRole::Upper, c),
                   nb.bundle.mean_series(SeriesRole::Lower, c));
    }
    report["gaps"][nb.stem] = gaps;

    if (exact_ref) {
      ContainmentReport cr =
          containment_check(nb.bundle, SeriesRole::Lower, SeriesRole::Upper, *exact_ref,
                            SeriesRole::Exact, kContainmentTolerance);
      report["containment"][nb.stem]["exact"] = cr.to_json();
      any_containment_failure |= !cr.pass;
    }
    if (mc_ref) {
      // Monte Carlo references are screened at the graph-mean level, the
      // figure-level quantity, with per-point 4 * stderr slack.
      bool pass = true;
      json per_comp = json::object();
      for (int c = 0; c < nb.bundle.comps(); ++c) {
        const Eigen::VectorXd stderr_series = mc_ref->mean_series(SeriesRole::McStderr, c);
        ContainmentReport cr = containment_check_series(
            nb.bundle.mean_series(SeriesRole::Lower, c), mc_ref->mean_series(SeriesRole::Mc, c),
            nb.bundle.mean_series(SeriesRole::Upper, c), kContainmentTolerance, &stderr_series,
            &nb.bundle.grid);
        per_comp[nb.bundle.compartments[c]] = cr.to_json();
        pass &= cr.pass;
      }
      report["containment"][nb.stem]["mc_graph_mean"] = {{"pass", pass}, {"per_compartment", per_comp}};
      any_containment_failure |= !pass;
    }
  }

  // Outputs.
  fs::create_directories(out_dir);
  ExperimentResult result;
  auto write_csv = [&](const TrajectoryBundle& bundle, const std::string& stem) {
    const std::string per_node = (fs::path(out_dir) / (stem + ".csv")).string();
    const std::string mean = (fs::path(out_dir) / (stem + "_mean.csv")).string();
    emit_plot_data(bundle, Aggregation::PerNode, per_node);
    emit_plot_data(bundle, Aggregation::GraphMean, mean);
    result.written_files.push_back(per_node);
    result.written_files.push_back(mean);
  };
  for (const auto& nb : bundles) write_csv(nb.bundle, nb.stem);

  json metadata;
  metadata["version"] = kVersion;
  metadata["config"] = config.source;
  metadata["config_hash"] = hex64(text_hash(config.source.dump()));
  metadata["model_hash"] = hex64(model.content_hash());
  metadata["seed"] = seed;
  metadata["grid_step"] = grid_step;
  metadata["rng"] = std::string(rng::kAlgorithm);
  metadata["ledger"] = ledger.to_json(model.compartments());
  metadata["preclip"] = preclip;
  json systems = json::array();
  for (const auto& req : config.systems) systems.push_back(req.name());
  metadata["systems"] = systems;
  json bundle_meta = json::object();
  for (auto& nb : bundles) {
    nb.bundle.metadata["model_hash"] = metadata["model_hash"];
    nb.bundle.metadata["version"] = kVersion;
    bundle_meta[nb.stem] = nb.bundle.metadata;
  }
  metadata["bundles"] = bundle_meta;

  auto write_json = [&](const json& doc, const std::string& name) {
    const std::string path = (fs::path(out_dir) / name).string();
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(Errc::IoError, "cannot open " + path);
    file << doc.dump(2) << "\n";
    result.written_files.push_back(path);
  };
  write_json(report, "report.json");
  write_json(metadata, "metadata.json");

  result.report = std::move(report);
  result.metadata = std::move(metadata);
  result.exit_code = any_containment_failure ? 2 : 0;
  return result;
}

}  // namespace spb
