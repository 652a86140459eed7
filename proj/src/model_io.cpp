#include "spreadbound/model_io.hpp"

#include <fstream>
#include <set>

namespace spb {

namespace {

using nlohmann::json;

void require_object(const json& doc, const char* what) {
  if (!doc.is_object()) throw Error(Errc::ConfigError, std::string(what) + " must be an object");
}

// Strict field handling: every key must be in the allowed set.
void reject_unknown(const json& doc, const std::set<std::string>& allowed, const char* what) {
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!allowed.count(it.key()))
      throw Error(Errc::ConfigError,
                  std::string("unknown field \"") + it.key() + "\" in " + what);
}

const json& require(const json& doc, const char* key, const char* what) {
  auto it = doc.find(key);
  if (it == doc.end())
    throw Error(Errc::ConfigError, std::string(what) + " is missing \"" + key + "\"");
  return *it;
}

double as_number(const json& v, const char* what) {
  if (!v.is_number()) throw Error(Errc::ConfigError, std::string(what) + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const char* what) {
  if (!v.is_number_integer()) throw Error(Errc::ConfigError, std::string(what) + " must be an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const char* what) {
  if (!v.is_string()) throw Error(Errc::ConfigError, std::string(what) + " must be a string");
  return v.get<std::string>();
}

int compartment_of(const std::vector<std::string>& names, const json& v, const char* what) {
  const std::string name = as_string(v, what);
  for (int c = 0; c < static_cast<int>(names.size()); ++c)
    if (names[c] == name) return c;
  throw Error(Errc::UnknownCompartment, std::string(what) + ": " + name);
}

}  // namespace

EdgeList parse_graph(const json& doc) {
  require_object(doc, "graph");
  const std::string kind = as_string(require(doc, "kind", "graph"), "graph.kind");
  if (kind == "erdos_renyi") {
    reject_unknown(doc, {"kind", "n", "p", "seed"}, "graph");
    const int n = as_int(require(doc, "n", "graph"), "graph.n");
    const double p = as_number(require(doc, "p", "graph"), "graph.p");
    const auto seed = static_cast<std::uint64_t>(as_int(require(doc, "seed", "graph"), "graph.seed"));
    return erdos_renyi_edges(n, p, seed);
  }
  if (kind == "explicit") {
    reject_unknown(doc, {"kind", "n", "edges"}, "graph");
    EdgeList graph;
    graph.nodes = as_int(require(doc, "n", "graph"), "graph.n");
    for (const auto& e : require(doc, "edges", "graph")) {
      if (!e.is_array() || e.size() != 2)
        throw Error(Errc::ConfigError, "graph edge must be a pair [i, j]");
      int i = as_int(e[0], "edge endpoint");
      int j = as_int(e[1], "edge endpoint");
      if (i == j || i < 0 || j < 0 || i >= graph.nodes || j >= graph.nodes)
        throw Error(Errc::ConfigError, "graph edge endpoints out of range");
      if (i > j) std::swap(i, j);
      graph.edges.emplace_back(i, j);
    }
    return graph;
  }
  if (kind == "complete") {
    reject_unknown(doc, {"kind", "n"}, "graph");
    return complete_graph(as_int(require(doc, "n", "graph"), "graph.n"));
  }
  throw Error(Errc::ConfigError, "unknown graph kind: " + kind);
}

CompartmentalModel parse_model(const json& doc) {
  require_object(doc, "model");
  reject_unknown(doc, {"compartments", "n", "internal", "external", "graph"}, "model");

  std::vector<std::string> compartments;
  for (const auto& c : require(doc, "compartments", "model"))
    compartments.push_back(as_string(c, "compartment name"));
  const int n = as_int(require(doc, "n", "model"), "model.n");

  std::optional<EdgeList> graph;
  if (doc.contains("graph")) {
    graph = parse_graph(doc["graph"]);
    if (graph->nodes != n)
      throw Error(Errc::ConfigError, "graph node count disagrees with model.n");
  }

  ModelBuilder builder(compartments, n);
  if (graph) builder.graph_metadata(*graph);

  if (doc.contains("internal"))
    for (const auto& t : doc["internal"]) {
      require_object(t, "internal transition");
      reject_unknown(t, {"node", "from", "to", "delta"}, "internal transition");
      const json& node = require(t, "node", "internal transition");
      const int from = compartment_of(compartments, require(t, "from", "internal transition"),
                                      "internal.from");
      const int to = compartment_of(compartments, require(t, "to", "internal transition"),
                                    "internal.to");
      const double delta = as_number(require(t, "delta", "internal transition"), "internal.delta");
      if (node.is_string() && node.get<std::string>() == "all")
        builder.internal_rate(ModelBuilder::kAllNodes, from, to, delta);
      else
        builder.internal_rate(as_int(node, "internal.node"), from, to, delta);
    }

  if (doc.contains("external"))
    for (const auto& t : doc["external"]) {
      require_object(t, "external transition");
      reject_unknown(t, {"from", "to", "affectors", "beta"}, "external transition");
      const int from = compartment_of(compartments, require(t, "from", "external transition"),
                                      "external.from");
      const int to = compartment_of(compartments, require(t, "to", "external transition"),
                                    "external.to");
      std::vector<int> affectors;
      for (const auto& a : require(t, "affectors", "external transition"))
        affectors.push_back(compartment_of(compartments, a, "affector"));
      builder.external_transition(from, to, affectors);

      const json& beta = require(t, "beta", "external transition");
      require_object(beta, "beta");
      const std::string mode = as_string(require(beta, "mode", "beta"), "beta.mode");
      if (mode == "graph") {
        reject_unknown(beta, {"mode", "value"}, "beta");
        if (!graph) throw Error(Errc::ConfigError, "beta mode \"graph\" needs a graph");
        const double value = as_number(require(beta, "value", "beta"), "beta.value");
        for (int a : affectors) builder.external_rates_on_edges(from, to, a, *graph, value);
      } else if (mode == "explicit") {
        reject_unknown(beta, {"mode", "entries"}, "beta");
        for (const auto& entry : require(beta, "entries", "beta")) {
          require_object(entry, "beta entry");
          reject_unknown(entry, {"i", "j", "affector", "value"}, "beta entry");
          builder.external_rate(from, to,
                                compartment_of(compartments, require(entry, "affector", "beta entry"),
                                               "beta entry affector"),
                                as_int(require(entry, "i", "beta entry"), "beta.i"),
                                as_int(require(entry, "j", "beta entry"), "beta.j"),
                                as_number(require(entry, "value", "beta entry"), "beta.value"));
        }
      } else {
        throw Error(Errc::ConfigError, "unknown beta mode: " + mode);
      }
    }

  return builder.build();
}

CompartmentalModel load_model(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw Error(Errc::IoError, "cannot open " + path);
  json doc;
  try {
    file >> doc;
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigError, path + ": " + e.what());
  }
  return parse_model(doc);
}

nlohmann::json model_to_json(const CompartmentalModel& model) {
  json doc;
  doc["compartments"] = model.compartments();
  doc["n"] = model.node_count();
  json internal = json::array();
  for (const auto& t : model.internal_transitions()) {
    const bool uniform = (t.delta.array() == t.delta[0]).all();
    if (uniform) {
      internal.push_back({{"node", "all"},
                          {"from", model.compartment_name(t.from)},
                          {"to", model.compartment_name(t.to)},
                          {"delta", t.delta[0]}});
    } else {
      for (int i = 0; i < t.delta.size(); ++i)
        if (t.delta[i] != 0.0)
          internal.push_back({{"node", i},
                              {"from", model.compartment_name(t.from)},
                              {"to", model.compartment_name(t.to)},
                              {"delta", t.delta[i]}});
    }
  }
  doc["internal"] = internal;
  json external = json::array();
  for (const auto& e : model.external_transitions()) {
    json affectors = json::array();
    for (int a : e.affectors) affectors.push_back(model.compartment_name(a));
    json entries = json::array();
    for (std::size_t k = 0; k < e.affectors.size(); ++k)
      for (int i = 0; i < model.node_count(); ++i)
        for (RowSparse::InnerIterator it(e.beta[k], i); it; ++it)
          entries.push_back({{"i", i},
                             {"j", static_cast<int>(it.col())},
                             {"affector", model.compartment_name(e.affectors[k])},
                             {"value", it.value()}});
    external.push_back({{"from", model.compartment_name(e.from)},
                        {"to", model.compartment_name(e.to)},
                        {"affectors", affectors},
                        {"beta", {{"mode", "explicit"}, {"entries", entries}}}});
  }
  doc["external"] = external;
  return doc;
}

}  // namespace spb
