#pragma once

#include <string>

#include "json.hpp"
#include "spreadbound/model.hpp"

namespace spb {

// Model description document:
// {
//   "compartments": ["S", "I"],
//   "n": 4,
//   "internal": [{"node": "all" | int, "from": "I", "to": "S", "delta": 0.5}],
//   "external": [{"from": "S", "to": "I", "affectors": ["I"],
//                 "beta": {"mode": "graph", "value": 0.3}
//                       | {"mode": "explicit",
//                          "entries": [{"i": 0, "j": 1, "affector": "I", "value": 0.3}]}}],
//   "graph": {"kind": "erdos_renyi", "n": 4, "p": 0.5, "seed": 1}
//          | {"kind": "explicit", "edges": [[0, 1]]}
// }
// Parsing is strict: unknown fields are errors. "graph" is required by
// graph-mode rates and otherwise optional metadata.
CompartmentalModel parse_model(const nlohmann::json& doc);

CompartmentalModel load_model(const std::string& path);

EdgeList parse_graph(const nlohmann::json& doc);

nlohmann::json model_to_json(const CompartmentalModel& model);

}  // namespace spb
