#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"
#include "spreadbound/model_io.hpp"
#include "spreadbound/trajectory.hpp"

using namespace spb;
using nlohmann::json;

namespace {

json sis_doc() {
  return json::parse(R"({
    "compartments": ["S", "I"],
    "n": 3,
    "internal": [{"node": "all", "from": "I", "to": "S", "delta": 0.5}],
    "external": [{"from": "S", "to": "I", "affectors": ["I"],
                  "beta": {"mode": "graph", "value": 0.3}}],
    "graph": {"kind": "explicit", "n": 3, "edges": [[0, 1], [1, 2]]}
  })");
}

}  // namespace

TEST_CASE("model document round trip") {
  const CompartmentalModel m = parse_model(sis_doc());
  CHECK(m.node_count() == 3);
  CHECK(m.compartment_count() == 2);
  CHECK(m.internal_rate(1, 1, 0) == 0.5);
  Configuration x(3);
  x << 1, 0, 1;
  CHECK(m.transition_rate(x, 1, 0, 1) == doctest::Approx(0.6));

  // Serialize and parse again: same rates.
  const CompartmentalModel again = parse_model(model_to_json(m));
  CHECK(again.content_hash() == m.content_hash());
}

TEST_CASE("unknown fields are rejected everywhere") {
  json doc = sis_doc();
  doc["extra"] = 1;
  CHECK_THROWS_AS(parse_model(doc), Error);

  doc = sis_doc();
  doc["internal"][0]["typo"] = 1;
  CHECK_THROWS_AS(parse_model(doc), Error);

  doc = sis_doc();
  doc["external"][0]["beta"]["typo"] = 1;
  CHECK_THROWS_AS(parse_model(doc), Error);

  doc = sis_doc();
  doc["graph"]["typo"] = 1;
  CHECK_THROWS_AS(parse_model(doc), Error);
}

TEST_CASE("model document errors carry the right codes") {
  json doc = sis_doc();
  doc["internal"][0]["delta"] = -0.5;
  CHECK_THROWS_WITH_AS(parse_model(doc), doctest::Contains("NegativeRate"), Error);

  doc = sis_doc();
  doc["external"][0]["affectors"] = json::array();
  CHECK_THROWS_WITH_AS(parse_model(doc), doctest::Contains("EmptyAffectorSet"), Error);

  doc = sis_doc();
  doc["external"][0]["from"] = "X";
  CHECK_THROWS_AS(parse_model(doc), Error);

  doc = sis_doc();
  doc["graph"]["n"] = 4;  // disagrees with model.n
  CHECK_THROWS_AS(parse_model(doc), Error);
}

TEST_CASE("explicit beta entries and erdos-renyi graphs parse") {
  json doc = json::parse(R"({
    "compartments": ["S", "I"],
    "n": 4,
    "internal": [{"node": 2, "from": "I", "to": "S", "delta": 1.5}],
    "external": [{"from": "S", "to": "I", "affectors": ["I"],
                  "beta": {"mode": "explicit",
                           "entries": [{"i": 0, "j": 1, "affector": "I", "value": 0.7}]}}]
  })");
  const CompartmentalModel m = parse_model(doc);
  Configuration x(4);
  x << 0, 1, 0, 0;
  CHECK(m.transition_rate(x, 0, 0, 1) == 0.7);
  CHECK(m.transition_rate(x, 2, 0, 1) == 0.0);  // no entry for node 2
  CHECK(m.internal_rate(2, 1, 0) == 1.5);
  CHECK(m.internal_rate(1, 1, 0) == 0.0);

  json er = json::parse(R"({
    "compartments": ["S", "I"],
    "n": 100,
    "external": [{"from": "S", "to": "I", "affectors": ["I"],
                  "beta": {"mode": "graph", "value": 0.1}}],
    "graph": {"kind": "erdos_renyi", "n": 100, "p": 0.2, "seed": 42}
  })");
  const CompartmentalModel big = parse_model(er);
  CHECK(big.graph().has_value());
  CHECK(big.graph()->edges.size() == 915);
}

TEST_CASE("plot data formatting: header-only, row order, node mean") {
  TrajectoryBundle bundle;
  bundle.nodes = 2;
  bundle.compartments = {"A", "B"};

  // Empty grid: header only.
  bundle.grid = Eigen::VectorXd(0);
  CHECK(plot_data_string(bundle, Aggregation::PerNode) == "t,node,compartment,role,value\n");

  bundle.grid = Eigen::VectorXd::LinSpaced(3, 0.0, 1.0);
  Eigen::ArrayXXd frame(2, 2);
  frame << 0.125, 0.875, 0.25, 0.75;
  bundle.series[SeriesRole::Point] = {frame, frame, frame};
  const std::string per_node = plot_data_string(bundle, Aggregation::PerNode);
  CHECK(per_node ==
        "t,node,compartment,role,value\n"
        "0,0,A,point,0.125\n"
        "0,0,B,point,0.875\n"
        "0,1,A,point,0.25\n"
        "0,1,B,point,0.75\n"
        "0.5,0,A,point,0.125\n"
        "0.5,0,B,point,0.875\n"
        "0.5,1,A,point,0.25\n"
        "0.5,1,B,point,0.75\n"
        "1,0,A,point,0.125\n"
        "1,0,B,point,0.875\n"
        "1,1,A,point,0.25\n"
        "1,1,B,point,0.75\n");

  const std::string mean = plot_data_string(bundle, Aggregation::GraphMean);
  CHECK(mean.find("0,mean,A,point,0.1875\n") != std::string::npos);
}

TEST_CASE("csv writing is byte-stable across calls") {
  TrajectoryBundle bundle;
  bundle.nodes = 1;
  bundle.compartments = {"A"};
  bundle.grid = Eigen::VectorXd::LinSpaced(4, 0.0, 0.3);
  bundle.series[SeriesRole::Point] = {
      Eigen::ArrayXXd::Constant(1, 1, 1.0 / 3.0), Eigen::ArrayXXd::Constant(1, 1, 2.0 / 3.0),
      Eigen::ArrayXXd::Constant(1, 1, 1.0 / 7.0), Eigen::ArrayXXd::Constant(1, 1, 0.1)};

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "spreadbound_io_test";
  fs::create_directories(dir);
  const std::string a = (dir / "a.csv").string();
  const std::string b = (dir / "b.csv").string();
  emit_plot_data(bundle, Aggregation::PerNode, a);
  emit_plot_data(bundle, Aggregation::PerNode, b);

  const auto slurp = [](const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(file), {});
  };
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == plot_data_string(bundle, Aggregation::PerNode));
  fs::remove_all(dir);
}
