// Acceptance suite: one self-contained check per criterion, one PASS/FAIL
// line each. Run all with no arguments or a single one with
// --criterion N. Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "spreadbound/bounding.hpp"
#include "spreadbound/catalog.hpp"
#include "spreadbound/exact.hpp"
#include "spreadbound/experiment.hpp"
#include "spreadbound/metrics.hpp"
#include "spreadbound/model_io.hpp"
#include "spreadbound/ssa.hpp"

using namespace spb;
namespace th = test_helpers;

namespace {

struct CheckContext {
  bool ok = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
  void note(const std::string& what) {
    if (detail.tellp() > 0) detail << "; ";
    detail << what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Instance {
  CatalogKind kind;
  CompartmentalModel model;
  Eigen::ArrayXXd init;
};

// The shared instance set: per catalog kind, 10 seeded Erdos-Renyi models
// with p = 0.5, rates in (0, 2], and a deterministic mixed point start.
std::vector<Instance> instance_set(CatalogKind kind) {
  const int nodes = (kind == CatalogKind::SIS || kind == CatalogKind::SIR) ? 6 : 5;
  std::vector<Instance> instances;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const std::uint64_t salt = seed * 100 + static_cast<std::uint64_t>(kind);
    CompartmentalModel model = th::random_catalog_model(kind, nodes, 0.5, salt);
    Eigen::ArrayXXd init = th::striped_init(model);
    instances.push_back({kind, std::move(model), std::move(init)});
  }
  return instances;
}

const std::vector<CatalogKind> kAllKinds{CatalogKind::SIS, CatalogKind::SIR,
                                         CatalogKind::SI1SI2S, CatalogKind::SEIV};

constexpr double kHorizon = 10.0;
const IntegrationPolicy kBoundPolicy{0.01, 0.1, true};

double max_series_gap(const TrajectoryBundle& a, SeriesRole ra, const TrajectoryBundle& b,
                      SeriesRole rb) {
  double gap = 0.0;
  for (int t = 0; t < a.grid.size(); ++t)
    gap = std::max(gap, (a.at(ra)[t] - b.at(rb)[t]).abs().maxCoeff());
  return gap;
}

// ---------------------------------------------------------------------------
// 1. Fully-internal processes need no approximation: bounding lower series,
//    mean-field series, and exact marginals coincide.
bool criterion_1(CheckContext& cx) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const int nodes = 2 + static_cast<int>(seed % 3);       // 2..4
    const int comps = 2 + static_cast<int>((seed / 3) % 3); // 2..4
    const CompartmentalModel model = th::random_internal_model(nodes, comps, seed);
    const Eigen::ArrayXXd init = th::striped_init(model);

    const JointSolution exact = solve_master(model, init, 0.0, 5.0, 0.05);
    const IntegrationResult bounds =
        integrate(generic_bounding_rhs(model), init, 0.0, 5.0, {0.01, 0.05, true},
                  model.compartments());
    const IntegrationResult mf = integrate(mean_field_rhs(model), init, 0.0, 5.0,
                                           {0.01, 0.05, false}, model.compartments());

    for (int t = 0; t < exact.grid.size(); ++t) {
      worst = std::max(worst,
                       (bounds.bundle.at(SeriesRole::Lower)[t] - exact.marginals[t]).abs().maxCoeff());
      worst = std::max(worst,
                       (mf.bundle.at(SeriesRole::Point)[t] - exact.marginals[t]).abs().maxCoeff());
    }
  }
  cx.require(worst <= 1e-6, "max deviation " + num(worst));
  const double elapsed = seconds_since(start);
  cx.require(elapsed < 10.0, "runtime " + num(elapsed) + " s");
  cx.note("max deviation " + num(worst));
  return cx.ok;
}

// ---------------------------------------------------------------------------
// 2. Sandwich: exact marginals lie within [lower - 1e-4, upper + 1e-4] of the
//    generic bounding system for every catalog instance, and of the
//    ledger-refined system where a ledger ships (SIS, SIR).
bool criterion_2(CheckContext& cx) {
  const auto start = std::chrono::steady_clock::now();
  for (CatalogKind kind : kAllKinds) {
    int failures = 0;
    for (const Instance& inst : instance_set(kind)) {
      const JointSolution exact = solve_master(inst.model, inst.init, 0.0, kHorizon, 0.1);
      std::vector<RhsSpec> systems;
      systems.push_back(generic_bounding_rhs(inst.model));
      if (kind == CatalogKind::SIS || kind == CatalogKind::SIR)
        systems.push_back(refined_bounding_rhs(inst.model, default_ledger(kind, inst.model)));
      for (const RhsSpec& rhs : systems) {
        const IntegrationResult bounds =
            integrate(rhs, inst.init, 0.0, kHorizon, kBoundPolicy, inst.model.compartments());
        const ContainmentReport report =
            containment_check(bounds.bundle, SeriesRole::Lower, SeriesRole::Upper,
                              exact.as_bundle(), SeriesRole::Exact, 1e-4);
        if (!report.pass) ++failures;
      }
    }
    cx.require(failures == 0, std::string(catalog_kind_name(kind)) + ": " +
                                  std::to_string(failures) + " system runs violated containment");
  }
  const double elapsed = seconds_since(start);
  cx.require(elapsed < 120.0, "runtime " + num(elapsed) + " s");
  cx.note("runtime " + num(elapsed) + " s");
  return cx.ok;
}

// ---------------------------------------------------------------------------
// 3. Box invariance: pre-clip values of every bounding system stay within
//    [-1e-9, 1 + 1e-9].
bool criterion_3(CheckContext& cx) {
  double lo = 0.0, hi = 1.0;
  auto track = [&](const IntegrationResult& res) {
    lo = std::min(lo, res.preclip_min);
    hi = std::max(hi, res.preclip_max);
  };
  for (CatalogKind kind : kAllKinds)
    for (const Instance& inst : instance_set(kind)) {
      track(integrate(generic_bounding_rhs(inst.model), inst.init, 0.0, kHorizon, kBoundPolicy,
                      inst.model.compartments()));
      track(integrate(refined_bounding_rhs(inst.model, default_ledger(kind, inst.model)), inst.init,
                      0.0, kHorizon, kBoundPolicy, inst.model.compartments()));
      if (kind == CatalogKind::SIR)
        track(integrate(adhoc_rhs(inst.model, kind, AdhocVariant::Eq10), inst.init, 0.0, kHorizon,
                        kBoundPolicy, inst.model.compartments()));
      if (kind == CatalogKind::SIS)
        for (auto v : {AdhocVariant::Eq11, AdhocVariant::Eq12, AdhocVariant::Eq13})
          track(integrate(adhoc_rhs(inst.model, kind, v), inst.init, 0.0, kHorizon, kBoundPolicy,
                          inst.model.compartments()));
    }
  cx.require(lo >= -1e-9, "pre-clip minimum " + num(lo));
  cx.require(hi <= 1.0 + 1e-9, "pre-clip maximum " + num(hi));
  cx.note("pre-clip range [" + num(lo) + ", " + num(hi) + "]");
  return cx.ok;
}

// ---------------------------------------------------------------------------
// 4. (a) Refined right-hand sides dominate the generic ones pointwise on
//    sampled states; (b) integrated width ordering d(refined) <= d(generic).
bool criterion_4(CheckContext& cx) {
  for (CatalogKind kind : {CatalogKind::SIS, CatalogKind::SIR}) {
    for (const Instance& inst : instance_set(kind)) {
      const RhsSpec generic = generic_bounding_rhs(inst.model);
      const RhsSpec refined = refined_bounding_rhs(inst.model, default_ledger(kind, inst.model));
      CounterRng rng(inst.model.content_hash(), 0xACCE);
      double worst_upper = 0.0, worst_lower = 0.0;
      Eigen::VectorXd y(generic.layout.dim()), dg(generic.layout.dim()), dr(generic.layout.dim());
      for (int rep = 0; rep < 10000; ++rep) {
        auto [upper, lower] =
            th::random_bound_state(inst.model.node_count(), inst.model.compartment_count(), rng);
        generic.layout.upper(y) = upper;
        generic.layout.lower(y) = lower;
        generic.eval(y, dg);
        refined.eval(y, dr);
        worst_upper = std::max(worst_upper,
                               (refined.layout.upper(dr) - generic.layout.upper(dg)).maxCoeff());
        worst_lower = std::max(worst_lower,
                               (generic.layout.lower(dg) - refined.layout.lower(dr)).maxCoeff());
      }
      cx.require(worst_upper <= 1e-12, "upper RHS dominance violated by " + num(worst_upper));
      cx.require(worst_lower <= 1e-12, "lower RHS dominance violated by " + num(worst_lower));

      const IntegrationResult gen_run = integrate(generic, inst.init, 0.0, kHorizon, kBoundPolicy,
                                                  inst.model.compartments());
      const IntegrationResult ref_run = integrate(refined, inst.init, 0.0, kHorizon, kBoundPolicy,
                                                  inst.model.compartments());
      for (int i = 0; i < inst.model.node_count(); ++i)
        for (int c = 0; c < inst.model.compartment_count(); ++c) {
          const double d_gen = d_metric(gen_run.bundle.node_series(SeriesRole::Upper, i, c),
                                        gen_run.bundle.node_series(SeriesRole::Lower, i, c));
          const double d_ref = d_metric(ref_run.bundle.node_series(SeriesRole::Upper, i, c),
                                        ref_run.bundle.node_series(SeriesRole::Lower, i, c));
          cx.require(d_ref <= d_gen + 1e-6,
                     "d-metric ordering violated: " + std::to_string(d_ref) + " > " +
                         std::to_string(d_gen));
        }
    }
  }
  return cx.ok;
}

// ---------------------------------------------------------------------------
// 5. The refined SIS upper infection equation is the mean-field infection
//    equation.
bool criterion_5(CheckContext& cx) {
  double worst = 0.0;
  for (const Instance& inst : instance_set(CatalogKind::SIS)) {
    const int n = inst.model.node_count();
    const RhsSpec refined =
        refined_bounding_rhs(inst.model, default_ledger(CatalogKind::SIS, inst.model));
    const RhsSpec mf = mean_field_rhs(inst.model);
    CounterRng rng(inst.model.content_hash(), 0x5B5);
    Eigen::VectorXd y(refined.layout.dim()), dr(refined.layout.dim());
    Eigen::VectorXd yp(mf.layout.dim()), dp(mf.layout.dim());
    for (int rep = 0; rep < 1000; ++rep) {
      auto [upper, lower] = th::random_bound_state(n, 2, rng);
      refined.layout.upper(y) = upper;
      refined.layout.lower(y) = lower;
      refined.eval(y, dr);
      Eigen::ArrayXXd point(n, 2);
      point.col(1) = upper.col(1);
      point.col(0) = 1.0 - upper.col(1);
      mf.layout.point(yp) = point;
      mf.eval(yp, dp);
      worst = std::max(worst,
                       (refined.layout.upper(dr).col(1) - mf.layout.point(dp).col(1)).abs().maxCoeff());
    }
  }
  cx.require(worst <= 1e-12, "max deviation " + num(worst));
  cx.note("max deviation " + num(worst));
  return cx.ok;
}

// ---------------------------------------------------------------------------
// 6. Hand-derived systems: the SIR system equals the ledger-refined one, and
//    the three SIS systems pass the same containment gate as criterion 2.
bool criterion_6(CheckContext& cx) {
  for (const Instance& inst : instance_set(CatalogKind::SIR)) {
    const RhsSpec adhoc = adhoc_rhs(inst.model, CatalogKind::SIR, AdhocVariant::Eq10);
    const RhsSpec refined =
        refined_bounding_rhs(inst.model, default_ledger(CatalogKind::SIR, inst.model));
    CounterRng rng(inst.model.content_hash(), 0xADC);
    Eigen::VectorXd y(adhoc.layout.dim()), da(adhoc.layout.dim()), dr(adhoc.layout.dim());
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      auto [upper, lower] = th::random_bound_state(inst.model.node_count(), 3, rng);
      adhoc.layout.upper(y) = upper;
      adhoc.layout.lower(y) = lower;
      adhoc.eval(y, da);
      refined.eval(y, dr);
      worst = std::max(worst, (da - dr).cwiseAbs().maxCoeff());
    }
    cx.require(worst <= 1e-12, "eq10 vs refined deviation " + num(worst));
  }

  for (const Instance& inst : instance_set(CatalogKind::SIS)) {
    const JointSolution exact = solve_master(inst.model, inst.init, 0.0, kHorizon, 0.1);
    for (auto variant : {AdhocVariant::Eq11, AdhocVariant::Eq12, AdhocVariant::Eq13}) {
      const IntegrationResult run =
          integrate(adhoc_rhs(inst.model, CatalogKind::SIS, variant), inst.init, 0.0, kHorizon,
                    kBoundPolicy, inst.model.compartments());
      const ContainmentReport report =
          containment_check(run.bundle, SeriesRole::Lower, SeriesRole::Upper, exact.as_bundle(),
                            SeriesRole::Exact, 1e-4);
      cx.require(report.pass, std::string(adhoc_variant_name(variant)) +
                                  " containment violated by " +
                                  num(report.max_violation));
    }
  }
  return cx.ok;
}

// ---------------------------------------------------------------------------
// 7. Simplex elimination tightens monotonically, is idempotent up to float
//    re-rounding, preserves containment, and strictly shrinks the SEIV
//    exposed bound pair.
bool criterion_7(CheckContext& cx) {
  double worst_seiv_gap_cut = 0.0;
  for (CatalogKind kind : kAllKinds) {
    for (const Instance& inst : instance_set(kind)) {
      const IntegrationResult run = integrate(generic_bounding_rhs(inst.model), inst.init, 0.0,
                                              kHorizon, kBoundPolicy, inst.model.compartments());
      const TrajectoryBundle once = eliminate_impossible(run.bundle);
      const TrajectoryBundle twice = eliminate_impossible(once);

      for (int t = 0; t < run.bundle.grid.size(); ++t) {
        cx.require((once.at(SeriesRole::Upper)[t] <=
                    run.bundle.at(SeriesRole::Upper)[t] + 1e-15)
                       .all(),
                   "elimination loosened an upper");
        cx.require((once.at(SeriesRole::Lower)[t] >=
                    run.bundle.at(SeriesRole::Lower)[t] - 1e-15)
                       .all(),
                   "elimination loosened a lower");
      }
      cx.require(max_series_gap(once, SeriesRole::Upper, twice, SeriesRole::Upper) <= 1e-12 &&
                     max_series_gap(once, SeriesRole::Lower, twice, SeriesRole::Lower) <= 1e-12,
                 "elimination is not idempotent");

      const JointSolution exact = solve_master(inst.model, inst.init, 0.0, kHorizon, 0.1);
      const ContainmentReport report = containment_check(
          once, SeriesRole::Lower, SeriesRole::Upper, exact.as_bundle(), SeriesRole::Exact, 1e-4);
      cx.require(report.pass, std::string(catalog_kind_name(kind)) +
                                  " eliminated bounds violated containment by " +
                                  num(report.max_violation));

      // Exposed-compartment gap must strictly shrink at some grid point on
      // every SEIV instance. (The cut lands on the upper trajectory: the
      // crude system's other-compartment uppers equilibrate above a unit
      // sum, so the simplex identity can only bind from above.)
      if (kind == CatalogKind::SEIV) {
        const int exposed = inst.model.compartment_index("E");
        double best = 0.0;
        for (int t = 0; t < run.bundle.grid.size(); ++t) {
          const Eigen::ArrayXd raw_gap = run.bundle.at(SeriesRole::Upper)[t].col(exposed) -
                                         run.bundle.at(SeriesRole::Lower)[t].col(exposed);
          const Eigen::ArrayXd new_gap = once.at(SeriesRole::Upper)[t].col(exposed) -
                                         once.at(SeriesRole::Lower)[t].col(exposed);
          best = std::max(best, (raw_gap - new_gap).maxCoeff());
        }
        cx.require(best > 0.0, "no strict exposed gap reduction on a SEIV instance");
        worst_seiv_gap_cut = worst_seiv_gap_cut == 0.0 ? best : std::min(worst_seiv_gap_cut, best);
      }
    }
  }
  cx.note("smallest SEIV exposed gap reduction " + num(worst_seiv_gap_cut));
  return cx.ok;
}

// ---------------------------------------------------------------------------
// 8. Stochastic simulation: exponential survival on the 1-node chain and
//    agreement with the exact oracle on 2-node SIS.
bool criterion_8(CheckContext& cx) {
  const auto start = std::chrono::steady_clock::now();
  {
    ModelBuilder b({"A", "B"}, 1);
    b.internal_rate(0, 0, 1, 0.5);
    const CompartmentalModel chain = b.build();
    Eigen::ArrayXXd init(1, 2);
    init << 1.0, 0.0;
    Eigen::VectorXd grid(1);
    grid << 2.0;
    const EnsembleEstimate est = ensemble_estimate(chain, init, 0.0, 2.0, 10000, grid, 404);
    const double p = std::exp(-1.0);
    const double slack = 4.0 * std::sqrt(p * (1.0 - p) / 10000.0);
    cx.require(std::abs(est.mean[0](0, 0) - p) < slack,
               "survival " + num(est.mean[0](0, 0)) + " vs " + num(p));
  }
  {
    const CompartmentalModel sis = build_sis(complete_graph(2), {1.0, 1.0});
    Eigen::ArrayXXd init(2, 2);
    init << 0.0, 1.0, 0.0, 1.0;
    Eigen::VectorXd grid(4);
    grid << 0.25, 0.5, 0.75, 1.0;
    const EnsembleEstimate est = ensemble_estimate(sis, init, 0.0, 1.0, 20000, grid, 405);
    const JointSolution exact = solve_master(sis, init, 0.0, 1.0, 0.25);
    for (int t = 0; t < grid.size(); ++t)
      for (int i = 0; i < 2; ++i)
        for (int c = 0; c < 2; ++c) {
          const double slack = 4.0 * std::max(est.stderr_[t](i, c), 1e-4);
          cx.require(std::abs(est.mean[t](i, c) - exact.marginals[t + 1](i, c)) < slack,
                     "marginal off at t index " + std::to_string(t));
        }
  }
  const double elapsed = seconds_since(start);
  cx.require(elapsed < 60.0, "runtime " + num(elapsed) + " s");
  cx.note("runtime " + num(elapsed) + " s");
  return cx.ok;
}

// ---------------------------------------------------------------------------
// 9. The bundled 100-node SIS experiment: finishes in budget, Monte Carlo
//    graph means inside the combined bounds, max aggregate gap recorded.
bool criterion_9(CheckContext& cx) {
  const auto start = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;
  const fs::path config_path = fs::path(SPREADBOUND_SOURCE_DIR) / "configs" / "sis_n100_subcritical.json";
  cx.require(fs::exists(config_path), "missing bundled config " + config_path.string());
  if (!cx.ok) return false;

  ExperimentConfig config = load_experiment_config(config_path.string());
  const fs::path out = fs::temp_directory_path() / "spreadbound_acceptance_c9";
  fs::remove_all(out);
  RunOptions options;
  options.out_dir = out.string();
  options.quiet = true;
  const ExperimentResult result = run_experiment(config, options);
  cx.require(result.exit_code == 0, "containment failed (exit " +
                                        std::to_string(result.exit_code) + ")");

  double max_gap = 0.0;
  if (result.report["gaps"].contains("combined"))
    for (const auto& [comp, stats] : result.report["gaps"]["combined"].items())
      max_gap = std::max(max_gap, stats["max_gap"].get<double>());
  cx.note("combined max aggregate gap " + num(max_gap));
  fs::remove_all(out);

  const double elapsed = seconds_since(start);
  cx.require(elapsed < 120.0, "runtime " + num(elapsed) + " s");
  cx.note("runtime " + num(elapsed) + " s");
  return cx.ok;
}

// ---------------------------------------------------------------------------
// 10. Integrator order and bitwise determinism.
bool criterion_10(CheckContext& cx) {
  auto decay_error = [](double max_step) {
    RhsSpec rhs;
    rhs.layout = {1, 1, false};
    rhs.kind = "decay";
    rhs.eval = [](const Eigen::VectorXd& y, Eigen::VectorXd& dy) { dy[0] = -0.5 * y[0]; };
    Eigen::ArrayXXd init(1, 1);
    init << 1.0;
    const IntegrationResult res = integrate(rhs, init, 0.0, 2.0, {max_step, 2.0, false}, {"x"});
    return std::abs(res.bundle.at(SeriesRole::Point).back()(0, 0) - std::exp(-1.0));
  };
  const double ratio = decay_error(0.02) / decay_error(0.01);
  cx.require(ratio >= 14.0, "halving ratio " + num(ratio));
  cx.note("halving ratio " + num(ratio));

  const Instance inst = instance_set(CatalogKind::SEIV).front();
  const RhsSpec rhs = generic_bounding_rhs(inst.model);
  const IntegrationResult a =
      integrate(rhs, inst.init, 0.0, 5.0, kBoundPolicy, inst.model.compartments());
  const IntegrationResult b =
      integrate(rhs, inst.init, 0.0, 5.0, kBoundPolicy, inst.model.compartments());
  cx.require(plot_data_string(a.bundle, Aggregation::PerNode) ==
                 plot_data_string(b.bundle, Aggregation::PerNode),
             "repeated runs differ");
  return cx.ok;
}

struct CriterionEntry {
  int id;
  const char* title;
  std::function<bool(CheckContext&)> run;
};

const std::vector<CriterionEntry> kCriteria{
    {1, "fully-internal exactness", criterion_1},
    {2, "generic bounding sandwich", criterion_2},
    {3, "box invariance before clipping", criterion_3},
    {4, "refined dominance and width ordering", criterion_4},
    {5, "refined SIS upper equals mean-field", criterion_5},
    {6, "hand-derived system equivalence and containment", criterion_6},
    {7, "simplex elimination tightens soundly", criterion_7},
    {8, "stochastic simulation exactness", criterion_8},
    {9, "bundled 100-node SIS experiment", criterion_9},
    {10, "integrator order and determinism", criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int k = 1; k < argc; ++k)
    if (std::strcmp(argv[k], "--criterion") == 0 && k + 1 < argc) only = std::atoi(argv[k + 1]);

  int failures = 0;
  for (const auto& criterion : kCriteria) {
    if (only != 0 && criterion.id != only) continue;
    CheckContext cx;
    bool ok = false;
    try {
      ok = criterion.run(cx);
    } catch (const std::exception& e) {
      cx.require(false, std::string("exception: ") + e.what());
    }
    const std::string detail = cx.detail.str();
    std::printf("%s criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion.id, criterion.title,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
