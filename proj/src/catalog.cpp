#include "spreadbound/catalog.hpp"

#include <algorithm>
#include <optional>

namespace spb {

const char* catalog_kind_name(CatalogKind kind) {
  switch (kind) {
    case CatalogKind::SIS: return "SIS";
    case CatalogKind::SIR: return "SIR";
    case CatalogKind::SI1SI2S: return "SI1SI2S";
    case CatalogKind::SEIV: return "SEIV";
  }
  return "?";
}

CatalogKind parse_catalog_kind(const std::string& name) {
  if (name == "SIS") return CatalogKind::SIS;
  if (name == "SIR") return CatalogKind::SIR;
  if (name == "SI1SI2S") return CatalogKind::SI1SI2S;
  if (name == "SEIV") return CatalogKind::SEIV;
  throw Error(Errc::ConfigError, "unknown catalog kind: " + name);
}

const char* adhoc_variant_name(AdhocVariant variant) {
  switch (variant) {
    case AdhocVariant::Eq10: return "eq10";
    case AdhocVariant::Eq11: return "eq11";
    case AdhocVariant::Eq12: return "eq12";
    case AdhocVariant::Eq13: return "eq13";
    case AdhocVariant::MfEq14: return "mf_eq14";
    case AdhocVariant::MfEq15: return "mf_eq15";
  }
  return "?";
}

AdhocVariant parse_adhoc_variant(const std::string& name) {
  if (name == "eq10") return AdhocVariant::Eq10;
  if (name == "eq11") return AdhocVariant::Eq11;
  if (name == "eq12") return AdhocVariant::Eq12;
  if (name == "eq13") return AdhocVariant::Eq13;
  if (name == "mf_eq14") return AdhocVariant::MfEq14;
  if (name == "mf_eq15") return AdhocVariant::MfEq15;
  throw Error(Errc::UnknownVariant, "unknown system variant: " + name);
}

CompartmentalModel build_sis(const EdgeList& graph, const SisParams& params) {
  ModelBuilder b({"S", "I"}, graph.nodes);
  b.external_transition(0, 1, {1});
  b.external_rates_on_edges(0, 1, 1, graph, params.beta);
  b.internal_rate(ModelBuilder::kAllNodes, 1, 0, params.delta);
  b.graph_metadata(graph);
  return b.build();
}

CompartmentalModel build_sir(const EdgeList& graph, const SirParams& params) {
  ModelBuilder b({"S", "I", "R"}, graph.nodes);
  b.external_transition(0, 1, {1});
  b.external_rates_on_edges(0, 1, 1, graph, params.beta);
  b.internal_rate(ModelBuilder::kAllNodes, 1, 2, params.delta);
  b.graph_metadata(graph);
  return b.build();
}

CompartmentalModel build_si1si2s(const EdgeList& graph, const Si1si2sParams& params) {
  ModelBuilder b({"S", "I1", "I2"}, graph.nodes);
  b.external_transition(0, 1, {1});
  b.external_rates_on_edges(0, 1, 1, graph, params.beta1);
  b.external_transition(0, 2, {2});
  b.external_rates_on_edges(0, 2, 2, graph, params.beta2);
  b.internal_rate(ModelBuilder::kAllNodes, 1, 0, params.delta1);
  b.internal_rate(ModelBuilder::kAllNodes, 2, 0, params.delta2);
  b.graph_metadata(graph);
  return b.build();
}

CompartmentalModel build_seiv(const EdgeList& graph, const SeivParams& params) {
  ModelBuilder b({"S", "E", "I", "V"}, graph.nodes);
  b.external_transition(0, 1, {1, 2});  // S -> E driven by exposed and infected neighbors
  b.external_rates_on_edges(0, 1, 1, graph, params.beta_e);
  b.external_rates_on_edges(0, 1, 2, graph, params.beta_i);
  b.internal_rate(ModelBuilder::kAllNodes, 0, 3, params.delta_sv);
  b.internal_rate(ModelBuilder::kAllNodes, 3, 0, params.delta_vs);
  b.internal_rate(ModelBuilder::kAllNodes, 1, 2, params.delta_ei);
  b.internal_rate(ModelBuilder::kAllNodes, 2, 3, params.delta_iv);
  b.graph_metadata(graph);
  return b.build();
}

namespace {

double take_rate(const std::map<std::string, double>& rates, const char* name,
                 std::vector<std::string>& unused) {
  auto it = rates.find(name);
  if (it == rates.end()) throw Error(Errc::ConfigError, std::string("missing rate: ") + name);
  unused.erase(std::remove(unused.begin(), unused.end(), name), unused.end());
  return it->second;
}

}  // namespace

CompartmentalModel build_catalog_model(CatalogKind kind, const EdgeList& graph,
                                       const std::map<std::string, double>& rates) {
  std::vector<std::string> unused;
  for (const auto& [name, value] : rates) {
    (void)value;
    unused.push_back(name);
  }
  std::optional<CompartmentalModel> model;
  switch (kind) {
    case CatalogKind::SIS:
      model = build_sis(graph, {take_rate(rates, "beta", unused), take_rate(rates, "delta", unused)});
      break;
    case CatalogKind::SIR:
      model = build_sir(graph, {take_rate(rates, "beta", unused), take_rate(rates, "delta", unused)});
      break;
    case CatalogKind::SI1SI2S:
      model = build_si1si2s(graph, {take_rate(rates, "beta1", unused), take_rate(rates, "delta1", unused),
                                    take_rate(rates, "beta2", unused), take_rate(rates, "delta2", unused)});
      break;
    case CatalogKind::SEIV:
      model = build_seiv(graph, {take_rate(rates, "beta_e", unused), take_rate(rates, "beta_i", unused),
                                 take_rate(rates, "delta_sv", unused), take_rate(rates, "delta_vs", unused),
                                 take_rate(rates, "delta_ei", unused), take_rate(rates, "delta_iv", unused)});
      break;
  }
  if (!unused.empty())
    throw Error(Errc::ConfigError, "unknown rate parameter: " + unused.front());
  return *model;
}

CorrelationLedger default_ledger(CatalogKind kind, const CompartmentalModel& model) {
  CorrelationLedger ledger(model.compartment_count());
  if (kind == CatalogKind::SIS || kind == CatalogKind::SIR) {
    const int s = model.compartment_index("S");
    const int i = model.compartment_index("I");
    ledger.set(i, i, CovarianceSign::Nonnegative);
    ledger.set(s, i, CovarianceSign::Nonpositive);
  }
  return ledger;
}

namespace {

void require_kind(CatalogKind kind, CatalogKind expected, AdhocVariant variant) {
  if (kind != expected)
    throw Error(Errc::UnknownVariant, std::string(adhoc_variant_name(variant)) +
                                          " is not defined for " + catalog_kind_name(kind));
}

const RowSparse& single_external_beta(const CompartmentalModel& model) {
  return model.external_transitions().front().beta.front();
}

const Eigen::VectorXd& single_internal_delta(const CompartmentalModel& model) {
  return model.internal_transitions().front().delta;
}

RhsSpec paired_spec(const CompartmentalModel& model, std::string kind) {
  RhsSpec spec;
  spec.layout = {model.node_count(), model.compartment_count(), true};
  spec.kind = std::move(kind);
  spec.lipschitz = lipschitz_constant(model);
  return spec;
}

RhsSpec point_spec(const CompartmentalModel& model, std::string kind) {
  RhsSpec spec;
  spec.layout = {model.node_count(), model.compartment_count(), false};
  spec.kind = std::move(kind);
  spec.lipschitz = lipschitz_constant(model);
  return spec;
}

// SIR paired system: upper/lower susceptible via Frechet and product forms,
// upper infected through the product closure, removals internal.
RhsSpec sir_eq10(const CompartmentalModel& model) {
  RhsSpec spec = paired_spec(model, "adhoc:eq10");
  const int S = 0, I = 1, R = 2;
  spec.eval = [&model, layout = spec.layout](const Eigen::VectorXd& state, Eigen::VectorXd& deriv) {
    deriv.setZero();
    const auto up = layout.upper(state);
    const auto lo = layout.lower(state);
    auto dup = layout.upper(deriv);
    auto dlo = layout.lower(deriv);
    const RowSparse& beta = single_external_beta(model);
    const Eigen::VectorXd& delta = single_internal_delta(model);
    for (int i = 0; i < layout.nodes; ++i) {
      for (RowSparse::InnerIterator it(beta, i); it; ++it) {
        const auto j = it.col();
        const double b = it.value();
        dup(i, S) -= b * std::max(0.0, up(i, S) + lo(j, I) - 1.0);
        dlo(i, S) -= b * lo(i, S) * up(j, I);
        dup(i, I) += b * (1.0 - up(i, I)) * up(j, I);
        dlo(i, I) += b * std::max(0.0, lo(i, S) + lo(j, I) - 1.0);
      }
      dup(i, I) -= up(i, I) * delta[i];
      dlo(i, I) -= lo(i, I) * delta[i];
      dup(i, R) += (1.0 - up(i, R)) * delta[i];
      dlo(i, R) += lo(i, I) * delta[i];
    }
  };
  return spec;
}

// SIS paired system over both compartments.
RhsSpec sis_eq11(const CompartmentalModel& model) {
  RhsSpec spec = paired_spec(model, "adhoc:eq11");
  const int S = 0, I = 1;
  spec.eval = [&model, layout = spec.layout](const Eigen::VectorXd& state, Eigen::VectorXd& deriv) {
    deriv.setZero();
    const auto up = layout.upper(state);
    const auto lo = layout.lower(state);
    auto dup = layout.upper(deriv);
    auto dlo = layout.lower(deriv);
    const RowSparse& beta = single_external_beta(model);
    const Eigen::VectorXd& delta = single_internal_delta(model);
    for (int i = 0; i < layout.nodes; ++i) {
      for (RowSparse::InnerIterator it(beta, i); it; ++it) {
        const auto j = it.col();
        const double b = it.value();
        dup(i, I) += b * (1.0 - up(i, I)) * up(j, I);
        dlo(i, I) += b * std::max(0.0, lo(i, S) + lo(j, I) - 1.0);
        dup(i, S) -= b * std::max(0.0, up(i, S) + lo(j, I) - 1.0);
        dlo(i, S) -= b * lo(i, S) * up(j, I);
      }
      dup(i, I) -= up(i, I) * delta[i];
      dlo(i, I) -= lo(i, I) * delta[i];
      // Recoveries feed both susceptible estimates through 1 - (upper S).
      dup(i, S) += (1.0 - up(i, S)) * delta[i];
      dlo(i, S) += (1.0 - up(i, S)) * delta[i];
    }
  };
  return spec;
}

// SIS reduced system: infection pair integrated, susceptible series defined
// by the complements.
RhsSpec sis_eq12(const CompartmentalModel& model) {
  RhsSpec spec = paired_spec(model, "adhoc:eq12");
  const int S = 0, I = 1;
  spec.eval = [&model, layout = spec.layout](const Eigen::VectorXd& state, Eigen::VectorXd& deriv) {
    deriv.setZero();
    const auto up = layout.upper(state);
    const auto lo = layout.lower(state);
    auto dup = layout.upper(deriv);
    auto dlo = layout.lower(deriv);
    const RowSparse& beta = single_external_beta(model);
    const Eigen::VectorXd& delta = single_internal_delta(model);
    for (int i = 0; i < layout.nodes; ++i) {
      for (RowSparse::InnerIterator it(beta, i); it; ++it) {
        const auto j = it.col();
        const double b = it.value();
        dup(i, I) += b * (1.0 - up(i, I)) * up(j, I);
        dlo(i, I) += b * std::max(0.0, lo(j, I) - lo(i, I));
      }
      dup(i, I) -= up(i, I) * delta[i];
      dlo(i, I) -= lo(i, I) * delta[i];
    }
  };
  spec.algebraic_fixup = [layout = spec.layout, S, I](Eigen::VectorXd& state) {
    auto up = layout.upper(state);
    auto lo = layout.lower(state);
    up.col(S) = 1.0 - lo.col(I);
    lo.col(S) = 1.0 - up.col(I);
  };
  return spec;
}

// SIS reduced system over the susceptible pair, infection series by
// complement. The recovery feed of the lower equation uses 1 - (upper S);
// `symmetric_gain` switches it to 1 - (lower S).
RhsSpec sis_eq13(const CompartmentalModel& model, bool symmetric_gain) {
  RhsSpec spec = paired_spec(model, "adhoc:eq13");
  spec.metadata["symmetric_gain"] = symmetric_gain;
  const int S = 0, I = 1;
  spec.eval = [&model, layout = spec.layout, symmetric_gain](const Eigen::VectorXd& state,
                                                             Eigen::VectorXd& deriv) {
    deriv.setZero();
    const auto up = layout.upper(state);
    const auto lo = layout.lower(state);
    auto dup = layout.upper(deriv);
    auto dlo = layout.lower(deriv);
    const RowSparse& beta = single_external_beta(model);
    const Eigen::VectorXd& delta = single_internal_delta(model);
    for (int i = 0; i < layout.nodes; ++i) {
      for (RowSparse::InnerIterator it(beta, i); it; ++it) {
        const auto j = it.col();
        const double b = it.value();
        dup(i, S) -= b * std::max(0.0, up(i, S) - up(j, S));
        dlo(i, S) -= b * lo(i, S) * (1.0 - lo(j, S));
      }
      dup(i, S) += (1.0 - up(i, S)) * delta[i];
      dlo(i, S) += (1.0 - (symmetric_gain ? lo(i, S) : up(i, S))) * delta[i];
    }
  };
  spec.algebraic_fixup = [layout = spec.layout, S, I](Eigen::VectorXd& state) {
    auto up = layout.upper(state);
    auto lo = layout.lower(state);
    up.col(I) = 1.0 - lo.col(S);
    lo.col(I) = 1.0 - up.col(S);
  };
  return spec;
}

// Competing-infection mean field, susceptible tracked as the simplex
// complement.
RhsSpec si1si2s_mf(const CompartmentalModel& model) {
  RhsSpec spec = point_spec(model, "adhoc:mf_eq14");
  const int S = 0, I1 = 1, I2 = 2;
  spec.eval = [&model, layout = spec.layout](const Eigen::VectorXd& state, Eigen::VectorXd& deriv) {
    deriv.setZero();
    const auto p = layout.point(state);
    auto dp = layout.point(deriv);
    const auto& ext = model.external_transitions();
    const RowSparse& beta1 = ext[0].beta.front();  // S -> I1
    const RowSparse& beta2 = ext[1].beta.front();  // S -> I2
    const Eigen::VectorXd& delta1 = model.internal_transitions()[0].delta;  // I1 -> S
    const Eigen::VectorXd& delta2 = model.internal_transitions()[1].delta;  // I2 -> S
    for (int i = 0; i < layout.nodes; ++i) {
      const double s_i = 1.0 - p(i, I1) - p(i, I2);
      double press1 = 0.0, press2 = 0.0;
      for (RowSparse::InnerIterator it(beta1, i); it; ++it) press1 += it.value() * p(it.col(), I1);
      for (RowSparse::InnerIterator it(beta2, i); it; ++it) press2 += it.value() * p(it.col(), I2);
      dp(i, I1) = s_i * press1 - delta1[i] * p(i, I1);
      dp(i, I2) = s_i * press2 - delta2[i] * p(i, I2);
    }
  };
  spec.algebraic_fixup = [layout = spec.layout, S, I1, I2](Eigen::VectorXd& state) {
    auto p = layout.point(state);
    p.col(S) = 1.0 - p.col(I1) - p.col(I2);
  };
  return spec;
}

// SEIV mean field, susceptible tracked as the simplex complement.
RhsSpec seiv_mf(const CompartmentalModel& model) {
  RhsSpec spec = point_spec(model, "adhoc:mf_eq15");
  const int S = 0, E = 1, I = 2, V = 3;
  spec.eval = [&model, layout = spec.layout](const Eigen::VectorXd& state, Eigen::VectorXd& deriv) {
    deriv.setZero();
    const auto p = layout.point(state);
    auto dp = layout.point(deriv);
    const auto& ext = model.external_transitions().front();
    const RowSparse& beta_e = ext.beta[0];  // affector E
    const RowSparse& beta_i = ext.beta[1];  // affector I
    auto delta = [&model](int from, int to) {
      for (const auto& t : model.internal_transitions())
        if (t.from == from && t.to == to) return &t.delta;
      return static_cast<const Eigen::VectorXd*>(nullptr);
    };
    const Eigen::VectorXd& d_sv = *delta(S, V);
    const Eigen::VectorXd& d_vs = *delta(V, S);
    const Eigen::VectorXd& d_ei = *delta(E, I);
    const Eigen::VectorXd& d_iv = *delta(I, V);
    for (int i = 0; i < layout.nodes; ++i) {
      const double s_i = 1.0 - p(i, E) - p(i, I) - p(i, V);
      double pressure = 0.0;
      for (RowSparse::InnerIterator it(beta_e, i); it; ++it) pressure += it.value() * p(it.col(), E);
      for (RowSparse::InnerIterator it(beta_i, i); it; ++it) pressure += it.value() * p(it.col(), I);
      dp(i, E) = s_i * pressure - p(i, E) * d_ei[i];
      dp(i, I) = d_ei[i] * p(i, E) - d_iv[i] * p(i, I);
      dp(i, V) = d_iv[i] * p(i, I) + d_sv[i] * s_i - d_vs[i] * p(i, V);
    }
  };
  spec.algebraic_fixup = [layout = spec.layout, S, E, I, V](Eigen::VectorXd& state) {
    auto p = layout.point(state);
    p.col(S) = 1.0 - p.col(E) - p.col(I) - p.col(V);
  };
  return spec;
}

}  // namespace

RhsSpec adhoc_rhs(const CompartmentalModel& model, CatalogKind kind, AdhocVariant variant,
                  const AdhocOptions& options) {
  switch (variant) {
    case AdhocVariant::Eq10:
      require_kind(kind, CatalogKind::SIR, variant);
      return sir_eq10(model);
    case AdhocVariant::Eq11:
      require_kind(kind, CatalogKind::SIS, variant);
      return sis_eq11(model);
    case AdhocVariant::Eq12:
      require_kind(kind, CatalogKind::SIS, variant);
      return sis_eq12(model);
    case AdhocVariant::Eq13:
      require_kind(kind, CatalogKind::SIS, variant);
      return sis_eq13(model, options.eq13_symmetric_gain);
    case AdhocVariant::MfEq14:
      require_kind(kind, CatalogKind::SI1SI2S, variant);
      return si1si2s_mf(model);
    case AdhocVariant::MfEq15:
      require_kind(kind, CatalogKind::SEIV, variant);
      return seiv_mf(model);
  }
  throw Error(Errc::UnknownVariant, "unhandled variant");
}

}  // namespace spb
