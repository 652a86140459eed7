#pragma once

#include <map>
#include <string>

#include "spreadbound/bounding.hpp"
#include "spreadbound/model.hpp"

namespace spb {

// The four curated processes. Compartment orders are fixed:
//   SIS      [S, I]          S->I external (affector I), I->S internal
//   SIR      [S, I, R]       S->I external (affector I), I->R internal
//   SI1SI2S  [S, I1, I2]     S->I1, S->I2 external (affectors I1, I2),
//                            I1->S, I2->S internal
//   SEIV     [S, E, I, V]    S->E external with affectors {E, I};
//                            S->V, V->S, E->I, I->V internal
enum class CatalogKind { SIS, SIR, SI1SI2S, SEIV };

const char* catalog_kind_name(CatalogKind kind);
CatalogKind parse_catalog_kind(const std::string& name);

struct SisParams {
  double beta = 0.0;
  double delta = 0.0;
};

struct SirParams {
  double beta = 0.0;
  double delta = 0.0;
};

struct Si1si2sParams {
  double beta1 = 0.0;
  double delta1 = 0.0;
  double beta2 = 0.0;
  double delta2 = 0.0;
};

struct SeivParams {
  double beta_e = 0.0;   // exposed neighbors driving S->E
  double beta_i = 0.0;   // infected neighbors driving S->E
  double delta_sv = 0.0;
  double delta_vs = 0.0;
  double delta_ei = 0.0;
  double delta_iv = 0.0;
};

CompartmentalModel build_sis(const EdgeList& graph, const SisParams& params);
CompartmentalModel build_sir(const EdgeList& graph, const SirParams& params);
CompartmentalModel build_si1si2s(const EdgeList& graph, const Si1si2sParams& params);
CompartmentalModel build_seiv(const EdgeList& graph, const SeivParams& params);

// Homogeneous-rate builder keyed by the per-kind parameter names above
// (e.g. {"beta": .., "delta": ..} for SIS). Unknown or missing names are
// config errors.
CompartmentalModel build_catalog_model(CatalogKind kind, const EdgeList& graph,
                                       const std::map<std::string, double>& rates);

// Covariance signs each kind ships with. SIS and SIR assert nonnegative
// (I, I) and nonpositive (S, I) cross-node covariance; the other kinds make
// no claim.
CorrelationLedger default_ledger(CatalogKind kind, const CompartmentalModel& model);

// Hand-derived approximating systems for the curated processes.
enum class AdhocVariant { Eq10, Eq11, Eq12, Eq13, MfEq14, MfEq15 };

const char* adhoc_variant_name(AdhocVariant variant);
AdhocVariant parse_adhoc_variant(const std::string& name);

struct AdhocOptions {
  // Eq13's lower susceptible equation feeds recoveries through
  // 1 - (upper susceptible); this switches to the tighter
  // 1 - (lower susceptible) form.
  bool eq13_symmetric_gain = false;
};

RhsSpec adhoc_rhs(const CompartmentalModel& model, CatalogKind kind, AdhocVariant variant,
                  const AdhocOptions& options = {});

}  // namespace spb
