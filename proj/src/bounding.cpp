#include "spreadbound/bounding.hpp"

#include <algorithm>
#include <cmath>

namespace spb {

std::pair<double, double> frechet_bounds(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0))
    throw Error(Errc::DomainError, "frechet_bounds arguments must lie in [0,1]");
  return {std::max(0.0, a + b - 1.0), std::min(a, b)};
}

const char* covariance_sign_name(CovarianceSign sign) {
  switch (sign) {
    case CovarianceSign::Unknown: return "unknown";
    case CovarianceSign::Nonnegative: return "nonnegative";
    case CovarianceSign::Nonpositive: return "nonpositive";
  }
  return "?";
}

CovarianceSign CorrelationLedger::sign(int a, int b) const {
  if (comps_ == 0) return CovarianceSign::Unknown;
  return signs_[a * comps_ + b];
}

void CorrelationLedger::set(int a, int b, CovarianceSign sign) {
  signs_[a * comps_ + b] = sign;
  signs_[b * comps_ + a] = sign;
}

bool CorrelationLedger::empty() const {
  return std::all_of(signs_.begin(), signs_.end(),
                     [](CovarianceSign s) { return s == CovarianceSign::Unknown; });
}

nlohmann::json CorrelationLedger::to_json(const std::vector<std::string>& names) const {
  nlohmann::json nonneg = nlohmann::json::array();
  nlohmann::json nonpos = nlohmann::json::array();
  for (int a = 0; a < comps_; ++a)
    for (int b = a; b < comps_; ++b) {
      const CovarianceSign s = sign(a, b);
      if (s == CovarianceSign::Nonnegative) nonneg.push_back({names[a], names[b]});
      if (s == CovarianceSign::Nonpositive) nonpos.push_back({names[a], names[b]});
    }
  return {{"nonnegative", nonneg}, {"nonpositive", nonpos}};
}

namespace {

enum class JointForm { Frechet, Product };

struct ExtTerm {
  int partner;   // source compartment for gains, destination for losses
  int affector;
  const RowSparse* beta;
  JointForm upper_form = JointForm::Frechet;
  JointForm lower_form = JointForm::Frechet;
};

struct IntTerm {
  int partner;
  const Eigen::VectorXd* delta;
};

// Per equation compartment c: the gain terms (transitions c' -> c) and loss
// terms (c -> c'), each sorted ascending by (c', affector) so accumulation
// order is fixed.
struct CompartmentTerms {
  std::vector<ExtTerm> ext_gain;
  std::vector<ExtTerm> ext_loss;
  std::vector<IntTerm> int_gain;
  std::vector<IntTerm> int_loss;
};

std::vector<CompartmentTerms> prepare_terms(const CompartmentalModel& model) {
  std::vector<CompartmentTerms> terms(model.compartment_count());
  for (const auto& e : model.external_transitions())
    for (std::size_t k = 0; k < e.affectors.size(); ++k) {
      terms[e.to].ext_gain.push_back({e.from, e.affectors[k], &e.beta[k]});
      terms[e.from].ext_loss.push_back({e.to, e.affectors[k], &e.beta[k]});
    }
  for (const auto& t : model.internal_transitions()) {
    terms[t.to].int_gain.push_back({t.from, &t.delta});
    terms[t.from].int_loss.push_back({t.to, &t.delta});
  }
  auto by_pair = [](const auto& a, const auto& b) {
    return std::pair(a.partner, a.affector) < std::pair(b.partner, b.affector);
  };
  auto by_partner = [](const auto& a, const auto& b) { return a.partner < b.partner; };
  for (auto& t : terms) {
    std::sort(t.ext_gain.begin(), t.ext_gain.end(), by_pair);
    std::sort(t.ext_loss.begin(), t.ext_loss.end(), by_pair);
    std::sort(t.int_gain.begin(), t.int_gain.end(), by_partner);
    std::sort(t.int_loss.begin(), t.int_loss.end(), by_partner);
  }
  return terms;
}

// Marks the joint terms the ledger lets us replace with products. A joint
// needed from below (loss in the upper equation, gain in the lower one)
// takes the product under nonnegative covariance; a joint needed from above
// takes it under nonpositive covariance.
void license_products(std::vector<CompartmentTerms>& terms, const CorrelationLedger& ledger) {
  for (int c = 0; c < static_cast<int>(terms.size()); ++c) {
    for (auto& t : terms[c].ext_gain) {
      if (ledger.sign(t.partner, t.affector) == CovarianceSign::Nonpositive)
        t.upper_form = JointForm::Product;
      if (ledger.sign(t.partner, t.affector) == CovarianceSign::Nonnegative)
        t.lower_form = JointForm::Product;
    }
    for (auto& t : terms[c].ext_loss) {
      if (ledger.sign(c, t.affector) == CovarianceSign::Nonnegative)
        t.upper_form = JointForm::Product;
      if (ledger.sign(c, t.affector) == CovarianceSign::Nonpositive)
        t.lower_form = JointForm::Product;
    }
  }
}

// Paired upper/lower right-hand side. In the (i, c) equations the own
// coordinate appears as itself; every other coordinate enters through its
// tracked upper or lower, whichever direction the term needs. Accumulation
// runs external gains, external losses, internal gains, internal losses,
// each ascending in (c', affector, j), so outputs are bit-reproducible.
void eval_paired(const std::vector<CompartmentTerms>& terms, const StateLayout& layout,
                 bool complement_own_gain, const Eigen::VectorXd& state, Eigen::VectorXd& deriv) {
  deriv.setZero();
  const auto up = layout.upper(state);
  const auto lo = layout.lower(state);
  auto dup = layout.upper(deriv);
  auto dlo = layout.lower(deriv);
  const int n = layout.nodes;
  for (int c = 0; c < layout.comps; ++c) {
    for (const auto& t : terms[c].ext_gain) {
      for (int i = 0; i < n; ++i) {
        const double own_up = complement_own_gain ? 1.0 - up(i, c) : up(i, t.partner);
        const double own_lo = lo(i, t.partner);
        for (RowSparse::InnerIterator it(*t.beta, i); it; ++it) {
          const auto j = it.col();
          const double b = it.value();
          dup(i, c) += b * (t.upper_form == JointForm::Product
                                ? own_up * up(j, t.affector)
                                : std::min(own_up, up(j, t.affector)));
          dlo(i, c) += b * (t.lower_form == JointForm::Product
                                ? own_lo * lo(j, t.affector)
                                : std::max(0.0, own_lo + lo(j, t.affector) - 1.0));
        }
      }
    }
    for (const auto& t : terms[c].ext_loss) {
      for (int i = 0; i < n; ++i) {
        for (RowSparse::InnerIterator it(*t.beta, i); it; ++it) {
          const auto j = it.col();
          const double b = it.value();
          dup(i, c) -= b * (t.upper_form == JointForm::Product
                                ? up(i, c) * lo(j, t.affector)
                                : std::max(0.0, up(i, c) + lo(j, t.affector) - 1.0));
          dlo(i, c) -= b * (t.lower_form == JointForm::Product
                                ? lo(i, c) * up(j, t.affector)
                                : std::min(lo(i, c), up(j, t.affector)));
        }
      }
    }
    for (const auto& t : terms[c].int_gain)
      for (int i = 0; i < n; ++i) {
        const double d = (*t.delta)[i];
        dup(i, c) += (complement_own_gain ? 1.0 - up(i, c) : up(i, t.partner)) * d;
        dlo(i, c) += lo(i, t.partner) * d;
      }
    for (const auto& t : terms[c].int_loss)
      for (int i = 0; i < n; ++i) {
        const double d = (*t.delta)[i];
        dup(i, c) -= up(i, c) * d;
        dlo(i, c) -= lo(i, c) * d;
      }
  }
}

void eval_point(const std::vector<CompartmentTerms>& terms, const StateLayout& layout,
                const Eigen::VectorXd& state, Eigen::VectorXd& deriv) {
  deriv.setZero();
  const auto p = layout.point(state);
  auto dp = layout.point(deriv);
  const int n = layout.nodes;
  for (int c = 0; c < layout.comps; ++c) {
    for (const auto& t : terms[c].ext_gain)
      for (int i = 0; i < n; ++i)
        for (RowSparse::InnerIterator it(*t.beta, i); it; ++it)
          dp(i, c) += it.value() * p(i, t.partner) * p(it.col(), t.affector);
    for (const auto& t : terms[c].ext_loss)
      for (int i = 0; i < n; ++i)
        for (RowSparse::InnerIterator it(*t.beta, i); it; ++it)
          dp(i, c) -= it.value() * p(i, c) * p(it.col(), t.affector);
    for (const auto& t : terms[c].int_gain)
      for (int i = 0; i < n; ++i) dp(i, c) += p(i, t.partner) * (*t.delta)[i];
    for (const auto& t : terms[c].int_loss)
      for (int i = 0; i < n; ++i) dp(i, c) -= p(i, c) * (*t.delta)[i];
  }
}

RhsSpec make_paired_spec(const CompartmentalModel& model, std::vector<CompartmentTerms> terms,
                         std::string kind, const BoundingOptions& opts) {
  RhsSpec spec;
  spec.layout = {model.node_count(), model.compartment_count(), true};
  spec.kind = std::move(kind);
  spec.lipschitz = lipschitz_constant(model);
  spec.metadata["complement_own_gain"] = opts.complement_own_gain;
  spec.eval = [terms = std::move(terms), layout = spec.layout,
               complement = opts.complement_own_gain](const Eigen::VectorXd& state,
                                                      Eigen::VectorXd& deriv) {
    eval_paired(terms, layout, complement, state, deriv);
  };
  return spec;
}

}  // namespace

RhsSpec generic_bounding_rhs(const CompartmentalModel& model, const BoundingOptions& opts) {
  return make_paired_spec(model, prepare_terms(model), "generic", opts);
}

RhsSpec refined_bounding_rhs(const CompartmentalModel& model, const CorrelationLedger& ledger,
                             const BoundingOptions& opts) {
  auto terms = prepare_terms(model);
  license_products(terms, ledger);
  RhsSpec spec = make_paired_spec(model, std::move(terms), "refined", opts);
  spec.metadata["ledger"] = ledger.to_json(model.compartments());
  return spec;
}

RhsSpec mean_field_rhs(const CompartmentalModel& model) {
  RhsSpec spec;
  spec.layout = {model.node_count(), model.compartment_count(), false};
  spec.kind = "mean_field";
  spec.lipschitz = lipschitz_constant(model);
  spec.eval = [terms = prepare_terms(model), layout = spec.layout](const Eigen::VectorXd& state,
                                                                   Eigen::VectorXd& deriv) {
    eval_point(terms, layout, state, deriv);
  };
  return spec;
}

TrajectoryBundle eliminate_impossible(const TrajectoryBundle& bundle) {
  if (!bundle.has(SeriesRole::Upper) || !bundle.has(SeriesRole::Lower))
    throw Error(Errc::MissingSeries, "elimination needs paired upper/lower series");

  TrajectoryBundle out = bundle;
  out.aggregate.clear();
  auto& uppers = out.series[SeriesRole::Upper];
  auto& lowers = out.series[SeriesRole::Lower];
  const int comps = bundle.comps();
  for (int t = 0; t < bundle.grid.size(); ++t) {
    const Eigen::ArrayXXd up = uppers[t];
    const Eigen::ArrayXXd lo = lowers[t];
    const Eigen::ArrayXd up_sum = up.rowwise().sum();
    const Eigen::ArrayXd lo_sum = lo.rowwise().sum();
    for (int c = 0; c < comps; ++c) {
      lowers[t].col(c) = lo.col(c).max((1.0 - (up_sum - up.col(c))).max(0.0));
      uppers[t].col(c) = up.col(c).min((1.0 - (lo_sum - lo.col(c))).min(1.0));
    }
  }
  out.metadata["eliminated"] = true;
  return out;
}

TrajectoryBundle combine_bounds(const std::vector<TrajectoryBundle>& bundles) {
  if (bundles.empty()) throw Error(Errc::MissingSeries, "nothing to combine");
  const TrajectoryBundle& first = bundles.front();
  TrajectoryBundle out;
  out.grid = first.grid;
  out.nodes = first.nodes;
  out.compartments = first.compartments;
  out.series[SeriesRole::Upper] = first.at(SeriesRole::Upper);
  out.series[SeriesRole::Lower] = first.at(SeriesRole::Lower);

  nlohmann::json sources = nlohmann::json::array();
  for (const auto& b : bundles)
    sources.push_back(b.metadata.value("builder", std::string("?")));

  for (std::size_t k = 1; k < bundles.size(); ++k) {
    const TrajectoryBundle& b = bundles[k];
    if (!same_grid(b.grid, out.grid) || b.nodes != out.nodes ||
        b.compartments != out.compartments)
      throw Error(Errc::GridMismatch, "combine_bounds inputs disagree on grid or shape");
    const auto& up = b.at(SeriesRole::Upper);
    const auto& lo = b.at(SeriesRole::Lower);
    for (int t = 0; t < out.grid.size(); ++t) {
      out.series[SeriesRole::Upper][t] = out.series[SeriesRole::Upper][t].min(up[t]);
      out.series[SeriesRole::Lower][t] = out.series[SeriesRole::Lower][t].max(lo[t]);
    }
  }
  out.metadata["builder"] = "combined";
  out.metadata["combined_from"] = sources;
  return out;
}

}  // namespace spb
