#include "spreadbound/ode.hpp"

#include <cmath>

namespace spb {

namespace ode_detail {

int substeps_per_cell(double grid_step, double step_cap) {
  if (step_cap <= 0.0) throw Error(Errc::GridInvalid, "step cap must be positive");
  // Tiny slack so that grid_step == k * step_cap does not round up to k + 1.
  return std::max(1, static_cast<int>(std::ceil(grid_step / step_cap - 1e-9)));
}

}  // namespace ode_detail

double lipschitz_constant(const CompartmentalModel& model) {
  const int n = model.node_count();
  const int comps = model.compartment_count();
  // Inbound and outbound rate budgets per (node, compartment).
  Eigen::ArrayXXd inbound = Eigen::ArrayXXd::Zero(n, comps);
  Eigen::ArrayXXd outbound = Eigen::ArrayXXd::Zero(n, comps);
  for (const auto& t : model.internal_transitions()) {
    inbound.col(t.to) += t.delta.array();
    outbound.col(t.from) += t.delta.array();
  }
  for (const auto& e : model.external_transitions())
    for (const auto& beta : e.beta)
      for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (RowSparse::InnerIterator it(beta, i); it; ++it) row += it.value();
        inbound(i, e.to) += row;
        outbound(i, e.from) += row;
      }
  const Eigen::ArrayXXd budget = inbound + outbound;
  return budget.size() == 0 ? 0.0 : budget.maxCoeff();
}

IntegrationResult integrate(const RhsSpec& rhs, const Eigen::ArrayXXd& init, double t0,
                            double horizon, const IntegrationPolicy& policy,
                            const std::vector<std::string>& compartments) {
  const StateLayout& layout = rhs.layout;
  if (init.rows() != layout.nodes || init.cols() != layout.comps)
    throw Error(Errc::GridInvalid, "initial condition shape does not match the system");
  if (!(horizon > t0)) throw Error(Errc::GridInvalid, "horizon must exceed t0");
  if (!(policy.grid_step > 0.0)) throw Error(Errc::GridInvalid, "grid step must be positive");

  double cap = policy.max_step;
  if (rhs.lipschitz > 0.0) cap = std::min(cap, 0.1 / rhs.lipschitz);
  const int substeps = ode_detail::substeps_per_cell(policy.grid_step, cap);
  const double h = policy.grid_step / substeps;
  const int cells = static_cast<int>(std::floor((horizon - t0) / policy.grid_step + 1e-9));
  if (cells < 1) throw Error(Errc::GridInvalid, "horizon shorter than one grid step");

  Eigen::VectorXd y(layout.dim());
  {
    auto u = layout.upper(y);
    u = init;
    if (layout.paired) {
      auto l = layout.lower(y);
      l = init;
    }
  }
  if (rhs.algebraic_fixup) rhs.algebraic_fixup(y);

  IntegrationResult result;
  result.step_used = h;
  result.preclip_min = y.minCoeff();
  result.preclip_max = y.maxCoeff();

  TrajectoryBundle& bundle = result.bundle;
  bundle.grid.resize(cells + 1);
  bundle.nodes = layout.nodes;
  bundle.compartments = compartments;
  auto& frames_hi = bundle.series[layout.paired ? SeriesRole::Upper : SeriesRole::Point];
  std::vector<Eigen::ArrayXXd>* frames_lo =
      layout.paired ? &bundle.series[SeriesRole::Lower] : nullptr;
  frames_hi.reserve(cells + 1);
  if (frames_lo) frames_lo->reserve(cells + 1);

  auto record = [&](int cell) {
    bundle.grid[cell] = t0 + cell * policy.grid_step;
    frames_hi.emplace_back(layout.upper(y));
    if (frames_lo) frames_lo->emplace_back(layout.lower(y));
  };
  record(0);

  Eigen::VectorXd k1(layout.dim()), k2(layout.dim()), k3(layout.dim()), k4(layout.dim()),
      scratch(layout.dim());
  for (int cell = 1; cell <= cells; ++cell) {
    for (int sub = 0; sub < substeps; ++sub) {
      ode_detail::rk4_step(rhs.eval, y, h, k1, k2, k3, k4, scratch);
      if (!y.allFinite())
        throw Error(Errc::NonFiniteDerivative,
                    "non-finite state while integrating " + rhs.kind);
      if (rhs.algebraic_fixup) rhs.algebraic_fixup(y);
      result.preclip_min = std::min(result.preclip_min, y.minCoeff());
      result.preclip_max = std::max(result.preclip_max, y.maxCoeff());
      if (policy.clip) {
        auto u = layout.upper(y);
        u = u.min(1.0).max(0.0);
        if (layout.paired) {
          auto l = layout.lower(y);
          l = l.min(1.0).max(0.0);
          l = l.min(u);
        }
      }
    }
    record(cell);
  }

  bundle.metadata["builder"] = rhs.kind;
  bundle.metadata["integrator"] = {{"method", "rk4"},
                                   {"step", h},
                                   {"grid_step", policy.grid_step},
                                   {"clip", policy.clip},
                                   {"lipschitz", rhs.lipschitz}};
  if (!rhs.metadata.empty())
    bundle.metadata["system"] = rhs.metadata;
  return result;
}

}  // namespace spb
