#include "netgame/equilibrium.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "netgame/errors.hpp"

namespace netgame {

SolverOptions solver_options_from_environment() {
  SolverOptions opts;
  if (const char* env = std::getenv("NETGAME_MAX_ITER")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v <= 0) {
      throw InvalidParameters(std::string("NETGAME_MAX_ITER must be a positive integer, got '") +
                              env + "'");
    }
    opts.max_iter = v;
  }
  return opts;
}

const char* to_string(EquilibriumStatus status) {
  switch (status) {
    case EquilibriumStatus::kConverged: return "converged";
    case EquilibriumStatus::kNonExistent: return "non_existent";
    case EquilibriumStatus::kNonConvergent: return "non_convergent";
  }
  return "unknown";
}

EffectiveIncentives effective_incentives(const GameParameters& p, const Intervention& iv) {
  if (iv.n() != p.n()) throw InvalidParameters("intervention size does not match the game");
  return {p.b() + iv.beta(), p.s() + iv.sigma()};
}

namespace {

void action_step(const GameParameters& p, const Vector& incentive, const StrategyProfile& sp,
                 Vector& out) {
  const int n = p.n();
  for (int i = 0; i < n; ++i) {
    double spill = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) spill += (sp.g(i, j) + sp.g(j, i)) * sp.a(j);
    }
    out(i) = std::max(0.0, (incentive(i) + p.rho() * spill) / p.c()(i));
  }
}

void link_step(const GameParameters& p, const Matrix& incentive, const Vector& a, Matrix& out) {
  const int n = p.n();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out(i, j) = i == j ? 0.0
                         : std::max(0.0, (incentive(i, j) + p.rho() * a(i) * a(j)) / p.f()(i, j));
    }
  }
}

double foc_residual(const GameParameters& p, const EffectiveIncentives& inc,
                    const EquilibriumReport& r) {
  const int n = p.n();
  const auto& a = r.profile.a;
  const auto& g = r.profile.g;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double spill = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j != i) spill += (g(i, j) + g(j, i)) * a(j);
    }
    const double marginal = inc.action(i) + p.rho() * spill - p.c()(i) * a(i);
    worst = std::max(worst, r.action_binds(i) ? std::abs(marginal) : std::max(0.0, marginal));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double lm = inc.link(i, j) + p.rho() * a(i) * a(j) - p.f()(i, j) * g(i, j);
      worst = std::max(worst, r.link_binds(i, j) ? std::abs(lm) : std::max(0.0, lm));
    }
  }
  return worst;
}

}  // namespace

Vector best_response_actions(const GameParameters& p, const Intervention& iv,
                             const StrategyProfile& sp) {
  const auto inc = effective_incentives(p, iv);
  Vector out(p.n());
  action_step(p, inc.action, sp, out);
  return out;
}

Matrix best_response_links(const GameParameters& p, const Intervention& iv,
                           const StrategyProfile& sp) {
  const auto inc = effective_incentives(p, iv);
  Matrix out(p.n(), p.n());
  link_step(p, inc.link, sp.a, out);
  return out;
}

EquilibriumReport make_report(StrategyProfile profile, double binding_tol) {
  EquilibriumReport r;
  const int n = profile.n();
  r.action_binds = (profile.a.array() > binding_tol);
  r.link_binds = (profile.g.array() > binding_tol);
  for (int i = 0; i < n; ++i) {
    r.link_binds(i, i) = false;
    if (r.action_binds(i)) r.binding_actions.push_back(i);
    for (int j = 0; j < n; ++j) {
      if (i != j && r.link_binds(i, j)) r.binding_links.emplace_back(i, j);
    }
  }
  r.profile = std::move(profile);
  return r;
}

EquilibriumReport solve_equilibrium(const GameParameters& p, const Intervention& iv,
                                    const SolverOptions& opts) {
  return solve_equilibrium(p, effective_incentives(p, iv), opts);
}

EquilibriumReport solve_equilibrium(const GameParameters& p, const EffectiveIncentives& inc,
                                    const SolverOptions& opts) {
  const int n = p.n();
  StrategyProfile cur = StrategyProfile::zero(n);
  StrategyProfile next = StrategyProfile::zero(n);
  EquilibriumStatus status = EquilibriumStatus::kNonConvergent;
  long iter = 0;
  while (iter < opts.max_iter) {
    ++iter;
    action_step(p, inc.action, cur, next.a);
    link_step(p, inc.link, next.a, next.g);
    if (!next.a.allFinite() || !next.g.allFinite() || next.a.maxCoeff() > opts.action_cap) {
      status = EquilibriumStatus::kNonExistent;
      std::swap(cur, next);
      break;
    }
    const double change = std::max((next.a - cur.a).cwiseAbs().maxCoeff(),
                                    (next.g - cur.g).cwiseAbs().maxCoeff());
    std::swap(cur, next);
    if (opts.observer) opts.observer(iter, cur);
    if (change < opts.tol_fixpoint) {
      status = EquilibriumStatus::kConverged;
      break;
    }
  }
  EquilibriumReport r = make_report(std::move(cur), opts.binding_tol);
  r.status = status;
  r.iterations = iter;
  r.converged = status == EquilibriumStatus::kConverged;
  r.exists = status != EquilibriumStatus::kNonExistent;
  r.foc_residual_max = r.exists ? foc_residual(p, inc, r)
                                : std::numeric_limits<double>::infinity();
  return r;
}

Prop1Residuals verify_proposition1(const GameParameters& p, const Intervention& iv,
                                   const EquilibriumReport& report, double binding_tol) {
  const auto inc = effective_incentives(p, iv);
  const int n = p.n();
  const auto& a = report.profile.a;
  const auto& g = report.profile.g;
  const Matrix G = report.profile.G();
  Prop1Residuals out;

  // Action conditions on the binding set, written over the submatrix G_S.
  const auto& S = report.binding_actions;
  for (int i : S) {
    double lhs = p.c()(i) * a(i);
    for (int j : S) {
      if (j != i) lhs -= p.rho() * G(i, j) * a(j);
    }
    out.action_residual = std::max(out.action_residual, std::abs(lhs - inc.action(i)));
  }
  for (const auto& [i, j] : report.binding_links) {
    const double target = (p.rho() * a(i) * a(j) + inc.link(i, j)) / p.f()(i, j);
    out.link_residual = std::max(out.link_residual, std::abs(g(i, j) - target));
  }
  for (int i = 0; i < n; ++i) {
    if (!report.action_binds(i)) {
      const double marginal = inc.action(i) + p.rho() * G.row(i).dot(a) - p.c()(i) * a(i);
      out.corner_violation = std::max(out.corner_violation, marginal);
    }
    for (int j = 0; j < n; ++j) {
      if (i != j && !report.link_binds(i, j)) {
        const double lm = inc.link(i, j) + p.rho() * a(i) * a(j) - p.f()(i, j) * g(i, j);
        out.corner_violation = std::max(out.corner_violation, lm);
      }
    }
    if (report.action_binds(i) != (a(i) > binding_tol)) out.binding_sets_consistent = false;
    for (int j = 0; j < n; ++j) {
      if (i != j && report.link_binds(i, j) != (g(i, j) > binding_tol)) {
        out.binding_sets_consistent = false;
      }
    }
  }
  return out;
}

}  // namespace netgame
