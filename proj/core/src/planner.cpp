#include "netgame/planner.hpp"

#include <algorithm>
#include <cmath>

#include "netgame/errors.hpp"
#include "netgame/sensitivity.hpp"

namespace netgame {

EndogenousPlannerProblem::EndogenousPlannerProblem(GameParameters p, WelfareSpec w,
                                                   SolverOptions opts)
    : p_(std::move(p)), w_(std::move(w)), opts_(std::move(opts)) {
  if (w_.kind() == WelfareSpec::Kind::kWeightedActionSum && w_.weights().size() != p_.n()) {
    throw InvalidParameters("welfare weights do not match the number of agents");
  }
}

PlannerEvaluation EndogenousPlannerProblem::evaluate(const Vector& x, bool with_gradient) const {
  const int n = p_.n();
  const PairIndex pairs(n);
  EffectiveIncentives inc{p_.b() + x.head(n), p_.s()};
  for (int q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    inc.link(i, j) += x(n + q);
    inc.link(j, i) += x(n + q);
  }
  const EquilibriumReport rep = solve_equilibrium(p_, inc, opts_);
  PlannerEvaluation e;
  if (!rep.converged) return e;
  const Matrix G = rep.profile.G();
  e.exists = true;
  e.welfare = welfare(w_, rep.profile);
  e.payment = x.head(n).dot(rep.profile.a);
  for (int q = 0; q < pairs.size(); ++q) e.payment += 2.0 * x(n + q) * G(pairs[q].first, pairs[q].second);

  if (with_gradient) {
    try {
      const Intervention iv = from_decision_vector(x.cwiseMax(0.0), n);
      const EquilibriumLinearization lin(p_, rep);
      const EquilibriumJacobian jac = equilibrium_jacobian(p_, rep, lin);
      PlannerGradients g = planner_gradients(w_, p_, iv, rep, jac);
      e.welfare_grad = std::move(g.welfare);
      e.payment_grad = std::move(g.payment);
    } catch (const SingularSystem&) {
      // Not differentiable here; the optimizer treats the point as unusable.
    }
  }
  return e;
}

namespace {

OptimizationResult run(const GameParameters& p, const WelfareSpec& w, double budget,
                       SubsidyMode mode, const OptimizerOptions& opts,
                       const SolverOptions& solver) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw InvalidParameters("budget must be positive and finite");
  }
  const EquilibriumReport baseline = solve_equilibrium(p, Intervention::zero(p.n()), solver);
  if (!baseline.converged) {
    throw NoFeasibleIntervention(std::string("unsubsidized game has no equilibrium (") +
                                 to_string(baseline.status) + ")");
  }
  const EndogenousPlannerProblem problem(p, w, solver);
  BudgetSearchResult found = maximize_on_budget(problem, budget, mode, opts);

  OptimizationResult out;
  out.mode = mode;
  out.trace = std::move(found.trace);
  out.grid_welfare = found.grid_welfare;
  out.best = from_decision_vector(found.x.cwiseMax(0.0), p.n(), budget);
  out.equilibrium = solve_equilibrium(p, out.best, solver);
  out.welfare_value = welfare(w, out.equilibrium.profile);
  out.payment = planner_payment(out.best, out.equilibrium.profile);
  try {
    out.kkt = kkt_check(p, w, out);
    out.lambda_hat = std::max(0.0, out.kkt->lambda_hat);
  } catch (const DegenerateMultiplier& e) {
    out.kkt_error = e.what();
  } catch (const SingularSystem& e) {
    out.kkt_error = e.what();
  }
  return out;
}

}  // namespace

OptimizationResult optimize_intervention(const GameParameters& p, const WelfareSpec& w,
                                         double budget, const OptimizerOptions& opts,
                                         const SolverOptions& solver) {
  return run(p, w, budget, SubsidyMode::kFull, opts, solver);
}

OptimizationResult restricted_optimize(const GameParameters& p, const WelfareSpec& w,
                                       double budget, SubsidyMode mode,
                                       const OptimizerOptions& opts, const SolverOptions& solver) {
  return run(p, w, budget, mode, opts, solver);
}

KKTReport kkt_check(const GameParameters& p, const WelfareSpec& w,
                    const OptimizationResult& result) {
  const int n = p.n();
  const PairIndex pairs(n);
  const EquilibriumReport& rep = result.equilibrium;
  if (!rep.converged) throw NonConvergent("optimum has no converged equilibrium");
  const Vector x = to_decision_vector(result.best);
  const auto& a = rep.profile.a;

  const EquilibriumLinearization lin(p, rep);
  const EquilibriumJacobian jac = equilibrium_jacobian(p, rep, lin);
  const PlannerGradients grads = planner_gradients(w, p, result.best, rep, jac);
  const MultiplierEstimate est = estimate_multiplier(x, grads.welfare, grads.payment, n, result.mode);
  const double lambda = est.lambda;
  const Matrix& ft = lin.spillover().ftilde;
  const Matrix& sigma = result.best.sigma();

  // Marginal value of each action for the Lagrangian with links substituted
  // by their first-order conditions.
  Vector grad_a(n), paid(n);
  for (int m = 0; m < n; ++m) {
    double link_terms = 0.0, subsidy_terms = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == m) continue;
      link_terms += ft(m, k) * a(k);
      subsidy_terms += sigma(m, k) * ft(m, k) * a(k);
    }
    grad_a(m) = w.kind() == WelfareSpec::Kind::kWeightedActionSum ? w.weights()(m)
                                                                  : 2.0 * p.rho() * link_terms;
    paid(m) = result.best.beta()(m) + 2.0 * p.rho() * subsidy_terms;
  }

  KKTReport out;
  out.lambda_hat = lambda;
  out.lambda_from_actions = est.from_action_subsidies;
  out.R_prime = lin.solve(grad_a - lambda * paid);
  out.stationarity_beta = out.R_prime - lambda * a;
  out.stationarity_sigma = Vector::Zero(pairs.size());
  for (int q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    const double f = ft(i, j);
    if (f == 0.0) continue;
    double d = p.rho() * f * (out.R_prime(i) * a(j) + out.R_prime(j) * a(i) - 2.0 * lambda * a(i) * a(j)) -
               2.0 * lambda * f * p.s()(i, j) - 4.0 * lambda * f * sigma(i, j);
    if (w.kind() == WelfareSpec::Kind::kLinkWeightSum) d += 2.0 * f;
    out.stationarity_sigma(q) = d;
  }
  out.generic_stationarity = grads.welfare - lambda * grads.payment;

  Vector closed_form(n + pairs.size());
  closed_form << out.stationarity_beta, out.stationarity_sigma;
  out.route_discrepancy = (closed_form - out.generic_stationarity).cwiseAbs().maxCoeff() / est.scale;
  out.max_residual = est.max_residual;
  out.budget_binding = result.payment >= result.best.budget() * (1.0 - 1e-6);
  out.clean = out.max_residual <= kKktTol && lambda > 0.0 && out.budget_binding;
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kViolation: return "violation";
    case Verdict::kNotApplicable: return "not-applicable";
    case Verdict::kFlagged: return "flagged";
  }
  return "?";
}

int StructureReport::count(Verdict v) const {
  return static_cast<int>(std::count_if(pairs.begin(), pairs.end(),
                                        [v](const PairVerdict& pv) { return pv.verdict == v; }));
}

double structure_tolerance(double s) { return 1e-3 * std::max(1.0, std::abs(s)); }

StructureReport check_theorem1_structure(const GameParameters& p, const WelfareSpec& w,
                                         const OptimizationResult& result) {
  const int n = p.n();
  const PairIndex pairs(n);
  StructureReport out;
  out.kkt_clean = result.kkt_clean();
  const Vector x = to_decision_vector(result.best);
  const double tol = subsidy_tolerance(x);
  const Matrix G = result.equilibrium.profile.G();
  const Vector& beta = result.best.beta();

  for (int q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    PairVerdict v;
    v.i = i;
    v.j = j;
    v.s = p.s()(i, j);
    v.sigma = result.best.sigma()(i, j);
    v.tolerance = structure_tolerance(v.s);
    if (!w.depends_on_actions_only()) {
      out.pairs.push_back(v);
      continue;
    }
    if (v.s >= 0.0) {
      v.part = "i";
      v.expected = 0.0;
    } else if (beta(i) > tol && beta(j) > tol && G(i, j) > 1e-10) {
      v.part = "ii";
      v.expected = std::abs(v.s) / 2.0;
    } else {
      out.pairs.push_back(v);
      continue;
    }
    if (!out.kkt_clean) {
      v.verdict = Verdict::kFlagged;
    } else if (v.part == "i") {
      v.verdict = v.sigma <= v.tolerance ? Verdict::kPass : Verdict::kViolation;
    } else {
      v.verdict = std::abs(v.sigma - v.expected) <= v.tolerance ? Verdict::kPass : Verdict::kViolation;
    }
    out.pairs.push_back(v);
  }
  return out;
}

}  // namespace netgame
