#include "netgame/benchmark.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "netgame/errors.hpp"

namespace netgame {

namespace {

Matrix benchmark_links(const GameParameters& p, const Matrix& link_incentive) {
  const int n = p.n();
  Matrix g = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) g(i, j) = std::max(0.0, link_incentive(i, j) / p.f()(i, j));
    }
  }
  return g;
}

double gap_on(const GameParameters& p, const Matrix& G, const std::vector<int>& agents) {
  const int m = static_cast<int>(agents.size());
  if (m == 0) return 1.0;
  Matrix scaled(m, m);
  for (int r = 0; r < m; ++r) {
    for (int q = 0; q < m; ++q) {
      const int i = agents[r], j = agents[q];
      scaled(r, q) = p.rho() * G(i, j) / std::sqrt(p.c()(i) * p.c()(j));
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled, Eigen::EigenvaluesOnly);
  return 1.0 - eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

BenchmarkEquilibrium solve_benchmark(const GameParameters& p, const Intervention& iv,
                                     const SolverOptions& opts) {
  return solve_benchmark(p, effective_incentives(p, iv), opts);
}

BenchmarkEquilibrium solve_benchmark(const GameParameters& p, const EffectiveIncentives& inc,
                                     const SolverOptions& opts) {
  const int n = p.n();
  BenchmarkEquilibrium out;
  out.g_star = benchmark_links(p, inc.link);
  const Matrix G = out.g_star + out.g_star.transpose();
  const Matrix spill = p.rho() * G;

  Vector a = Vector::Zero(n), next(n);
  long iter = 0;
  while (iter < opts.max_iter) {
    ++iter;
    next = ((inc.action + spill * a).array() / p.c().array()).cwiseMax(0.0);
    if (!next.allFinite() || next.maxCoeff() > opts.action_cap) {
      out.status = EquilibriumStatus::kNonExistent;
      a = next;
      break;
    }
    const double change = (next - a).cwiseAbs().maxCoeff();
    a.swap(next);
    if (change < opts.tol_fixpoint) {
      out.status = EquilibriumStatus::kConverged;
      break;
    }
  }
  out.iterations = iter;
  out.a_star = a;
  out.exists = out.status != EquilibriumStatus::kNonExistent;

  std::vector<int> active;
  for (int i = 0; i < n; ++i) {
    if (a(i) > opts.binding_tol) active.push_back(i);
  }
  if (active.empty()) {
    for (int i = 0; i < n; ++i) active.push_back(i);
  }
  out.spectral_gap = gap_on(p, G, active);
  return out;
}

BenchmarkPlannerProblem::BenchmarkPlannerProblem(GameParameters p, WelfareSpec w,
                                                 SolverOptions opts)
    : p_(std::move(p)), w_(std::move(w)), opts_(std::move(opts)) {
  if (w_.kind() == WelfareSpec::Kind::kWeightedActionSum && w_.weights().size() != p_.n()) {
    throw InvalidParameters("welfare weights do not match the number of agents");
  }
}

PlannerEvaluation BenchmarkPlannerProblem::evaluate(const Vector& x, bool with_gradient) const {
  const int n = p_.n();
  const PairIndex pairs(n);
  EffectiveIncentives inc{p_.b() + x.head(n), p_.s()};
  for (int q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    inc.link(i, j) += x(n + q);
    inc.link(j, i) += x(n + q);
  }
  const BenchmarkEquilibrium eq = solve_benchmark(p_, inc, opts_);
  PlannerEvaluation e;
  if (eq.status != EquilibriumStatus::kConverged) return e;
  const StrategyProfile sp = eq.profile();
  const Matrix G = sp.G();
  const Vector& a = eq.a_star;
  e.exists = true;
  e.welfare = welfare(w_, sp);
  e.payment = x.head(n).dot(a);
  for (int q = 0; q < pairs.size(); ++q) e.payment += 2.0 * x(n + q) * G(pairs[q].first, pairs[q].second);
  if (!with_gradient) return e;

  // Actions solve (C - rho G) a = b + beta on the active set, with G fixed
  // by the link stage, so derivatives need a single factorization.
  std::vector<int> S;
  for (int i = 0; i < n; ++i) {
    if (a(i) > opts_.binding_tol) S.push_back(i);
  }
  const int m = static_cast<int>(S.size());
  Matrix K(m, m);
  for (int r = 0; r < m; ++r) {
    for (int q = 0; q < m; ++q) {
      K(r, q) = (r == q ? p_.c()(S[r]) : 0.0) - p_.rho() * G(S[r], S[q]);
    }
  }
  const Eigen::FullPivLU<Matrix> lu(K);
  if (m > 0 && (!lu.isInvertible() || lu.rcond() < 1e-13)) return e;

  const int dim = n + pairs.size();
  Matrix da = Matrix::Zero(n, dim);
  Vector dG_own = Vector::Zero(pairs.size());  // d G_q / d sigma_q; zero off the pair
  auto solve_into = [&](const Vector& rhs, int col) {
    if (m == 0) return;
    Vector r(m);
    for (int k = 0; k < m; ++k) r(k) = rhs(S[k]);
    const Vector sol = lu.solve(r);
    for (int k = 0; k < m; ++k) da(S[k], col) = sol(k);
  };
  for (int i = 0; i < n; ++i) solve_into(Vector::Unit(n, i), i);
  for (int q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    double ft = 0.0;
    if (eq.g_star(i, j) > opts_.binding_tol) ft += 1.0 / p_.f()(i, j);
    if (eq.g_star(j, i) > opts_.binding_tol) ft += 1.0 / p_.f()(j, i);
    dG_own(q) = ft;
    if (ft == 0.0) continue;
    Vector rhs = Vector::Zero(n);
    rhs(i) = p_.rho() * ft * a(j);
    rhs(j) = p_.rho() * ft * a(i);
    solve_into(rhs, n + q);
  }

  if (w_.kind() == WelfareSpec::Kind::kWeightedActionSum) {
    e.welfare_grad = da.transpose() * w_.weights();
  } else {
    e.welfare_grad = Vector::Zero(dim);
    e.welfare_grad.tail(pairs.size()) = 2.0 * dG_own;
  }
  e.payment_grad = da.transpose() * x.head(n);
  e.payment_grad.head(n) += a;
  for (int q = 0; q < pairs.size(); ++q) {
    e.payment_grad(n + q) += 2.0 * G(pairs[q].first, pairs[q].second) + 2.0 * x(n + q) * dG_own(q);
  }
  return e;
}

OptimizationResult optimize_benchmark(const GameParameters& p, const WelfareSpec& w, double budget,
                                      SubsidyMode mode, const OptimizerOptions& opts,
                                      const SolverOptions& solver) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw InvalidParameters("budget must be positive and finite");
  }
  const BenchmarkEquilibrium baseline = solve_benchmark(p, Intervention::zero(p.n()), solver);
  if (baseline.status != EquilibriumStatus::kConverged) {
    throw NoFeasibleIntervention(std::string("unsubsidized benchmark has no equilibrium (") +
                                 to_string(baseline.status) + ")");
  }
  const BenchmarkPlannerProblem problem(p, w, solver);
  BudgetSearchResult found = maximize_on_budget(problem, budget, mode, opts);

  OptimizationResult out;
  out.mode = mode;
  out.trace = std::move(found.trace);
  out.grid_welfare = found.grid_welfare;
  const Vector x = found.x.cwiseMax(0.0);
  out.best = from_decision_vector(x, p.n(), budget);
  const BenchmarkEquilibrium eq = solve_benchmark(p, out.best, solver);
  out.equilibrium = make_report(eq.profile(), solver.binding_tol);
  out.equilibrium.status = eq.status;
  out.equilibrium.converged = eq.status == EquilibriumStatus::kConverged;
  out.equilibrium.exists = eq.exists;
  out.equilibrium.iterations = eq.iterations;
  out.welfare_value = welfare(w, eq.profile());
  out.payment = planner_payment(out.best, eq.profile());

  const PlannerEvaluation at = problem.evaluate(x, true);
  if (at.welfare_grad.size() == 0) {
    out.kkt_error = "benchmark system is singular at the optimum";
    return out;
  }
  try {
    const MultiplierEstimate est =
        estimate_multiplier(x, at.welfare_grad, at.payment_grad, p.n(), mode);
    KKTReport k;
    k.lambda_hat = est.lambda;
    k.lambda_from_actions = est.from_action_subsidies;
    k.generic_stationarity = est.stationarity;
    k.max_residual = est.max_residual;
    k.budget_binding = out.payment >= budget * (1.0 - 1e-6);
    k.clean = k.max_residual <= kKktTol && k.lambda_hat > 0.0 && k.budget_binding;
    out.lambda_hat = std::max(0.0, k.lambda_hat);
    out.kkt = std::move(k);
  } catch (const DegenerateMultiplier& e) {
    out.kkt_error = e.what();
  }
  return out;
}

int ThresholdReport::count(Verdict v) const {
  return static_cast<int>(std::count_if(pairs.begin(), pairs.end(),
                                        [v](const ThresholdVerdict& t) { return t.verdict == v; }));
}

ThresholdReport check_theorem2(const GameParameters& p, const OptimizationResult& result) {
  const int n = p.n();
  const PairIndex pairs(n);
  ThresholdReport out;
  out.kkt_clean = result.kkt_clean();
  const Vector x = to_decision_vector(result.best);
  const double tol = subsidy_tolerance(x);
  const auto& a = result.equilibrium.profile.a;
  const Matrix G = result.equilibrium.profile.G();

  for (int q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    ThresholdVerdict v;
    v.i = i;
    v.j = j;
    const double sigma = result.best.sigma()(i, j);
    v.product = a(i) * a(j);
    v.actions_subsidized = result.best.beta()(i) > tol && result.best.beta()(j) > tol;
    v.link_subsidized = sigma > tol;
    const bool hypotheses = p.rho() > 0.0 && a(i) > 0.0 && a(j) > 0.0 && G(i, j) > 0.0 &&
                            (v.actions_subsidized || v.link_subsidized);
    if (p.rho() > 0.0) {
      v.threshold = (p.s()(i, j) + 2.0 * sigma) / p.rho();
      v.tolerance = 1e-3 * std::max(1.0, std::abs(v.threshold));
    }
    if (!hypotheses) {
      out.pairs.push_back(v);
      continue;
    }
    if (v.actions_subsidized && v.link_subsidized) v.equality_gap = std::abs(v.product - v.threshold);
    if (!out.kkt_clean) {
      v.verdict = Verdict::kFlagged;
    } else {
      bool ok = true;
      if (v.actions_subsidized && v.product > v.threshold + v.tolerance) ok = false;
      if (v.link_subsidized && v.product < v.threshold - v.tolerance) ok = false;
      v.verdict = ok ? Verdict::kPass : Verdict::kViolation;
    }
    out.pairs.push_back(v);
  }
  return out;
}

}  // namespace netgame
