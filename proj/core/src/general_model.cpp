#include "netgame/general_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "netgame/errors.hpp"

namespace netgame {

PowerFamilySpec PowerFamilySpec::uniform(int n, double eta, double gamma, double kappa) {
  PowerFamilySpec s;
  s.eta = Vector::Constant(n, eta);
  s.gamma = Matrix::Constant(n, n, gamma);
  s.kappa = Matrix::Constant(n, n, kappa);
  s.omega = Matrix::Ones(n, n);
  return s;
}

void PowerFamilySpec::validate(int n) const {
  if (eta.size() != n || gamma.rows() != n || gamma.cols() != n || kappa.rows() != n ||
      kappa.cols() != n || omega.rows() != n || omega.cols() != n) {
    throw InvalidParameters("power-family blocks do not match the number of agents");
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(eta(i)) || eta(i) < 2.0) throw InvalidParameters("eta must be >= 2");
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (!std::isfinite(gamma(i, j)) || gamma(i, j) <= 1.0) {
        throw InvalidParameters("gamma must be > 1");
      }
      if (!std::isfinite(kappa(i, j)) || kappa(i, j) <= 0.0) {
        throw InvalidParameters("kappa must be > 0");
      }
      if (!std::isfinite(omega(i, j)) || omega(i, j) <= 0.0) {
        throw InvalidParameters("omega must be > 0");
      }
    }
  }
}

const char* to_string(Curvature c) {
  switch (c) {
    case Curvature::kSuper: return "super";
    case Curvature::kSub: return "sub";
    case Curvature::kBoth: return "both";
  }
  return "?";
}

Curvature classify_cost(double gamma) {
  if (!(gamma > 1.0)) throw InvalidParameters("gamma must be > 1");
  if (gamma == 2.0) return Curvature::kBoth;
  return gamma > 2.0 ? Curvature::kSuper : Curvature::kSub;
}

Curvature classify_spillover(double kappa) {
  if (!(kappa > 0.0)) throw InvalidParameters("kappa must be > 0");
  if (kappa == 1.0) return Curvature::kBoth;
  return kappa > 1.0 ? Curvature::kSuper : Curvature::kSub;
}

namespace {

std::vector<double> log_grid() {
  std::vector<double> pts;
  const int count = 400;
  for (int k = 0; k <= count; ++k) pts.push_back(std::pow(10.0, -6.0 + 9.0 * k / count));
  // Drop the open endpoints.
  pts.front() *= 1.0 + 1e-9;
  pts.back() *= 1.0 - 1e-9;
  return pts;
}

// gap >= 0 (super) or <= 0 (sub) up to relative round-off.
bool sign_ok(double gap, double scale, Curvature claimed) {
  const double slack = 1e-12 * std::max(scale, 1e-300);
  switch (claimed) {
    case Curvature::kSuper: return gap >= -slack;
    case Curvature::kSub: return gap <= slack;
    case Curvature::kBoth: return std::abs(gap) <= slack;
  }
  return false;
}

}  // namespace

bool verify_cost_class(double f, double gamma, Curvature claimed) {
  for (double g : log_grid()) {
    const double d1 = f * gamma * std::pow(g, gamma - 1.0);
    const double d2 = f * gamma * (gamma - 1.0) * std::pow(g, gamma - 2.0);
    if (!sign_ok(g * d2 - d1, std::abs(d1), claimed)) return false;
  }
  return true;
}

bool verify_spillover_class(double omega, double kappa, Curvature claimed) {
  for (double a : log_grid()) {
    const double u = omega * std::pow(a, kappa);
    const double du = omega * kappa * std::pow(a, kappa - 1.0);
    if (!sign_ok(a * du - u, std::abs(u), claimed)) return false;
  }
  return true;
}

namespace {

double spill(const PowerFamilySpec& spec, int i, int j, double a) {
  return spec.omega(i, j) * std::pow(a, spec.kappa(i, j));
}

double d_spill(const PowerFamilySpec& spec, int i, int j, double a) {
  const double k = spec.kappa(i, j);
  if (a == 0.0) {
    if (k < 1.0) return std::numeric_limits<double>::infinity();
    return k == 1.0 ? spec.omega(i, j) : 0.0;
  }
  return spec.omega(i, j) * k * std::pow(a, k - 1.0);
}

// Marginal cost minus marginal benefit of agent i's action; the negative of
// the derivative of its utility in a_i.
struct ActionResidual {
  const PowerFamilySpec& spec;
  const GameParameters& p;
  double incentive;
  int i;
  const Vector& a;
  const Matrix& G;

  double operator()(double x) const {
    double benefit = incentive;
    for (int j = 0; j < p.n(); ++j) {
      if (j == i || G(i, j) == 0.0) continue;
      const double partner = spill(spec, j, i, a(j));
      if (partner == 0.0) continue;
      benefit += p.rho() * G(i, j) * d_spill(spec, i, j, x) * partner;
    }
    return p.c()(i) * std::pow(x, spec.eta(i) - 1.0) - benefit;
  }

  double utility(double x) const {
    double u = incentive * x - p.c()(i) * std::pow(x, spec.eta(i)) / spec.eta(i);
    for (int j = 0; j < p.n(); ++j) {
      if (j != i) u += p.rho() * G(i, j) * spill(spec, i, j, x) * spill(spec, j, i, a(j));
    }
    return u;
  }

  bool monotone() const {
    for (int j = 0; j < p.n(); ++j) {
      if (j != i && G(i, j) != 0.0 && spec.kappa(i, j) > 1.0 && a(j) > 0.0) return false;
    }
    return true;
  }
};

double refine_root(const ActionResidual& r, double lo, double hi, double r_lo, double r_hi) {
  if (r_lo == 0.0) return lo;
  if (r_hi == 0.0) return hi;
  boost::uintmax_t iters = 300;
  const auto br = boost::math::tools::toms748_solve(
      r, lo, hi, r_lo, r_hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (br.first + br.second);
}

double best_action(const ActionResidual& r, double cap) {
  const double r_cap = r(cap);
  if (r_cap < 0.0) {
    throw IllPosedBestResponse("agent " + std::to_string(r.i) +
                               " still gains from raising its action at the cap");
  }
  // Smallest positive probe; a^(kappa-1) blows up at zero when kappa < 1.
  const double tiny = 1e-300;
  if (r.monotone()) {
    const double r0 = r(0.0);
    if (std::isfinite(r0)) return r0 >= 0.0 ? 0.0 : refine_root(r, 0.0, cap, r0, r_cap);
    const double r_tiny = r(tiny);
    if (r_tiny >= 0.0) return tiny;
    return refine_root(r, tiny, cap, r_tiny, r_cap);
  }
  // Convex spillover terms can make the utility non-concave: collect every
  // local maximum on a log grid and keep the best one (zero included).
  double best = 0.0;
  double best_u = r.utility(0.0);
  const double floor = 1e-12;
  double prev_x = floor;
  double prev_r = r(floor);
  const int count = 200;
  for (int k = 1; k <= count; ++k) {
    const double x = k == count ? cap : floor * std::pow(cap / floor, static_cast<double>(k) / count);
    const double rx = k == count ? r_cap : r(x);
    if (prev_r < 0.0 && rx >= 0.0) {
      const double root = refine_root(r, prev_x, x, prev_r, rx);
      const double u = r.utility(root);
      if (u > best_u) {
        best_u = u;
        best = root;
      }
    }
    prev_x = x;
    prev_r = rx;
  }
  return best;
}

Matrix general_links(const PowerFamilySpec& spec, const GameParameters& p, const Matrix& incentive,
                     const Vector& a) {
  const int n = p.n();
  Matrix g = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double gamma = spec.gamma(i, j);
      const double marginal =
          incentive(i, j) + p.rho() * spill(spec, i, j, a(i)) * spill(spec, j, i, a(j));
      g(i, j) = marginal <= 0.0 ? 0.0
                                : std::pow(marginal / (p.f()(i, j) * gamma), 1.0 / (gamma - 1.0));
    }
  }
  return g;
}

void general_actions(const PowerFamilySpec& spec, const GameParameters& p, const Vector& incentive,
                     const StrategyProfile& sp, double cap, Vector& out) {
  const Matrix G = sp.G();
  for (int i = 0; i < p.n(); ++i) {
    const ActionResidual r{spec, p, incentive(i), i, sp.a, G};
    out(i) = best_action(r, cap);
  }
}

double general_foc_residual(const PowerFamilySpec& spec, const GameParameters& p,
                            const EffectiveIncentives& inc, const EquilibriumReport& rep) {
  const int n = p.n();
  const auto& a = rep.profile.a;
  const auto& g = rep.profile.g;
  const Matrix G = rep.profile.G();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const ActionResidual r{spec, p, inc.action(i), i, a, G};
    const double marginal = -r(a(i));
    if (std::isfinite(marginal)) {
      worst = std::max(worst, rep.action_binds(i) ? std::abs(marginal) : std::max(0.0, marginal));
    }
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double lm = inc.link(i, j) + p.rho() * spill(spec, i, j, a(i)) * spill(spec, j, i, a(j)) -
                        p.f()(i, j) * spec.gamma(i, j) * std::pow(g(i, j), spec.gamma(i, j) - 1.0);
      worst = std::max(worst, rep.link_binds(i, j) ? std::abs(lm) : std::max(0.0, lm));
    }
  }
  return worst;
}

}  // namespace

double general_utility(const PowerFamilySpec& spec, const GameParameters& p,
                       const Intervention& iv, const StrategyProfile& sp, int i) {
  const int n = p.n();
  if (i < 0 || i >= n) throw IndexOutOfRange("agent index " + std::to_string(i));
  const auto inc = effective_incentives(p, iv);
  const Matrix G = sp.G();
  const ActionResidual r{spec, p, inc.action(i), i, sp.a, G};
  double u = r.utility(sp.a(i));
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    u += inc.link(i, j) * G(i, j) - p.f()(i, j) * std::pow(sp.g(i, j), spec.gamma(i, j));
  }
  return u;
}

StrategyProfile general_best_response(const PowerFamilySpec& spec, const GameParameters& p,
                                      const Intervention& iv, const StrategyProfile& sp,
                                      const SolverOptions& opts) {
  spec.validate(p.n());
  const auto inc = effective_incentives(p, iv);
  StrategyProfile out = StrategyProfile::zero(p.n());
  general_actions(spec, p, inc.action, sp, opts.action_cap, out.a);
  out.g = general_links(spec, p, inc.link, out.a);
  return out;
}

EquilibriumReport solve_general_equilibrium(const PowerFamilySpec& spec, const GameParameters& p,
                                            const Intervention& iv, const SolverOptions& opts) {
  return solve_general_equilibrium(spec, p, effective_incentives(p, iv), opts);
}

EquilibriumReport solve_general_equilibrium(const PowerFamilySpec& spec, const GameParameters& p,
                                            const EffectiveIncentives& inc,
                                            const SolverOptions& opts) {
  spec.validate(p.n());
  const int n = p.n();
  StrategyProfile cur = StrategyProfile::zero(n);
  StrategyProfile next = StrategyProfile::zero(n);
  EquilibriumStatus status = EquilibriumStatus::kNonConvergent;
  long iter = 0;
  while (iter < opts.max_iter) {
    ++iter;
    try {
      general_actions(spec, p, inc.action, cur, opts.action_cap, next.a);
    } catch (const IllPosedBestResponse&) {
      // Some action wants to exceed the cap: the iterates escape.
      status = EquilibriumStatus::kNonExistent;
      break;
    }
    next.g = general_links(spec, p, inc.link, next.a);
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
  r.foc_residual_max = r.exists ? general_foc_residual(spec, p, inc, r)
                                : std::numeric_limits<double>::infinity();
  return r;
}

GeneralPlannerProblem::GeneralPlannerProblem(PowerFamilySpec spec, GameParameters p, WelfareSpec w,
                                             SolverOptions opts, double fd_step)
    : spec_(std::move(spec)), p_(std::move(p)), w_(std::move(w)), opts_(std::move(opts)),
      h_(fd_step) {
  spec_.validate(p_.n());
  if (!(h_ > 0.0)) throw InvalidParameters("finite-difference step must be positive");
  if (w_.kind() == WelfareSpec::Kind::kWeightedActionSum && w_.weights().size() != p_.n()) {
    throw InvalidParameters("welfare weights do not match the number of agents");
  }
}

PlannerEvaluation GeneralPlannerProblem::value(const Vector& x) const {
  const int n = p_.n();
  const PairIndex pairs(n);
  EffectiveIncentives inc{p_.b() + x.head(n), p_.s()};
  for (int q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    inc.link(i, j) += x(n + q);
    inc.link(j, i) += x(n + q);
  }
  const EquilibriumReport rep = solve_general_equilibrium(spec_, p_, inc, opts_);
  PlannerEvaluation e;
  if (!rep.converged) return e;
  const Matrix G = rep.profile.G();
  e.exists = true;
  e.welfare = welfare(w_, rep.profile);
  e.payment = x.head(n).dot(rep.profile.a);
  for (int q = 0; q < pairs.size(); ++q) e.payment += 2.0 * x(n + q) * G(pairs[q].first, pairs[q].second);
  return e;
}

PlannerEvaluation GeneralPlannerProblem::evaluate(const Vector& x, bool with_gradient) const {
  PlannerEvaluation e = value(x);
  if (!e.exists || !with_gradient) return e;
  const int dim = static_cast<int>(x.size());
  Vector gw(dim), gp(dim);
  for (int k = 0; k < dim; ++k) {
    Vector xp = x, xm = x;
    xp(k) += h_;
    xm(k) -= h_;
    const PlannerEvaluation up = value(xp);
    const PlannerEvaluation down = value(xm);
    if (!up.exists || !down.exists) return e;
    gw(k) = (up.welfare - down.welfare) / (2.0 * h_);
    gp(k) = (up.payment - down.payment) / (2.0 * h_);
  }
  e.welfare_grad = std::move(gw);
  e.payment_grad = std::move(gp);
  return e;
}

OptimizationResult optimize_general(const PowerFamilySpec& spec, const GameParameters& p,
                                    const WelfareSpec& w, double budget, SubsidyMode mode,
                                    const OptimizerOptions& opts, const SolverOptions& solver) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw InvalidParameters("budget must be positive and finite");
  }
  const EquilibriumReport baseline =
      solve_general_equilibrium(spec, p, Intervention::zero(p.n()), solver);
  if (!baseline.converged) {
    throw NoFeasibleIntervention(std::string("unsubsidized game has no equilibrium (") +
                                 to_string(baseline.status) + ")");
  }
  const GeneralPlannerProblem problem(spec, p, w, solver);
  BudgetSearchResult found = maximize_on_budget(problem, budget, mode, opts);

  OptimizationResult out;
  out.mode = mode;
  out.trace = std::move(found.trace);
  out.grid_welfare = found.grid_welfare;
  const Vector x = found.x.cwiseMax(0.0);
  out.best = from_decision_vector(x, p.n(), budget);
  out.equilibrium = solve_general_equilibrium(spec, p, out.best, solver);
  out.welfare_value = welfare(w, out.equilibrium.profile);
  out.payment = planner_payment(out.best, out.equilibrium.profile);

  const PlannerEvaluation at = problem.evaluate(x, true);
  if (at.welfare_grad.size() == 0) {
    out.kkt_error = "finite differences unavailable at the optimum";
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

int RegimeReport::count(Verdict v) const {
  return static_cast<int>(std::count_if(pairs.begin(), pairs.end(),
                                        [v](const RegimeVerdict& r) { return r.verdict == v; }));
}

RegimeReport check_theorem3(const PowerFamilySpec& spec, const GameParameters& p,
                            const WelfareSpec& w, const OptimizationResult& result) {
  const int n = p.n();
  spec.validate(n);
  const PairIndex pairs(n);
  RegimeReport out;
  out.kkt_clean = result.kkt_clean();
  const Vector x = to_decision_vector(result.best);
  const double tol = subsidy_tolerance(x);
  const Matrix G = result.equilibrium.profile.G();
  auto is = [](Curvature c, Curvature want) { return c == want || c == Curvature::kBoth; };

  for (int q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    RegimeVerdict v;
    v.i = i;
    v.j = j;
    v.s = p.s()(i, j);
    v.sigma = result.best.sigma()(i, j);
    v.tolerance = structure_tolerance(v.s);
    if (!w.depends_on_actions_only()) {
      out.pairs.push_back(v);
      continue;
    }
    const Curvature fij = classify_cost(spec.gamma(i, j)), fji = classify_cost(spec.gamma(j, i));
    const Curvature uij = classify_spillover(spec.kappa(i, j)),
                    uji = classify_spillover(spec.kappa(j, i));
    const bool part_i = v.s >= 0.0 && is(fij, Curvature::kSuper) && is(fji, Curvature::kSuper) &&
                        is(uij, Curvature::kSub) && is(uji, Curvature::kSub);
    const bool part_ii = v.s < 0.0 && is(fij, Curvature::kSub) && is(fji, Curvature::kSub) &&
                         is(uij, Curvature::kSuper) && is(uji, Curvature::kSuper) &&
                         result.best.beta()(i) > tol && result.best.beta()(j) > tol &&
                         G(i, j) > 1e-10;
    if (part_i) {
      v.part = "i";
    } else if (part_ii) {
      v.part = "ii";
      // Positivity is judged on the scale of the link incentive: compensating
      // a small negative s needs only a small subsidy.
      v.tolerance = 1e-3 * std::abs(v.s);
    } else {
      out.pairs.push_back(v);
      continue;
    }
    if (!out.kkt_clean) {
      v.verdict = Verdict::kFlagged;
    } else if (part_i) {
      v.verdict = v.sigma <= v.tolerance ? Verdict::kPass : Verdict::kViolation;
    } else {
      v.verdict = v.sigma > v.tolerance ? Verdict::kPass : Verdict::kViolation;
    }
    out.pairs.push_back(v);
  }
  return out;
}

}  // namespace netgame
