#include "netgame/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

#include <boost/math/tools/roots.hpp>

#include "netgame/errors.hpp"
#include "netgame/parallel.hpp"
#include "netgame/rng.hpp"

namespace netgame {

const char* to_string(SubsidyMode mode) {
  switch (mode) {
    case SubsidyMode::kFull: return "full";
    case SubsidyMode::kActionsOnly: return "actions";
    case SubsidyMode::kLinksOnly: return "links";
  }
  return "?";
}

SubsidyMode subsidy_mode_from_string(const std::string& s) {
  if (s == "full") return SubsidyMode::kFull;
  if (s == "actions") return SubsidyMode::kActionsOnly;
  if (s == "links") return SubsidyMode::kLinksOnly;
  throw InvalidParameters("unknown subsidy mode '" + s + "' (expected full, actions or links)");
}

Vector free_mask(int n, SubsidyMode mode) {
  const int pairs = n * (n - 1) / 2;
  Vector m(n + pairs);
  m.head(n).setConstant(mode == SubsidyMode::kLinksOnly ? 0.0 : 1.0);
  m.tail(pairs).setConstant(mode == SubsidyMode::kActionsOnly ? 0.0 : 1.0);
  return m;
}

double subsidy_tolerance(const Vector& x) {
  const double scale = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  return 1e-8 * std::max(scale, 1e-300);
}

namespace {

bool over_budget(const PlannerEvaluation& e, double budget) {
  return !e.exists || e.payment >= budget;
}

// The payment of the selected equilibrium grows roughly quadratically along a
// ray (subsidy times induced activity), so the first guess is corrected by
// sqrt(budget / payment) before bracketing.
std::optional<BudgetScaling> scale_with_guess(const PlannerProblem& problem, const Vector& y,
                                              double budget, bool with_gradient, double guess) {
  if (!y.allFinite() || y.maxCoeff() <= 0.0) return std::nullopt;
  auto at = [&](double t) { return problem.evaluate(t * y, false); };

  double t = (std::isfinite(guess) && guess > 0.0) ? guess : 1.0;
  PlannerEvaluation e = at(t);
  if (e.exists && e.payment > 0.0 && std::abs(e.payment - budget) > 1e-3 * budget) {
    t *= std::sqrt(budget / e.payment);
    e = at(t);
  }

  double lo, hi;
  double factor = 1.01;
  if (over_budget(e, budget)) {
    hi = t;
    lo = t;
    for (int k = 0;; ++k) {
      if (k > 80) return std::nullopt;
      lo /= factor;
      factor = std::min(factor * factor, 1e8);
      if (!over_budget(at(lo), budget)) break;
      hi = lo;
    }
  } else {
    lo = t;
    hi = t;
    for (int k = 0;; ++k) {
      if (k > 80 || hi > 1e300) return std::nullopt;
      hi *= factor;
      factor = std::min(factor * factor, 1e8);
      if (over_budget(at(hi), budget)) break;
      lo = hi;
    }
  }

  auto excess = [&](double tt) {
    const PlannerEvaluation ev = at(tt);
    if (!ev.exists) return std::max(budget, 1.0);
    return ev.payment - budget;
  };
  const double f_lo = excess(lo);
  const double f_hi = excess(hi);
  if (f_lo > 0.0 || f_hi < 0.0) return std::nullopt;
  std::pair<double, double> bracket{lo, lo};
  if (f_lo < 0.0 && f_hi > 0.0) {
    boost::uintmax_t iters = 200;
    bracket = boost::math::tools::toms748_solve(excess, lo, hi, f_lo, f_hi,
                                                boost::math::tools::eps_tolerance<double>(50), iters);
  } else if (f_hi == 0.0) {
    bracket = {hi, hi};
  }
  double t_star = bracket.first;
  BudgetScaling out;
  out.x = t_star * y;
  out.eval = problem.evaluate(out.x, with_gradient);
  if (!out.eval.exists || out.eval.payment > budget) {
    // Round-off can push the lower end over; fall back to the last safe point.
    t_star = lo;
    out.x = t_star * y;
    out.eval = problem.evaluate(out.x, with_gradient);
    if (!out.eval.exists) return std::nullopt;
  }
  out.scale = t_star;
  return out;
}

struct Iterate {
  Vector x;
  PlannerEvaluation eval;
  Vector grad;  // projected-out budget direction, frozen coordinates zeroed
  double lambda = 0.0;
  double stationarity = 0.0;
};

Iterate make_iterate(BudgetScaling s, const Vector& mask) {
  Iterate it;
  it.x = std::move(s.x);
  it.eval = std::move(s.eval);
  const Vector& gw = it.eval.welfare_grad;
  const Vector& gp = it.eval.payment_grad;
  const double px = gp.dot(it.x);
  it.lambda = px > 0.0 ? gw.dot(it.x) / px : 0.0;
  it.grad = (gw - it.lambda * gp).cwiseProduct(mask);

  const double tol = subsidy_tolerance(it.x);
  const double scale = std::max({gw.cwiseProduct(mask).cwiseAbs().maxCoeff(),
                                 std::abs(it.lambda) * gp.cwiseProduct(mask).cwiseAbs().maxCoeff(),
                                 1e-300});
  double worst = 0.0;
  for (int k = 0; k < it.x.size(); ++k) {
    if (mask(k) == 0.0) continue;
    const double r = it.x(k) > tol ? std::abs(it.grad(k)) : std::max(0.0, it.grad(k));
    worst = std::max(worst, r);
  }
  it.stationarity = worst / scale;
  return it;
}

constexpr int kArmijoMemory = 10;
constexpr double kArmijoGamma = 1e-4;
constexpr int kMaxBacktracks = 40;

// One spectral projected gradient run from a feasible budget point.
Iterate ascend(const PlannerProblem& problem, double budget, const Vector& mask, Iterate cur,
               const OptimizerOptions& opts, StartTrace& trace) {
  Iterate best = cur;
  std::deque<double> history{cur.eval.welfare};
  const double x_scale = std::max(cur.x.cwiseAbs().maxCoeff(), 1e-300);
  const double g0 = cur.grad.cwiseAbs().maxCoeff();
  double alpha = g0 > 0.0 ? 0.1 * x_scale / g0 : 1.0;
  int flat_steps = 0;

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    if (cur.stationarity <= opts.stationarity_tol) {
      trace.converged = true;
      break;
    }
    const double gmax = std::max(cur.grad.cwiseAbs().maxCoeff(), 1e-300);
    const double xs = std::max(cur.x.cwiseAbs().maxCoeff(), 1e-300);
    alpha = std::clamp(alpha, 1e-12 * xs / gmax, 1e8 * xs / gmax);

    const Vector target = (cur.x + alpha * cur.grad).cwiseMax(0.0).cwiseProduct(mask);
    const Vector d = target - cur.x;
    const double slope = cur.grad.dot(d);
    if (!(slope > 0.0)) {
      trace.converged = true;
      break;
    }
    const double reference = *std::max_element(history.begin(), history.end());

    std::optional<Iterate> next;
    double theta = 1.0;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, theta *= 0.5) {
      auto scaled = scale_with_guess(problem, cur.x + theta * d, budget, true, 1.0);
      if (!scaled || !scaled->eval.exists || scaled->eval.welfare_grad.size() == 0) continue;
      if (scaled->eval.welfare >= reference + kArmijoGamma * theta * slope) {
        next = make_iterate(std::move(*scaled), mask);
        break;
      }
    }
    if (!next) break;  // no ascent along the projected direction: stalled

    const Vector s = next->x - cur.x;
    const double curvature = -s.dot(next->grad - cur.grad);
    alpha = curvature > 0.0 ? s.squaredNorm() / curvature : 1e8 * xs / gmax;

    const double change = std::abs(next->eval.welfare - cur.eval.welfare);
    flat_steps = change <= 1e-15 * std::max(1.0, std::abs(cur.eval.welfare)) ? flat_steps + 1 : 0;

    cur = std::move(*next);
    if (cur.eval.welfare > best.eval.welfare ||
        (cur.eval.welfare == best.eval.welfare && cur.stationarity < best.stationarity)) {
      best = cur;
    }
    history.push_back(cur.eval.welfare);
    if (static_cast<int>(history.size()) > kArmijoMemory) history.pop_front();
    if (flat_steps >= 5) break;
  }
  trace.iterations = it;
  trace.welfare = best.eval.welfare;
  trace.stationarity = best.stationarity;
  trace.feasible = true;
  if (best.stationarity <= opts.stationarity_tol) trace.converged = true;
  return best;
}

struct StartPoint {
  Vector y;
  std::string origin;
};

std::vector<StartPoint> start_points(int n, SubsidyMode mode, const OptimizerOptions& opts) {
  const int pairs = n * (n - 1) / 2;
  const Vector mask = free_mask(n, mode);
  std::vector<StartPoint> out;
  if (mode != SubsidyMode::kLinksOnly) {
    Vector y = Vector::Zero(n + pairs);
    y.head(n).setOnes();
    out.push_back({y, "actions-corner"});
  }
  if (mode != SubsidyMode::kActionsOnly) {
    Vector y = Vector::Zero(n + pairs);
    y.tail(pairs).setOnes();
    out.push_back({y, "links-corner"});
  }
  for (const auto& e : opts.extra_seeds) {
    if (e.size() != n + pairs) throw InvalidParameters("extra seed has the wrong dimension");
    out.push_back({e.cwiseMax(0.0).cwiseProduct(mask), "extra"});
  }
  const CounterRng root(opts.seed);
  for (int r = 0; r < opts.random_starts; ++r) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(r));
    Vector y(n + pairs);
    for (int k = 0; k < y.size(); ++k) y(k) = rng.uniform();
    out.push_back({y.cwiseProduct(mask), "random"});
  }
  return out;
}

bool better(const Iterate& a, const Iterate& b) {
  return a.eval.welfare > b.eval.welfare;
}

}  // namespace

std::optional<BudgetScaling> scale_to_budget(const PlannerProblem& problem, const Vector& y,
                                             double budget, bool with_gradient) {
  return scale_with_guess(problem, y, budget, with_gradient, 1.0);
}

BudgetSearchResult maximize_on_budget(const PlannerProblem& problem, double budget,
                                      SubsidyMode mode, const OptimizerOptions& opts) {
  const int n = problem.agents();
  const Vector mask = free_mask(n, mode);
  const auto starts = start_points(n, mode, opts);

  std::vector<std::optional<Iterate>> results(starts.size());
  std::vector<StartTrace> traces(starts.size());
  parallel_for(starts.size(), opts.threads, [&](std::size_t k) {
    traces[k].start = static_cast<int>(k);
    traces[k].origin = starts[k].origin;
    auto scaled = scale_to_budget(problem, starts[k].y, budget, true);
    if (!scaled || scaled->eval.welfare_grad.size() == 0) return;
    results[k] = ascend(problem, budget, mask, make_iterate(std::move(*scaled), mask), opts,
                        traces[k]);
  });

  std::optional<Iterate> best;
  for (auto& r : results) {
    if (r && (!best || better(*r, *best))) best = r;
  }

  BudgetSearchResult out;
  const double step = n == 2 ? opts.grid_step_n2 : (n == 3 ? opts.grid_step_n3 : 0.0);
  if (step > 0.0) {
    const GridSearchResult grid = grid_search_oracle(problem, budget, mode, step);
    out.grid_welfare = grid.welfare;
    if (grid.points > 0 && (!best || grid.welfare > best->eval.welfare)) {
      StartTrace t;
      t.start = static_cast<int>(traces.size());
      t.origin = "grid";
      auto scaled = scale_to_budget(problem, grid.x, budget, true);
      if (scaled && scaled->eval.welfare_grad.size() != 0) {
        Iterate polished = ascend(problem, budget, mask, make_iterate(std::move(*scaled), mask),
                                  opts, t);
        if (!best || better(polished, *best)) best = std::move(polished);
      }
      traces.push_back(t);
    }
  }
  out.trace = std::move(traces);
  if (!best) throw NoFeasibleIntervention("no start reached the budget with an equilibrium");
  out.x = best->x;
  out.eval = best->eval;
  return out;
}

GridSearchResult grid_search_oracle(const PlannerProblem& problem, double budget, SubsidyMode mode,
                                    double step) {
  if (!(step > 0.0) || step > 1.0) throw InvalidParameters("grid step must lie in (0, 1]");
  const int n = problem.agents();
  const Vector mask = free_mask(n, mode);
  std::vector<int> free;
  for (int k = 0; k < mask.size(); ++k) {
    if (mask(k) != 0.0) free.push_back(k);
  }
  const int parts = static_cast<int>(std::lround(1.0 / step));
  const int d = static_cast<int>(free.size());

  GridSearchResult out;
  std::vector<int> counts(d, 0);
  double guess = 1.0;
  Vector y = Vector::Zero(mask.size());

  // Compositions of `parts` into d nonnegative integers, last entry implied.
  std::function<void(int, int)> visit = [&](int pos, int remaining) {
    if (pos == d - 1) {
      counts[pos] = remaining;
      for (int k = 0; k < d; ++k) y(free[k]) = counts[k] * step;
      ++out.points;
      auto scaled = scale_with_guess(problem, y, budget, false, guess);
      if (!scaled) return;
      guess = scaled->scale;
      if (scaled->eval.welfare > out.welfare) {
        out.welfare = scaled->eval.welfare;
        out.x = scaled->x;
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[pos] = c;
      visit(pos + 1, remaining - c);
    }
  };
  if (d > 0) visit(0, parts);
  return out;
}

MultiplierEstimate estimate_multiplier(const Vector& x, const Vector& welfare_grad,
                                       const Vector& payment_grad, int n, SubsidyMode mode) {
  const Vector mask = free_mask(n, mode);
  const double tol = subsidy_tolerance(x);

  auto fit = [&](int from, int to) -> std::optional<double> {
    double num = 0.0, den = 0.0;
    for (int k = from; k < to; ++k) {
      if (mask(k) == 0.0 || x(k) <= tol) continue;
      num += welfare_grad(k) * payment_grad(k);
      den += payment_grad(k) * payment_grad(k);
    }
    if (den <= 0.0) return std::nullopt;
    return num / den;
  };

  MultiplierEstimate out;
  auto lambda = fit(0, n);
  if (!lambda) {
    lambda = fit(n, static_cast<int>(x.size()));
    out.from_action_subsidies = false;
  }
  if (!lambda) {
    throw DegenerateMultiplier("no subsidized coordinate to estimate the budget multiplier from");
  }
  out.lambda = *lambda;
  out.stationarity = (welfare_grad - out.lambda * payment_grad).cwiseProduct(mask);
  out.scale = std::max({welfare_grad.cwiseProduct(mask).cwiseAbs().maxCoeff(),
                        std::abs(out.lambda) * payment_grad.cwiseProduct(mask).cwiseAbs().maxCoeff(),
                        1e-300});
  double worst = 0.0;
  for (int k = 0; k < x.size(); ++k) {
    if (mask(k) == 0.0) continue;
    const double dl = out.stationarity(k);
    worst = std::max(worst, x(k) > tol ? std::abs(dl) : std::max(0.0, dl));
  }
  out.max_residual = worst / out.scale;
  return out;
}

}  // namespace netgame
