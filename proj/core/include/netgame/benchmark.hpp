#pragma once

#include <string>
#include <vector>

#include "netgame/equilibrium.hpp"
#include "netgame/model.hpp"
#include "netgame/optimizer.hpp"
#include "netgame/planner.hpp"

namespace netgame {

/// Equilibrium of the model in which links are formed first, from their
/// standalone value alone, and actions are then played on the fixed network.
struct BenchmarkEquilibrium {
  Matrix g_star;  // max(0, (s + sigma) / f), independent of actions
  Vector a_star;
  // 1 - spectral radius of rho C^{-1/2} G C^{-1/2} on the agents whose action
  // constraint binds (all agents when the profile is zero).
  double spectral_gap = 0.0;
  bool exists = false;
  EquilibriumStatus status = EquilibriumStatus::kNonConvergent;
  long iterations = 0;

  StrategyProfile profile() const { return {a_star, g_star}; }
};

// Links in closed form; actions by best-response iteration from zero on the
// frozen network. Divergence past the action cap is reported through
// `exists` and `status`.
BenchmarkEquilibrium solve_benchmark(const GameParameters& p, const Intervention& iv,
                                     const SolverOptions& opts = {});
BenchmarkEquilibrium solve_benchmark(const GameParameters& p, const EffectiveIncentives& inc,
                                     const SolverOptions& opts = {});

class BenchmarkPlannerProblem : public PlannerProblem {
 public:
  BenchmarkPlannerProblem(GameParameters p, WelfareSpec w, SolverOptions opts = {});

  int agents() const override { return p_.n(); }
  PlannerEvaluation evaluate(const Vector& x, bool with_gradient) const override;

 private:
  GameParameters p_;
  WelfareSpec w_;
  SolverOptions opts_;
};

// The planner problem on the benchmark model. The KKT report carries the
// chain-rule stationarity only; the closed-form fields stay empty.
OptimizationResult optimize_benchmark(const GameParameters& p, const WelfareSpec& w, double budget,
                                      SubsidyMode mode = SubsidyMode::kFull,
                                      const OptimizerOptions& opts = {},
                                      const SolverOptions& solver = {});

struct ThresholdVerdict {
  int i = 0;
  int j = 0;
  bool actions_subsidized = false;  // beta_i, beta_j > tol: product must not exceed threshold
  bool link_subsidized = false;     // sigma_ij > tol: product must reach threshold
  double product = 0.0;             // a_i a_j
  double threshold = 0.0;           // (s_ij + 2 sigma_ij) / rho
  double tolerance = 0.0;
  double equality_gap = 0.0;        // |product - threshold| when both apply
  Verdict verdict = Verdict::kNotApplicable;
};

struct ThresholdReport {
  std::vector<ThresholdVerdict> pairs;
  bool kkt_clean = false;
  int count(Verdict v) const;
};

ThresholdReport check_theorem2(const GameParameters& p, const OptimizationResult& result);

}  // namespace netgame
