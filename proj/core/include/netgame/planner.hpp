#pragma once

#include <optional>
#include <string>
#include <vector>

#include "netgame/equilibrium.hpp"
#include "netgame/model.hpp"
#include "netgame/optimizer.hpp"

namespace netgame {

/// Welfare and payment of the best-response selection in the quadratic
/// model, with analytic gradients from the equilibrium linearization.
class EndogenousPlannerProblem : public PlannerProblem {
 public:
  EndogenousPlannerProblem(GameParameters p, WelfareSpec w, SolverOptions opts = {});

  int agents() const override { return p_.n(); }
  PlannerEvaluation evaluate(const Vector& x, bool with_gradient) const override;

  const GameParameters& parameters() const { return p_; }
  const WelfareSpec& welfare_spec() const { return w_; }
  const SolverOptions& solver_options() const { return opts_; }

 private:
  GameParameters p_;
  WelfareSpec w_;
  SolverOptions opts_;
};

struct KKTReport {
  Vector R_prime;             // dL/da pulled back through (C - rho M)^{-1}
  Vector stationarity_beta;   // R'_i - lambda a_i
  Vector stationarity_sigma;  // per pair, PairIndex order
  Vector generic_stationarity;  // grad W - lambda grad P on the decision vector
  double lambda_hat = 0.0;
  bool lambda_from_actions = true;
  double max_residual = 0.0;     // scale-relative complementarity violation
  double route_discrepancy = 0.0;  // closed-form vs chain-rule stationarity, scale-relative
  bool budget_binding = false;
  bool clean = false;
};

constexpr double kKktTol = 1e-4;

struct OptimizationResult {
  Intervention best = Intervention::zero(2);
  double welfare_value = 0.0;
  double payment = 0.0;
  double lambda_hat = 0.0;
  std::optional<KKTReport> kkt;  // empty when the multiplier is unidentifiable
  std::string kkt_error;
  std::vector<StartTrace> trace;
  EquilibriumReport equilibrium;
  SubsidyMode mode = SubsidyMode::kFull;
  std::optional<double> grid_welfare;
  bool kkt_clean() const { return kkt && kkt->clean; }
};

// Budget-constrained welfare maximization over nonnegative subsidies.
// Throws NoFeasibleIntervention when the unsubsidized game has no equilibrium.
OptimizationResult optimize_intervention(const GameParameters& p, const WelfareSpec& w,
                                         double budget, const OptimizerOptions& opts = {},
                                         const SolverOptions& solver = {});

OptimizationResult restricted_optimize(const GameParameters& p, const WelfareSpec& w,
                                       double budget, SubsidyMode mode,
                                       const OptimizerOptions& opts = {},
                                       const SolverOptions& solver = {});

KKTReport kkt_check(const GameParameters& p, const WelfareSpec& w,
                    const OptimizationResult& result);

enum class Verdict { kPass, kViolation, kNotApplicable, kFlagged };

const char* to_string(Verdict v);

struct PairVerdict {
  int i = 0;
  int j = 0;
  std::string part;  // "i" or "ii", empty when no part applies
  double s = 0.0;
  double sigma = 0.0;
  double expected = 0.0;  // 0 for part (i), |s|/2 for part (ii)
  double tolerance = 0.0;
  Verdict verdict = Verdict::kNotApplicable;
};

struct StructureReport {
  std::vector<PairVerdict> pairs;
  bool kkt_clean = false;
  int count(Verdict v) const;
};

// Link-subsidy structure at an optimum whose welfare depends on actions
// only. Pairs are flagged instead of judged when the optimum is not
// KKT-clean with a binding budget.
StructureReport check_theorem1_structure(const GameParameters& p, const WelfareSpec& w,
                                         const OptimizationResult& result);

// 1e-3 * max(1, |s|).
double structure_tolerance(double s);

}  // namespace netgame
