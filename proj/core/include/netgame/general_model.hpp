#pragma once

#include <string>
#include <vector>

#include "netgame/equilibrium.hpp"
#include "netgame/model.hpp"
#include "netgame/optimizer.hpp"
#include "netgame/planner.hpp"

namespace netgame {

/// Power-function primitives of the generalized game.
///
/// Action cost C_i(a) = c_i a^eta_i / eta_i, link cost F_ij(g) = f_ij g^gamma_ij
/// (no 1/2, so the quadratic game is recovered with f halved), spillover
/// u_ij(a) = omega_ij a^kappa_ij and its partner side u~_ij = u_ji. The scale
/// parameters b, c, s, f and rho come from the accompanying GameParameters.
struct PowerFamilySpec {
  Vector eta;    // per agent, >= 2
  Matrix gamma;  // per ordered pair, > 1
  Matrix kappa;  // per ordered pair, > 0
  Matrix omega;  // per ordered pair, > 0

  // Every exponent equal: eta, gamma, kappa and omega = 1.
  static PowerFamilySpec uniform(int n, double eta, double gamma, double kappa);

  int n() const { return static_cast<int>(eta.size()); }
  // Throws InvalidParameters on any violated range.
  void validate(int n) const;
};

enum class Curvature { kSuper, kSub, kBoth };

const char* to_string(Curvature c);

// g F''(g) versus F'(g) for F(g) = f g^gamma.
Curvature classify_cost(double gamma);
// a u'(a) versus u(a) for u(a) = omega a^kappa.
Curvature classify_spillover(double kappa);

// Checks the defining inequality of the claimed class on a log-spaced grid
// over (1e-6, 1e3); returns false when any point violates it beyond round-off.
bool verify_cost_class(double f, double gamma, Curvature claimed);
bool verify_spillover_class(double omega, double kappa, Curvature claimed);

// C_i(a_i) is taken from the spec; p.c() supplies the c_i scale and p.f()
// the f_ij scale of the link cost.
double general_utility(const PowerFamilySpec& spec, const GameParameters& p,
                       const Intervention& iv, const StrategyProfile& sp, int i);

// Actions maximize the utility given the others' actions and the current
// links; links are in closed form against the new actions. Throws
// IllPosedBestResponse when an agent's utility is unbounded on [0, cap].
StrategyProfile general_best_response(const PowerFamilySpec& spec, const GameParameters& p,
                                      const Intervention& iv, const StrategyProfile& sp,
                                      const SolverOptions& opts = {});

EquilibriumReport solve_general_equilibrium(const PowerFamilySpec& spec, const GameParameters& p,
                                            const Intervention& iv,
                                            const SolverOptions& opts = {});
EquilibriumReport solve_general_equilibrium(const PowerFamilySpec& spec, const GameParameters& p,
                                            const EffectiveIncentives& inc,
                                            const SolverOptions& opts = {});

// Planner problem on the generalized game, with central-difference gradients.
class GeneralPlannerProblem : public PlannerProblem {
 public:
  GeneralPlannerProblem(PowerFamilySpec spec, GameParameters p, WelfareSpec w,
                        SolverOptions opts = {}, double fd_step = 1e-6);

  int agents() const override { return p_.n(); }
  PlannerEvaluation evaluate(const Vector& x, bool with_gradient) const override;

 private:
  PlannerEvaluation value(const Vector& x) const;

  PowerFamilySpec spec_;
  GameParameters p_;
  WelfareSpec w_;
  SolverOptions opts_;
  double h_;
};

OptimizationResult optimize_general(const PowerFamilySpec& spec, const GameParameters& p,
                                    const WelfareSpec& w, double budget,
                                    SubsidyMode mode = SubsidyMode::kFull,
                                    const OptimizerOptions& opts = {},
                                    const SolverOptions& solver = {});

struct RegimeVerdict {
  int i = 0;
  int j = 0;
  std::string part;  // "i", "ii" or empty when neither set of hypotheses holds
  double s = 0.0;
  double sigma = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::kNotApplicable;
};

struct RegimeReport {
  std::vector<RegimeVerdict> pairs;
  bool kkt_clean = false;
  int count(Verdict v) const;
};

// Part (i): s >= 0, both link costs super-quadratic, both spillover sides
// sub-linear => sigma <= 1e-3 max(1, |s|). Part (ii): s < 0, both link costs
// sub-quadratic, both sides super-linear, beta_i, beta_j > 0 and G_ij > 0
// => sigma > 1e-3 |s|. Welfare must depend on actions only.
RegimeReport check_theorem3(const PowerFamilySpec& spec, const GameParameters& p,
                            const WelfareSpec& w, const OptimizationResult& result);

}  // namespace netgame
