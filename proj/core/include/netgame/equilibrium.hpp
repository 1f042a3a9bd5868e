#pragma once

#include <algorithm>
#include <functional>
#include <utility>
#include <vector>

#include "netgame/model.hpp"

namespace netgame {

struct SolverOptions {
  double tol_fixpoint = 1e-12;  // sup-norm change between rounds
  long max_iter = 100000;
  double action_cap = 1e6;      // divergence past this means no equilibrium
  double binding_tol = 1e-12;   // a_i > tol counts as a binding action FOC
  // Called after every round with the current iterate; used by tests that
  // check monotone convergence.
  std::function<void(long, const StrategyProfile&)> observer;
};

// Reads NETGAME_MAX_ITER from the environment when set.
SolverOptions solver_options_from_environment();

enum class EquilibriumStatus { kConverged, kNonExistent, kNonConvergent };

const char* to_string(EquilibriumStatus status);

// b + beta and s + sigma. Best responses depend on the intervention only
// through these sums, which lets the finite-difference oracle and the
// planner probe perturbations that would leave the subsidy orthant.
struct EffectiveIncentives {
  Vector action;
  Matrix link;
};

EffectiveIncentives effective_incentives(const GameParameters& p, const Intervention& iv);

struct EquilibriumReport {
  StrategyProfile profile;
  EquilibriumStatus status = EquilibriumStatus::kNonConvergent;
  bool converged = false;
  bool exists = false;
  long iterations = 0;
  double foc_residual_max = 0.0;
  std::vector<int> binding_actions;                   // the set S
  std::vector<std::pair<int, int>> binding_links;     // ordered pairs (i, j), g_ij > tol
  Eigen::Array<bool, Eigen::Dynamic, 1> action_binds;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> link_binds;
};

Vector best_response_actions(const GameParameters& p, const Intervention& iv,
                             const StrategyProfile& sp);
Matrix best_response_links(const GameParameters& p, const Intervention& iv,
                           const StrategyProfile& sp);

// Best-response iteration from the zero profile: every round updates all
// actions simultaneously, then all links against the new actions.
EquilibriumReport solve_equilibrium(const GameParameters& p, const Intervention& iv,
                                    const SolverOptions& opts = {});
EquilibriumReport solve_equilibrium(const GameParameters& p, const EffectiveIncentives& inc,
                                    const SolverOptions& opts = {});

struct Prop1Residuals {
  double action_residual = 0.0;  // max |(C_S - rho G_S) a_S - (b + beta)_S|
  double link_residual = 0.0;    // max |g_ij - (rho a_i a_j + s_ij + sigma_ij) / f_ij| on binding links
  double corner_violation = 0.0; // max positive marginal utility at a corner
  bool binding_sets_consistent = true;

  double max() const { return std::max({action_residual, link_residual, corner_violation}); }
};

// Checks the first-order characterization of an equilibrium profile. Works
// on any report (or hand-built profile) and never throws on bad residuals.
Prop1Residuals verify_proposition1(const GameParameters& p, const Intervention& iv,
                                   const EquilibriumReport& report, double binding_tol = 1e-12);

// Classifies binding sets of an arbitrary profile and fills the report
// bookkeeping. Exposed for hand-built profiles in tests and sensitivities.
EquilibriumReport make_report(StrategyProfile profile, double binding_tol = 1e-12);

}  // namespace netgame
