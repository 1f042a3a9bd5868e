#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "netgame/model.hpp"

namespace netgame {

/// Welfare and payment of the selected equilibrium as functions of the
/// flattened decision vector x = [beta, sigma over PairIndex order].
///
/// Implementations may receive x with entries marginally outside the
/// subsidy orthant (finite differences); nonexistence is reported through
/// `exists`, never by throwing.
struct PlannerEvaluation {
  bool exists = false;
  double welfare = -std::numeric_limits<double>::infinity();
  double payment = std::numeric_limits<double>::infinity();
  Vector welfare_grad;  // empty when not requested or not available
  Vector payment_grad;
};

class PlannerProblem {
 public:
  virtual ~PlannerProblem() = default;
  virtual int agents() const = 0;
  int dimension() const { return agents() + agents() * (agents() - 1) / 2; }
  virtual PlannerEvaluation evaluate(const Vector& x, bool with_gradient) const = 0;
};

enum class SubsidyMode { kFull, kActionsOnly, kLinksOnly };

const char* to_string(SubsidyMode mode);
SubsidyMode subsidy_mode_from_string(const std::string& s);

// 1 for coordinates the mode lets the planner move, 0 for frozen ones.
Vector free_mask(int n, SubsidyMode mode);

struct OptimizerOptions {
  int random_starts = 32;
  std::uint64_t seed = 0;
  int max_iter = 500;
  double stationarity_tol = 1e-9;  // scale-relative projected-gradient stop
  int threads = 1;
  std::vector<Vector> extra_seeds;  // e.g. a restricted optimum to warm-start from
  // Grid cross-check for n <= 3; zero disables it.
  double grid_step_n2 = 0.02;
  double grid_step_n3 = 0.1;
};

struct StartTrace {
  int start = 0;
  std::string origin;  // "random", "actions-corner", "links-corner", "extra", "grid"
  int iterations = 0;
  double welfare = -std::numeric_limits<double>::infinity();
  double stationarity = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool feasible = false;
};

struct BudgetScaling {
  Vector x;
  PlannerEvaluation eval;
  double scale = 0.0;
};

// Scales the direction y so that the equilibrium payment equals the budget.
// Payment is nondecreasing along the ray (the selected equilibrium is
// monotone in subsidies), so a bracketing root finder applies; points where
// the equilibrium ceases to exist are treated as over budget. Returns
// nullopt when no scaling reaches the budget.
std::optional<BudgetScaling> scale_to_budget(const PlannerProblem& problem, const Vector& y,
                                             double budget, bool with_gradient);

struct BudgetSearchResult {
  Vector x;
  PlannerEvaluation eval;
  std::vector<StartTrace> trace;
  std::optional<double> grid_welfare;  // set when the grid cross-check ran
};

/// Multi-start projected gradient ascent on the budget surface.
///
/// The search variable y lives in the nonnegative orthant and is mapped to
/// x = t(y) y with payment(x) = budget. The gradient of welfare along that
/// map is grad W - lambda grad P with lambda = (grad W . x) / (grad P . x);
/// steps use Barzilai-Borwein lengths with a nonmonotone Armijo test.
BudgetSearchResult maximize_on_budget(const PlannerProblem& problem, double budget,
                                      SubsidyMode mode, const OptimizerOptions& opts);

struct GridSearchResult {
  Vector x;
  double welfare = -std::numeric_limits<double>::infinity();
  long points = 0;
};

// Exhaustive search over budget-scaled directions on the simplex of free
// coordinates with the given step. Uses only equilibrium solves.
GridSearchResult grid_search_oracle(const PlannerProblem& problem, double budget, SubsidyMode mode,
                                    double step);

struct MultiplierEstimate {
  double lambda = 0.0;
  bool from_action_subsidies = true;
  Vector stationarity;     // dL/dx = grad W - lambda grad P
  double max_residual = 0.0;  // scale-relative KKT violation
  double scale = 0.0;
};

// Least-squares budget multiplier over subsidized actions (falling back to
// subsidized links), then the complementary-slackness residual of every
// coordinate. Frozen coordinates of restricted modes are skipped.
MultiplierEstimate estimate_multiplier(const Vector& x, const Vector& welfare_grad,
                                       const Vector& payment_grad, int n, SubsidyMode mode);

// Coordinates at or below this are treated as unsubsidized.
double subsidy_tolerance(const Vector& x);

}  // namespace netgame
