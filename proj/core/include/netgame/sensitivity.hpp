#pragma once

#include <vector>

#include "netgame/equilibrium.hpp"
#include "netgame/model.hpp"

namespace netgame {

// M_ij = G*_ij + rho ft_ij a*_i a*_j,  M_ii = rho sum_k ft_ik (a*_k)^2,
// with ft_ij = 1/f_ij + 1/f_ji summed over the link directions that bind.
// Rows and columns of agents whose action constraint is slack are zero.
struct SpilloverMatrix {
  Matrix M;
  Matrix ftilde;
};

SpilloverMatrix build_spillover_matrix(const GameParameters& p, const EquilibriumReport& report);

/// Factorization of C - rho*M restricted to the binding actions.
///
/// Every equilibrium derivative in the quadratic model is a solve against
/// this matrix; the class owns the LU factors, the conditioning check and the
/// eigen-decomposition used to report how close the selection is to losing
/// differentiability.
class EquilibriumLinearization {
 public:
  EquilibriumLinearization(const GameParameters& p, const EquilibriumReport& report);

  // Solves (C - rho M) x = rhs on the binding set. Entries of rhs outside the
  // set are ignored and the matching entries of x are zero. Throws
  // SingularSystem when the system is numerically singular.
  Vector solve(const Vector& rhs) const;

  const SpilloverMatrix& spillover() const { return spill_; }
  const std::vector<int>& binding() const { return binding_; }
  // Smallest eigenvalue of C - rho M on the binding set (+inf if empty).
  double min_eigenvalue() const { return min_eig_; }
  // Spectral radius of rho C^{-1} M on the binding set.
  double spillover_radius() const { return radius_; }
  double rcond() const { return rcond_; }

 private:
  int n_;
  SpilloverMatrix spill_;
  std::vector<int> binding_;
  Eigen::FullPivLU<Matrix> lu_;
  Matrix system_;
  double min_eig_;
  double radius_;
  double rcond_;
};

Vector d_actions_d_beta(const GameParameters& p, const Intervention& iv,
                        const EquilibriumReport& report, int i);
Vector d_actions_d_sigma(const GameParameters& p, const Intervention& iv,
                         const EquilibriumReport& report, int i, int j);

// Jacobian of the equilibrium with respect to the decision vector
// [beta, sigma over PairIndex order].
struct EquilibriumJacobian {
  Matrix da;  // n x dim
  Matrix dG;  // pairs x dim, undirected link strength per pair
};

EquilibriumJacobian equilibrium_jacobian(const GameParameters& p, const EquilibriumReport& report,
                                         const EquilibriumLinearization& lin);

struct SensitivityReport {
  Matrix da_dbeta;           // column i = da*/dbeta_i
  Matrix da_dsigma;          // column k = da*/dsigma over pair k of PairIndex
  Vector dW_dbeta;           // the proof's R_i
  Vector dW_dsigma;          // per pair
  Vector lemma1_residual;    // dW/dsigma_ij - rho ft_ij (dW/dbeta_i a_j + dW/dbeta_j a_i)
  SpilloverMatrix spillover;
  bool well_posed = false;
  double min_eigenvalue = 0.0;
  double spillover_radius = 0.0;
};

SensitivityReport d_welfare(const WelfareSpec& w, const GameParameters& p, const Intervention& iv,
                            const EquilibriumReport& report);

// Gradients of welfare and planner payment with respect to the decision
// vector, by the chain rule through the equilibrium Jacobian.
struct PlannerGradients {
  Vector welfare;
  Vector payment;
};

PlannerGradients planner_gradients(const WelfareSpec& w, const GameParameters& p,
                                   const Intervention& iv, const EquilibriumReport& report,
                                   const EquilibriumJacobian& jac);

struct ParameterSelector {
  enum class Kind { kBeta, kSigma };
  Kind kind;
  int i;
  int j;

  static ParameterSelector beta(int i) { return {Kind::kBeta, i, -1}; }
  static ParameterSelector sigma(int i, int j) { return {Kind::kSigma, i, j}; }
};

// Central difference of the selected equilibrium's actions. The perturbation
// is applied to b + beta (or s + sigma), so a subsidy sitting at zero can
// still be differenced on both sides.
Vector finite_difference_oracle(const GameParameters& p, const Intervention& iv,
                                ParameterSelector sel, double h = 1e-6,
                                const SolverOptions& opts = {});

double finite_difference_welfare(const WelfareSpec& w, const GameParameters& p,
                                 const Intervention& iv, ParameterSelector sel, double h = 1e-6,
                                 const SolverOptions& opts = {});

}  // namespace netgame
