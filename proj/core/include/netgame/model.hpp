#pragma once

#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace netgame {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// The economy: standalone action incentives b, action-cost curvatures c,
/// symmetric link incentives s, link-cost curvatures f and the global
/// complementarity strength rho.
///
/// Construction validates every invariant and stores s as an exactly
/// symmetric matrix with zero diagonal. Inputs whose asymmetry exceeds
/// round-off are rejected rather than silently averaged.
class GameParameters {
 public:
  GameParameters(Vector b, Vector c, Matrix s, Matrix f, double rho);

  int n() const { return static_cast<int>(b_.size()); }
  const Vector& b() const { return b_; }
  const Vector& c() const { return c_; }
  const Matrix& s() const { return s_; }
  const Matrix& f() const { return f_; }
  double rho() const { return rho_; }

  // 1/f_ij + 1/f_ji.
  double ftilde(int i, int j) const { return 1.0 / f_(i, j) + 1.0 / f_(j, i); }

  GameParameters with_b(Vector b) const;
  GameParameters with_s(Matrix s) const;
  GameParameters with_rho(double rho) const;

 private:
  Vector b_;
  Vector c_;
  Matrix s_;
  Matrix f_;
  double rho_;
};

/// Per-unit action subsidies beta, symmetric per-unit link subsidies sigma
/// and the planner budget.
class Intervention {
 public:
  Intervention(Vector beta, Matrix sigma,
               double budget = std::numeric_limits<double>::infinity());

  static Intervention zero(int n, double budget = std::numeric_limits<double>::infinity());

  int n() const { return static_cast<int>(beta_.size()); }
  const Vector& beta() const { return beta_; }
  const Matrix& sigma() const { return sigma_; }
  double budget() const { return budget_; }

 private:
  Vector beta_;
  Matrix sigma_;
  double budget_;
};

/// Actions a and directed link intensities g (g(i,j) is i's investment in
/// the link to j).
struct StrategyProfile {
  Vector a;
  Matrix g;

  static StrategyProfile zero(int n) { return {Vector::Zero(n), Matrix::Zero(n, n)}; }

  int n() const { return static_cast<int>(a.size()); }
  // Undirected link strengths G_ij = g_ij + g_ji.
  Matrix G() const { return g + g.transpose(); }
};

class WelfareSpec {
 public:
  enum class Kind { kWeightedActionSum, kLinkWeightSum };

  static WelfareSpec weighted_action_sum(Vector weights);
  static WelfareSpec action_sum(int n) { return weighted_action_sum(Vector::Ones(n)); }
  static WelfareSpec link_weight_sum() { return WelfareSpec(Kind::kLinkWeightSum, Vector()); }

  Kind kind() const { return kind_; }
  const Vector& weights() const { return weights_; }
  bool depends_on_actions_only() const { return kind_ == Kind::kWeightedActionSum; }

 private:
  WelfareSpec(Kind kind, Vector weights) : kind_(kind), weights_(std::move(weights)) {}

  Kind kind_;
  Vector weights_;
};

double agent_utility(const GameParameters& p, const Intervention& iv, const StrategyProfile& sp,
                     int i);

// Sum_i beta_i a_i + Sum_i Sum_{j != i} sigma_ij G_ij. The double sum runs over
// ordered pairs, so every undirected link is paid twice.
double planner_payment(const Intervention& iv, const StrategyProfile& sp);

double welfare(const WelfareSpec& w, const StrategyProfile& sp);

// Unordered pairs (i < j) in lexicographic order. Link subsidies live on
// these pairs when an intervention is flattened into a decision vector.
class PairIndex {
 public:
  explicit PairIndex(int n);

  int n() const { return n_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  const std::pair<int, int>& operator[](int k) const { return pairs_[k]; }
  int id(int i, int j) const;
  const std::vector<std::pair<int, int>>& pairs() const { return pairs_; }

 private:
  int n_;
  std::vector<std::pair<int, int>> pairs_;
};

// Decision vector layout: [beta_0 .. beta_{n-1}, sigma over PairIndex order].
Vector to_decision_vector(const Intervention& iv);
Intervention from_decision_vector(const Vector& x, int n,
                                  double budget = std::numeric_limits<double>::infinity());

}  // namespace netgame
