#include "netgame/sensitivity.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "netgame/errors.hpp"

namespace netgame {
namespace {

constexpr double kMinRcond = 1e-13;
constexpr double kSolveResidualTol = 1e-8;

}  // namespace

SpilloverMatrix build_spillover_matrix(const GameParameters& p, const EquilibriumReport& report) {
  const int n = p.n();
  const auto& a = report.profile.a;
  const Matrix G = report.profile.G();
  SpilloverMatrix out{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double ft = 0.0;
      if (report.link_binds(i, j)) ft += 1.0 / p.f()(i, j);
      if (report.link_binds(j, i)) ft += 1.0 / p.f()(j, i);
      out.ftilde(i, j) = ft;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!report.action_binds(i)) continue;
    double diag = 0.0;
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      diag += out.ftilde(i, k) * a(k) * a(k);
      if (report.action_binds(k)) out.M(i, k) = G(i, k) + p.rho() * out.ftilde(i, k) * a(i) * a(k);
    }
    out.M(i, i) = p.rho() * diag;
  }
  return out;
}

EquilibriumLinearization::EquilibriumLinearization(const GameParameters& p,
                                                   const EquilibriumReport& report)
    : n_(p.n()),
      spill_(build_spillover_matrix(p, report)),
      binding_(report.binding_actions),
      min_eig_(std::numeric_limits<double>::infinity()),
      radius_(0.0),
      rcond_(1.0) {
  const int m = static_cast<int>(binding_.size());
  if (m == 0) return;
  system_.resize(m, m);
  Matrix scaled(m, m);
  for (int r = 0; r < m; ++r) {
    for (int q = 0; q < m; ++q) {
      const int i = binding_[r];
      const int j = binding_[q];
      system_(r, q) = (r == q ? p.c()(i) : 0.0) - p.rho() * spill_.M(i, j);
      scaled(r, q) = p.rho() * spill_.M(i, j) / std::sqrt(p.c()(i) * p.c()(j));
    }
  }
  lu_.compute(system_);
  rcond_ = lu_.rcond();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(system_, Eigen::EigenvaluesOnly);
  min_eig_ = eig.eigenvalues().minCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> eig_scaled(scaled, Eigen::EigenvaluesOnly);
  radius_ = eig_scaled.eigenvalues().cwiseAbs().maxCoeff();
}

Vector EquilibriumLinearization::solve(const Vector& rhs) const {
  Vector out = Vector::Zero(n_);
  const int m = static_cast<int>(binding_.size());
  if (m == 0) return out;
  if (!lu_.isInvertible() || rcond_ < kMinRcond) {
    throw SingularSystem("C - rho*M is singular on the binding set (rcond = " +
                         std::to_string(rcond_) + ")");
  }
  Vector r(m);
  for (int k = 0; k < m; ++k) r(k) = rhs(binding_[k]);
  Vector x = lu_.solve(r);
  x += lu_.solve(Vector(r - system_ * x));  // one step of iterative refinement
  const double resid = (r - system_ * x).cwiseAbs().maxCoeff();
  const double scale = system_.cwiseAbs().rowwise().sum().maxCoeff() * x.cwiseAbs().maxCoeff() +
                       r.cwiseAbs().maxCoeff();
  if (!x.allFinite() || resid > kSolveResidualTol * std::max(scale, 1e-300)) {
    throw SingularSystem("linear solve residual " + std::to_string(resid) +
                         " exceeds tolerance after refinement");
  }
  for (int k = 0; k < m; ++k) out(binding_[k]) = x(k);
  return out;
}

Vector d_actions_d_beta(const GameParameters& p, const Intervention& iv,
                        const EquilibriumReport& report, int i) {
  if (i < 0 || i >= p.n()) throw IndexOutOfRange("agent index " + std::to_string(i));
  (void)iv;
  if (!report.action_binds(i)) return Vector::Zero(p.n());
  const EquilibriumLinearization lin(p, report);
  return lin.solve(Vector::Unit(p.n(), i));
}

Vector d_actions_d_sigma(const GameParameters& p, const Intervention& iv,
                         const EquilibriumReport& report, int i, int j) {
  const int n = p.n();
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
    throw IndexOutOfRange("pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  (void)iv;
  const EquilibriumLinearization lin(p, report);
  const double ft = lin.spillover().ftilde(i, j);
  const auto& a = report.profile.a;
  Vector rhs = Vector::Zero(n);
  rhs(i) = p.rho() * ft * a(j);
  rhs(j) = p.rho() * ft * a(i);
  if (rhs.isZero(0.0)) return Vector::Zero(n);
  return lin.solve(rhs);
}

EquilibriumJacobian equilibrium_jacobian(const GameParameters& p, const EquilibriumReport& report,
                                         const EquilibriumLinearization& lin) {
  const int n = p.n();
  const PairIndex pairs(n);
  const int dim = n + pairs.size();
  const auto& a = report.profile.a;
  const Matrix& ft = lin.spillover().ftilde;
  EquilibriumJacobian jac{Matrix::Zero(n, dim), Matrix::Zero(pairs.size(), dim)};

  for (int i = 0; i < n; ++i) {
    if (report.action_binds(i)) jac.da.col(i) = lin.solve(Vector::Unit(n, i));
  }
  for (int k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    Vector rhs = Vector::Zero(n);
    rhs(i) = p.rho() * ft(i, j) * a(j);
    rhs(j) = p.rho() * ft(i, j) * a(i);
    if (!rhs.isZero(0.0)) jac.da.col(n + k) = lin.solve(rhs);
  }
  // Binding directions satisfy f_kl g_kl = s_kl + sigma_kl + rho a_k a_l.
  for (int q = 0; q < pairs.size(); ++q) {
    const auto [k, l] = pairs[q];
    if (ft(k, l) == 0.0) continue;
    jac.dG.row(q) = p.rho() * ft(k, l) * (a(k) * jac.da.row(l) + a(l) * jac.da.row(k));
    jac.dG(q, n + q) += ft(k, l);
  }
  return jac;
}

PlannerGradients planner_gradients(const WelfareSpec& w, const GameParameters& p,
                                   const Intervention& iv, const EquilibriumReport& report,
                                   const EquilibriumJacobian& jac) {
  const int n = p.n();
  const PairIndex pairs(n);
  const Matrix G = report.profile.G();
  PlannerGradients out;
  if (w.kind() == WelfareSpec::Kind::kWeightedActionSum) {
    out.welfare = jac.da.transpose() * w.weights();
  } else {
    out.welfare = 2.0 * jac.dG.colwise().sum().transpose();
  }
  Vector sigma_pairs(pairs.size());
  for (int q = 0; q < pairs.size(); ++q) sigma_pairs(q) = iv.sigma()(pairs[q].first, pairs[q].second);
  out.payment = jac.da.transpose() * iv.beta() + 2.0 * jac.dG.transpose() * sigma_pairs;
  out.payment.head(n) += report.profile.a;
  for (int q = 0; q < pairs.size(); ++q) {
    out.payment(n + q) += 2.0 * G(pairs[q].first, pairs[q].second);
  }
  return out;
}

SensitivityReport d_welfare(const WelfareSpec& w, const GameParameters& p, const Intervention& iv,
                            const EquilibriumReport& report) {
  const int n = p.n();
  const PairIndex pairs(n);
  const EquilibriumLinearization lin(p, report);
  const EquilibriumJacobian jac = equilibrium_jacobian(p, report, lin);
  const PlannerGradients grad = planner_gradients(w, p, iv, report, jac);
  const auto& a = report.profile.a;

  SensitivityReport out;
  out.da_dbeta = jac.da.leftCols(n);
  out.da_dsigma = jac.da.rightCols(pairs.size());
  out.dW_dbeta = grad.welfare.head(n);
  out.dW_dsigma = grad.welfare.tail(pairs.size());
  out.lemma1_residual.resize(pairs.size());
  for (int q = 0; q < pairs.size(); ++q) {
    const auto [i, j] = pairs[q];
    out.lemma1_residual(q) =
        out.dW_dsigma(q) - p.rho() * lin.spillover().ftilde(i, j) *
                               (out.dW_dbeta(i) * a(j) + out.dW_dbeta(j) * a(i));
  }
  out.spillover = lin.spillover();
  out.well_posed = true;
  out.min_eigenvalue = lin.min_eigenvalue();
  out.spillover_radius = lin.spillover_radius();
  return out;
}

namespace {

EffectiveIncentives perturbed(const EffectiveIncentives& base, ParameterSelector sel, double delta,
                              int n) {
  EffectiveIncentives out = base;
  if (sel.kind == ParameterSelector::Kind::kBeta) {
    if (sel.i < 0 || sel.i >= n) throw IndexOutOfRange("agent index " + std::to_string(sel.i));
    out.action(sel.i) += delta;
  } else {
    if (sel.i < 0 || sel.j < 0 || sel.i >= n || sel.j >= n || sel.i == sel.j) {
      throw IndexOutOfRange("pair selector");
    }
    out.link(sel.i, sel.j) += delta;
    out.link(sel.j, sel.i) += delta;
  }
  return out;
}

std::pair<EquilibriumReport, EquilibriumReport> solve_pair(const GameParameters& p,
                                                           const Intervention& iv,
                                                           ParameterSelector sel, double h,
                                                           const SolverOptions& opts) {
  const auto base = effective_incentives(p, iv);
  auto plus = solve_equilibrium(p, perturbed(base, sel, h, p.n()), opts);
  auto minus = solve_equilibrium(p, perturbed(base, sel, -h, p.n()), opts);
  if (!plus.converged || !minus.converged) {
    throw OracleUnavailable("perturbed equilibrium did not converge");
  }
  return {std::move(plus), std::move(minus)};
}

}  // namespace

Vector finite_difference_oracle(const GameParameters& p, const Intervention& iv,
                                ParameterSelector sel, double h, const SolverOptions& opts) {
  const auto [plus, minus] = solve_pair(p, iv, sel, h, opts);
  return (plus.profile.a - minus.profile.a) / (2.0 * h);
}

double finite_difference_welfare(const WelfareSpec& w, const GameParameters& p,
                                 const Intervention& iv, ParameterSelector sel, double h,
                                 const SolverOptions& opts) {
  const auto [plus, minus] = solve_pair(p, iv, sel, h, opts);
  return (welfare(w, plus.profile) - welfare(w, minus.profile)) / (2.0 * h);
}

}  // namespace netgame
