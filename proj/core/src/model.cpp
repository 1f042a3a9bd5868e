#include "netgame/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "netgame/errors.hpp"

namespace netgame {
namespace {

constexpr double kSymmetryTol = 1e-12;

bool all_finite(const Matrix& m) { return m.allFinite(); }

// Checks |m_ij - m_ji| against round-off, then returns the exact symmetric
// part with a zero diagonal.
Matrix symmetrized(const Matrix& m, const char* name) {
  const auto n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double scale = std::max({1.0, std::abs(m(i, j)), std::abs(m(j, i))});
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTol * scale) {
        throw InvalidParameters(std::string(name) + " must be symmetric; entry (" +
                                std::to_string(i) + "," + std::to_string(j) + ") differs");
      }
    }
  }
  Matrix out = 0.5 * (m + m.transpose());
  out.diagonal().setZero();
  return out;
}

}  // namespace

GameParameters::GameParameters(Vector b, Vector c, Matrix s, Matrix f, double rho)
    : b_(std::move(b)), c_(std::move(c)), f_(std::move(f)), rho_(rho) {
  const auto n = b_.size();
  if (n < 2) throw InvalidParameters("need at least two agents");
  if (c_.size() != n || s.rows() != n || s.cols() != n || f_.rows() != n || f_.cols() != n) {
    throw InvalidParameters("parameter dimensions do not match n = " + std::to_string(n));
  }
  if (!b_.allFinite() || !c_.allFinite() || !all_finite(s) || !std::isfinite(rho)) {
    throw InvalidParameters("parameters must be finite");
  }
  if ((c_.array() <= 0.0).any()) throw InvalidParameters("action costs c_i must be > 0");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && !(f_(i, j) > 0.0 && std::isfinite(f_(i, j)))) {
        throw InvalidParameters("link costs f_ij must be finite and > 0 off the diagonal");
      }
    }
  }
  if (rho < 0.0) throw InvalidParameters("rho must be >= 0");
  s_ = symmetrized(s, "s");
  f_.diagonal().setZero();
}

GameParameters GameParameters::with_b(Vector b) const {
  return GameParameters(std::move(b), c_, s_, f_, rho_);
}

GameParameters GameParameters::with_s(Matrix s) const {
  return GameParameters(b_, c_, std::move(s), f_, rho_);
}

GameParameters GameParameters::with_rho(double rho) const {
  return GameParameters(b_, c_, s_, f_, rho);
}

Intervention::Intervention(Vector beta, Matrix sigma, double budget)
    : beta_(std::move(beta)), budget_(budget) {
  const auto n = beta_.size();
  if (sigma.rows() != n || sigma.cols() != n) {
    throw InvalidParameters("sigma must be n x n");
  }
  if (!beta_.allFinite() || !sigma.allFinite()) throw InvalidParameters("subsidies must be finite");
  if ((beta_.array() < 0.0).any()) throw InvalidParameters("action subsidies must be >= 0");
  sigma_ = symmetrized(sigma, "sigma");
  if ((sigma_.array() < 0.0).any()) throw InvalidParameters("link subsidies must be >= 0");
  if (!(budget > 0.0)) throw InvalidParameters("budget must be > 0");
}

Intervention Intervention::zero(int n, double budget) {
  return Intervention(Vector::Zero(n), Matrix::Zero(n, n), budget);
}

WelfareSpec WelfareSpec::weighted_action_sum(Vector weights) {
  if (weights.size() == 0 || !weights.allFinite() || (weights.array() <= 0.0).any()) {
    throw InvalidParameters("welfare weights must be finite and > 0");
  }
  return WelfareSpec(Kind::kWeightedActionSum, std::move(weights));
}

double agent_utility(const GameParameters& p, const Intervention& iv, const StrategyProfile& sp,
                     int i) {
  const int n = p.n();
  if (i < 0 || i >= n) throw IndexOutOfRange("agent index " + std::to_string(i));
  if (iv.n() != n || sp.n() != n || sp.g.rows() != n || sp.g.cols() != n) {
    throw InvalidParameters("profile/intervention size does not match the game");
  }
  const double ai = sp.a(i);
  double u = (p.b()(i) + iv.beta()(i)) * ai - 0.5 * p.c()(i) * ai * ai;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double Gij = sp.g(i, j) + sp.g(j, i);
    u += p.rho() * Gij * ai * sp.a(j);
    u += (p.s()(i, j) + iv.sigma()(i, j)) * Gij;
    u -= 0.5 * p.f()(i, j) * sp.g(i, j) * sp.g(i, j);
  }
  return u;
}

double planner_payment(const Intervention& iv, const StrategyProfile& sp) {
  const Matrix G = sp.G();
  return iv.beta().dot(sp.a) + iv.sigma().cwiseProduct(G).sum();
}

double welfare(const WelfareSpec& w, const StrategyProfile& sp) {
  switch (w.kind()) {
    case WelfareSpec::Kind::kWeightedActionSum:
      if (w.weights().size() != sp.a.size()) throw InvalidParameters("welfare weight count");
      return w.weights().dot(sp.a);
    case WelfareSpec::Kind::kLinkWeightSum:
      return sp.G().sum();
  }
  return 0.0;
}

PairIndex::PairIndex(int n) : n_(n) {
  pairs_.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs_.emplace_back(i, j);
  }
}

int PairIndex::id(int i, int j) const {
  if (i == j || i < 0 || j < 0 || i >= n_ || j >= n_) {
    throw IndexOutOfRange("pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  if (i > j) std::swap(i, j);
  // Offset of row i in the upper triangle, then column within the row.
  return i * n_ - i * (i + 1) / 2 + (j - i - 1);
}

Vector to_decision_vector(const Intervention& iv) {
  const int n = iv.n();
  const PairIndex pairs(n);
  Vector x(n + pairs.size());
  x.head(n) = iv.beta();
  for (int k = 0; k < pairs.size(); ++k) x(n + k) = iv.sigma()(pairs[k].first, pairs[k].second);
  return x;
}

Intervention from_decision_vector(const Vector& x, int n, double budget) {
  const PairIndex pairs(n);
  if (x.size() != n + pairs.size()) throw InvalidParameters("decision vector size");
  Matrix sigma = Matrix::Zero(n, n);
  for (int k = 0; k < pairs.size(); ++k) {
    sigma(pairs[k].first, pairs[k].second) = x(n + k);
    sigma(pairs[k].second, pairs[k].first) = x(n + k);
  }
  return Intervention(x.head(n), std::move(sigma), budget);
}

}  // namespace netgame
