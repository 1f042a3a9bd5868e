#pragma once

#include <stdexcept>
#include <string>

namespace netgame {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instance data violates a model invariant (asymmetric s, non-positive cost...).
class InvalidParameters : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

// Best-response iteration hit the iteration cap without diverging.
class NonConvergent : public Error {
 public:
  using Error::Error;
};

// Best-response iteration diverged past the action cap: no equilibrium.
class NonExistent : public Error {
 public:
  using Error::Error;
};

// C - rho*M is singular on the binding set; the equilibrium is not
// differentiable there.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

class OracleUnavailable : public Error {
 public:
  using Error::Error;
};

class NoFeasibleIntervention : public Error {
 public:
  using Error::Error;
};

class DegenerateMultiplier : public Error {
 public:
  using Error::Error;
};

// The action first-order residual of the general model has no sign change
// on [0, action_cap]: the agent's utility is unbounded in its action.
class IllPosedBestResponse : public Error {
 public:
  using Error::Error;
};

}  // namespace netgame
