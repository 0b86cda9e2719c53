#pragma once

// Unconstrained smooth minimization for the handful of low-dimensional
// variational problems in the library (sigma_B optimizations, channel
// fidelity search). Objectives may return +inf outside their domain; the
// line search backtracks away from such points.

#include <functional>

#include "qdiv/linalg.hpp"

namespace qdiv {

using Objective = std::function<double(const RVector&)>;

struct MinimizeOptions {
  int max_iterations = 400;
  /// Stop once the objective decreases by less than f_tolerance * (1 + |f|)
  /// on three consecutive iterations.
  double f_tolerance = 1e-13;
  double gradient_tolerance = 1e-10;
  /// Relative step of the central-difference gradient.
  double fd_step = 1e-6;
};

struct MinimizeResult {
  RVector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

RVector numerical_gradient(const Objective& f, const RVector& x, double step);

/// BFGS with Armijo backtracking and a central-difference gradient.
MinimizeResult minimize_bfgs(const Objective& f, RVector x0, const MinimizeOptions& options = {});

}  // namespace qdiv
