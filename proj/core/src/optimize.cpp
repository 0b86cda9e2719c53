#include "qdiv/optimize.hpp"

#include <cmath>
#include <limits>

namespace qdiv {

RVector numerical_gradient(const Objective& f, const RVector& x, double step) {
  RVector g(x.size());
  RVector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2 * h);
    } else {
      // One-sided fallback at the edge of the domain.
      const double f0 = f(x);
      g[i] = std::isfinite(fp) ? (fp - f0) / h : (std::isfinite(fm) ? (f0 - fm) / h : 0.0);
    }
  }
  return g;
}

MinimizeResult minimize_bfgs(const Objective& f, RVector x0, const MinimizeOptions& options) {
  const Eigen::Index n = x0.size();
  MinimizeResult result;
  result.x = std::move(x0);
  result.value = f(result.x);
  if (!std::isfinite(result.value) || n == 0) {
    result.converged = n == 0;
    return result;
  }

  RMatrix inv_hessian = RMatrix::Identity(n, n);
  RVector grad = numerical_gradient(f, result.x, options.fd_step);
  int small_steps = 0;
  bool just_reset = false;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    if (grad.norm() <= options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    RVector direction = -inv_hessian * grad;
    double slope = grad.dot(direction);
    if (slope >= 0) {
      inv_hessian.setIdentity();
      direction = -grad;
      slope = -grad.squaredNorm();
    }

    double step = 1.0;
    RVector candidate;
    double candidate_value = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      candidate = result.x + step * direction;
      candidate_value = f(candidate);
      if (std::isfinite(candidate_value) &&
          candidate_value <= result.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (just_reset) {
        result.converged = true;  // no descent direction left at working precision
        break;
      }
      inv_hessian.setIdentity();
      just_reset = true;
      continue;
    }
    just_reset = false;

    const RVector new_grad = numerical_gradient(f, candidate, options.fd_step);
    const RVector s = candidate - result.x;
    const RVector y = new_grad - grad;
    const double sy = s.dot(y);
    if (sy > 1e-16 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const RMatrix eye = RMatrix::Identity(n, n);
      inv_hessian = (eye - rho * s * y.transpose()) * inv_hessian * (eye - rho * y * s.transpose()) +
                    rho * s * s.transpose();
    }

    const double decrease = result.value - candidate_value;
    result.x = candidate;
    result.value = candidate_value;
    grad = new_grad;

    if (decrease <= options.f_tolerance * (1.0 + std::abs(result.value))) {
      if (++small_steps >= 3) {
        result.converged = true;
        break;
      }
    } else {
      small_steps = 0;
    }
  }
  return result;
}

}  // namespace qdiv
