#pragma once

// Dense primal-dual interior-point solver for block-diagonal Hermitian
// semidefinite programs in standard form
//
//   primal:  min / max  <C, X>   s.t.  <A_i, X> = b_i,  X >= 0
//   dual  (min sense):  max  b^T y  s.t.  C - sum_i y_i A_i >= 0
//   dual  (max sense):  min  b^T y  s.t.  sum_i y_i A_i - C >= 0
//
// with <A, X> = Re Tr(A X). Complex blocks are handled through the real
// symmetric embedding [[Re, -Im], [Im, Re]].

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdiv/linalg.hpp"

namespace qdiv {

enum class SdpSense { Minimize, Maximize };
enum class SdpStatus { Optimal, MaxIter, InfeasibleDetected, NumericalFailure };
std::string to_string(SdpStatus s);

/// Block-diagonal data. A 0x0 matrix stands for a zero block.
class SdpProblem {
 public:
  SdpSense sense = SdpSense::Minimize;

  /// Returns the index of the new block.
  int add_block(Eigen::Index dim);
  /// Adds a constraint with right-hand side b and returns its index.
  int add_constraint(double b);

  void set_objective(int block, const CMatrix& c);
  void set_coefficient(int constraint, int block, const CMatrix& a);

  const std::vector<Eigen::Index>& blocks() const noexcept { return blocks_; }
  const std::vector<CMatrix>& objective() const noexcept { return c_; }
  const std::vector<std::vector<CMatrix>>& constraints() const noexcept { return a_; }
  const std::vector<double>& rhs() const noexcept { return b_; }
  std::size_t num_constraints() const noexcept { return b_.size(); }

  /// Checks block structure and Hermiticity (1e-12 relative).
  void validate() const;

 private:
  std::vector<Eigen::Index> blocks_;
  std::vector<CMatrix> c_;
  std::vector<std::vector<CMatrix>> a_;
  std::vector<double> b_;
};

struct SdpOptions {
  int max_iterations = 200;
  /// Iterations stop early once every measure is below this level...
  double target_tolerance = 1e-10;
  /// ...and an iterate is still reported optimal if it reaches this one.
  double accept_tolerance = 1e-8;
};

struct SdpSolution {
  std::vector<CMatrix> x;
  std::vector<CMatrix> z;
  RVector y;
  double primal_value = 0.0;
  double dual_value = 0.0;
  /// primal_value - dual_value for minimization, the reverse for maximization.
  double gap = 0.0;
  /// Largest |<A_i,X> - b_i| / max(1, |b_i|).
  double primal_residual = 0.0;
  /// ||C - Z - sum y_i A_i||_F / (1 + ||C||_F) in the min-sense form.
  double dual_residual = 0.0;
  SdpStatus status = SdpStatus::NumericalFailure;
  int iterations = 0;
  std::string message;

  bool optimal() const noexcept { return status == SdpStatus::Optimal; }
};

SdpSolution solve(const SdpProblem& p, const SdpOptions& opts = {});

/// Same as solve but throws SolverError unless the status is optimal.
SdpSolution solve_or_throw(const SdpProblem& p, const std::string& what, const SdpOptions& opts = {});

/// [[Re h, -Im h], [Im h, Re h]]; doubles every eigenvalue's multiplicity and
/// every trace inner product.
RMatrix embed_hermitian(const CMatrix& h);
/// Inverse of embed_hermitian, averaging the redundant copies.
CMatrix extract_hermitian(const RMatrix& m);

/// Orthonormal basis of the d x d Hermitian matrices (trace inner product):
/// diagonal units, then (E_kl + E_lk)/sqrt2 and i(E_kl - E_lk)/sqrt2 for k < l.
std::vector<CMatrix> hermitian_basis(Eigen::Index d);

/// Debug dump {"blocks","C","A","b","sense"}; load validates.
nlohmann::json sdp_to_json(const SdpProblem& p);
SdpProblem sdp_from_json(const nlohmann::json& j);

}  // namespace qdiv
