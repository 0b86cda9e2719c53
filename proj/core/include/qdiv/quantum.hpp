#pragma once

// Quantum states and their multipartite structure.
//
// Tensor ordering convention (used everywhere in the library): for a
// bipartite space A (x) B the composite index is a * dim_b + b, i.e. the
// first factor is the most significant ("A-major"). Ancillas are always the
// first factor.

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdiv/linalg.hpp"

namespace qdiv {

/// Hermitian, positive semidefinite, unit-trace matrix.
class DensityOperator {
 public:
  /// Validates the invariants (Hermitian within 1e-10 relative, min
  /// eigenvalue >= -1e-9, trace 1 within 1e-9) and stores the Hermitian part.
  explicit DensityOperator(const CMatrix& m);

  static DensityOperator pure(const CVector& psi);
  static DensityOperator maximally_mixed(Eigen::Index dim);
  static DensityOperator basis(Eigen::Index dim, Eigen::Index index);

  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  const CMatrix& matrix() const noexcept { return matrix_; }
  operator const CMatrix&() const noexcept { return matrix_; }

  double purity() const;

 private:
  CMatrix matrix_;
};

enum class Subsystem { A, B };

/// Density operator on H_A (x) H_B with its factor dimensions.
class BipartiteState {
 public:
  BipartiteState(Eigen::Index dim_a, Eigen::Index dim_b, const CMatrix& m);
  BipartiteState(Eigen::Index dim_a, Eigen::Index dim_b, DensityOperator state);

  Eigen::Index dim_a() const noexcept { return dim_a_; }
  Eigen::Index dim_b() const noexcept { return dim_b_; }
  const DensityOperator& state() const noexcept { return state_; }
  const CMatrix& matrix() const noexcept { return state_.matrix(); }

 private:
  Eigen::Index dim_a_;
  Eigen::Index dim_b_;
  DensityOperator state_;
};

struct StateEnsemble {
  std::vector<double> probs;
  std::vector<DensityOperator> states;

  StateEnsemble(std::vector<double> p, std::vector<DensityOperator> s);
  std::size_t size() const noexcept { return probs.size(); }
  Eigen::Index dim() const { return states.front().dim(); }
};

struct Povm {
  std::vector<CMatrix> elements;

  /// Validates positivity and completeness within 1e-9.
  explicit Povm(std::vector<CMatrix> e);
};

/// Pure state on A (x) B (x) C, stored as a ket with A-major ordering.
struct TripartitePure {
  Eigen::Index dim_a;
  Eigen::Index dim_b;
  Eigen::Index dim_c;
  CVector psi;

  BipartiteState marginal_ab() const;
  BipartiteState marginal_ac() const;
  BipartiteState marginal_bc() const;
};

/// Partial trace of an operator on a multipartite space, keeping the
/// subsystems listed in `keep` (ascending, in the original order).
CMatrix partial_trace(const CMatrix& m, std::span<const Eigen::Index> dims,
                      std::span<const Eigen::Index> keep);

BipartiteState tensor(const DensityOperator& a, const DensityOperator& b);

/// Marginal on the subsystem that remains after tracing out `traced`.
DensityOperator partial_trace(const BipartiteState& s, Subsystem traced);

/// (1/sqrt(d)) sum_i |i>|i> on C^d (x) C^d.
BipartiteState max_entangled(Eigen::Index dim);
CVector max_entangled_ket(Eigen::Index dim);

/// Purification with an environment of dimension rank(s).
TripartitePure purify(const BipartiteState& s);

/// Singular values of the dim_a x dim_b coefficient matrix of psi.
RVector schmidt_coefficients(const CVector& psi, Eigen::Index dim_a, Eigen::Index dim_b);
Eigen::Index schmidt_rank(const CVector& psi, Eigen::Index dim_a, Eigen::Index dim_b);
/// Schmidt rank of a pure bipartite state; throws DomainError for mixed input.
Eigen::Index schmidt_rank(const BipartiteState& psi);

/// Pinching sum_k P_k x P_k over the eigenprojectors of sigma. Eigenvalues
/// within 1e-8 relative distance share one projector.
CMatrix pinch(const CMatrix& sigma, const CMatrix& x);

/// sum_i p_i |i><i| (x) rho_i.
BipartiteState make_cq(const std::vector<double>& probs, const std::vector<DensityOperator>& states);

/// Rank-truncated Ginibre state: G G^dagger / Tr with G a dim x rank Ginibre
/// matrix drawn from a generator seeded with `seed`.
DensityOperator random_density(Eigen::Index dim, Eigen::Index rank, std::uint64_t seed);
DensityOperator random_pure(Eigen::Index dim, std::uint64_t seed);

/// Matrix <-> {"re": [[...]], "im": [[...]]}.
nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j);

/// {"dims": [...], "re": ..., "im": ...}
nlohmann::json state_to_json(const DensityOperator& s);
nlohmann::json state_to_json(const BipartiteState& s);
DensityOperator density_from_json(const nlohmann::json& j);
BipartiteState bipartite_from_json(const nlohmann::json& j);

}  // namespace qdiv
