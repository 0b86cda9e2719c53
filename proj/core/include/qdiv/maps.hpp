#pragma once

// Linear maps on operators.
//
// A map is stored as its superoperator S acting on column-stacked operators,
// vec(Phi(X)) = S vec(X), so a Kraus operator K contributes conj(K) (x) K.
// The Choi matrix puts the output factor first:
//   J(Phi) = sum_ij Phi(|i><j|) (x) |i><j|,
// hence Tr_out J = I_in exactly when Phi is trace preserving.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdiv/linalg.hpp"

namespace qdiv {

class QuantumMap {
 public:
  /// Rejects superoperators that are not Hermiticity preserving (relative
  /// Choi asymmetry above 1e-9); the stored superoperator is the exact
  /// Hermiticity-preserving projection.
  QuantumMap(Eigen::Index dim_in, Eigen::Index dim_out, const CMatrix& superop);

  static QuantumMap identity(Eigen::Index dim);

  Eigen::Index dim_in() const noexcept { return dim_in_; }
  Eigen::Index dim_out() const noexcept { return dim_out_; }
  const CMatrix& superop() const noexcept { return superop_; }

  CMatrix apply(const CMatrix& x) const;

  QuantumMap operator+(const QuantumMap& other) const;
  QuantumMap operator-(const QuantumMap& other) const;
  QuantumMap operator*(double scale) const;

 private:
  Eigen::Index dim_in_;
  Eigen::Index dim_out_;
  CMatrix superop_;
};

inline QuantumMap operator*(double scale, const QuantumMap& m) { return m * scale; }

QuantumMap from_kraus(const std::vector<CMatrix>& ops);
QuantumMap from_choi(const CMatrix& j, Eigen::Index dim_in, Eigen::Index dim_out);
CMatrix choi(const QuantumMap& m);
/// Canonical (orthogonal) Kraus operators of a CP map. Throws DomainError if
/// the Choi matrix has an eigenvalue below -1e-9.
std::vector<CMatrix> kraus(const QuantumMap& m);

/// f after g.
QuantumMap compose(const QuantumMap& f, const QuantumMap& g);

/// Throws NonInvertibleError when sigma_min(S) <= 1e-10 sigma_max(S).
QuantumMap inverse(const QuantumMap& m);

/// Heisenberg-picture dual, Tr(A^dagger m(B)) = Tr(adjoint(m)(A)^dagger B).
QuantumMap adjoint(const QuantumMap& m);

/// id_k (x) m with the ancilla as first tensor factor.
QuantumMap amplify(const QuantumMap& m, Eigen::Index k);

struct CptpReport {
  bool cp = false;
  bool tp = false;
  double min_choi_eig = 0.0;
  double tp_residual = 0.0;
};
CptpReport is_cptp(const QuantumMap& m);

struct UnitalReport {
  bool unital = false;
  double residual = 0.0;
};
UnitalReport is_unital(const QuantumMap& m);

enum class PositivityVerdict { CertifiedNegative, HeuristicallyNonnegative };
std::string to_string(PositivityVerdict v);

/// Outcome of the search for a negative value of <psi|J(m)|psi> over unit
/// vectors psi on out (x) in with Schmidt rank at most k.
struct PositivityCertificate {
  Eigen::Index k = 0;
  double min_value = 0.0;
  /// Minimizer, ordered output-factor first like the Choi matrix.
  CVector witness;
  int restarts_used = 0;
  PositivityVerdict verdict = PositivityVerdict::HeuristicallyNonnegative;
};

inline constexpr double kCertifiedNegativeThreshold = -1e-8;

/// For k >= min(dim_in, dim_out) this is the exact minimum Choi eigenvalue.
/// Below that the minimum is searched by alternating exact minimization over
/// the two factors of psi = vec(L W^T), restarted from `restarts` random
/// points with sub-seeds derive_seed(seed, r). A negative verdict is a proof
/// (the witness is an explicit vector); a nonnegative one is not.
PositivityCertificate k_positivity(const QuantumMap& m, Eigen::Index k, int restarts = 64,
                                   std::uint64_t seed = 0);

nlohmann::json map_to_json(const QuantumMap& m);
/// Accepts {"dimIn","dimOut","superop":{re,im}} or {"kraus":[{re,im},...]}.
QuantumMap map_from_json(const nlohmann::json& j);

namespace channels {

QuantumMap identity(Eigen::Index dim);
QuantumMap unitary(const CMatrix& u);
/// (1-q) X + q Tr(X) I/d.
QuantumMap depolarizing(Eigen::Index dim, double q);
/// Qubit amplitude damping with decay probability p (|1> -> |0>).
QuantumMap amplitude_damping(double p);
/// (1-p) X + p Z X Z.
QuantumMap phase_flip(double p);
/// sum_i probs[i] s_i X s_i with s = (I, X, Y, Z).
QuantumMap pauli(const std::vector<double>& probs);
QuantumMap transposition(Eigen::Index dim);
/// X -> Tr(X) rho.
QuantumMap replacer(Eigen::Index dim_in, const CMatrix& rho);
/// Random CPTP map from a Haar-random Stinespring isometry.
QuantumMap random_cptp(Eigen::Index dim_in, Eigen::Index dim_out, Eigen::Index kraus_count,
                       std::uint64_t seed);

/// Pauli matrices indexed 0..3 (identity first).
CMatrix pauli_matrix(int index);

}  // namespace channels

}  // namespace qdiv
