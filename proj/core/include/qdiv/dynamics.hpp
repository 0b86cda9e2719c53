#pragma once

// Dynamical maps t -> Lambda_t on a time grid.
//
// Two sources: a GKSL generator (propagated by exact exponentiation when all
// rates are constant, otherwise by RK4 with Richardson step doubling), or a
// system + environment model reduced exactly, Lambda_t(rho) =
// Tr_E(U_t rho (x) rho_E U_t^dagger).
//
// Divisibility is only ever certified between consecutive grid points;
// refining the grid refines the claim.

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qdiv/linalg.hpp"
#include "qdiv/maps.hpp"
#include "qdiv/quantum.hpp"

namespace qdiv {

/// gamma(t) from a named form: constant(c), sinusoid(a, omega, phi) =
/// a sin(omega t + phi), neg_tanh() = -tanh t, piecewise_linear(knots)
/// (linear between knots, constant outside).
class RateFunction {
 public:
  static RateFunction constant(double c);
  static RateFunction sinusoid(double a, double omega, double phi);
  static RateFunction neg_tanh();
  static RateFunction piecewise_linear(std::vector<std::pair<double, double>> knots);

  double operator()(double t) const;
  bool is_constant() const noexcept { return form_ == Form::Constant; }

  nlohmann::json to_json() const;
  /// Accepts a bare number (constant) or {"form": ..., params}.
  static RateFunction from_json(const nlohmann::json& j);

 private:
  enum class Form { Constant, Sinusoid, NegTanh, PiecewiseLinear };
  Form form_ = Form::Constant;
  double a_ = 0.0;
  double omega_ = 0.0;
  double phi_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

/// L_t(X) = -i[H, X] + sum_i gamma_i(t) (V_i X V_i^dagger - {V_i^dagger V_i, X}/2).
struct GkslGenerator {
  Eigen::Index dim = 0;
  CMatrix h_eff;
  std::vector<CMatrix> jumps;
  std::vector<RateFunction> rates;

  void validate() const;
  bool is_constant() const;
  CMatrix superop(double t) const;
};

struct TotalSystemModel {
  Eigen::Index dim_s = 0;
  Eigen::Index dim_e = 0;
  CMatrix h_total;
  CMatrix env_state;

  void validate() const;
};

struct DynamicalMap {
  std::vector<double> grid;
  std::vector<QuantumMap> maps;
  nlohmann::json provenance;

  Eigen::Index dim() const { return maps.front().dim_in(); }
};

/// `steps` equally spaced points from 0 to t_max inclusive (steps >= 2).
std::vector<double> make_grid(double t_max, int steps);

/// tol bounds the estimated local error per unit time.
DynamicalMap propagate(const GkslGenerator& gen, const std::vector<double>& grid, double tol = 1e-10);
DynamicalMap reduce(const TotalSystemModel& model, const std::vector<double>& grid);

/// V_{t,s} = Lambda_t Lambda_s^{-1}; throws NonInvertibleError when
/// Lambda_s is too close to singular.
QuantumMap intermediate(const DynamicalMap& dm, std::size_t t_idx, std::size_t s_idx);

struct StepCertificate {
  std::size_t index = 0;  // certifies V_{t[index+1], t[index]}
  double t_from = 0.0;
  double t_to = 0.0;
  PositivityCertificate certificate;
  double tp_residual = 0.0;
};

struct KDivisibility {
  Eigen::Index k = 0;
  std::vector<StepCertificate> steps;
  /// True iff no step is certified negative.
  bool divisible_on_grid = true;
  std::size_t certified_negative_steps = 0;
};

struct DivisibilityReport {
  std::vector<KDivisibility> per_k;

  const KDivisibility* find(Eigen::Index k) const;
  nlohmann::json to_json() const;
};

/// k-positivity certificates for every consecutive intermediate map. Step j
/// uses the sub-seed derive_seed(seed, j).
DivisibilityReport divisibility_report(const DynamicalMap& dm, const std::vector<Eigen::Index>& ks,
                                       int restarts = 64, std::uint64_t seed = 0);

using Model = std::variant<GkslGenerator, TotalSystemModel>;

/// Named model library; see model_catalog() for names and parameters.
Model model(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

struct ModelInfo {
  std::string name;
  std::string summary;
  std::string params;
};
std::vector<ModelInfo> model_catalog();

/// Propagates or reduces, whichever the model calls for.
DynamicalMap evolve(const Model& m, const std::vector<double>& grid, double tol = 1e-10);

/// Qubit Pauli-basis eigenvalues (lambda_x, lambda_y, lambda_z) of a unital
/// qubit map, <sigma_i, m(sigma_i)> / 2.
Eigen::Vector3d pauli_eigenvalues(const QuantumMap& m);

}  // namespace qdiv
