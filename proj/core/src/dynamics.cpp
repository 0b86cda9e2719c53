#include "qdiv/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "qdiv/errors.hpp"
#include "qdiv/random.hpp"

namespace qdiv {

RateFunction RateFunction::constant(double c) {
  if (!std::isfinite(c)) throw DomainError("rate: constant must be finite");
  RateFunction r;
  r.form_ = Form::Constant;
  r.a_ = c;
  return r;
}

RateFunction RateFunction::sinusoid(double a, double omega, double phi) {
  if (!std::isfinite(a) || !std::isfinite(omega) || !std::isfinite(phi)) {
    throw DomainError("rate: sinusoid parameters must be finite");
  }
  RateFunction r;
  r.form_ = Form::Sinusoid;
  r.a_ = a;
  r.omega_ = omega;
  r.phi_ = phi;
  return r;
}

RateFunction RateFunction::neg_tanh() {
  RateFunction r;
  r.form_ = Form::NegTanh;
  return r;
}

RateFunction RateFunction::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw DomainError("rate: piecewise_linear needs at least one knot");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i].first) || !std::isfinite(knots[i].second)) {
      throw DomainError("rate: knots must be finite");
    }
    if (i > 0 && !(knots[i].first > knots[i - 1].first)) {
      throw DomainError("rate: knot times must be strictly increasing");
    }
  }
  RateFunction r;
  r.form_ = Form::PiecewiseLinear;
  r.knots_ = std::move(knots);
  return r;
}

double RateFunction::operator()(double t) const {
  switch (form_) {
    case Form::Constant: return a_;
    case Form::Sinusoid: return a_ * std::sin(omega_ * t + phi_);
    case Form::NegTanh: return -std::tanh(t);
    case Form::PiecewiseLinear: {
      if (t <= knots_.front().first) return knots_.front().second;
      if (t >= knots_.back().first) return knots_.back().second;
      const auto hi = std::upper_bound(knots_.begin(), knots_.end(), t,
                                       [](double v, const auto& k) { return v < k.first; });
      const auto lo = hi - 1;
      const double w = (t - lo->first) / (hi->first - lo->first);
      return (1.0 - w) * lo->second + w * hi->second;
    }
  }
  return 0.0;
}

nlohmann::json RateFunction::to_json() const {
  switch (form_) {
    case Form::Constant: return {{"form", "constant"}, {"c", a_}};
    case Form::Sinusoid: return {{"form", "sinusoid"}, {"a", a_}, {"omega", omega_}, {"phi", phi_}};
    case Form::NegTanh: return {{"form", "neg_tanh"}};
    case Form::PiecewiseLinear: {
      nlohmann::json k = nlohmann::json::array();
      for (const auto& [t, v] : knots_) k.push_back({t, v});
      return {{"form", "piecewise_linear"}, {"knots", k}};
    }
  }
  return nullptr;
}

RateFunction RateFunction::from_json(const nlohmann::json& j) {
  if (j.is_number()) return constant(j.get<double>());
  if (!j.is_object() || !j.contains("form")) throw DomainError("rate: expected a number or {\"form\": ...}");
  const auto form = j.at("form").get<std::string>();
  if (form == "constant") return constant(j.at("c").get<double>());
  if (form == "sinusoid") {
    return sinusoid(j.at("a").get<double>(), j.at("omega").get<double>(), j.value("phi", 0.0));
  }
  if (form == "neg_tanh") return neg_tanh();
  if (form == "piecewise_linear") {
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j.at("knots")) {
      if (!k.is_array() || k.size() != 2) throw DomainError("rate: knots are [t, value] pairs");
      knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    return piecewise_linear(std::move(knots));
  }
  throw DomainError("rate: unknown form \"" + form + "\"");
}

void GkslGenerator::validate() const {
  if (dim < 1) throw DimensionError("GKSL: dimension must be positive");
  if (h_eff.rows() != dim || h_eff.cols() != dim) throw DimensionError("GKSL: Hamiltonian has wrong shape");
  require_finite(h_eff, "GKSL Hamiltonian");
  if ((h_eff - h_eff.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, h_eff.cwiseAbs().maxCoeff())) {
    throw DomainError("GKSL: Hamiltonian is not Hermitian");
  }
  if (jumps.size() != rates.size()) throw DimensionError("GKSL: need one rate per jump operator");
  for (const auto& v : jumps) {
    if (v.rows() != dim || v.cols() != dim) throw DimensionError("GKSL: jump operator has wrong shape");
    require_finite(v, "GKSL jump operator");
  }
}

bool GkslGenerator::is_constant() const {
  return std::all_of(rates.begin(), rates.end(), [](const RateFunction& r) { return r.is_constant(); });
}

CMatrix GkslGenerator::superop(double t) const {
  const CMatrix id = CMatrix::Identity(dim, dim);
  const Complex i(0.0, 1.0);
  CMatrix l = -i * (kron(id, h_eff) - kron(h_eff.transpose(), id));
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const double g = rates[k](t);
    if (!std::isfinite(g)) throw DomainError("GKSL: rate is not finite at t = " + std::to_string(t));
    const CMatrix& v = jumps[k];
    const CMatrix vv = v.adjoint() * v;
    l += g * (kron(v.conjugate(), v) - 0.5 * kron(id, vv) - 0.5 * kron(vv.transpose(), id));
  }
  return l;
}

void TotalSystemModel::validate() const {
  if (dim_s < 1 || dim_e < 1) throw DimensionError("total model: dimensions must be positive");
  if (dim_s * dim_e > 64) throw DimensionError("total model: dim_s * dim_e exceeds 64");
  if (h_total.rows() != dim_s * dim_e || h_total.cols() != dim_s * dim_e) {
    throw DimensionError("total model: Hamiltonian has wrong shape");
  }
  require_finite(h_total, "total Hamiltonian");
  if ((h_total - h_total.adjoint()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, h_total.cwiseAbs().maxCoeff())) {
    throw DomainError("total model: Hamiltonian is not Hermitian");
  }
  if (env_state.rows() != dim_e) throw DimensionError("total model: environment state has wrong shape");
  DensityOperator check(env_state);
  (void)check;
}

std::vector<double> make_grid(double t_max, int steps) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("grid: t_max must be positive");
  if (steps < 2) throw DomainError("grid: need at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(steps));
  for (int j = 0; j < steps; ++j) g[static_cast<std::size_t>(j)] = t_max * j / (steps - 1);
  return g;
}

namespace {

void validate_grid(const std::vector<double>& grid) {
  if (grid.empty() || grid.front() != 0.0) throw DomainError("grid must start at 0");
  for (std::size_t j = 1; j < grid.size(); ++j) {
    if (!(grid[j] > grid[j - 1]) || !std::isfinite(grid[j])) {
      throw DomainError("grid must be finite and strictly increasing");
    }
  }
}

// n classical RK4 steps of dLambda/dt = L(t) Lambda from a to b.
CMatrix rk4(const GkslGenerator& gen, CMatrix lambda, double a, double b, long n) {
  const double h = (b - a) / static_cast<double>(n);
  for (long s = 0; s < n; ++s) {
    const double t = a + h * static_cast<double>(s);
    const CMatrix l0 = gen.superop(t);
    const CMatrix lm = gen.superop(t + h / 2.0);
    const CMatrix l1 = gen.superop(t + h);
    const CMatrix k1 = l0 * lambda;
    const CMatrix k2 = lm * (lambda + (h / 2.0) * k1);
    const CMatrix k3 = lm * (lambda + (h / 2.0) * k2);
    const CMatrix k4 = l1 * (lambda + h * k3);
    lambda += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return lambda;
}

}  // namespace

DynamicalMap propagate(const GkslGenerator& gen, const std::vector<double>& grid, double tol) {
  gen.validate();
  validate_grid(grid);
  if (!(tol > 0.0)) throw DomainError("propagate: tol must be positive");
  for (double t : grid) {
    for (const auto& r : gen.rates) {
      if (!std::isfinite(r(t))) throw DomainError("propagate: rate not finite on the grid");
    }
  }
  const Eigen::Index d = gen.dim;
  const Eigen::Index n2 = d * d;
  DynamicalMap dm;
  dm.grid = grid;
  nlohmann::json rates = nlohmann::json::array();
  for (const auto& r : gen.rates) rates.push_back(r.to_json());
  dm.provenance = {{"type", "gksl"}, {"dim", d}, {"rates", rates}, {"tol", tol}};

  if (gen.is_constant()) {
    const CMatrix l = gen.superop(0.0);
    dm.provenance["method"] = "matrix exponential";
    for (double t : grid) dm.maps.emplace_back(d, d, t == 0.0 ? CMatrix(CMatrix::Identity(n2, n2)) : CMatrix((l * t).exp()));
    return dm;
  }

  dm.provenance["method"] = "rk4 with Richardson step doubling";
  CMatrix lambda = CMatrix::Identity(n2, n2);
  dm.maps.emplace_back(d, d, lambda);
  long n = 1;
  for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
    const double a = grid[j];
    const double b = grid[j + 1];
    n = std::max(1L, n / 2);
    CMatrix coarse = rk4(gen, lambda, a, b, n);
    while (true) {
      const CMatrix fine = rk4(gen, lambda, a, b, 2 * n);
      const double err = (fine - coarse).cwiseAbs().maxCoeff() / 15.0;
      if (err <= tol * (b - a)) {
        lambda = fine + (fine - coarse) / 15.0;
        n *= 2;
        break;
      }
      n *= 2;
      if (n > (1L << 22)) throw SolverError("propagate: step size underflow", "step-underflow");
      coarse = fine;
    }
    dm.maps.emplace_back(d, d, lambda);
  }
  return dm;
}

DynamicalMap reduce(const TotalSystemModel& model, const std::vector<double>& grid) {
  model.validate();
  validate_grid(grid);
  const Eigen::Index ds = model.dim_s;
  const Eigen::Index de = model.dim_e;
  const HermEig h = eigh(model.h_total);
  const HermEig env = eigh(model.env_state);
  const double emax = env.values.maxCoeff();

  DynamicalMap dm;
  dm.grid = grid;
  dm.provenance = {{"type", "total_system"}, {"dim_s", ds}, {"dim_e", de}, {"method", "exact diagonalization"}};
  for (double t : grid) {
    CVector phases(h.values.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases[i] = std::polar(1.0, -h.values[i] * t);
    const CMatrix u = h.vectors * phases.asDiagonal() * h.vectors.adjoint();
    // Kraus operators sqrt(p_f) (I (x) <e|) U (I (x) |f>) with rho_E = sum_f p_f |f><f|.
    std::vector<CMatrix> ops;
    for (Eigen::Index f = 0; f < de; ++f) {
      const double pf = env.values[f];
      if (pf <= support_cutoff(emax)) continue;
      const CMatrix uf = u * kron(CMatrix::Identity(ds, ds), env.vectors.col(f));
      for (Eigen::Index e = 0; e < de; ++e) {
        CMatrix k(ds, ds);
        for (Eigen::Index s = 0; s < ds; ++s) k.row(s) = std::sqrt(pf) * uf.row(s * de + e);
        ops.push_back(std::move(k));
      }
    }
    dm.maps.push_back(from_kraus(ops));
  }
  return dm;
}

QuantumMap intermediate(const DynamicalMap& dm, std::size_t t_idx, std::size_t s_idx) {
  if (t_idx >= dm.maps.size() || s_idx >= dm.maps.size()) throw DimensionError("intermediate: index out of range");
  if (t_idx < s_idx) throw DomainError("intermediate: need t_idx >= s_idx");
  if (t_idx == s_idx) return QuantumMap::identity(dm.dim());
  return compose(dm.maps[t_idx], inverse(dm.maps[s_idx]));
}

const KDivisibility* DivisibilityReport::find(Eigen::Index k) const {
  for (const auto& entry : per_k) {
    if (entry.k == k) return &entry;
  }
  return nullptr;
}

nlohmann::json DivisibilityReport::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& entry : per_k) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : entry.steps) {
      steps.push_back({{"index", s.index},
                       {"t_from", s.t_from},
                       {"t_to", s.t_to},
                       {"min_value", s.certificate.min_value},
                       {"verdict", to_string(s.certificate.verdict)},
                       {"restarts", s.certificate.restarts_used},
                       {"tp_residual", s.tp_residual}});
    }
    out.push_back({{"k", entry.k},
                   {"verdict", entry.divisible_on_grid ? "k-divisible on grid" : "not k-divisible on grid"},
                   {"certified_negative_steps", entry.certified_negative_steps},
                   {"steps", steps}});
  }
  return out;
}

DivisibilityReport divisibility_report(const DynamicalMap& dm, const std::vector<Eigen::Index>& ks,
                                       int restarts, std::uint64_t seed) {
  const Eigen::Index d = dm.dim();
  for (Eigen::Index k : ks) {
    if (k < 1 || k > d) throw DomainError("divisibility_report: k must lie in [1, d]");
  }
  std::vector<QuantumMap> steps;
  std::vector<double> tp;
  for (std::size_t j = 0; j + 1 < dm.maps.size(); ++j) {
    steps.push_back(intermediate(dm, j + 1, j));
    tp.push_back(is_cptp(steps.back()).tp_residual);
  }
  DivisibilityReport report;
  for (Eigen::Index k : ks) {
    KDivisibility entry;
    entry.k = k;
    for (std::size_t j = 0; j < steps.size(); ++j) {
      StepCertificate sc;
      sc.index = j;
      sc.t_from = dm.grid[j];
      sc.t_to = dm.grid[j + 1];
      sc.certificate = k_positivity(steps[j], k, restarts, derive_seed(seed, j));
      sc.tp_residual = tp[j];
      if (sc.certificate.verdict == PositivityVerdict::CertifiedNegative) {
        entry.divisible_on_grid = false;
        ++entry.certified_negative_steps;
      }
      entry.steps.push_back(std::move(sc));
    }
    report.per_k.push_back(std::move(entry));
  }
  return report;
}

namespace {

CMatrix lowering() {
  CMatrix s = CMatrix::Zero(2, 2);
  s(0, 1) = 1.0;
  return s;
}

GkslGenerator pauli_generator(std::vector<RateFunction> rates) {
  // (1/2) sum_k gamma_k (s_k X s_k - X): jumps s_k / sqrt 2 at rate gamma_k.
  GkslGenerator g;
  g.dim = 2;
  g.h_eff = CMatrix::Zero(2, 2);
  for (int k = 1; k <= 3; ++k) g.jumps.push_back(channels::pauli_matrix(k) / std::sqrt(2.0));
  g.rates = std::move(rates);
  return g;
}

double positive_param(const nlohmann::json& p, const char* key, double fallback) {
  const double v = p.value(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string("model parameter ") + key + " must be positive");
  return v;
}

}  // namespace

Model model(const std::string& name, const nlohmann::json& params) {
  const nlohmann::json p = params.is_null() ? nlohmann::json::object() : params;
  if (!p.is_object()) throw DomainError("model params must be an object");
  if (name == "amplitude_damping") {
    GkslGenerator g;
    g.dim = 2;
    g.h_eff = CMatrix::Zero(2, 2);
    g.jumps = {lowering()};
    g.rates = {RateFunction::constant(positive_param(p, "gamma", 1.0))};
    return g;
  }
  if (name == "dephasing") {
    GkslGenerator g;
    g.dim = 2;
    g.h_eff = CMatrix::Zero(2, 2);
    g.jumps = {channels::pauli_matrix(3)};
    g.rates = {p.contains("rate") ? RateFunction::from_json(p.at("rate")) : RateFunction::constant(1.0)};
    return g;
  }
  if (name == "pauli") {
    if (!p.contains("rates") || !p.at("rates").is_array() || p.at("rates").size() != 3) {
      throw DomainError("pauli model needs \"rates\": [g1, g2, g3]");
    }
    std::vector<RateFunction> rates;
    for (const auto& r : p.at("rates")) rates.push_back(RateFunction::from_json(r));
    return pauli_generator(std::move(rates));
  }
  if (name == "eternal") {
    return pauli_generator({RateFunction::constant(1.0), RateFunction::constant(1.0), RateFunction::neg_tanh()});
  }
  if (name == "unitary") {
    GkslGenerator g;
    if (p.contains("h")) {
      g.h_eff = matrix_from_json(p.at("h"));
      g.dim = g.h_eff.rows();
    } else {
      g.dim = 2;
      g.h_eff = 0.5 * p.value("omega", 1.0) * channels::pauli_matrix(1);
    }
    return g;
  }
  if (name == "gksl") {
    GkslGenerator g;
    g.h_eff = matrix_from_json(p.at("h"));
    g.dim = g.h_eff.rows();
    for (const auto& v : p.value("jumps", nlohmann::json::array())) g.jumps.push_back(matrix_from_json(v));
    for (const auto& r : p.value("rates", nlohmann::json::array())) g.rates.push_back(RateFunction::from_json(r));
    g.validate();
    return g;
  }
  if (name == "jaynes_cummings_toy") {
    // Resonant exchange g (s+ s- + s- s+) between two qubits, environment in |0>.
    const double coupling = positive_param(p, "coupling", 1.0);
    const double detuning = p.value("detuning", 0.0);
    const CMatrix lo = lowering();
    const CMatrix id = CMatrix::Identity(2, 2);
    TotalSystemModel m;
    m.dim_s = 2;
    m.dim_e = 2;
    m.h_total = coupling * (kron(lo.adjoint(), lo) + kron(lo, lo.adjoint())) +
                0.5 * detuning * kron(channels::pauli_matrix(3), id);
    m.env_state = DensityOperator::basis(2, 0).matrix();
    return m;
  }
  if (name == "total_system") {
    TotalSystemModel m;
    m.dim_s = p.at("dim_s").get<Eigen::Index>();
    m.dim_e = p.at("dim_e").get<Eigen::Index>();
    m.h_total = matrix_from_json(p.at("h_total"));
    m.env_state = matrix_from_json(p.at("env_state"));
    m.validate();
    return m;
  }
  throw DomainError("unknown model \"" + name + "\"");
}

std::vector<ModelInfo> model_catalog() {
  return {
      {"amplitude_damping", "qubit decay |1> -> |0> with jump s- = |0><1|",
       "{\"gamma\": positive number (default 1)}"},
      {"dephasing", "qubit dephasing with jump sigma_z; coherences scale as exp(-2 int gamma)",
       "{\"rate\": rate (default 1)}"},
      {"pauli", "qubit Pauli channel family, dissipator (1/2) sum_k g_k(t) (s_k X s_k - X)",
       "{\"rates\": [rate, rate, rate]}"},
      {"eternal", "Pauli model with g1 = g2 = 1, g3 = -tanh t (P-divisible, never CP-divisible)", "{}"},
      {"unitary", "closed evolution under a fixed Hamiltonian",
       "{\"h\": matrix} or {\"omega\": number (default 1), H = omega/2 sigma_x}"},
      {"gksl", "explicit generator", "{\"h\": matrix, \"jumps\": [matrix], \"rates\": [rate]}"},
      {"jaynes_cummings_toy", "qubit exchanging excitations with a qubit environment prepared in |0>",
       "{\"coupling\": positive number (default 1), \"detuning\": number (default 0)}"},
      {"total_system", "exact reduction of a system + environment Hamiltonian",
       "{\"dim_s\", \"dim_e\", \"h_total\": matrix, \"env_state\": matrix}"},
  };
}

DynamicalMap evolve(const Model& m, const std::vector<double>& grid, double tol) {
  if (const auto* g = std::get_if<GkslGenerator>(&m)) return propagate(*g, grid, tol);
  return reduce(std::get<TotalSystemModel>(m), grid);
}

Eigen::Vector3d pauli_eigenvalues(const QuantumMap& m) {
  if (m.dim_in() != 2 || m.dim_out() != 2) throw DimensionError("pauli_eigenvalues: qubit map required");
  Eigen::Vector3d out;
  for (int i = 1; i <= 3; ++i) {
    const CMatrix s = channels::pauli_matrix(i);
    out[i - 1] = 0.5 * (s * m.apply(s)).trace().real();
  }
  return out;
}

}  // namespace qdiv
