#include "qdiv/quantum.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "qdiv/errors.hpp"
#include "qdiv/random.hpp"

namespace qdiv {

namespace {

constexpr double kStateHermitianTol = 1e-10;
constexpr double kStatePositivityTol = 1e-9;
constexpr double kStateTraceTol = 1e-9;

}  // namespace

DensityOperator::DensityOperator(const CMatrix& m) {
  require_square(m, "DensityOperator");
  require_finite(m, "DensityOperator");
  const double residual = hermiticity_residual(m);
  if (residual > kStateHermitianTol) {
    throw DomainError("DensityOperator: not Hermitian (relative residual " +
                      std::to_string(residual) + ")");
  }
  matrix_ = (m + m.adjoint()) / 2.0;
  const double tr = matrix_.trace().real();
  if (std::abs(tr - 1.0) > kStateTraceTol) {
    throw DomainError("DensityOperator: trace " + std::to_string(tr) + " != 1");
  }
  const double lmin = min_eig(matrix_);
  if (lmin < -kStatePositivityTol) {
    throw DomainError("DensityOperator: negative eigenvalue " + std::to_string(lmin));
  }
}

DensityOperator DensityOperator::pure(const CVector& psi) {
  const double n = psi.norm();
  if (!(n > 0) || !std::isfinite(n)) {
    throw DomainError("DensityOperator::pure: zero or non-finite vector");
  }
  const CVector u = psi / n;
  return DensityOperator(u * u.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(Eigen::Index dim) {
  if (dim < 1) throw DimensionError("maximally_mixed: dim must be positive");
  return DensityOperator(CMatrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityOperator DensityOperator::basis(Eigen::Index dim, Eigen::Index index) {
  if (index < 0 || index >= dim) throw DimensionError("basis: index out of range");
  CMatrix m = CMatrix::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityOperator(m);
}

double DensityOperator::purity() const { return (matrix_ * matrix_).trace().real(); }

BipartiteState::BipartiteState(Eigen::Index dim_a, Eigen::Index dim_b, const CMatrix& m)
    : BipartiteState(dim_a, dim_b, DensityOperator(m)) {}

BipartiteState::BipartiteState(Eigen::Index dim_a, Eigen::Index dim_b, DensityOperator state)
    : dim_a_(dim_a), dim_b_(dim_b), state_(std::move(state)) {
  if (dim_a < 1 || dim_b < 1 || state_.dim() != dim_a * dim_b) {
    throw DimensionError("BipartiteState: dim " + std::to_string(state_.dim()) + " != " +
                         std::to_string(dim_a) + "*" + std::to_string(dim_b));
  }
}

StateEnsemble::StateEnsemble(std::vector<double> p, std::vector<DensityOperator> s)
    : probs(std::move(p)), states(std::move(s)) {
  if (probs.empty() || probs.size() != states.size()) {
    throw DimensionError("StateEnsemble: need matching, non-empty probs and states");
  }
  double total = 0.0;
  for (double q : probs) {
    if (!(q >= 0.0)) throw DomainError("StateEnsemble: negative probability");
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DomainError("StateEnsemble: probabilities sum to " + std::to_string(total));
  }
  for (const auto& st : states) {
    if (st.dim() != states.front().dim()) throw DimensionError("StateEnsemble: unequal state dims");
  }
}

Povm::Povm(std::vector<CMatrix> e) : elements(std::move(e)) {
  if (elements.empty()) throw DimensionError("Povm: no elements");
  const Eigen::Index d = elements.front().rows();
  CMatrix sum = CMatrix::Zero(d, d);
  for (auto& el : elements) {
    if (el.rows() != d || el.cols() != d) throw DimensionError("Povm: element dims differ");
    el = hermitian_part(el, "Povm element");
    if (min_eig(el) < -1e-9) throw DomainError("Povm: element not positive");
    sum += el;
  }
  if ((sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9) {
    throw DomainError("Povm: elements do not sum to identity");
  }
}

CMatrix partial_trace(const CMatrix& m, std::span<const Eigen::Index> dims,
                      std::span<const Eigen::Index> keep) {
  const std::size_t parts = dims.size();
  const Eigen::Index total =
      std::accumulate(dims.begin(), dims.end(), Eigen::Index{1}, std::multiplies<>());
  if (m.rows() != total || m.cols() != total) {
    throw DimensionError("partial_trace: operator dim does not match subsystem dims");
  }
  std::vector<bool> kept(parts, false);
  Eigen::Index kept_dim = 1;
  for (Eigen::Index k : keep) {
    if (k < 0 || static_cast<std::size_t>(k) >= parts) throw DimensionError("partial_trace: bad index");
    kept[static_cast<std::size_t>(k)] = true;
    kept_dim *= dims[static_cast<std::size_t>(k)];
  }

  // Split a composite index into (kept index, traced index).
  auto split = [&](Eigen::Index idx) {
    std::vector<Eigen::Index> digits(parts);
    for (std::size_t p = parts; p-- > 0;) {
      digits[p] = idx % dims[p];
      idx /= dims[p];
    }
    Eigen::Index k = 0;
    Eigen::Index t = 0;
    for (std::size_t p = 0; p < parts; ++p) {
      if (kept[p]) {
        k = k * dims[p] + digits[p];
      } else {
        t = t * dims[p] + digits[p];
      }
    }
    return std::pair{k, t};
  };

  std::vector<std::pair<Eigen::Index, Eigen::Index>> table(static_cast<std::size_t>(total));
  for (Eigen::Index i = 0; i < total; ++i) table[static_cast<std::size_t>(i)] = split(i);

  CMatrix out = CMatrix::Zero(kept_dim, kept_dim);
  for (Eigen::Index j = 0; j < total; ++j) {
    const auto [kj, tj] = table[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < total; ++i) {
      const auto [ki, ti] = table[static_cast<std::size_t>(i)];
      if (ti == tj) out(ki, kj) += m(i, j);
    }
  }
  return out;
}

BipartiteState tensor(const DensityOperator& a, const DensityOperator& b) {
  return BipartiteState(a.dim(), b.dim(), kron(a.matrix(), b.matrix()));
}

DensityOperator partial_trace(const BipartiteState& s, Subsystem traced) {
  const Eigen::Index dims[2] = {s.dim_a(), s.dim_b()};
  const Eigen::Index keep = traced == Subsystem::A ? 1 : 0;
  return DensityOperator(partial_trace(s.matrix(), dims, std::span(&keep, 1)));
}

CVector max_entangled_ket(Eigen::Index dim) {
  if (dim < 1) throw DimensionError("max_entangled: dim must be positive");
  CVector psi = CVector::Zero(dim * dim);
  for (Eigen::Index i = 0; i < dim; ++i) psi[i * dim + i] = 1.0 / std::sqrt(static_cast<double>(dim));
  return psi;
}

BipartiteState max_entangled(Eigen::Index dim) {
  if (dim < 2) throw DomainError("max_entangled: dim must be at least 2");
  return BipartiteState(dim, dim, DensityOperator::pure(max_entangled_ket(dim)));
}

TripartitePure purify(const BipartiteState& s) {
  const HermEig eig = eigh(s.matrix());
  const double cutoff = support_cutoff(eig.values.maxCoeff());
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = eig.values.size(); i-- > 0;) {
    if (eig.values[i] > cutoff) support.push_back(i);
  }
  const auto rank = static_cast<Eigen::Index>(support.size());
  const Eigen::Index n = s.state().dim();
  CVector psi = CVector::Zero(n * rank);
  for (Eigen::Index c = 0; c < rank; ++c) {
    const Eigen::Index col = support[static_cast<std::size_t>(c)];
    const double w = std::sqrt(eig.values[col]);
    for (Eigen::Index ab = 0; ab < n; ++ab) psi[ab * rank + c] = w * eig.vectors(ab, col);
  }
  psi /= psi.norm();
  return {s.dim_a(), s.dim_b(), rank, psi};
}

namespace {

BipartiteState tripartite_marginal(const TripartitePure& t, Eigen::Index first, Eigen::Index second) {
  const Eigen::Index dims[3] = {t.dim_a, t.dim_b, t.dim_c};
  const Eigen::Index keep[2] = {first, second};
  const CMatrix rho = t.psi * t.psi.adjoint();
  return BipartiteState(dims[first], dims[second], partial_trace(rho, dims, keep));
}

}  // namespace

BipartiteState TripartitePure::marginal_ab() const { return tripartite_marginal(*this, 0, 1); }
BipartiteState TripartitePure::marginal_ac() const { return tripartite_marginal(*this, 0, 2); }
BipartiteState TripartitePure::marginal_bc() const { return tripartite_marginal(*this, 1, 2); }

RVector schmidt_coefficients(const CVector& psi, Eigen::Index dim_a, Eigen::Index dim_b) {
  if (psi.size() != dim_a * dim_b) throw DimensionError("schmidt_coefficients: size mismatch");
  CMatrix coeff(dim_a, dim_b);
  for (Eigen::Index a = 0; a < dim_a; ++a) {
    for (Eigen::Index b = 0; b < dim_b; ++b) coeff(a, b) = psi[a * dim_b + b];
  }
  Eigen::JacobiSVD<CMatrix> svd(coeff);
  return svd.singularValues();
}

Eigen::Index schmidt_rank(const CVector& psi, Eigen::Index dim_a, Eigen::Index dim_b) {
  const RVector s = schmidt_coefficients(psi, dim_a, dim_b);
  const RVector sq = s.cwiseAbs2();
  const double cutoff = support_cutoff(sq.size() > 0 ? sq.maxCoeff() : 0.0);
  return (sq.array() > cutoff).count();
}

Eigen::Index schmidt_rank(const BipartiteState& psi) {
  if (std::abs(psi.state().purity() - 1.0) > 1e-9) {
    throw DomainError("schmidt_rank: input state is not pure");
  }
  const HermEig eig = eigh(psi.matrix());
  const CVector top = eig.vectors.col(eig.values.size() - 1);
  return schmidt_rank(top, psi.dim_a(), psi.dim_b());
}

CMatrix pinch(const CMatrix& sigma, const CMatrix& x) {
  const HermEig eig = eigh(sigma);
  if (x.rows() != sigma.rows() || x.cols() != sigma.cols()) {
    throw DimensionError("pinch: operand dims differ");
  }
  const Eigen::Index n = eig.values.size();
  const double scale = eig.values.cwiseAbs().maxCoeff();
  CMatrix out = CMatrix::Zero(n, n);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n) {
      const double a = eig.values[end - 1];
      const double b = eig.values[end];
      const double tol = 1e-8 * std::max(std::abs(a), std::abs(b)) + 1e-14 * scale;
      if (b - a > tol) break;
      ++end;
    }
    const CMatrix v = eig.vectors.middleCols(start, end - start);
    const CMatrix proj = v * v.adjoint();
    out += proj * x * proj;
    start = end;
  }
  return out;
}

BipartiteState make_cq(const std::vector<double>& probs, const std::vector<DensityOperator>& states) {
  const StateEnsemble ens(probs, states);
  const auto n = static_cast<Eigen::Index>(ens.size());
  const Eigen::Index d = ens.dim();
  CMatrix m = CMatrix::Zero(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    m.block(i * d, i * d, d, d) = ens.probs[static_cast<std::size_t>(i)] *
                                  ens.states[static_cast<std::size_t>(i)].matrix();
  }
  return BipartiteState(n, d, m);
}

DensityOperator random_density(Eigen::Index dim, Eigen::Index rank, std::uint64_t seed) {
  if (dim < 1 || rank < 1 || rank > dim) {
    throw DomainError("random_density: need 1 <= rank <= dim");
  }
  Rng rng(seed);
  const CMatrix g = ginibre(dim, rank, rng);
  CMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityOperator(rho);
}

DensityOperator random_pure(Eigen::Index dim, std::uint64_t seed) {
  return random_density(dim, 1, seed);
}

nlohmann::json matrix_to_json(const CMatrix& m) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json rr = nlohmann::json::array();
    nlohmann::json ri = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return {{"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("re")) throw DomainError("matrix json: missing \"re\"");
  const auto& re = j.at("re");
  if (!re.is_array() || re.empty() || !re.front().is_array()) {
    throw DomainError("matrix json: \"re\" must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(re.size());
  const auto cols = static_cast<Eigen::Index>(re.front().size());
  const bool has_im = j.contains("im");
  CMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = re.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw DimensionError("matrix json: ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double r = row.at(static_cast<std::size_t>(c)).get<double>();
      const double im = has_im ? j.at("im").at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(c)).get<double>() : 0.0;
      m(i, c) = Complex(r, im);
    }
  }
  return m;
}

nlohmann::json state_to_json(const DensityOperator& s) {
  nlohmann::json j = matrix_to_json(s.matrix());
  j["dims"] = {s.dim()};
  return j;
}

nlohmann::json state_to_json(const BipartiteState& s) {
  nlohmann::json j = matrix_to_json(s.matrix());
  j["dims"] = {s.dim_a(), s.dim_b()};
  return j;
}

DensityOperator density_from_json(const nlohmann::json& j) {
  return DensityOperator(matrix_from_json(j));
}

BipartiteState bipartite_from_json(const nlohmann::json& j) {
  const auto dims = j.at("dims").get<std::vector<Eigen::Index>>();
  if (dims.size() != 2) throw DimensionError("bipartite state json: dims must have two entries");
  return BipartiteState(dims[0], dims[1], matrix_from_json(j));
}

}  // namespace qdiv
