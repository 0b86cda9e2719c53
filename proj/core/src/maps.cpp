#include "qdiv/maps.hpp"

#include <cmath>
#include <limits>

#include "qdiv/errors.hpp"
#include "qdiv/quantum.hpp"
#include "qdiv/random.hpp"

namespace qdiv {

namespace {

constexpr double kHpTolerance = 1e-9;

CMatrix choi_of(const CMatrix& s, Eigen::Index din, Eigen::Index dout) {
  CMatrix j(dout * din, dout * din);
  for (Eigen::Index jj = 0; jj < din; ++jj) {
    for (Eigen::Index i = 0; i < din; ++i) {
      const Eigen::Index col = i + jj * din;
      for (Eigen::Index b = 0; b < dout; ++b) {
        for (Eigen::Index a = 0; a < dout; ++a) {
          j(a * din + i, b * din + jj) = s(a + b * dout, col);
        }
      }
    }
  }
  return j;
}

CMatrix superop_of(const CMatrix& j, Eigen::Index din, Eigen::Index dout) {
  CMatrix s(dout * dout, din * din);
  for (Eigen::Index jj = 0; jj < din; ++jj) {
    for (Eigen::Index i = 0; i < din; ++i) {
      const Eigen::Index col = i + jj * din;
      for (Eigen::Index b = 0; b < dout; ++b) {
        for (Eigen::Index a = 0; a < dout; ++a) {
          s(a + b * dout, col) = j(a * din + i, b * din + jj);
        }
      }
    }
  }
  return s;
}

}  // namespace

QuantumMap::QuantumMap(Eigen::Index dim_in, Eigen::Index dim_out, const CMatrix& superop)
    : dim_in_(dim_in), dim_out_(dim_out) {
  if (dim_in < 1 || dim_out < 1 || superop.rows() != dim_out * dim_out ||
      superop.cols() != dim_in * dim_in) {
    throw DimensionError("QuantumMap: superoperator shape does not match dims");
  }
  require_finite(superop, "QuantumMap superoperator");
  const CMatrix j = choi_of(superop, dim_in, dim_out);
  const double residual = hermiticity_residual(j);
  if (residual > kHpTolerance) {
    throw DomainError("QuantumMap: map is not Hermiticity preserving (residual " +
                      std::to_string(residual) + ")");
  }
  superop_ = superop_of((j + j.adjoint()) / 2.0, dim_in, dim_out);
}

QuantumMap QuantumMap::identity(Eigen::Index dim) {
  return QuantumMap(dim, dim, CMatrix::Identity(dim * dim, dim * dim));
}

CMatrix QuantumMap::apply(const CMatrix& x) const {
  if (x.rows() != dim_in_ || x.cols() != dim_in_) {
    throw DimensionError("QuantumMap::apply: operand has wrong dimension");
  }
  return unvec(superop_ * vec(x), dim_out_, dim_out_);
}

QuantumMap QuantumMap::operator+(const QuantumMap& other) const {
  if (other.dim_in_ != dim_in_ || other.dim_out_ != dim_out_) {
    throw DimensionError("QuantumMap: sum of maps with different dims");
  }
  return QuantumMap(dim_in_, dim_out_, superop_ + other.superop_);
}

QuantumMap QuantumMap::operator-(const QuantumMap& other) const { return *this + other * -1.0; }

QuantumMap QuantumMap::operator*(double scale) const {
  return QuantumMap(dim_in_, dim_out_, superop_ * scale);
}

QuantumMap from_kraus(const std::vector<CMatrix>& ops) {
  if (ops.empty()) throw DimensionError("from_kraus: empty Kraus list");
  const Eigen::Index dout = ops.front().rows();
  const Eigen::Index din = ops.front().cols();
  CMatrix s = CMatrix::Zero(dout * dout, din * din);
  for (const auto& k : ops) {
    if (k.rows() != dout || k.cols() != din) throw DimensionError("from_kraus: Kraus dims differ");
    require_finite(k, "Kraus operator");
    s += kron(k.conjugate(), k);
  }
  return QuantumMap(din, dout, s);
}

QuantumMap from_choi(const CMatrix& j, Eigen::Index dim_in, Eigen::Index dim_out) {
  if (j.rows() != dim_in * dim_out || j.cols() != dim_in * dim_out) {
    throw DimensionError("from_choi: Choi matrix shape does not match dims");
  }
  return QuantumMap(dim_in, dim_out, superop_of(j, dim_in, dim_out));
}

CMatrix choi(const QuantumMap& m) { return choi_of(m.superop(), m.dim_in(), m.dim_out()); }

std::vector<CMatrix> kraus(const QuantumMap& m) {
  const HermEig eig = eigh(choi(m));
  if (eig.values[0] < -1e-9) throw DomainError("kraus: map is not completely positive");
  const double cutoff = support_cutoff(eig.values.maxCoeff());
  std::vector<CMatrix> ops;
  for (Eigen::Index c = eig.values.size(); c-- > 0;) {
    if (eig.values[c] <= cutoff) break;
    CMatrix k(m.dim_out(), m.dim_in());
    const double w = std::sqrt(eig.values[c]);
    for (Eigen::Index a = 0; a < m.dim_out(); ++a) {
      for (Eigen::Index i = 0; i < m.dim_in(); ++i) k(a, i) = w * eig.vectors(a * m.dim_in() + i, c);
    }
    ops.push_back(std::move(k));
  }
  if (ops.empty()) ops.push_back(CMatrix::Zero(m.dim_out(), m.dim_in()));
  return ops;
}

QuantumMap compose(const QuantumMap& f, const QuantumMap& g) {
  if (g.dim_out() != f.dim_in()) throw DimensionError("compose: inner output != outer input");
  return QuantumMap(g.dim_in(), f.dim_out(), f.superop() * g.superop());
}

QuantumMap inverse(const QuantumMap& m) {
  if (m.dim_in() != m.dim_out()) throw DimensionError("inverse: map is not square");
  Eigen::JacobiSVD<CMatrix> svd(m.superop(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double smax = s[0];
  const double smin = s[s.size() - 1];
  if (!(smin > 1e-10 * smax)) {
    throw NonInvertibleError("inverse: superoperator is singular beyond threshold", smin);
  }
  const CMatrix inv =
      svd.matrixV() * s.cwiseInverse().cast<Complex>().asDiagonal() * svd.matrixU().adjoint();
  return QuantumMap(m.dim_in(), m.dim_out(), inv);
}

QuantumMap adjoint(const QuantumMap& m) {
  return QuantumMap(m.dim_out(), m.dim_in(), m.superop().adjoint());
}

QuantumMap amplify(const QuantumMap& m, Eigen::Index k) {
  if (k < 1) throw DomainError("amplify: k must be positive");
  if (k == 1) return m;
  const Eigen::Index din = m.dim_in();
  const Eigen::Index dout = m.dim_out();
  const Eigen::Index nin = k * din;
  const Eigen::Index nout = k * dout;
  const CMatrix& s = m.superop();
  CMatrix big = CMatrix::Zero(nout * nout, nin * nin);
  for (Eigen::Index b = 0; b < k; ++b) {
    for (Eigen::Index a = 0; a < k; ++a) {
      for (Eigen::Index jj = 0; jj < din; ++jj) {
        for (Eigen::Index i = 0; i < din; ++i) {
          const Eigen::Index col = (a * din + i) + (b * din + jj) * nin;
          const Eigen::Index src = i + jj * din;
          for (Eigen::Index q = 0; q < dout; ++q) {
            for (Eigen::Index p = 0; p < dout; ++p) {
              big((a * dout + p) + (b * dout + q) * nout, col) = s(p + q * dout, src);
            }
          }
        }
      }
    }
  }
  return QuantumMap(nin, nout, big);
}

CptpReport is_cptp(const QuantumMap& m) {
  const CMatrix j = choi(m);
  CptpReport r;
  r.min_choi_eig = min_eig(j);
  CMatrix tr_out = CMatrix::Zero(m.dim_in(), m.dim_in());
  for (Eigen::Index a = 0; a < m.dim_out(); ++a) {
    tr_out += j.block(a * m.dim_in(), a * m.dim_in(), m.dim_in(), m.dim_in());
  }
  r.tp_residual = operator_norm(tr_out - CMatrix::Identity(m.dim_in(), m.dim_in()));
  r.cp = r.min_choi_eig >= -1e-9;
  r.tp = r.tp_residual <= 1e-9;
  return r;
}

UnitalReport is_unital(const QuantumMap& m) {
  if (m.dim_in() != m.dim_out()) throw DimensionError("is_unital: map is not square");
  const Eigen::Index d = m.dim_in();
  UnitalReport r;
  r.residual = operator_norm(m.apply(CMatrix::Identity(d, d)) - CMatrix::Identity(d, d));
  r.unital = r.residual <= 1e-9;
  return r;
}

std::string to_string(PositivityVerdict v) {
  return v == PositivityVerdict::CertifiedNegative ? "certified-negative"
                                                   : "heuristically-nonnegative";
}

namespace {

// Orthonormal columns spanning the same space as m (thin QR).
CMatrix orthonormal_columns(const CMatrix& m) {
  Eigen::HouseholderQR<CMatrix> qr(m);
  return qr.householderQ() * CMatrix::Identity(m.rows(), m.cols());
}

// Minimum of <psi|J|psi> over psi = vec(L W^T) with the other factor fixed.
// `fixed` has orthonormal columns, which makes the parameterization an
// isometry, so the constrained minimum is an eigenvalue problem.
struct HalfStep {
  double value;
  CMatrix factor;
};

HalfStep minimize_left(const CMatrix& j, const CMatrix& w, Eigen::Index dout, Eigen::Index din,
                       Eigen::Index k) {
  CMatrix iso = CMatrix::Zero(dout * din, dout * k);
  for (Eigen::Index a = 0; a < dout; ++a) {
    for (Eigen::Index m = 0; m < k; ++m) {
      for (Eigen::Index i = 0; i < din; ++i) iso(a * din + i, a * k + m) = w(i, m);
    }
  }
  const HermEig eig = eigh(iso.adjoint() * j * iso);
  CMatrix l(dout, k);
  for (Eigen::Index a = 0; a < dout; ++a) {
    for (Eigen::Index m = 0; m < k; ++m) l(a, m) = eig.vectors(a * k + m, 0);
  }
  return {eig.values[0], l};
}

HalfStep minimize_right(const CMatrix& j, const CMatrix& l, Eigen::Index dout, Eigen::Index din,
                        Eigen::Index k) {
  CMatrix iso = CMatrix::Zero(dout * din, din * k);
  for (Eigen::Index a = 0; a < dout; ++a) {
    for (Eigen::Index m = 0; m < k; ++m) {
      for (Eigen::Index i = 0; i < din; ++i) iso(a * din + i, i * k + m) = l(a, m);
    }
  }
  const HermEig eig = eigh(iso.adjoint() * j * iso);
  CMatrix w(din, k);
  for (Eigen::Index i = 0; i < din; ++i) {
    for (Eigen::Index m = 0; m < k; ++m) w(i, m) = eig.vectors(i * k + m, 0);
  }
  return {eig.values[0], w};
}

}  // namespace

PositivityCertificate k_positivity(const QuantumMap& m, Eigen::Index k, int restarts,
                                   std::uint64_t seed) {
  const Eigen::Index din = m.dim_in();
  const Eigen::Index dout = m.dim_out();
  if (k < 1 || k > din) throw DomainError("k_positivity: k must lie in [1, dim_in]");
  if (restarts < 1) throw DomainError("k_positivity: need at least one restart");
  const CMatrix j = choi(m);

  PositivityCertificate cert;
  cert.k = k;
  if (k >= std::min(din, dout)) {
    const HermEig eig = eigh(j);
    cert.min_value = eig.values[0];
    cert.witness = eig.vectors.col(0);
    cert.restarts_used = 0;
  } else {
    cert.min_value = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
      CMatrix l = ginibre(dout, k, rng);
      CMatrix w = orthonormal_columns(ginibre(din, k, rng));
      double value = std::numeric_limits<double>::infinity();
      for (int it = 0; it < 500; ++it) {
        const HalfStep left = minimize_left(j, w, dout, din, k);
        const HalfStep right = minimize_right(j, orthonormal_columns(left.factor), dout, din, k);
        l = orthonormal_columns(left.factor);
        w = right.factor;
        const double improvement = value - right.value;
        value = right.value;
        if (improvement < 1e-14 * (1.0 + std::abs(value))) break;
        w = orthonormal_columns(w);
      }
      // Rebuild psi = vec(L W^T) from the last exact half step.
      const CMatrix coeff = l * w.transpose();
      CVector psi(dout * din);
      for (Eigen::Index a = 0; a < dout; ++a) {
        for (Eigen::Index i = 0; i < din; ++i) psi[a * din + i] = coeff(a, i);
      }
      psi.normalize();
      const double exact = (psi.adjoint() * j * psi)(0, 0).real();
      if (exact < cert.min_value) {
        cert.min_value = exact;
        cert.witness = psi;
      }
    }
    cert.restarts_used = restarts;
  }
  cert.verdict = cert.min_value < kCertifiedNegativeThreshold ? PositivityVerdict::CertifiedNegative
                                                              : PositivityVerdict::HeuristicallyNonnegative;
  return cert;
}

nlohmann::json map_to_json(const QuantumMap& m) {
  return {{"dimIn", m.dim_in()}, {"dimOut", m.dim_out()}, {"superop", matrix_to_json(m.superop())}};
}

QuantumMap map_from_json(const nlohmann::json& j) {
  if (j.contains("kraus")) {
    std::vector<CMatrix> ops;
    for (const auto& k : j.at("kraus")) ops.push_back(matrix_from_json(k));
    return from_kraus(ops);
  }
  if (!j.contains("dimIn") || !j.contains("dimOut") || !j.contains("superop")) {
    throw DomainError("map json: need dimIn, dimOut and superop (or kraus)");
  }
  return QuantumMap(j.at("dimIn").get<Eigen::Index>(), j.at("dimOut").get<Eigen::Index>(),
                    matrix_from_json(j.at("superop")));
}

namespace channels {

CMatrix pauli_matrix(int index) {
  CMatrix s(2, 2);
  const Complex i(0.0, 1.0);
  switch (index) {
    case 0: s << 1, 0, 0, 1; break;
    case 1: s << 0, 1, 1, 0; break;
    case 2: s << 0, -i, i, 0; break;
    case 3: s << 1, 0, 0, -1; break;
    default: throw DomainError("pauli_matrix: index must be 0..3");
  }
  return s;
}

QuantumMap identity(Eigen::Index dim) { return QuantumMap::identity(dim); }

QuantumMap unitary(const CMatrix& u) {
  require_square(u, "unitary");
  if ((u.adjoint() * u - CMatrix::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("unitary: matrix is not unitary");
  }
  return from_kraus({u});
}

QuantumMap depolarizing(Eigen::Index dim, double q) {
  const CMatrix id_super = CMatrix::Identity(dim * dim, dim * dim);
  // X -> Tr(X) I / d: vec(I) vec(I)^T / d.
  const CVector vi = vec(CMatrix::Identity(dim, dim));
  const CMatrix tr_super = vi * vi.transpose() / static_cast<double>(dim);
  return QuantumMap(dim, dim, (1.0 - q) * id_super + q * tr_super);
}

QuantumMap amplitude_damping(double p) {
  if (p < 0.0 || p > 1.0) throw DomainError("amplitude_damping: p must lie in [0,1]");
  CMatrix k0(2, 2);
  CMatrix k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - p);
  k1 << 0, std::sqrt(p), 0, 0;
  return from_kraus({k0, k1});
}

QuantumMap phase_flip(double p) { return pauli({1.0 - p, 0.0, 0.0, p}); }

QuantumMap pauli(const std::vector<double>& probs) {
  if (probs.size() != 4) throw DomainError("pauli: need four weights");
  CMatrix s = CMatrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) {
    const CMatrix p = pauli_matrix(k);
    s += probs[static_cast<std::size_t>(k)] * kron(p.conjugate(), p);
  }
  return QuantumMap(2, 2, s);
}

QuantumMap transposition(Eigen::Index dim) {
  CMatrix s = CMatrix::Zero(dim * dim, dim * dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) s(c + r * dim, r + c * dim) = 1.0;
  }
  return QuantumMap(dim, dim, s);
}

QuantumMap replacer(Eigen::Index dim_in, const CMatrix& rho) {
  const CVector vi = vec(CMatrix::Identity(dim_in, dim_in));
  return QuantumMap(dim_in, rho.rows(), vec(rho) * vi.transpose());
}

QuantumMap random_cptp(Eigen::Index dim_in, Eigen::Index dim_out, Eigen::Index kraus_count,
                       std::uint64_t seed) {
  if (kraus_count < 1 || kraus_count * dim_out < dim_in) {
    throw DomainError("random_cptp: need kraus_count * dim_out >= dim_in");
  }
  Rng rng(seed);
  const CMatrix v = orthonormal_columns(ginibre(kraus_count * dim_out, dim_in, rng));
  std::vector<CMatrix> ops;
  for (Eigen::Index m = 0; m < kraus_count; ++m) ops.push_back(v.middleRows(m * dim_out, dim_out));
  return from_kraus(ops);
}

}  // namespace channels

}  // namespace qdiv
