#include "qdiv/sdp.hpp"

#include <cmath>
#include <limits>

#include "qdiv/errors.hpp"
#include "qdiv/quantum.hpp"

namespace qdiv {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::MaxIter: return "max_iter";
    case SdpStatus::InfeasibleDetected: return "infeasible-detected";
    case SdpStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

int SdpProblem::add_block(Eigen::Index dim) {
  if (dim < 1) throw DimensionError("SdpProblem: block dimension must be positive");
  blocks_.push_back(dim);
  c_.emplace_back();
  for (auto& row : a_) row.emplace_back();
  return static_cast<int>(blocks_.size()) - 1;
}

int SdpProblem::add_constraint(double b) {
  if (!std::isfinite(b)) throw DomainError("SdpProblem: non-finite right-hand side");
  a_.emplace_back(blocks_.size());
  b_.push_back(b);
  return static_cast<int>(b_.size()) - 1;
}

void SdpProblem::set_objective(int block, const CMatrix& c) {
  c_.at(static_cast<std::size_t>(block)) = c;
}

void SdpProblem::set_coefficient(int constraint, int block, const CMatrix& a) {
  a_.at(static_cast<std::size_t>(constraint)).at(static_cast<std::size_t>(block)) = a;
}

void SdpProblem::validate() const {
  auto check = [&](const CMatrix& m, std::size_t blk, const char* what) {
    if (m.size() == 0) return;
    if (m.rows() != blocks_[blk] || m.cols() != blocks_[blk]) {
      throw DimensionError(std::string("SdpProblem: ") + what + " block has wrong shape");
    }
    require_finite(m, what);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw DomainError(std::string("SdpProblem: ") + what + " block is not Hermitian");
    }
  };
  if (blocks_.empty()) throw DimensionError("SdpProblem: no blocks");
  for (std::size_t k = 0; k < blocks_.size(); ++k) check(c_[k], k, "objective");
  for (const auto& row : a_) {
    for (std::size_t k = 0; k < blocks_.size(); ++k) check(row[k], k, "constraint");
  }
}

RMatrix embed_hermitian(const CMatrix& h) {
  const Eigen::Index n = h.rows();
  RMatrix e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = h.real();
  e.bottomRightCorner(n, n) = h.real();
  e.topRightCorner(n, n) = -h.imag();
  e.bottomLeftCorner(n, n) = h.imag();
  return e;
}

CMatrix extract_hermitian(const RMatrix& m) {
  const Eigen::Index n = m.rows() / 2;
  CMatrix h(n, n);
  h.real() = (m.topLeftCorner(n, n) + m.bottomRightCorner(n, n)) / 2.0;
  h.imag() = (m.bottomLeftCorner(n, n) - m.topRightCorner(n, n)) / 2.0;
  return (h + h.adjoint()) / 2.0;
}

std::vector<CMatrix> hermitian_basis(Eigen::Index d) {
  std::vector<CMatrix> basis;
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index k = 0; k < d; ++k) {
    CMatrix e = CMatrix::Zero(d, d);
    e(k, k) = 1.0;
    basis.push_back(e);
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    for (Eigen::Index l = k + 1; l < d; ++l) {
      CMatrix s = CMatrix::Zero(d, d);
      s(k, l) = r;
      s(l, k) = r;
      basis.push_back(s);
      CMatrix a = CMatrix::Zero(d, d);
      a(k, l) = Complex(0.0, r);
      a(l, k) = Complex(0.0, -r);
      basis.push_back(a);
    }
  }
  return basis;
}

namespace {

using Blocks = std::vector<RMatrix>;

double inner(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].size() == 0 || b[k].size() == 0) continue;
    s += a[k].cwiseProduct(b[k]).sum();
  }
  return s;
}

double frob(const Blocks& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

RMatrix sym(const RMatrix& m) { return (m + m.transpose()) / 2.0; }

// Largest step alpha with x + alpha dx still positive semidefinite
// (infinity if dx never leaves the cone). chol is the factor of x.
double max_step(const Eigen::LLT<RMatrix>& chol, const RMatrix& dx) {
  const RMatrix l = chol.matrixL();
  const RMatrix t1 = l.triangularView<Eigen::Lower>().solve(dx);
  const RMatrix t = l.triangularView<Eigen::Lower>().solve(t1.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sym(t), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()[0];
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

// The embedded real problem: min <C,X> s.t. <A_i,X> = b_i.
struct RealProblem {
  std::size_t nblocks = 0;
  std::vector<Eigen::Index> dims;
  Blocks c;
  std::vector<Blocks> a;
  RVector b;
  std::size_t m() const { return a.size(); }
};

RVector apply_a(const RealProblem& p, const Blocks& x) {
  RVector out(static_cast<Eigen::Index>(p.m()));
  for (std::size_t i = 0; i < p.m(); ++i) out[static_cast<Eigen::Index>(i)] = inner(p.a[i], x);
  return out;
}

Blocks apply_adj(const RealProblem& p, const RVector& y) {
  Blocks out;
  for (std::size_t k = 0; k < p.nblocks; ++k) out.push_back(RMatrix::Zero(p.dims[k], p.dims[k]));
  for (std::size_t i = 0; i < p.m(); ++i) {
    const double yi = y[static_cast<Eigen::Index>(i)];
    if (yi == 0.0) continue;
    for (std::size_t k = 0; k < p.nblocks; ++k) {
      if (p.a[i][k].size() != 0) out[k] += yi * p.a[i][k];
    }
  }
  return out;
}

struct Iterate {
  Blocks x;
  Blocks z;
  RVector y;
};

struct Measures {
  double pobj = 0.0;
  double dobj = 0.0;
  double pres = 0.0;  // max_i |r_p,i| / max(1, |b_i|), original scaling
  double dres = 0.0;
  double rgap = 0.0;  // |pobj - dobj| / (1 + |pobj|)
  double worst() const { return std::max({pres, dres, rgap}); }
};

Measures measure(const RealProblem& p, const Iterate& it, const RVector& b_orig, double c_norm) {
  Measures ms;
  ms.pobj = inner(p.c, it.x) / 2.0;
  ms.dobj = p.b.dot(it.y) / 2.0;
  const RVector rp = p.b - apply_a(p, it.x);
  for (Eigen::Index i = 0; i < rp.size(); ++i) {
    ms.pres = std::max(ms.pres, std::abs(rp[i]) / 2.0 / std::max(1.0, std::abs(b_orig[i])));
  }
  Blocks rd = apply_adj(p, it.y);
  for (std::size_t k = 0; k < p.nblocks; ++k) rd[k] = p.c[k] - it.z[k] - rd[k];
  ms.dres = frob(rd) / (1.0 + c_norm);
  ms.rgap = std::abs(ms.pobj - ms.dobj) / (1.0 + std::abs(ms.pobj));
  return ms;
}

}  // namespace

SdpSolution solve(const SdpProblem& prob, const SdpOptions& opts) {
  prob.validate();
  const double sign = prob.sense == SdpSense::Maximize ? -1.0 : 1.0;

  RealProblem p;
  p.nblocks = prob.blocks().size();
  for (Eigen::Index d : prob.blocks()) p.dims.push_back(2 * d);
  for (std::size_t k = 0; k < p.nblocks; ++k) {
    const CMatrix& ck = prob.objective()[k];
    p.c.push_back(ck.size() == 0 ? RMatrix::Zero(p.dims[k], p.dims[k]) : RMatrix(sign * embed_hermitian(ck)));
  }
  const auto m = static_cast<Eigen::Index>(prob.num_constraints());
  RVector b_orig(m);
  p.b.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = prob.constraints()[static_cast<std::size_t>(i)];
    Blocks ai;
    for (std::size_t k = 0; k < p.nblocks; ++k) {
      ai.push_back(row[k].size() == 0 ? RMatrix() : embed_hermitian(row[k]));
    }
    p.a.push_back(std::move(ai));
    b_orig[i] = prob.rhs()[static_cast<std::size_t>(i)];
    p.b[i] = 2.0 * b_orig[i];
  }

  SdpSolution sol;
  auto finish = [&](const Iterate& it, const Measures& ms, SdpStatus status, int iters, std::string msg) {
    sol.x.clear();
    sol.z.clear();
    for (std::size_t k = 0; k < p.nblocks; ++k) {
      sol.x.push_back(extract_hermitian(it.x[k]));
      sol.z.push_back(extract_hermitian(it.z[k]));
    }
    sol.y = sign * it.y;
    sol.primal_value = sign * ms.pobj;
    sol.dual_value = sign * ms.dobj;
    sol.gap = sign * (ms.pobj - ms.dobj);
    sol.primal_residual = ms.pres;
    sol.dual_residual = ms.dres;
    sol.status = status;
    sol.iterations = iters;
    sol.message = std::move(msg);
    return sol;
  };

  // Rank test on the constraint operator.
  Eigen::Index total = 0;
  for (auto d : p.dims) total += d * d;
  if (m > 0) {
    RMatrix amat(total, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::Index off = 0;
      for (std::size_t k = 0; k < p.nblocks; ++k) {
        const Eigen::Index sz = p.dims[k] * p.dims[k];
        const RMatrix& a = p.a[static_cast<std::size_t>(i)][k];
        if (a.size() == 0) {
          amat.block(off, i, sz, 1).setZero();
        } else {
          amat.block(off, i, sz, 1) = Eigen::Map<const RVector>(a.data(), sz);
        }
        off += sz;
      }
    }
    Eigen::ColPivHouseholderQR<RMatrix> qr(amat);
    qr.setThreshold(1e-10);
    if (qr.rank() < m) {
      Iterate empty;
      for (auto d : p.dims) {
        empty.x.push_back(RMatrix::Zero(d, d));
        empty.z.push_back(RMatrix::Zero(d, d));
      }
      empty.y = RVector::Zero(m);
      return finish(empty, Measures{}, SdpStatus::NumericalFailure, 0,
                    "constraints are linearly dependent (rank " + std::to_string(qr.rank()) + " < " +
                        std::to_string(m) + ")");
    }
  }

  // Starting point.
  double n_total = 0.0;
  for (auto d : p.dims) n_total += static_cast<double>(d);
  const double c_norm = frob(p.c);
  double xi = std::max(10.0, std::sqrt(n_total));
  double eta = std::max({10.0, std::sqrt(n_total), c_norm});
  for (Eigen::Index i = 0; i < m; ++i) {
    const double an = frob(p.a[static_cast<std::size_t>(i)]);
    xi = std::max(xi, n_total * (1.0 + std::abs(p.b[i])) / (1.0 + an));
    eta = std::max(eta, an);
  }
  Iterate it;
  for (auto d : p.dims) {
    it.x.push_back(xi * RMatrix::Identity(d, d));
    it.z.push_back(eta * RMatrix::Identity(d, d));
  }
  it.y = RVector::Zero(m);

  Iterate best = it;
  Measures best_ms = measure(p, it, b_orig, c_norm);
  std::vector<double> res_history;
  int stall = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const Measures ms = measure(p, it, b_orig, c_norm);
    if (ms.worst() < best_ms.worst()) {
      best = it;
      best_ms = ms;
    }
    if (ms.worst() <= opts.target_tolerance) return finish(it, ms, SdpStatus::Optimal, iter, "");

    // Improving rays: a dual ray y (A*y <= 0, b^T y > 0) proves primal
    // infeasibility, a primal ray (A X = 0, <C,X> < 0) dual infeasibility.
    const double scale = 1.0 + c_norm + p.b.norm();
    const double by = p.b.dot(it.y);
    if (by > 1e10 * scale) {
      const Blocks ay = apply_adj(p, it.y);
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& blk : ay) {
        Eigen::SelfAdjointEigenSolver<RMatrix> es(-blk, Eigen::EigenvaluesOnly);
        worst = std::min(worst, es.eigenvalues()[0]);
      }
      if (worst >= -1e-6 * by) {
        return finish(it, ms, SdpStatus::InfeasibleDetected, iter,
                      "primal infeasible: dual iterate follows an improving ray");
      }
    }
    const double cx = inner(p.c, it.x);
    if (-cx > 1e10 * scale && apply_a(p, it.x).norm() < 1e-6 * -cx) {
      return finish(it, ms, SdpStatus::InfeasibleDetected, iter,
                    "dual infeasible: primal iterate follows an improving ray");
    }

    // Infeasibility: residuals stagnate while the iterate norm blows up.
    const double res = std::max(ms.pres, ms.dres);
    res_history.push_back(res);
    if (iter >= 30) {
      const double then = res_history[res_history.size() - 31];
      const double growth = std::max(frob(it.x), frob(it.z) + it.y.norm());
      if (res > 0.5 * then && growth > 1e8 * std::max(xi, eta)) {
        return finish(it, ms, SdpStatus::InfeasibleDetected, iter,
                      "residual stagnated over 30 iterations while the iterate norm diverged");
      }
    }

    // Factorizations.
    std::vector<Eigen::LLT<RMatrix>> chol_x(p.nblocks);
    std::vector<RMatrix> zinv(p.nblocks);
    bool ok = true;
    for (std::size_t k = 0; k < p.nblocks && ok; ++k) {
      chol_x[k].compute(it.x[k]);
      Eigen::LLT<RMatrix> cz(it.z[k]);
      if (chol_x[k].info() != Eigen::Success || cz.info() != Eigen::Success) {
        ok = false;
        break;
      }
      zinv[k] = sym(cz.solve(RMatrix::Identity(p.dims[k], p.dims[k])));
    }
    if (!ok) {
      const bool acceptable = best_ms.worst() <= opts.accept_tolerance;
      return finish(best, best_ms, acceptable ? SdpStatus::Optimal : SdpStatus::NumericalFailure, iter,
                    acceptable ? "" : "Cholesky factorization of an iterate failed");
    }
    const double mu = inner(it.x, it.z) / n_total;

    // Schur complement M_ij = Tr(A_i X A_j Z^-1).
    RMatrix schur = RMatrix::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      Blocks g(p.nblocks);
      for (std::size_t k = 0; k < p.nblocks; ++k) {
        const RMatrix& aj = p.a[static_cast<std::size_t>(j)][k];
        if (aj.size() != 0) g[k] = it.x[k] * aj * zinv[k];
      }
      for (Eigen::Index i = 0; i <= j; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < p.nblocks; ++k) {
          const RMatrix& ai = p.a[static_cast<std::size_t>(i)][k];
          if (ai.size() != 0 && g[k].size() != 0) s += ai.cwiseProduct(g[k].transpose()).sum();
        }
        schur(i, j) = s;
        schur(j, i) = s;
      }
    }
    Eigen::LLT<RMatrix> schur_llt(schur);
    Eigen::LDLT<RMatrix> schur_ldlt;
    const bool use_llt = schur_llt.info() == Eigen::Success;
    if (!use_llt) schur_ldlt.compute(schur);

    const RVector rp = p.b - apply_a(p, it.x);
    Blocks rd = apply_adj(p, it.y);
    for (std::size_t k = 0; k < p.nblocks; ++k) rd[k] = p.c[k] - it.z[k] - rd[k];

    auto direction = [&](double smu, const Blocks* corr, Blocks& dx, RVector& dy, Blocks& dz) {
      Blocks r(p.nblocks);
      for (std::size_t k = 0; k < p.nblocks; ++k) {
        r[k] = smu * zinv[k] - it.x[k] - it.x[k] * rd[k] * zinv[k];
        if (corr != nullptr) r[k] -= (*corr)[k];
      }
      const RVector rhs = rp - apply_a(p, r);
      dy = use_llt ? RVector(schur_llt.solve(rhs)) : RVector(schur_ldlt.solve(rhs));
      dz = apply_adj(p, dy);
      dx.resize(p.nblocks);
      for (std::size_t k = 0; k < p.nblocks; ++k) {
        dz[k] = rd[k] - dz[k];
        dx[k] = smu * zinv[k] - it.x[k] - sym(it.x[k] * dz[k] * zinv[k]);
        if (corr != nullptr) dx[k] -= sym((*corr)[k]);
        dx[k] = sym(dx[k]);
        dz[k] = sym(dz[k]);
      }
    };

    auto step_lengths = [&](const Blocks& dx, const Blocks& dz, double& ap, double& ad) -> bool {
      ap = std::numeric_limits<double>::infinity();
      ad = ap;
      for (std::size_t k = 0; k < p.nblocks; ++k) {
        ap = std::min(ap, max_step(chol_x[k], dx[k]));
        Eigen::LLT<RMatrix> cz(it.z[k]);
        if (cz.info() != Eigen::Success) return false;
        ad = std::min(ad, max_step(cz, dz[k]));
      }
      return std::isfinite(ap) || std::isinf(ap);
    };

    Blocks dx;
    Blocks dz;
    RVector dy;
    direction(0.0, nullptr, dx, dy, dz);
    double ap = 0.0;
    double ad = 0.0;
    step_lengths(dx, dz, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0.0;
    for (std::size_t k = 0; k < p.nblocks; ++k) {
      mu_aff += (it.x[k] + ap * dx[k]).cwiseProduct(it.z[k] + ad * dz[k]).sum();
    }
    mu_aff /= n_total;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    Blocks corr(p.nblocks);
    for (std::size_t k = 0; k < p.nblocks; ++k) corr[k] = dx[k] * dz[k] * zinv[k];
    direction(sigma * mu, &corr, dx, dy, dz);
    step_lengths(dx, dz, ap, ad);
    ap = std::min(1.0, 0.98 * ap);
    ad = std::min(1.0, 0.98 * ad);

    bool finite = dy.allFinite();
    for (std::size_t k = 0; k < p.nblocks; ++k) finite = finite && dx[k].allFinite() && dz[k].allFinite();
    if (!finite) {
      const bool acceptable = best_ms.worst() <= opts.accept_tolerance;
      return finish(best, best_ms, acceptable ? SdpStatus::Optimal : SdpStatus::NumericalFailure, iter,
                    acceptable ? "" : "non-finite search direction");
    }

    for (std::size_t k = 0; k < p.nblocks; ++k) {
      it.x[k] = sym(it.x[k] + ap * dx[k]);
      it.z[k] = sym(it.z[k] + ad * dz[k]);
    }
    it.y += ad * dy;

    stall = (std::max(ap, ad) < 1e-8) ? stall + 1 : 0;
    if (stall >= 3) {
      const bool acceptable = best_ms.worst() <= opts.accept_tolerance;
      return finish(best, best_ms, acceptable ? SdpStatus::Optimal : SdpStatus::NumericalFailure, iter + 1,
                    acceptable ? "" : "step lengths collapsed");
    }
  }

  const Measures ms = measure(p, it, b_orig, c_norm);
  if (ms.worst() < best_ms.worst()) {
    best = it;
    best_ms = ms;
  }
  const bool acceptable = best_ms.worst() <= opts.accept_tolerance;
  return finish(best, best_ms, acceptable ? SdpStatus::Optimal : SdpStatus::MaxIter, opts.max_iterations,
                acceptable ? "" : "iteration limit reached");
}

SdpSolution solve_or_throw(const SdpProblem& p, const std::string& what, const SdpOptions& opts) {
  SdpSolution s = solve(p, opts);
  if (!s.optimal()) {
    throw SolverError(what + ": SDP status " + to_string(s.status) +
                          (s.message.empty() ? "" : " (" + s.message + ")"),
                      to_string(s.status));
  }
  return s;
}

nlohmann::json sdp_to_json(const SdpProblem& p) {
  auto block_json = [](const CMatrix& m) -> nlohmann::json {
    return m.size() == 0 ? nlohmann::json(nullptr) : matrix_to_json(m);
  };
  nlohmann::json c = nlohmann::json::array();
  for (const auto& m : p.objective()) c.push_back(block_json(m));
  nlohmann::json a = nlohmann::json::array();
  for (const auto& row : p.constraints()) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& m : row) r.push_back(block_json(m));
    a.push_back(std::move(r));
  }
  return {{"blocks", p.blocks()},
          {"C", std::move(c)},
          {"A", std::move(a)},
          {"b", p.rhs()},
          {"sense", p.sense == SdpSense::Maximize ? "max" : "min"}};
}

SdpProblem sdp_from_json(const nlohmann::json& j) {
  SdpProblem p;
  for (const auto& d : j.at("blocks")) p.add_block(d.get<Eigen::Index>());
  const auto& c = j.at("C");
  if (c.size() != p.blocks().size()) throw DimensionError("sdp json: C needs one entry per block");
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!c[k].is_null()) p.set_objective(static_cast<int>(k), matrix_from_json(c[k]));
  }
  const auto& a = j.at("A");
  const auto& b = j.at("b");
  if (a.size() != b.size()) throw DimensionError("sdp json: A and b differ in length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int row = p.add_constraint(b[i].get<double>());
    if (a[i].size() != p.blocks().size()) throw DimensionError("sdp json: constraint needs one entry per block");
    for (std::size_t k = 0; k < a[i].size(); ++k) {
      if (!a[i][k].is_null()) p.set_coefficient(row, static_cast<int>(k), matrix_from_json(a[i][k]));
    }
  }
  if (j.contains("sense")) {
    const auto s = j.at("sense").get<std::string>();
    if (s != "min" && s != "max") throw DomainError("sdp json: sense must be \"min\" or \"max\"");
    p.sense = s == "max" ? SdpSense::Maximize : SdpSense::Minimize;
  }
  p.validate();
  return p;
}

}  // namespace qdiv
