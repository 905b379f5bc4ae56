#pragma once

#include "ocuflow/amg.hpp"
#include "ocuflow/sparse.hpp"

namespace ocuflow {

struct LinOp {
  int n = 0;
  std::function<void(const Vec&, Vec&)> apply;
};

inline LinOp matrix_op(const SparseMatrix& A) {
  return {A.rows(), [&A](const Vec& x, Vec& y) { A.multiply(x, y); }};
}

/// One application z ~= M^{-1} r. Solver nodes (inner Krylov loops, AMG
/// V-cycles, direct solves) all fit this shape.
struct Preconditioner {
  int n = 0;
  std::function<void(const Vec&, Vec&)> apply;
};

inline Preconditioner identity_pc(int n) {
  return {n, [](const Vec& r, Vec& z) { z = r; }};
}

inline Preconditioner amg_pc(const AmgHierarchy& h) {
  return {h.levels[0].A.rows(), [&h](const Vec& r, Vec& z) { z = amg_apply(h, r); }};
}

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;   // recomputed ||b - Ax||
  double rhs_norm = 0.0;
  bool converged = false;
  bool breakdown = false;
};

/// Removes the component of v along `basis` (pressure constant mode).
inline void project_nullspace(Vec& v, const Vec& basis) {
  const double bb = dot(basis, basis);
  require(bb > 0.0, "project_nullspace: zero basis");
  const double c = dot(v, basis) / bb;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * basis[i];
}

namespace detail {

/// Right-preconditioned restarted GMRES; `flexible` stores preconditioned
/// vectors (FGMRES) and admits nonstationary preconditioners.
inline Vec gmres_impl(const LinOp& op, const Vec& b, const Preconditioner& pc,
                      double tol, int restart, int maxit, bool flexible,
                      SolveReport& rep, const Vec* x0,
                      const Vec* nullspace_basis) {
  const int n = op.n;
  require(int(b.size()) == n, "gmres: rhs dimension mismatch");
  require(pc.n == n, "gmres: preconditioner dimension mismatch");
  Vec x = x0 ? *x0 : Vec(n, 0.0);
  rep = SolveReport{};
  rep.rhs_norm = norm2(b);
  if (rep.rhs_norm == 0.0) {
    x.assign(n, 0.0);
    rep.converged = true;
    return x;
  }
  const double target = tol * rep.rhs_norm;

  Vec w(n), r(n);
  auto true_residual = [&](const Vec& xx) {
    op.apply(xx, r);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    if (nullspace_basis) project_nullspace(r, *nullspace_basis);
    return norm2(r);
  };

  int total_it = 0;
  double beta = true_residual(x);
  while (total_it < maxit && beta > target) {
    const int m = std::min(restart, maxit - total_it);
    std::vector<Vec> V(1, r);
    scale(V[0], 1.0 / beta);
    std::vector<Vec> Z;  // flexible only
    DenseMatrix H(m + 1, m);
    Vec cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = beta;
    int j = 0;
    bool happy = false;
    for (; j < m; ++j) {
      Vec z(n);
      pc.apply(V[j], z);
      if (nullspace_basis) project_nullspace(z, *nullspace_basis);
      if (flexible) Z.push_back(z);
      op.apply(z, w);
      if (nullspace_basis) project_nullspace(w, *nullspace_basis);
      for (int i = 0; i <= j; ++i) {
        H(i, j) = dot(w, V[i]);
        axpy(-H(i, j), V[i], w);
      }
      H(j + 1, j) = norm2(w);
      const double hsub = H(j + 1, j);
      ++total_it;
      if (hsub > 0.0) {
        V.push_back(w);
        scale(V.back(), 1.0 / hsub);
      }
      // Givens rotations.
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = t;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      if (denom == 0.0) {
        rep.breakdown = true;  // singular Hessenberg
        break;
      }
      cs[j] = H(j, j) / denom;
      sn[j] = H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      const double est = std::abs(g[j + 1]);
      if (est <= target || hsub == 0.0) {
        ++j;
        happy = est <= target;
        break;
      }
    }
    // Solve the small triangular system and update x.
    const int k = j;
    if (k > 0) {
      Vec y(k, 0.0);
      for (int i = k - 1; i >= 0; --i) {
        double s = g[i];
        for (int l = i + 1; l < k; ++l) s -= H(i, l) * y[l];
        y[i] = s / H(i, i);
      }
      if (flexible) {
        for (int l = 0; l < k; ++l) axpy(y[l], Z[l], x);
      } else {
        Vec u(n, 0.0);
        for (int l = 0; l < k; ++l) axpy(y[l], V[l], u);
        Vec z(n);
        pc.apply(u, z);
        if (nullspace_basis) project_nullspace(z, *nullspace_basis);
        axpy(1.0, z, x);
      }
    }
    beta = true_residual(x);
    if (rep.breakdown) break;
    (void)happy;
  }
  rep.iterations = total_it;
  rep.residual = beta;
  rep.converged = beta <= target;
  return x;
}

}  // namespace detail

inline Vec gmres(const LinOp& op, const Vec& b, const Preconditioner& pc,
                 double tol, int restart, int maxit, SolveReport& rep,
                 const Vec* x0 = nullptr, const Vec* nullspace_basis = nullptr) {
  return detail::gmres_impl(op, b, pc, tol, restart, maxit, false, rep, x0,
                            nullspace_basis);
}

inline Vec fgmres(const LinOp& op, const Vec& b, const Preconditioner& pc,
                  double tol, int restart, int maxit, SolveReport& rep,
                  const Vec* x0 = nullptr, const Vec* nullspace_basis = nullptr) {
  return detail::gmres_impl(op, b, pc, tol, restart, maxit, true, rep, x0,
                            nullspace_basis);
}

/// Preconditioned conjugate gradient (SPD systems: mass matrices,
/// per-component velocity blocks).
inline Vec cg(const LinOp& op, const Vec& b, const Preconditioner& pc, double tol,
              int maxit, SolveReport& rep) {
  const int n = op.n;
  Vec x(n, 0.0), r = b, z(n), p(n), Ap(n);
  rep = SolveReport{};
  rep.rhs_norm = norm2(b);
  if (rep.rhs_norm == 0.0) {
    rep.converged = true;
    return x;
  }
  const double target = tol * rep.rhs_norm;
  pc.apply(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < maxit; ++it) {
    op.apply(p, Ap);
    const double pAp = dot(p, Ap);
    if (pAp <= 0.0) {
      rep.breakdown = true;
      break;
    }
    const double alpha = rz / pAp;
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    rep.iterations = it + 1;
    if (norm2(r) <= target) break;
    pc.apply(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  op.apply(x, Ap);
  for (int i = 0; i < n; ++i) Ap[i] = b[i] - Ap[i];
  rep.residual = norm2(Ap);
  rep.converged = rep.residual <= target;
  return x;
}

/// Wraps an inner Krylov solve as a preconditioner node.
struct SolverNodeConfig {
  double tol = 1e-5;
  int restart = 100;
  int maxit = 200;
  bool flexible = false;
};

inline Preconditioner solver_node(const LinOp& op, Preconditioner inner_pc,
                                  const SolverNodeConfig& cfg,
                                  std::string name = "",
                                  const Vec* nullspace_basis = nullptr) {
  return {op.n, [=, pc = std::move(inner_pc)](const Vec& r, Vec& z) {
            SolveReport rep;
            z = cfg.flexible
                    ? fgmres(op, r, pc, cfg.tol, cfg.restart, cfg.maxit, rep, nullptr,
                             nullspace_basis)
                    : gmres(op, r, pc, cfg.tol, cfg.restart, cfg.maxit, rep, nullptr,
                            nullspace_basis);
            if (rep.breakdown)
              fail("solver node '" + name + "': Krylov breakdown at iteration " +
                   std::to_string(rep.iterations));
          }};
}

/// Additive fieldsplit over two contiguous index blocks: applies each node
/// to its own residual slice, ignoring the off-diagonal coupling.
inline Preconditioner make_fieldsplit_additive(Preconditioner node0, Preconditioner node1,
                                               const std::string& name0 = "fluid",
                                               const std::string& name1 = "heat") {
  const int n0 = node0.n, n1 = node1.n;
  return {n0 + n1, [=, p0 = std::move(node0), p1 = std::move(node1)](const Vec& r, Vec& z) {
            Vec r0(r.begin(), r.begin() + n0);
            Vec r1(r.begin() + n0, r.end());
            Vec z0, z1;
            try {
              p0.apply(r0, z0);
            } catch (const std::exception& e) {
              fail("fieldsplit block '" + name0 + "': " + e.what());
            }
            try {
              p1.apply(r1, z1);
            } catch (const std::exception& e) {
              fail("fieldsplit block '" + name1 + "': " + e.what());
            }
            z.resize(n0 + n1);
            std::copy(z0.begin(), z0.end(), z.begin());
            std::copy(z1.begin(), z1.end(), z.begin() + n0);
          }};
}

/// Upper-triangular Schur preconditioner for the saddle block
/// [[A, B^T], [B, 0]]: z_p = S_node(r_p); z_u = A_node(r_u - B^T z_p).
/// Only actions are used; no Schur matrix is formed.
inline Preconditioner make_schur_upper(Preconditioner a_node, Preconditioner s_node,
                                       const SparseMatrix& Bt) {
  const int nu = a_node.n, np = s_node.n;
  require(Bt.rows() == nu && Bt.cols() == np, "make_schur_upper: B^T shape mismatch");
  return {nu + np, [=, an = std::move(a_node), sn = std::move(s_node),
                    &Bt](const Vec& r, Vec& z) {
            Vec rp(r.begin() + nu, r.end());
            Vec zp;
            try {
              sn.apply(rp, zp);
            } catch (const std::exception& e) {
              fail("schur block 'S': " + std::string(e.what()));
            }
            Vec ru(r.begin(), r.begin() + nu);
            Bt.multiply_add(zp, ru, -1.0);
            Vec zu;
            try {
              an.apply(ru, zu);
            } catch (const std::exception& e) {
              fail("schur block 'A': " + std::string(e.what()));
            }
            z.resize(nu + np);
            std::copy(zu.begin(), zu.end(), z.begin());
            std::copy(zp.begin(), zp.end(), z.begin() + nu);
          }};
}

/// Decouples interleaved velocity components: each component's diagonal
/// block is solved by AMG-preconditioned CG (one sweep, preonly contract).
class BlockJacobi {
 public:
  BlockJacobi(const SparseMatrix& A, int components, double tol = 1e-8, int maxit = 200)
      : n_(A.rows()), ncomp_(components), tol_(tol), maxit_(maxit) {
    require(A.rows() == A.cols(), "block_jacobi: square matrix required");
    require(n_ % ncomp_ == 0, "block_jacobi: size not divisible by component count");
    const int nb = n_ / ncomp_;
    const auto& rp = A.row_ptr();
    const auto& ci = A.col_idx();
    const auto& v = A.values();
    for (int c = 0; c < ncomp_; ++c) {
      std::vector<std::pair<int, int>> pattern;
      for (int ib = 0; ib < nb; ++ib) {
        const int i = ib * ncomp_ + c;
        for (int k = rp[i]; k < rp[i + 1]; ++k)
          if (ci[k] % ncomp_ == c) pattern.emplace_back(ib, ci[k] / ncomp_);
      }
      SparseMatrix Ac(nb, nb, std::move(pattern));
      for (int ib = 0; ib < nb; ++ib) {
        const int i = ib * ncomp_ + c;
        for (int k = rp[i]; k < rp[i + 1]; ++k)
          if (ci[k] % ncomp_ == c) Ac.add(ib, ci[k] / ncomp_, v[k]);
      }
      const Vec d = Ac.diagonal();
      for (int ib = 0; ib < nb; ++ib)
        require(d[ib] != 0.0, "block_jacobi: singular diagonal block (component " +
                                  std::to_string(c) + ")");
      blocks_.push_back(std::move(Ac));
      hierarchies_.push_back(amg_build(blocks_.back()));
    }
  }

  Preconditioner pc() const {
    return {n_, [this](const Vec& r, Vec& z) { apply(r, z); }};
  }

  void apply(const Vec& r, Vec& z) const {
    const int nb = n_ / ncomp_;
    z.assign(n_, 0.0);
    for (int c = 0; c < ncomp_; ++c) {
      Vec rc(nb);
      for (int ib = 0; ib < nb; ++ib) rc[ib] = r[ib * ncomp_ + c];
      SolveReport rep;
      const Vec zc = cg(matrix_op(blocks_[c]), rc, amg_pc(hierarchies_[c]), tol_,
                        maxit_, rep);
      if (rep.breakdown)
        fail("block_jacobi: singular diagonal block (component " + std::to_string(c) +
             ")");
      for (int ib = 0; ib < nb; ++ib) z[ib * ncomp_ + c] = zc[ib];
    }
  }

  /// Residual of the component solve, for diagnostics.
  double component_residual(const Vec& r, const Vec& z, int c) const {
    const int nb = n_ / ncomp_;
    Vec rc(nb), zc(nb);
    for (int ib = 0; ib < nb; ++ib) {
      rc[ib] = r[ib * ncomp_ + c];
      zc[ib] = z[ib * ncomp_ + c];
    }
    Vec Az = blocks_[c].multiply(zc);
    for (int ib = 0; ib < nb; ++ib) Az[ib] -= rc[ib];
    return norm2(Az);
  }

 private:
  int n_, ncomp_;
  double tol_;
  int maxit_;
  std::vector<SparseMatrix> blocks_;
  std::vector<AmgHierarchy> hierarchies_;
};

}  // namespace ocuflow
