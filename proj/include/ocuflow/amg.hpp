#pragma once

#include "ocuflow/sparse.hpp"

namespace ocuflow {

/// Plain (unsmoothed) aggregation multigrid: greedy strength-based
/// aggregates, piecewise-constant transfer, Galerkin coarse operators,
/// damped-Jacobi smoothing, dense LU on the coarsest level.
struct AmgOptions {
  double strength = 0.08;      // |a_ij| > strength * sqrt(|a_ii a_jj|)
  double omega = 2.0 / 3.0;    // Jacobi damping
  int pre_smooth = 1;
  int post_smooth = 1;
  double correction_scale = 1.0;  // over-correction for plain aggregation
  int coarse_size = 64;        // direct solve below this
  int max_levels = 25;
};

struct AmgLevel {
  SparseMatrix A;
  Vec inv_diag;
  SparseMatrix P, R;  // piecewise-constant prolongation and its transpose
};

struct AmgHierarchy {
  std::vector<AmgLevel> levels;  // levels[0].A is the fine matrix
  DenseLU coarse;
  AmgOptions opts;
  bool stagnated = false;
  std::string note;

  int n_levels() const { return int(levels.size()); }
};

namespace detail {

/// Deterministic greedy aggregation; returns aggregate id per node (or -1
/// for none, which does not happen after the final pass).
inline std::vector<int> aggregate(const SparseMatrix& A, double theta, int& n_agg) {
  const int n = A.rows();
  const auto& rp = A.row_ptr();
  const auto& ci = A.col_idx();
  const auto& v = A.values();
  const Vec diag = A.diagonal();

  std::vector<std::vector<int>> strong(n);
  for (int i = 0; i < n; ++i)
    for (int k = rp[i]; k < rp[i + 1]; ++k) {
      const int j = ci[k];
      if (j == i) continue;
      if (std::abs(v[k]) > theta * std::sqrt(std::abs(diag[i] * diag[j])))
        strong[i].push_back(j);
    }

  std::vector<int> agg(n, -1);
  n_agg = 0;
  // Pass 1: roots whose strong neighborhood is untouched.
  for (int i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    bool free = true;
    for (int j : strong[i])
      if (agg[j] >= 0) {
        free = false;
        break;
      }
    if (!free) continue;
    agg[i] = n_agg;
    for (int j : strong[i]) agg[j] = n_agg;
    ++n_agg;
  }
  // Pass 2: attach leftovers to the most strongly connected aggregate.
  for (int i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    int best = -1;
    double best_w = 0.0;
    for (int k = rp[i]; k < rp[i + 1]; ++k) {
      const int j = ci[k];
      if (j == i || agg[j] < 0) continue;
      const double w = std::abs(v[k]);
      if (w > best_w) {
        best_w = w;
        best = agg[j];
      }
    }
    if (best >= 0) agg[i] = best;
  }
  // Pass 3: isolated nodes become singletons.
  for (int i = 0; i < n; ++i)
    if (agg[i] < 0) agg[i] = n_agg++;
  return agg;
}

inline SparseMatrix aggregation_prolongator(const std::vector<int>& agg, int n_agg) {
  std::vector<std::pair<int, int>> pattern;
  pattern.reserve(agg.size());
  for (int i = 0; i < int(agg.size()); ++i) pattern.emplace_back(i, agg[i]);
  SparseMatrix P(int(agg.size()), n_agg, std::move(pattern));
  for (int i = 0; i < int(agg.size()); ++i) P.add(i, agg[i], 1.0);
  return P;
}

/// Galerkin triple product R A P for piecewise-constant P: coarse entry
/// (I,J) sums a_ij over i in aggregate I, j in aggregate J.
inline SparseMatrix galerkin_coarse(const SparseMatrix& A, const std::vector<int>& agg,
                                    int n_agg) {
  const auto& rp = A.row_ptr();
  const auto& ci = A.col_idx();
  const auto& v = A.values();
  std::vector<std::pair<int, int>> pattern;
  for (int i = 0; i < A.rows(); ++i)
    for (int k = rp[i]; k < rp[i + 1]; ++k)
      pattern.emplace_back(agg[i], agg[ci[k]]);
  SparseMatrix Ac(n_agg, n_agg, std::move(pattern));
  for (int i = 0; i < A.rows(); ++i)
    for (int k = rp[i]; k < rp[i + 1]; ++k) Ac.add(agg[i], agg[ci[k]], v[k]);
  return Ac;
}

}  // namespace detail

inline AmgHierarchy amg_build(SparseMatrix A, const AmgOptions& opts = {}) {
  require(A.rows() == A.cols(), "amg_build: square matrix required");
  AmgHierarchy h;
  h.opts = opts;
  while (int(h.levels.size()) < opts.max_levels && A.rows() > opts.coarse_size) {
    int n_agg = 0;
    const std::vector<int> agg = detail::aggregate(A, opts.strength, n_agg);
    const double ratio = double(A.rows()) / double(std::max(1, n_agg));
    if (ratio < 1.1) {
      h.stagnated = true;
      h.note = "aggregation stagnated at n = " + std::to_string(A.rows()) +
               " (coarsening ratio " + std::to_string(ratio) + " < 1.1)";
      require(A.rows() <= 4096, "amg_build: " + h.note);
      break;
    }
    AmgLevel lvl;
    lvl.A = std::move(A);
    lvl.inv_diag.resize(lvl.A.rows());
    const Vec d = lvl.A.diagonal();
    for (int i = 0; i < lvl.A.rows(); ++i) {
      require(d[i] != 0.0, "amg_build: zero diagonal at row " + std::to_string(i));
      lvl.inv_diag[i] = 1.0 / d[i];
    }
    lvl.P = detail::aggregation_prolongator(agg, n_agg);
    lvl.R = lvl.P.transposed();
    A = detail::galerkin_coarse(lvl.A, agg, n_agg);
    h.levels.push_back(std::move(lvl));
  }
  // Coarsest level: dense factorization.
  DenseMatrix C(A.rows(), A.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
      C(i, A.col_idx()[k]) += A.values()[k];
  AmgLevel last;
  last.A = std::move(A);
  h.levels.push_back(std::move(last));
  h.coarse = DenseLU(std::move(C));
  return h;
}

namespace detail {

inline void jacobi_sweeps(const SparseMatrix& A, const Vec& inv_diag, const Vec& b,
                          Vec& x, double omega, int sweeps) {
  Vec r;
  for (int s = 0; s < sweeps; ++s) {
    A.multiply(x, r);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += omega * inv_diag[i] * (b[i] - r[i]);
  }
}

inline void vcycle(const AmgHierarchy& h, int level, const Vec& b, Vec& x) {
  const AmgLevel& lvl = h.levels[level];
  if (level == h.n_levels() - 1) {
    x = h.coarse.solve(b);
    return;
  }
  x.assign(b.size(), 0.0);
  jacobi_sweeps(lvl.A, lvl.inv_diag, b, x, h.opts.omega, h.opts.pre_smooth);
  Vec r = lvl.A.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const Vec rc = lvl.R.multiply(r);
  Vec xc;
  vcycle(h, level + 1, rc, xc);
  const Vec corr = lvl.P.multiply(xc);
  axpy(h.opts.correction_scale, corr, x);
  jacobi_sweeps(lvl.A, lvl.inv_diag, b, x, h.opts.omega, h.opts.post_smooth);
}

}  // namespace detail

/// One V-cycle from a zero initial guess: a fixed linear operator.
inline Vec amg_apply(const AmgHierarchy& h, const Vec& r) {
  Vec z;
  detail::vcycle(h, 0, r, z);
  return z;
}

}  // namespace ocuflow
