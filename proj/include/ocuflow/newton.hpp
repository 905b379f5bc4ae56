#pragma once

#include <chrono>
#include <fstream>
#include <memory>

#include "ocuflow/solver_tree.hpp"

namespace ocuflow {

struct NewtonConfig {
  double eps_tol = 1e-8;
  int max_iters = 25;

  struct LineSearch {
    bool enabled = false;
    double c = 1e-4;       // sufficient-decrease factor
    double shrink = 0.5;   // step reduction per backtrack
    int max_halvings = 8;
  } line_search;

  // Convergence gates on the true residual, relative to the initial one:
  // Crit-based convergence additionally requires res <= res_gate * res0;
  // res <= res_strong * res0 alone suffices (one iteration on linear
  // problems).
  double res_gate = 1e-6;
  double res_strong = 1e-7;

  enum class Init { zero, conduction } init = Init::conduction;

  void validate() const {
    require(eps_tol > 0.0, "newton: eps_tol must be positive");
    require(max_iters >= 1, "newton: max_iters must be >= 1");
    require(line_search.shrink > 0.0 && line_search.shrink < 1.0,
            "newton: line-search shrink must lie in (0,1)");
  }
};

struct NewtonIterate {
  int k = 0;
  double crit = 0.0;
  double res_u = 0.0, res_p = 0.0, res_T = 0.0;
  double alpha = 1.0;
  int lin_iters = 0;
  double lin_residual = 0.0;
  double time_s = 0.0;
};

struct NewtonLog {
  std::vector<NewtonIterate> rows;
  bool converged = false;
  std::string status;
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;

  /// One row per iteration; the wall-time column is the only
  /// run-dependent field.
  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    require(bool(os), "newton log: cannot open " + path);
    os << "k,crit,res_u,res_p,res_T,alpha,lin_iters,time_s\n";
    for (const NewtonIterate& r : rows)
      os << r.k << "," << format_double(r.crit) << "," << format_double(r.res_u) << ","
         << format_double(r.res_p) << "," << format_double(r.res_T) << ","
         << format_double(r.alpha) << "," << r.lin_iters << ","
         << format_double(r.time_s) << "\n";
  }
};

/// Crit = max over components of ||delta^k|| / ||delta^0||; components with
/// a zero first increment are excluded (decoupled/linear cases).
inline double compute_crit(const std::array<double, 3>& deltas,
                           const std::array<double, 3>& deltas0) {
  double crit = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (deltas0[i] == 0.0) continue;
    crit = std::max(crit, deltas[i] / deltas0[i]);
  }
  return crit;
}

struct LineSearchOutcome {
  double alpha = 1.0;
  bool sufficient = false;  // decrease condition met
  bool stagnated = false;   // zero direction
};

/// Backtracking on ||R||: starts at alpha = 1, accepts when
/// ||R(x + a d)|| <= (1 - c a) ||R(x)||, shrinking otherwise.
template <class ResidualNorm>
LineSearchOutcome line_search(const Vec& state, const Vec& direction,
                              ResidualNorm&& residual_norm,
                              const NewtonConfig::LineSearch& cfg) {
  LineSearchOutcome out;
  const double r0 = residual_norm(state);
  if (norm2(direction) == 0.0) {
    out.alpha = 1.0;
    out.stagnated = true;
    out.sufficient = true;
    return out;
  }
  double alpha = 1.0;
  bool any_finite = false;
  Vec trial(state.size());
  for (int h = 0; h <= cfg.max_halvings; ++h) {
    for (std::size_t i = 0; i < state.size(); ++i)
      trial[i] = state[i] + alpha * direction[i];
    const double r = residual_norm(trial);
    if (std::isfinite(r)) {
      any_finite = true;
      if (r <= (1.0 - cfg.c * alpha) * r0) {
        out.alpha = alpha;
        out.sufficient = true;
        return out;
      }
    }
    alpha *= cfg.shrink;
  }
  require(any_finite, "line search: residual non-finite at every trial step");
  out.alpha = alpha / cfg.shrink;  // last tried step, flagged
  out.sufficient = false;
  return out;
}

struct NewtonResult {
  State state;
  NewtonLog log;
};

namespace detail {

inline Vec pack_state(const State& s) {
  Vec x;
  x.reserve(s.u.coeffs.size() + s.p.coeffs.size() + s.T.coeffs.size());
  x.insert(x.end(), s.u.coeffs.begin(), s.u.coeffs.end());
  x.insert(x.end(), s.p.coeffs.begin(), s.p.coeffs.end());
  x.insert(x.end(), s.T.coeffs.begin(), s.T.coeffs.end());
  return x;
}

inline void unpack_state(const Vec& x, State& s) {
  const std::size_t nu = s.u.coeffs.size(), np = s.p.coeffs.size();
  std::copy(x.begin(), x.begin() + nu, s.u.coeffs.begin());
  std::copy(x.begin() + nu, x.begin() + nu + np, s.p.coeffs.begin());
  std::copy(x.begin() + nu + np, x.end(), s.T.coeffs.begin());
}

}  // namespace detail

/// Pure-conduction temperature solve (u = 0): the default initial guess.
inline Field solve_conduction(const Problem& pb, const ConstantBlocks& cb,
                              const SolverTree& tree) {
  State zero;
  zero.u = Field(pb.Vh);
  zero.p = Field(pb.Qh);
  zero.T = Field(pb.Wh);
  apply_dirichlet(pb, zero);
  // Nonlinear radiation enters through a few Newton steps on T alone.
  Field T = zero.T;
  for (int it = 0; it < 20; ++it) {
    State s = zero;
    s.T = T;
    const ResidualVectors res = assemble_residual(pb, cb, s);
    if (res.norm_T <= 1e-12 * std::max(1.0, norm2(cb.ell2))) break;
    SparseMatrix J = cb.F_lin;
    if (pb.variant.radiation == RadiationModel::nonlinear && !pb.gamma_amb.empty()) {
      Assembler on_omega(*pb.omega);
      const SparseMatrix R = on_omega.facet_bilinear(
          pb.Wh, pb.Wh, facet_rule(pb), pb.gamma_amb,
          {8, [se = pb.params.sigma_SB * pb.params.epsilon](
                  const AsmContext& ctx, const BasisAt& dT, const BasisAt& phi) {
             const double Tq = ctx.coef[0][0];
             return 4.0 * se * Tq * Tq * Tq * dT.v * phi.v;
           }},
          {&T});
      const auto& rp = R.row_ptr();
      const auto& ci = R.col_idx();
      for (int i = 0; i < R.rows(); ++i)
        for (int k = rp[i]; k < rp[i + 1]; ++k) J.add(i, ci[k], R.values()[k]);
    }
    Vec r = res.r_T;
    const std::vector<char> tm = pb.T_mask();
    Vec zero_T(pb.n_T(), 0.0);
    J.eliminate_dirichlet(tm, r, zero_T);
    const AmgHierarchy h = amg_build(J, tree.amg);
    SolveReport rep;
    const Vec dT = gmres(matrix_op(J), r, amg_pc(h), 1e-10, tree.heat_restart,
                         2000, rep);
    require(rep.converged, "conduction initial guess: linear solve failed");
    axpy(1.0, dT, T.coeffs);
    if (norm2(dT) <= 1e-12 * std::max(1.0, norm2(T.coeffs))) break;
  }
  return T;
}

/// Newton loop: assemble state blocks and residual, solve the block system,
/// relax, update, and stop on the relative-increment criterion (gated on the
/// true residual).
inline NewtonResult newton_solve(const Problem& pb, const ConstantBlocks& cb,
                                 const State* init, const NewtonConfig& cfg,
                                 const SolverTree& tree) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  NewtonResult out;
  NewtonLog& log = out.log;

  State s;
  s.u = Field(pb.Vh);
  s.p = Field(pb.Qh);
  s.T = Field(pb.Wh);
  if (init) {
    s = *init;
  } else if (cfg.init == NewtonConfig::Init::conduction) {
    s.T = solve_conduction(pb, cb, tree);
  }
  apply_dirichlet(pb, s);

  ResidualVectors res = assemble_residual(pb, cb, s);
  const double res0 = std::max(res.total(), std::numeric_limits<double>::min());

  std::array<double, 3> delta0{0.0, 0.0, 0.0};
  StateBlocks frozen;
  bool have_frozen = false;

  for (int k = 0; k < cfg.max_iters; ++k) {
    const auto t0 = clock::now();
    StateBlocks sb = assemble_state_blocks(pb, s.u, s.T);
    if (pb.variant.frozen_radiation_jacobian && pb.variant.radiation == RadiationModel::nonlinear) {
      if (!have_frozen) {
        frozen.R_rad = sb.R_rad;
        frozen.has_rad = sb.has_rad;
        have_frozen = true;
      } else {
        sb.R_rad = frozen.R_rad;
        sb.has_rad = frozen.has_rad;
      }
    }
    ResidualVectors rhs_res = res;  // consumed by the system build
    NewtonSystem sys = build_newton_system(pb, cb, sb, std::move(rhs_res));
    project_nullspace(sys.r_p, Vec(sys.np, 1.0));
    const auto t1 = clock::now();

    TreeSolver solver(sys, cb, pb, tree);
    LinearSolveStats stats;
    Vec delta;
    try {
      delta = solver.solve(stats);
    } catch (const Error& e) {
      log.status = "linear solve failed at iteration " + std::to_string(k) + ": " + e.what();
      log.converged = false;
      out.state = s;
      return out;
    }
    const auto t2 = clock::now();
    log.assembly_seconds += std::chrono::duration<double>(t1 - t0).count();
    log.solve_seconds += std::chrono::duration<double>(t2 - t1).count();

    const Vec du(delta.begin(), delta.begin() + sys.nu);
    const Vec dp(delta.begin() + sys.nu, delta.begin() + sys.nu + sys.np);
    const Vec dT(delta.begin() + sys.nu + sys.np, delta.end());

    double alpha = 1.0;
    if (cfg.line_search.enabled) {
      const Vec x = detail::pack_state(s);
      State trial = s;
      const LineSearchOutcome ls = line_search(
          x, delta,
          [&](const Vec& xt) {
            detail::unpack_state(xt, trial);
            return assemble_residual(pb, cb, trial).total();
          },
          cfg.line_search);
      alpha = ls.alpha;
      if (!ls.sufficient)
        log.status = "line search exhausted at iteration " + std::to_string(k);
    }

    axpy(alpha, du, s.u.coeffs);
    axpy(alpha, dp, s.p.coeffs);
    axpy(alpha, dT, s.T.coeffs);
    require(all_finite(s.u.coeffs) && all_finite(s.p.coeffs) && all_finite(s.T.coeffs),
            "newton: non-finite state after update at iteration " + std::to_string(k));

    res = assemble_residual(pb, cb, s);
    // The increment actually applied is alpha * delta.
    const std::array<double, 3> dn{alpha * norm2(du), alpha * norm2(dp),
                                   alpha * norm2(dT)};
    if (k == 0) delta0 = dn;
    const double crit = compute_crit(dn, delta0);

    NewtonIterate row;
    row.k = k;
    row.crit = crit;
    row.res_u = res.norm_u;
    row.res_p = res.norm_p;
    row.res_T = res.norm_T;
    row.alpha = alpha;
    row.lin_iters = stats.outer_iterations;
    row.lin_residual = stats.outer_residual;
    row.time_s = std::chrono::duration<double>(clock::now() - t0).count();
    log.rows.push_back(row);

    const double rel = res.total() / res0;
    if (rel <= cfg.res_strong || (crit <= cfg.eps_tol && rel <= cfg.res_gate)) {
      log.converged = true;
      log.status = "converged in " + std::to_string(k + 1) + " iterations";
      out.state = s;
      return out;
    }
  }
  log.converged = false;
  log.status = "no convergence within " + std::to_string(cfg.max_iters) +
               " iterations (Crit = " +
               (log.rows.empty() ? std::string("n/a") : format_double(log.rows.back().crit)) +
               ")";
  out.state = s;
  return out;
}

}  // namespace ocuflow
