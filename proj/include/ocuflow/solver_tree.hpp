#pragma once

#include "ocuflow/forms.hpp"

namespace ocuflow {

/// Declarative description of the nested Krylov/preconditioner tree:
/// outer GMRES + additive fieldsplit; heat block GMRES/AMG; fluid block
/// FGMRES with the upper Schur split; velocity block-Jacobi (preonly);
/// Schur node AMG (preonly) on the scaled pressure mass matrix.
struct SolverTree {
  std::string name = "table2";

  double outer_tol = 1e-8;
  int outer_restart = 100;
  int outer_maxit = 500;
  bool fieldsplit = true;  // false: unpreconditioned outer GMRES

  double heat_tol = 1e-5;
  int heat_restart = 100;
  int heat_maxit = 200;

  double fluid_tol = 1e-5;
  int fluid_restart = 100;
  int fluid_maxit = 200;

  // Velocity node: preonly block-Jacobi by default; opt-in small FGMRES wrap
  // for strongly nonsymmetric blocks.
  bool velocity_preonly = true;
  double velocity_tol = 1e-2;
  int velocity_maxit = 10;
  double bjacobi_tol = 1e-8;
  int bjacobi_maxit = 200;

  enum class SchurApprox { pressure_mass, diag_A };
  SchurApprox schur = SchurApprox::pressure_mass;

  AmgOptions amg;

  void validate() const {
    require(outer_tol > 0 && heat_tol > 0 && fluid_tol > 0 && bjacobi_tol > 0,
            "solver tree: tolerances must be positive");
    require(outer_restart > 0 && outer_maxit > 0, "solver tree: iteration limits");
  }

  static SolverTree table2() { return SolverTree{}; }

  static SolverTree unpreconditioned() {
    SolverTree t;
    t.name = "unpreconditioned";
    t.fieldsplit = false;
    t.outer_maxit = 20000;
    t.outer_restart = 200;
    return t;
  }
};

struct LinearSolveStats {
  int outer_iterations = 0;
  double outer_residual = 0.0;
  bool converged = false;
};

/// B diag(A)^{-1} B^T formed explicitly (small pressure space); the
/// configurable alternative Schur stand-in.
inline SparseMatrix scaled_bbt(const SparseMatrix& B, const Vec& inv_diag) {
  const int np = B.rows();
  const auto& rp = B.row_ptr();
  const auto& ci = B.col_idx();
  const auto& v = B.values();
  std::vector<std::map<int, double>> rows(np);
  // Column -> pressure rows touching it.
  std::vector<std::vector<std::pair<int, double>>> by_col(B.cols());
  for (int i = 0; i < np; ++i)
    for (int k = rp[i]; k < rp[i + 1]; ++k) by_col[ci[k]].push_back({i, v[k]});
  for (int col = 0; col < B.cols(); ++col) {
    const double d = inv_diag[col];
    for (const auto& [i, vi] : by_col[col])
      for (const auto& [j, vj] : by_col[col]) rows[i][j] += vi * d * vj;
  }
  std::vector<std::pair<int, int>> pattern;
  for (int i = 0; i < np; ++i)
    for (const auto& [j, val] : rows[i]) pattern.emplace_back(i, j);
  SparseMatrix S(np, np, std::move(pattern));
  for (int i = 0; i < np; ++i)
    for (const auto& [j, val] : rows[i]) S.add(i, j, val);
  return S;
}

/// Instantiates the tree against one Newton system. Hierarchies are built at
/// construction; solve() applies the nested solvers.
class TreeSolver {
 public:
  TreeSolver(const NewtonSystem& sys, const ConstantBlocks& cb, const Problem& pb,
             const SolverTree& cfg)
      : sys_(&sys), cfg_(cfg), mu_(pb.params.mu) {
    cfg.validate();
    if (!cfg.fieldsplit) return;

    // Heat node: GMRES preconditioned by one AMG V-cycle.
    heat_amg_ = amg_build(sys.A_TT, cfg.amg);

    // Velocity node: block Jacobi over components.
    bjacobi_ = std::make_unique<BlockJacobi>(sys.A_uu, pb.Vh.components,
                                             cfg.bjacobi_tol, cfg.bjacobi_maxit);

    // Schur node.
    if (cfg.schur == SolverTree::SchurApprox::pressure_mass) {
      schur_matrix_ = cb.Mp;  // S ~ -(1/mu) Mp; sign applied in the node
      schur_scale_ = -mu_;
    } else {
      schur_matrix_ = scaled_bbt(sys.B, inverse_diag(sys.A_uu));
      schur_scale_ = -1.0;  // S ~ -B diag(A)^{-1} B^T
    }
    schur_amg_ = amg_build(schur_matrix_, cfg.amg);
  }

  Vec solve(LinearSolveStats& stats) const {
    const Vec b = sys_->rhs();
    const Vec ns_full = sys_->pressure_nullspace();
    SolveReport rep;
    Vec x;
    if (!cfg_.fieldsplit) {
      x = gmres(sys_->full_op(), b, identity_pc(sys_->n_total()), cfg_.outer_tol,
                cfg_.outer_restart, cfg_.outer_maxit, rep, nullptr, &ns_full);
    } else {
      const Preconditioner pc = make_fieldsplit_additive(fluid_node(), heat_node());
      x = gmres(sys_->full_op(), b, pc, cfg_.outer_tol, cfg_.outer_restart,
                cfg_.outer_maxit, rep, nullptr, &ns_full);
    }
    stats.outer_iterations = rep.iterations;
    stats.outer_residual = rep.residual;
    stats.converged = rep.converged;
    require(!rep.breakdown, "linear solve: Krylov breakdown");
    return x;
  }

  /// Fluid split subproblem node: FGMRES on K00 with the upper Schur PC.
  Preconditioner fluid_node() const {
    const Preconditioner schur_pc = make_schur_upper(velocity_node(), schur_node(), sys_->Bt);
    SolverNodeConfig cfg;
    cfg.tol = cfg_.fluid_tol;
    cfg.restart = cfg_.fluid_restart;
    cfg.maxit = cfg_.fluid_maxit;
    cfg.flexible = true;
    ns_fluid_ = sys_->pressure_nullspace_fluid();
    return solver_node(sys_->fluid_op(), schur_pc, cfg, "fluid", &ns_fluid_);
  }

  Preconditioner heat_node() const {
    SolverNodeConfig cfg;
    cfg.tol = cfg_.heat_tol;
    cfg.restart = cfg_.heat_restart;
    cfg.maxit = cfg_.heat_maxit;
    return solver_node(matrix_op(sys_->A_TT), amg_pc(heat_amg_), cfg, "heat");
  }

  Preconditioner velocity_node() const {
    if (cfg_.velocity_preonly) return bjacobi_->pc();
    SolverNodeConfig cfg;
    cfg.tol = cfg_.velocity_tol;
    cfg.maxit = cfg_.velocity_maxit;
    cfg.restart = cfg_.velocity_maxit;
    cfg.flexible = true;
    return solver_node(matrix_op(sys_->A_uu), bjacobi_->pc(), cfg, "velocity");
  }

  /// Schur node, preonly: one V-cycle on the stand-in matrix, sign-corrected
  /// to approximate S^{-1} with S = -B A^{-1} B^T.
  Preconditioner schur_node() const {
    return {schur_matrix_.rows(), [this](const Vec& r, Vec& z) {
              z = amg_apply(schur_amg_, r);
              scale(z, schur_scale_);
            }};
  }

 private:
  static Vec inverse_diag(const SparseMatrix& A) {
    Vec d = A.diagonal();
    for (double& v : d) {
      require(v != 0.0, "schur diag_A: zero diagonal");
      v = 1.0 / v;
    }
    return d;
  }

  const NewtonSystem* sys_;
  SolverTree cfg_;
  double mu_;
  AmgHierarchy heat_amg_, schur_amg_;
  SparseMatrix schur_matrix_;
  double schur_scale_ = 1.0;
  std::unique_ptr<BlockJacobi> bjacobi_;
  mutable Vec ns_fluid_;
};

}  // namespace ocuflow
