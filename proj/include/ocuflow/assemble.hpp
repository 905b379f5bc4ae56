#pragma once

#include <set>

#include "ocuflow/quadrature.hpp"
#include "ocuflow/space.hpp"
#include "ocuflow/sparse.hpp"

namespace ocuflow {

/// One vector-valued basis function at a quadrature point: scalar value,
/// physical gradient of the scalar part, and the component it acts on.
struct BasisAt {
  double v = 0.0;
  Point g{0, 0, 0};
  int comp = 0;
};

/// Everything a kernel may read at a quadrature point.
struct AsmContext {
  Point x{0, 0, 0};
  double weight = 0.0;  // quadrature weight x metric
  int cell = -1;        // iteration-mesh cell
  int subdomain = 0;
  int facet_label = 0;    // facet assembly only
  Point normal{0, 0, 0};  // facet assembly only
  // Pre-evaluated coefficient fields: [coef][component].
  std::vector<std::vector<double>> coef;
  std::vector<std::vector<Point>> coef_grad;
};

/// Integrand with a declared polynomial degree; assembly refuses quadrature
/// rules below it.
struct BilinearKernel {
  int degree = 0;
  std::function<double(const AsmContext&, const BasisAt& trial, const BasisAt& test)> eval;
};

struct LinearKernel {
  int degree = 0;
  std::function<double(const AsmContext&, const BasisAt& test)> eval;
};

/// Assembles over one iteration mesh. Spaces and coefficient fields may live
/// on that mesh or on a bound parent mesh; child cells keep the parent's
/// local vertex order, so reference coordinates transfer directly.
///
/// Cell loops stage per-cell local matrices (optionally in parallel) and
/// merge them in cell order, so results are independent of the thread count.
class Assembler {
 public:
  explicit Assembler(const Mesh& iteration_mesh) : mesh_(&iteration_mesh) {}

  void bind_parent(const Mesh& parent, const std::vector<int>& cell_map) {
    parents_.push_back({&parent, &cell_map});
  }

  /// Restrict cell assembly to these subdomain labels (empty: all cells).
  void set_region(const std::set<int>& labels) { region_ = labels; }

  SparseMatrix bilinear(const FunctionSpace& trial, const FunctionSpace& test,
                        const QuadratureRule& quad, const BilinearKernel& kernel,
                        const std::vector<const Field*>& coefficients = {}) const {
    check_order(quad, kernel.degree);
    const CellSpace T = resolve(trial), U = resolve(test);
    const std::vector<int> active = active_cells();
    std::vector<std::pair<int, int>> pattern;
    pattern.reserve(active.size() * test_dofs(test) * test_dofs(trial));
    for (int c : active)
      for (int jt = 0; jt < test_dofs(test); ++jt)
        for (int it = 0; it < test_dofs(trial); ++it)
          pattern.emplace_back(global_dof(test, U, c, jt), global_dof(trial, T, c, it));
    SparseMatrix A(test.n_dofs(), trial.n_dofs(), std::move(pattern));

    const int nt = test_dofs(test), nu = test_dofs(trial);
    std::vector<Vec> local(active.size());
    const BasisTables tab(trial, test, quad);
    parallel_for(active.size(), [&](std::size_t lo, std::size_t hi) {
      AsmContext ctx;
      std::vector<BasisAt> bt, bu;
      for (std::size_t a = lo; a < hi; ++a) {
        Vec& loc = local[a];
        loc.assign(std::size_t(nt) * nu, 0.0);
        const int c = active[a];
        const CellMap map = cell_map(*mesh_, c);
        ctx.cell = c;
        ctx.subdomain = mesh_->cell_subdomain[c];
        for (std::size_t q = 0; q < quad.size(); ++q) {
          ctx.x = map.to_physical(quad.points[q]);
          ctx.weight = quad.weights[q] * map.metric;
          fill_basis(trial, tab.tv[q], tab.tg[q], map, bt);
          fill_basis(test, tab.uv[q], tab.ug[q], map, bu);
          eval_coefficients(c, quad.points[q], ctx, coefficients);
          for (int jt = 0; jt < nt; ++jt)
            for (int it = 0; it < nu; ++it)
              loc[std::size_t(jt) * nu + it] += ctx.weight * kernel.eval(ctx, bt[it], bu[jt]);
        }
      }
    });
    for (std::size_t a = 0; a < active.size(); ++a) {
      const int c = active[a];
      for (int jt = 0; jt < nt; ++jt)
        for (int it = 0; it < nu; ++it)
          A.add(global_dof(test, U, c, jt), global_dof(trial, T, c, it),
                local[a][std::size_t(jt) * nu + it]);
    }
    return A;
  }

  Vec linear(const FunctionSpace& test, const QuadratureRule& quad,
             const LinearKernel& kernel,
             const std::vector<const Field*>& coefficients = {}) const {
    check_order(quad, kernel.degree);
    const CellSpace U = resolve(test);
    const std::vector<int> active = active_cells();
    const int nt = test_dofs(test);
    std::vector<Vec> local(active.size());
    const BasisTables tab(test, test, quad);
    parallel_for(active.size(), [&](std::size_t lo, std::size_t hi) {
      AsmContext ctx;
      std::vector<BasisAt> bu;
      for (std::size_t a = lo; a < hi; ++a) {
        Vec& loc = local[a];
        loc.assign(nt, 0.0);
        const int c = active[a];
        const CellMap map = cell_map(*mesh_, c);
        ctx.cell = c;
        ctx.subdomain = mesh_->cell_subdomain[c];
        for (std::size_t q = 0; q < quad.size(); ++q) {
          ctx.x = map.to_physical(quad.points[q]);
          ctx.weight = quad.weights[q] * map.metric;
          fill_basis(test, tab.uv[q], tab.ug[q], map, bu);
          eval_coefficients(c, quad.points[q], ctx, coefficients);
          for (int jt = 0; jt < nt; ++jt) loc[jt] += ctx.weight * kernel.eval(ctx, bu[jt]);
        }
      }
    });
    Vec b(test.n_dofs(), 0.0);
    for (std::size_t a = 0; a < active.size(); ++a)
      for (int jt = 0; jt < nt; ++jt) b[global_dof(test, U, active[a], jt)] += local[a][jt];
    return b;
  }

  SparseMatrix facet_bilinear(const FunctionSpace& trial, const FunctionSpace& test,
                              const QuadratureRule& quad, const std::set<int>& labels,
                              const BilinearKernel& kernel,
                              const std::vector<const Field*>& coefficients = {}) const {
    check_order(quad, kernel.degree);
    require(quad.dim == mesh_->dim - 1, "facet assembly: rule dimension mismatch");
    const CellSpace T = resolve(trial), U = resolve(test);
    const auto facets = labeled_facets(labels);
    std::vector<std::pair<int, int>> pattern;
    for (const Facet* f : facets)
      for (int jt = 0; jt < test_dofs(test); ++jt)
        for (int it = 0; it < test_dofs(trial); ++it)
          pattern.emplace_back(global_dof(test, U, f->cell, jt),
                               global_dof(trial, T, f->cell, it));
    SparseMatrix A(test.n_dofs(), trial.n_dofs(), std::move(pattern));
    const int nt = test_dofs(test), nu = test_dofs(trial);
    AsmContext ctx;
    std::vector<BasisAt> bt, bu;
    Vec tv(trial.n_local), uv(test.n_local);
    std::vector<Point> tg(trial.n_local), ug(test.n_local);
    for (const Facet* f : facets) {
      const int c = f->cell;
      const CellMap map = cell_map(*mesh_, c);
      const CellMap fmap = facet_map(*mesh_, *f);
      ctx.cell = c;
      ctx.subdomain = mesh_->cell_subdomain[c];
      ctx.facet_label = f->label;
      ctx.normal = facet_normal(*mesh_, *f);
      for (std::size_t q = 0; q < quad.size(); ++q) {
        ctx.x = fmap.to_physical(quad.points[q]);
        ctx.weight = quad.weights[q] * fmap.metric;
        const Point xi = map.to_reference(ctx.x);
        trial.ref_basis().eval(xi, tv.data(), tg.data());
        test.ref_basis().eval(xi, uv.data(), ug.data());
        fill_basis(trial, tv, tg, map, bt);
        fill_basis(test, uv, ug, map, bu);
        eval_coefficients(c, xi, ctx, coefficients);
        for (int jt = 0; jt < nt; ++jt)
          for (int it = 0; it < nu; ++it)
            A.add(global_dof(test, U, c, jt), global_dof(trial, T, c, it),
                  ctx.weight * kernel.eval(ctx, bt[it], bu[jt]));
      }
    }
    return A;
  }

  Vec facet_linear(const FunctionSpace& test, const QuadratureRule& quad,
                   const std::set<int>& labels, const LinearKernel& kernel,
                   const std::vector<const Field*>& coefficients = {}) const {
    check_order(quad, kernel.degree);
    require(quad.dim == mesh_->dim - 1, "facet assembly: rule dimension mismatch");
    const CellSpace U = resolve(test);
    Vec b(test.n_dofs(), 0.0);
    const int nt = test_dofs(test);
    AsmContext ctx;
    std::vector<BasisAt> bu;
    Vec uv(test.n_local);
    std::vector<Point> ug(test.n_local);
    for (const Facet* f : labeled_facets(labels)) {
      const int c = f->cell;
      const CellMap map = cell_map(*mesh_, c);
      const CellMap fmap = facet_map(*mesh_, *f);
      ctx.cell = c;
      ctx.subdomain = mesh_->cell_subdomain[c];
      ctx.facet_label = f->label;
      ctx.normal = facet_normal(*mesh_, *f);
      for (std::size_t q = 0; q < quad.size(); ++q) {
        ctx.x = fmap.to_physical(quad.points[q]);
        ctx.weight = quad.weights[q] * fmap.metric;
        const Point xi = map.to_reference(ctx.x);
        test.ref_basis().eval(xi, uv.data(), ug.data());
        fill_basis(test, uv, ug, map, bu);
        eval_coefficients(c, xi, ctx, coefficients);
        for (int jt = 0; jt < nt; ++jt) b[global_dof(test, U, c, jt)] += ctx.weight * kernel.eval(ctx, bu[jt]);
      }
    }
    return b;
  }

  /// Integral of a pointwise function over the active cells.
  double integrate(const QuadratureRule& quad,
                   const std::function<double(const AsmContext&)>& fn,
                   const std::vector<const Field*>& coefficients = {}) const {
    AsmContext ctx;
    double total = 0.0;
    for (int c : active_cells()) {
      const CellMap map = cell_map(*mesh_, c);
      ctx.cell = c;
      ctx.subdomain = mesh_->cell_subdomain[c];
      for (std::size_t q = 0; q < quad.size(); ++q) {
        ctx.x = map.to_physical(quad.points[q]);
        ctx.weight = quad.weights[q] * map.metric;
        eval_coefficients(c, quad.points[q], ctx, coefficients);
        total += ctx.weight * fn(ctx);
      }
    }
    return total;
  }

  double facet_integrate(const QuadratureRule& quad, const std::set<int>& labels,
                         const std::function<double(const AsmContext&)>& fn,
                         const std::vector<const Field*>& coefficients = {}) const {
    AsmContext ctx;
    double total = 0.0;
    for (const Facet* f : labeled_facets(labels)) {
      const int c = f->cell;
      const CellMap map = cell_map(*mesh_, c);
      const CellMap fmap = facet_map(*mesh_, *f);
      ctx.cell = c;
      ctx.subdomain = mesh_->cell_subdomain[c];
      ctx.facet_label = f->label;
      ctx.normal = facet_normal(*mesh_, *f);
      for (std::size_t q = 0; q < quad.size(); ++q) {
        ctx.x = fmap.to_physical(quad.points[q]);
        ctx.weight = quad.weights[q] * fmap.metric;
        eval_coefficients(c, map.to_reference(ctx.x), ctx, coefficients);
        total += ctx.weight * fn(ctx);
      }
    }
    return total;
  }

 private:
  struct CellSpace {
    const FunctionSpace* S;
    const std::vector<int>* map;  // nullptr: identity
    int cell(int c) const { return map ? (*map)[c] : c; }
  };

  struct BasisTables {
    std::vector<Vec> tv, uv;  // [q][local]
    std::vector<std::vector<Point>> tg, ug;
    BasisTables(const FunctionSpace& trial, const FunctionSpace& test,
                const QuadratureRule& quad) {
      const RefBasis rt = trial.ref_basis(), ru = test.ref_basis();
      tv.resize(quad.size());
      tg.resize(quad.size());
      uv.resize(quad.size());
      ug.resize(quad.size());
      for (std::size_t q = 0; q < quad.size(); ++q) {
        tv[q].resize(rt.n);
        tg[q].resize(rt.n);
        rt.eval(quad.points[q], tv[q].data(), tg[q].data());
        uv[q].resize(ru.n);
        ug[q].resize(ru.n);
        ru.eval(quad.points[q], uv[q].data(), ug[q].data());
      }
    }
  };

  static int test_dofs(const FunctionSpace& S) { return S.n_local * S.components; }

  static int global_dof(const FunctionSpace& S, const CellSpace& cs, int iter_cell,
                        int local_vec_dof) {
    const int l = local_vec_dof / S.components;
    const int comp = local_vec_dof % S.components;
    return S.global_dof(S.cell_scalar_dof(cs.cell(iter_cell), l), comp);
  }

  static void check_order(const QuadratureRule& quad, int degree) {
    require(quad.order >= degree,
            "assembly: quadrature order " + std::to_string(quad.order) +
                " below kernel degree " + std::to_string(degree));
  }

  CellSpace resolve(const FunctionSpace& S) const {
    if (S.mesh == mesh_) return {&S, nullptr};
    for (const auto& [pm, map] : parents_)
      if (S.mesh == pm) return {&S, map};
    fail("assembly: space lives on an unbound mesh");
  }

  std::vector<int> active_cells() const {
    std::vector<int> cells;
    for (int c = 0; c < int(mesh_->n_cells()); ++c)
      if (region_.empty() || region_.count(mesh_->cell_subdomain[c])) cells.push_back(c);
    return cells;
  }

  std::vector<const Facet*> labeled_facets(const std::set<int>& labels) const {
    std::vector<const Facet*> out;
    for (const Facet& f : mesh_->boundary_facets)
      if (labels.count(f.label)) out.push_back(&f);
    for (const Facet& f : mesh_->interior_facets)
      if (labels.count(f.label)) out.push_back(&f);
    require(!out.empty(), "facet assembly: no facet carries the requested labels");
    return out;
  }

  static void fill_basis(const FunctionSpace& S, const Vec& val,
                         const std::vector<Point>& gref, const CellMap& map,
                         std::vector<BasisAt>& out) {
    out.resize(std::size_t(S.n_local) * S.components);
    for (int l = 0; l < S.n_local; ++l) {
      const Point g = map.push_gradient(gref[l]);
      for (int c = 0; c < S.components; ++c) {
        BasisAt& b = out[std::size_t(l) * S.components + c];
        b.v = val[l];
        b.g = g;
        b.comp = c;
      }
    }
  }

  void eval_coefficients(int c, const Point& xi, AsmContext& ctx,
                         const std::vector<const Field*>& coefs) const {
    ctx.coef.resize(coefs.size());
    ctx.coef_grad.resize(coefs.size());
    for (std::size_t k = 0; k < coefs.size(); ++k) {
      const Field& f = *coefs[k];
      const CellSpace cs = resolve(*f.space);
      const int fc = cs.cell(c);
      ctx.coef[k] = evaluate(f, fc, xi);
      ctx.coef_grad[k] = evaluate_gradient(f, fc, xi);
      // Pad to three slots so kernels can contract over x/y/z uniformly.
      while (ctx.coef[k].size() < 3) ctx.coef[k].push_back(0.0);
      while (ctx.coef_grad[k].size() < 3) ctx.coef_grad[k].push_back(Point{0, 0, 0});
    }
  }

  const Mesh* mesh_;
  std::vector<std::pair<const Mesh*, const std::vector<int>*>> parents_;
  std::set<int> region_;
};

/// Mass-matrix assembly on a surface mesh (embedded facet cells): values
/// only, metric from the embedded map. Used by the WSS L2 projection.
inline SparseMatrix surface_mass_matrix(const FunctionSpace& S, const QuadratureRule& quad) {
  const Mesh& surf = *S.mesh;
  std::vector<std::pair<int, int>> pattern;
  const int nloc = S.n_local * S.components;
  for (int c = 0; c < int(surf.n_cells()); ++c)
    for (int j = 0; j < nloc; ++j)
      for (int i = 0; i < nloc; ++i) {
        auto gd = [&](int k) {
          return S.global_dof(S.cell_scalar_dof(c, k / S.components), k % S.components);
        };
        pattern.emplace_back(gd(j), gd(i));
      }
  SparseMatrix M(S.n_dofs(), S.n_dofs(), std::move(pattern));
  const RefBasis rb = S.ref_basis();
  Vec val(rb.n);
  std::vector<Point> grad(rb.n);
  for (int c = 0; c < int(surf.n_cells()); ++c) {
    const CellMap map = surface_cell_map(surf, c);
    for (std::size_t q = 0; q < quad.size(); ++q) {
      rb.eval(quad.points[q], val.data(), grad.data());
      const double w = quad.weights[q] * map.metric;
      for (int lj = 0; lj < rb.n; ++lj)
        for (int li = 0; li < rb.n; ++li)
          for (int comp = 0; comp < S.components; ++comp)
            M.add(S.global_dof(S.cell_scalar_dof(c, lj), comp),
                  S.global_dof(S.cell_scalar_dof(c, li), comp), w * val[li] * val[lj]);
    }
  }
  return M;
}

}  // namespace ocuflow
