#pragma once

#include <map>

#include "ocuflow/elements.hpp"
#include "ocuflow/mesh.hpp"

namespace ocuflow {

enum class Continuity { continuous, discontinuous };

/// Lagrange finite-element space over a Mesh (or the Mesh inside a SubMesh /
/// SurfaceMesh). Vector dofs are interleaved: global dof = scalar_dof *
/// components + component.
class FunctionSpace {
 public:
  const Mesh* mesh = nullptr;
  int degree = 1;
  Continuity continuity = Continuity::continuous;
  int components = 1;

  int n_local = 0;          // scalar basis functions per cell
  int n_scalar_dofs = 0;
  std::vector<int> dofs;    // n_cells x n_local, scalar dof ids
  std::vector<Point> scalar_dof_coords;

  int n_dofs() const { return n_scalar_dofs * components; }

  int cell_scalar_dof(int c, int l) const { return dofs[std::size_t(c) * n_local + l]; }

  int global_dof(int scalar_dof, int comp) const { return scalar_dof * components + comp; }

  RefBasis ref_basis() const { return RefBasis(mesh->dim, degree); }

  /// Scalar dofs lying on facets with any of the given labels (boundary and
  /// labeled interior facets).
  std::vector<int> boundary_scalar_dofs(const std::vector<std::string>& labels) const;

  /// All boundary scalar dofs (entire boundary facet list).
  std::vector<int> boundary_scalar_dofs_all() const;

 private:
  friend FunctionSpace build_space(const Mesh&, int, Continuity, int);
  std::vector<int> facet_scalar_dofs(const Facet& f) const;
  std::map<std::array<int, 2>, int> edge_ids_;  // sorted vertex pair -> edge
};

inline FunctionSpace build_space(const Mesh& mesh, int degree,
                                 Continuity continuity, int components) {
  require(degree == 1 || degree == 2, "build_space: unsupported degree " + std::to_string(degree));
  require(components >= 1, "build_space: components must be >= 1");
  FunctionSpace S;
  S.mesh = &mesh;
  S.degree = degree;
  S.continuity = continuity;
  S.components = components;
  S.n_local = RefBasis::n_local(mesh.dim, degree);
  const int nc = int(mesh.n_cells());
  S.dofs.resize(std::size_t(nc) * S.n_local);

  if (continuity == Continuity::discontinuous) {
    S.n_scalar_dofs = nc * S.n_local;
    for (int c = 0; c < nc; ++c)
      for (int l = 0; l < S.n_local; ++l) S.dofs[std::size_t(c) * S.n_local + l] = c * S.n_local + l;
  } else {
    const int nv = int(mesh.n_vertices());
    int next_edge = 0;
    const auto& E = RefBasis::edges(mesh.dim);
    const int ne_local = RefBasis::n_edges(mesh.dim);
    for (int c = 0; c < nc; ++c) {
      for (int k = 0; k <= mesh.dim; ++k) S.dofs[std::size_t(c) * S.n_local + k] = mesh.cells[c][k];
      if (degree == 2) {
        for (int l = 0; l < ne_local; ++l) {
          std::array<int, 2> key{mesh.cells[c][E[l][0]], mesh.cells[c][E[l][1]]};
          if (key[0] > key[1]) std::swap(key[0], key[1]);
          auto [it, inserted] = S.edge_ids_.try_emplace(key, next_edge);
          if (inserted) ++next_edge;
          S.dofs[std::size_t(c) * S.n_local + mesh.dim + 1 + l] = nv + it->second;
        }
      }
    }
    S.n_scalar_dofs = degree == 1 ? nv : nv + next_edge;
  }

  // Node coordinates, from the per-cell reference nodes (shared dofs are
  // written repeatedly with identical values).
  S.scalar_dof_coords.assign(S.n_scalar_dofs, Point{0, 0, 0});
  const RefBasis rb(mesh.dim, degree);
  const auto ref_nodes = rb.nodes();
  for (int c = 0; c < nc; ++c) {
    const CellMap map = mesh.embedded() || mesh.dim == 1 ? surface_cell_map(mesh, c)
                                                         : cell_map(mesh, c);
    for (int l = 0; l < S.n_local; ++l)
      S.scalar_dof_coords[S.cell_scalar_dof(c, l)] = map.to_physical(ref_nodes[l]);
  }
  return S;
}

inline std::vector<int> FunctionSpace::facet_scalar_dofs(const Facet& f) const {
  std::vector<int> out;
  const Mesh& m = *mesh;
  if (continuity == Continuity::continuous) {
    for (int k = 0; k < m.dim; ++k) out.push_back(f.v[k]);
    if (degree == 2) {
      auto edge_dof = [&](int a, int b) {
        std::array<int, 2> key{a, b};
        if (key[0] > key[1]) std::swap(key[0], key[1]);
        auto it = edge_ids_.find(key);
        require(it != edge_ids_.end(), "facet_scalar_dofs: facet edge not in mesh");
        return int(m.n_vertices()) + it->second;
      };
      if (m.dim == 2) {
        out.push_back(edge_dof(f.v[0], f.v[1]));
      } else {
        out.push_back(edge_dof(f.v[0], f.v[1]));
        out.push_back(edge_dof(f.v[0], f.v[2]));
        out.push_back(edge_dof(f.v[1], f.v[2]));
      }
    }
    return out;
  }
  // Discontinuous: local nodes of the adjacent cell(s) whose reference node
  // lies on the facet, matched by vertex membership.
  fail("facet_scalar_dofs: not supported for discontinuous spaces");
}

inline std::vector<int> FunctionSpace::boundary_scalar_dofs(
    const std::vector<std::string>& labels) const {
  std::set<int> ids;
  for (const auto& name : labels) ids.insert(mesh->label_id(name));
  std::set<int> dofs_set;
  auto scan = [&](const std::vector<Facet>& facets) {
    for (const Facet& f : facets)
      if (ids.count(f.label))
        for (int d : facet_scalar_dofs(f)) dofs_set.insert(d);
  };
  scan(mesh->boundary_facets);
  scan(mesh->interior_facets);
  return {dofs_set.begin(), dofs_set.end()};
}

inline std::vector<int> FunctionSpace::boundary_scalar_dofs_all() const {
  std::set<int> dofs_set;
  for (const Facet& f : mesh->boundary_facets)
    for (int d : facet_scalar_dofs(f)) dofs_set.insert(d);
  return {dofs_set.begin(), dofs_set.end()};
}

/// Coefficient vector over a FunctionSpace.
struct Field {
  const FunctionSpace* space = nullptr;
  Vec coeffs;

  Field() = default;
  explicit Field(const FunctionSpace& S) : space(&S), coeffs(S.n_dofs(), 0.0) {}
};

/// Nodal interpolant of f(x) -> components values.
template <class F>
Field interpolate(const FunctionSpace& S, F&& f) {
  Field u(S);
  for (int s = 0; s < S.n_scalar_dofs; ++s) {
    const auto vals = f(S.scalar_dof_coords[s]);
    for (int c = 0; c < S.components; ++c) {
      const double v = vals[std::size_t(c)];
      require(std::isfinite(v), "interpolate: non-finite value at dof " + std::to_string(s));
      u.coeffs[S.global_dof(s, c)] = v;
    }
  }
  return u;
}

inline Field interpolate_scalar(const FunctionSpace& S,
                                const std::function<double(const Point&)>& f) {
  require(S.components == 1, "interpolate_scalar: vector space");
  return interpolate(S, [&](const Point& x) { return std::array<double, 1>{f(x)}; });
}

/// Value of all components at a reference point of a cell.
inline std::vector<double> evaluate(const Field& u, int cell, const Point& xi) {
  const FunctionSpace& S = *u.space;
  const RefBasis rb = S.ref_basis();
  std::vector<double> val(rb.n);
  std::vector<Point> grad(rb.n);
  rb.eval(xi, val.data(), grad.data());
  std::vector<double> out(S.components, 0.0);
  for (int l = 0; l < rb.n; ++l) {
    const int s = S.cell_scalar_dof(cell, l);
    for (int c = 0; c < S.components; ++c) out[c] += u.coeffs[S.global_dof(s, c)] * val[l];
  }
  return out;
}

/// Physical gradient of all components at a reference point: out[c][d].
inline std::vector<Point> evaluate_gradient(const Field& u, int cell, const Point& xi) {
  const FunctionSpace& S = *u.space;
  require(!S.mesh->embedded(), "evaluate_gradient: not defined on embedded surface meshes");
  const CellMap map = cell_map(*S.mesh, cell);
  const RefBasis rb = S.ref_basis();
  std::vector<double> val(rb.n);
  std::vector<Point> gref(rb.n);
  rb.eval(xi, val.data(), gref.data());
  std::vector<Point> out(S.components, Point{0, 0, 0});
  for (int l = 0; l < rb.n; ++l) {
    const Point g = map.push_gradient(gref[l]);
    const int s = S.cell_scalar_dof(cell, l);
    for (int c = 0; c < S.components; ++c)
      for (int d = 0; d < 3; ++d) out[c][d] += u.coeffs[S.global_dof(s, c)] * g[d];
  }
  return out;
}

/// Locates the cell containing x (linear scan; test/diagnostic use).
inline int locate_cell(const Mesh& mesh, const Point& x, Point* xi_out = nullptr) {
  for (int c = 0; c < int(mesh.n_cells()); ++c) {
    const CellMap map = cell_map(mesh, c);
    const Point xi = map.to_reference(x);
    double lam0 = 1.0;
    bool inside = true;
    for (int d = 0; d < mesh.dim; ++d) {
      lam0 -= xi[d];
      if (xi[d] < -1e-10) inside = false;
    }
    if (inside && lam0 >= -1e-10) {
      if (xi_out) *xi_out = xi;
      return c;
    }
  }
  fail("locate_cell: point outside mesh");
}

}  // namespace ocuflow
