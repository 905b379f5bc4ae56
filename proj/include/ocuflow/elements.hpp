#pragma once

#include "ocuflow/core.hpp"
#include "ocuflow/mesh.hpp"

namespace ocuflow {

/// Scalar Lagrange basis on the reference simplex: values and reference
/// gradients of all local functions at one point. Node order: vertices,
/// then edge midpoints (P2), with edges enumerated lexicographically by
/// local vertex pair.
struct RefBasis {
  int dim, degree, n;
  // edge l of local_edges(dim)[l]
  static const std::array<std::array<int, 2>, 6>& edges(int dim) {
    static const std::array<std::array<int, 2>, 6> e2{{{0, 1}, {0, 2}, {1, 2}, {0, 0}, {0, 0}, {0, 0}}};
    static const std::array<std::array<int, 2>, 6> e3{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
    static const std::array<std::array<int, 2>, 6> e1{{{0, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}}};
    return dim == 3 ? e3 : (dim == 2 ? e2 : e1);
  }
  static int n_edges(int dim) { return dim == 3 ? 6 : (dim == 2 ? 3 : 1); }
  static int n_local(int dim, int degree) {
    const int nv = dim + 1;
    return degree == 1 ? nv : nv + n_edges(dim);
  }

  RefBasis(int dim_, int degree_) : dim(dim_), degree(degree_), n(n_local(dim_, degree_)) {
    require(degree == 1 || degree == 2, "unsupported element degree " + std::to_string(degree_));
  }

  /// Barycentric coordinates and their (constant) reference gradients.
  void barycentric(const Point& x, std::array<double, 4>& lam,
                   std::array<Point, 4>& glam) const {
    lam = {1.0, 0.0, 0.0, 0.0};
    glam = {Point{0, 0, 0}, Point{0, 0, 0}, Point{0, 0, 0}, Point{0, 0, 0}};
    for (int d = 0; d < dim; ++d) {
      lam[0] -= x[d];
      glam[0][d] = -1.0;
      lam[d + 1] = x[d];
      glam[d + 1][d] = 1.0;
    }
  }

  void eval(const Point& x, double* val, Point* grad) const {
    std::array<double, 4> lam;
    std::array<Point, 4> glam;
    barycentric(x, lam, glam);
    const int nv = dim + 1;
    if (degree == 1) {
      for (int i = 0; i < nv; ++i) {
        val[i] = lam[i];
        grad[i] = glam[i];
      }
      return;
    }
    for (int i = 0; i < nv; ++i) {
      val[i] = lam[i] * (2.0 * lam[i] - 1.0);
      for (int d = 0; d < 3; ++d) grad[i][d] = (4.0 * lam[i] - 1.0) * glam[i][d];
    }
    const auto& E = edges(dim);
    for (int l = 0; l < n_edges(dim); ++l) {
      const int a = E[l][0], b = E[l][1];
      val[nv + l] = 4.0 * lam[a] * lam[b];
      for (int d = 0; d < 3; ++d)
        grad[nv + l][d] = 4.0 * (glam[a][d] * lam[b] + lam[a] * glam[b][d]);
    }
  }

  /// Reference coordinates of the local nodes.
  std::vector<Point> nodes() const {
    std::vector<Point> xs;
    std::array<Point, 4> vert{Point{0, 0, 0}, Point{0, 0, 0}, Point{0, 0, 0}, Point{0, 0, 0}};
    for (int d = 0; d < dim; ++d) vert[d + 1][d] = 1.0;
    for (int i = 0; i <= dim; ++i) xs.push_back(vert[i]);
    if (degree == 2) {
      const auto& E = edges(dim);
      for (int l = 0; l < n_edges(dim); ++l) {
        Point mid{0, 0, 0};
        for (int d = 0; d < 3; ++d) mid[d] = 0.5 * (vert[E[l][0]][d] + vert[E[l][1]][d]);
        xs.push_back(mid);
      }
    }
    return xs;
  }
};

/// Affine map of cell c: x = J xi + x0. For cells of full topological
/// dimension J is square; for embedded facet meshes only `metric` (the
/// area/length scale) and the forward map are meaningful.
struct CellMap {
  int dim = 0;       // topological dimension of the cell
  int gdim = 0;      // geometric dimension (2 or 3)
  Point x0{0, 0, 0};
  std::array<Point, 3> cols;  // columns of J (edge vectors), dim used
  double metric = 0.0;        // |det J| or sqrt(det J^T J)
  std::array<Point, 3> jinv_rows;  // rows of J^{-1} (square case only)

  Point to_physical(const Point& xi) const {
    Point x = x0;
    for (int d = 0; d < dim; ++d)
      for (int g = 0; g < 3; ++g) x[g] += cols[d][g] * xi[d];
    return x;
  }

  Point to_reference(const Point& x) const {
    const Point r = psub(x, x0);
    Point xi{0, 0, 0};
    for (int d = 0; d < dim; ++d) xi[d] = pdot(jinv_rows[d], r);
    return xi;
  }

  /// Physical gradient from a reference gradient (square case).
  Point push_gradient(const Point& gref) const {
    Point g{0, 0, 0};
    for (int gd = 0; gd < gdim; ++gd)
      for (int d = 0; d < dim; ++d) g[gd] += jinv_rows[d][gd] * gref[d];
    return g;
  }
};

inline CellMap cell_map(const Mesh& mesh, int c) {
  CellMap map;
  map.dim = mesh.dim;
  map.gdim = mesh.dim;
  const auto& cv = mesh.cells[c];
  map.x0 = mesh.vertices[cv[0]];
  for (int d = 0; d < mesh.dim; ++d) map.cols[d] = psub(mesh.vertices[cv[d + 1]], map.x0);
  if (mesh.dim == 2) {
    const double det = map.cols[0][0] * map.cols[1][1] - map.cols[0][1] * map.cols[1][0];
    require(std::abs(det) > 0.0, "cell_map: degenerate cell Jacobian");
    map.metric = std::abs(det);
    map.jinv_rows[0] = {map.cols[1][1] / det, -map.cols[1][0] / det, 0.0};
    map.jinv_rows[1] = {-map.cols[0][1] / det, map.cols[0][0] / det, 0.0};
  } else {
    const Point c0 = map.cols[0], c1 = map.cols[1], c2 = map.cols[2];
    const double det = pdot(pcross(c0, c1), c2);
    require(std::abs(det) > 0.0, "cell_map: degenerate cell Jacobian");
    map.metric = std::abs(det);
    const Point r0 = pcross(c1, c2), r1 = pcross(c2, c0), r2 = pcross(c0, c1);
    map.jinv_rows[0] = {r0[0] / det, r0[1] / det, r0[2] / det};
    map.jinv_rows[1] = {r1[0] / det, r1[1] / det, r1[2] / det};
    map.jinv_rows[2] = {r2[0] / det, r2[1] / det, r2[2] / det};
  }
  return map;
}

/// Map for a facet (segment in 2D, triangle in 3D) embedded in the parent's
/// geometric space; `metric` carries length/area scaling.
inline CellMap facet_map(const Mesh& mesh, const Facet& f) {
  CellMap map;
  map.dim = mesh.dim - 1;
  map.gdim = mesh.dim;
  map.x0 = mesh.vertices[f.v[0]];
  for (int d = 0; d < map.dim; ++d) map.cols[d] = psub(mesh.vertices[f.v[d + 1]], map.x0);
  if (map.dim == 1) {
    map.metric = pnorm(map.cols[0]);
  } else {
    map.metric = pnorm(pcross(map.cols[0], map.cols[1]));
  }
  require(map.metric > 0.0, "facet_map: degenerate facet");
  return map;
}

/// Map for a cell of a surface mesh (topological dim = gdim - 1).
inline CellMap surface_cell_map(const Mesh& surf, int c) {
  CellMap map;
  map.dim = surf.dim;
  map.gdim = surf.geometric_dim();
  const auto& cv = surf.cells[c];
  map.x0 = surf.vertices[cv[0]];
  for (int d = 0; d < map.dim; ++d) map.cols[d] = psub(surf.vertices[cv[d + 1]], map.x0);
  map.metric = map.dim == 1 ? pnorm(map.cols[0]) : pnorm(pcross(map.cols[0], map.cols[1]));
  require(map.metric > 0.0, "surface_cell_map: degenerate cell");
  return map;
}

}  // namespace ocuflow
