#pragma once

#include <algorithm>
#include <map>
#include <set>

#include "ocuflow/core.hpp"

namespace ocuflow {

/// Facet on the domain boundary (or a labeled interior interface).
/// `cell` is the adjacent cell used for orientation; interior labeled facets
/// additionally carry `cell2`.
struct Facet {
  std::array<int, 3> v{-1, -1, -1};  // dim vertices used
  int label = 0;
  int cell = -1;
  int cell2 = -1;  // -1 for true boundary facets
};

struct MeshStats {
  double h_min = 0.0, h_max = 0.0, h_mean = 0.0;
  std::size_t n_elements = 0;
};

/// Tagged simplicial mesh: triangles (dim 2) or tetrahedra (dim 3).
/// Immutable after finalize(); coordinates always carry three entries
/// (z = 0 in 2D).
class Mesh {
 public:
  int dim = 2;
  int embed_dim = 0;  // 0: same as dim; facet meshes carry the parent's dim
  std::vector<Point> vertices;
  std::vector<std::array<int, 4>> cells;  // first dim+1 entries used
  std::vector<int> cell_subdomain;
  std::vector<Facet> boundary_facets;
  std::vector<Facet> interior_facets;  // labeled interfaces inside the domain
  std::map<int, std::string> label_names;

  std::size_t n_vertices() const { return vertices.size(); }
  std::size_t n_cells() const { return cells.size(); }
  int geometric_dim() const { return embed_dim ? embed_dim : dim; }
  bool embedded() const { return geometric_dim() > dim; }
  int vertices_per_cell() const { return dim + 1; }
  int vertices_per_facet() const { return dim; }

  int label_id(const std::string& name) const {
    for (const auto& [id, n] : label_names)
      if (n == name) return id;
    fail("mesh: unknown label name '" + name + "'");
  }

  bool has_label(const std::string& name) const {
    for (const auto& [id, n] : label_names)
      if (n == name) return true;
    return false;
  }

  const std::string& label_name(int id) const {
    auto it = label_names.find(id);
    require(it != label_names.end(), "mesh: unknown label id " + std::to_string(id));
    return it->second;
  }

  Point cell_centroid(int c) const {
    Point x{0, 0, 0};
    for (int k = 0; k <= dim; ++k) {
      const Point& p = vertices[cells[c][k]];
      for (int d = 0; d < 3; ++d) x[d] += p[d];
    }
    for (int d = 0; d < 3; ++d) x[d] /= (dim + 1);
    return x;
  }

  Point facet_centroid(const Facet& f) const {
    Point x{0, 0, 0};
    for (int k = 0; k < dim; ++k) {
      const Point& p = vertices[f.v[k]];
      for (int d = 0; d < 3; ++d) x[d] += p[d];
    }
    for (int d = 0; d < 3; ++d) x[d] /= dim;
    return x;
  }

  double cell_volume(int c) const {
    const auto& cv = cells[c];
    if (dim == 2) {
      const Point a = psub(vertices[cv[1]], vertices[cv[0]]);
      const Point b = psub(vertices[cv[2]], vertices[cv[0]]);
      return 0.5 * (a[0] * b[1] - a[1] * b[0]);
    }
    const Point a = psub(vertices[cv[1]], vertices[cv[0]]);
    const Point b = psub(vertices[cv[2]], vertices[cv[0]]);
    const Point d = psub(vertices[cv[3]], vertices[cv[0]]);
    return pdot(pcross(a, b), d) / 6.0;
  }

  double facet_measure(const Facet& f) const {
    if (dim == 2) return pdist(vertices[f.v[0]], vertices[f.v[1]]);
    const Point a = psub(vertices[f.v[1]], vertices[f.v[0]]);
    const Point b = psub(vertices[f.v[2]], vertices[f.v[0]]);
    return 0.5 * pnorm(pcross(a, b));
  }

  double cell_diameter(int c) const {
    double h = 0.0;
    for (int i = 0; i <= dim; ++i)
      for (int j = i + 1; j <= dim; ++j)
        h = std::max(h, pdist(vertices[cells[c][i]], vertices[cells[c][j]]));
    return h;
  }

  /// Orients cells positively and validates the structural invariants.
  void finalize() {
    require(dim == 2 || dim == 3, "mesh: dim must be 2 or 3");
    require(!cells.empty(), "mesh: no cells");
    require(cell_subdomain.size() == cells.size(), "mesh: missing subdomain labels");
    const int n = int(n_vertices());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      for (int k = 0; k <= dim; ++k)
        require(cells[c][k] >= 0 && cells[c][k] < n,
                "mesh: cell " + std::to_string(c) + " references invalid vertex");
      if (cell_volume(int(c)) < 0.0) std::swap(cells[c][1], cells[c][2]);
      require(cell_volume(int(c)) > 0.0,
              "mesh: degenerate cell " + std::to_string(c));
      require(label_names.count(cell_subdomain[c]),
              "mesh: cell subdomain label " + std::to_string(cell_subdomain[c]) +
                  " has no name");
    }
    attach_facets();
  }

  /// Sorted vertex key of local facet `lf` of cell `c` (facet lf is opposite
  /// local vertex lf).
  std::array<int, 3> facet_key(int c, int lf) const {
    std::array<int, 3> key{-1, -1, -1};
    int m = 0;
    for (int k = 0; k <= dim; ++k)
      if (k != lf) key[m++] = cells[c][k];
    std::sort(key.begin(), key.begin() + dim);
    return key;
  }

 private:
  // Resolves each stored facet's adjacent cell(s) and checks that boundary
  // facets touch exactly one cell.
  void attach_facets() {
    std::map<std::array<int, 3>, std::vector<int>> owner;
    for (int c = 0; c < int(n_cells()); ++c)
      for (int lf = 0; lf <= dim; ++lf) owner[facet_key(c, lf)].push_back(c);
    auto resolve = [&](Facet& f, bool boundary) {
      std::array<int, 3> key = f.v;
      std::sort(key.begin(), key.begin() + dim);
      auto it = owner.find(key);
      require(it != owner.end(), "mesh: facet with no adjacent cell");
      if (boundary)
        require(it->second.size() == 1,
                "mesh: boundary facet adjacent to " +
                    std::to_string(it->second.size()) + " cells");
      f.cell = it->second[0];
      f.cell2 = it->second.size() > 1 ? it->second[1] : -1;
      require(label_names.count(f.label), "mesh: facet label " +
                                              std::to_string(f.label) +
                                              " has no name");
    };
    for (Facet& f : boundary_facets) resolve(f, true);
    for (Facet& f : interior_facets) resolve(f, false);
  }
};

/// Unit outward normal of a boundary/interface facet, oriented away from
/// its adjacent cell.
inline Point facet_normal(const Mesh& mesh, const Facet& f) {
  Point n{0, 0, 0};
  if (mesh.dim == 2) {
    const Point t = psub(mesh.vertices[f.v[1]], mesh.vertices[f.v[0]]);
    n = {t[1], -t[0], 0.0};
  } else {
    const Point a = psub(mesh.vertices[f.v[1]], mesh.vertices[f.v[0]]);
    const Point b = psub(mesh.vertices[f.v[2]], mesh.vertices[f.v[0]]);
    n = pcross(a, b);
  }
  const double len = pnorm(n);
  require(len > 0.0, "facet_normal: degenerate facet");
  for (double& x : n) x /= len;
  require(f.cell >= 0, "facet_normal: facet with no adjacent cell");
  const Point out = psub(mesh.facet_centroid(f), mesh.cell_centroid(f.cell));
  if (pdot(n, out) < 0.0)
    for (double& x : n) x = -x;
  return n;
}

/// Per-facet unit outward normals for every facet carrying `label`.
inline std::vector<Point> facet_normals(const Mesh& mesh, const std::string& label) {
  const int id = mesh.label_id(label);
  std::vector<Point> normals;
  for (const Facet& f : mesh.boundary_facets)
    if (f.label == id) normals.push_back(facet_normal(mesh, f));
  for (const Facet& f : mesh.interior_facets)
    if (f.label == id) normals.push_back(facet_normal(mesh, f));
  require(!normals.empty(), "facet_normals: no facet carries label '" + label + "'");
  return normals;
}

inline MeshStats mesh_stats(const Mesh& mesh) {
  require(mesh.n_cells() > 0, "mesh_stats: empty mesh");
  MeshStats s;
  s.n_elements = mesh.n_cells();
  s.h_min = std::numeric_limits<double>::max();
  double sum = 0.0;
  for (int c = 0; c < int(mesh.n_cells()); ++c) {
    const double h = mesh.cell_diameter(c);
    s.h_min = std::min(s.h_min, h);
    s.h_max = std::max(s.h_max, h);
    sum += h;
  }
  s.h_mean = sum / double(mesh.n_cells());
  return s;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

struct RectLabels {
  std::string domain = "domain";
  std::string left = "left", right = "right", bottom = "bottom", top = "top";
};

/// Structured crossed-triangle mesh of [0,Lx]x[0,Ly]: every grid quad is
/// split into four triangles around its centroid. The one-diagonal pattern
/// is avoided on purpose (it locks coarse incompressible flow).
inline Mesh generate_rect(int nx, int ny, double Lx, double Ly,
                          const RectLabels& labels = {}) {
  require(nx >= 1 && ny >= 1, "generate_rect: divisions must be >= 1");
  require(Lx > 0.0 && Ly > 0.0, "generate_rect: extent must be positive");
  Mesh m;
  m.dim = 2;
  m.label_names = {{1, labels.domain}, {2, labels.left},   {3, labels.right},
                   {4, labels.bottom}, {5, labels.top}};
  const double hx = Lx / nx, hy = Ly / ny;
  auto grid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.push_back({i * hx, j * hy, 0.0});
  const int ncenter0 = int(m.vertices.size());
  auto center = [&](int i, int j) { return ncenter0 + j * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.vertices.push_back({(i + 0.5) * hx, (j + 0.5) * hy, 0.0});
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int v00 = grid(i, j), v10 = grid(i + 1, j);
      const int v01 = grid(i, j + 1), v11 = grid(i + 1, j + 1);
      const int vc = center(i, j);
      m.cells.push_back({v00, v10, vc, -1});
      m.cells.push_back({v10, v11, vc, -1});
      m.cells.push_back({v11, v01, vc, -1});
      m.cells.push_back({v01, v00, vc, -1});
      for (int k = 0; k < 4; ++k) m.cell_subdomain.push_back(1);
    }
  for (int j = 0; j < ny; ++j) {
    m.boundary_facets.push_back({{grid(0, j), grid(0, j + 1), -1}, 2, -1, -1});
    m.boundary_facets.push_back({{grid(nx, j), grid(nx, j + 1), -1}, 3, -1, -1});
  }
  for (int i = 0; i < nx; ++i) {
    m.boundary_facets.push_back({{grid(i, 0), grid(i + 1, 0), -1}, 4, -1, -1});
    m.boundary_facets.push_back({{grid(i, ny), grid(i + 1, ny), -1}, 5, -1, -1});
  }
  m.finalize();
  return m;
}

struct BoxLabels {
  std::string domain = "domain";
  std::string left = "left", right = "right", bottom = "bottom", top = "top";
  std::string front = "front", back = "back";
};

/// Structured tetrahedral mesh of [0,Lx]x[0,Ly]x[0,Lz]; each grid hex is
/// split into six tetrahedra (Kuhn subdivision).
inline Mesh generate_box(int nx, int ny, int nz, double Lx, double Ly, double Lz,
                         const BoxLabels& labels = {}) {
  require(nx >= 1 && ny >= 1 && nz >= 1, "generate_box: divisions must be >= 1");
  require(Lx > 0.0 && Ly > 0.0 && Lz > 0.0, "generate_box: extent must be positive");
  Mesh m;
  m.dim = 3;
  m.label_names = {{1, labels.domain}, {2, labels.left}, {3, labels.right},
                   {4, labels.bottom}, {5, labels.top},  {6, labels.front},
                   {7, labels.back}};
  const double hx = Lx / nx, hy = Ly / ny, hz = Lz / nz;
  auto grid = [&](int i, int j, int k) {
    return (k * (ny + 1) + j) * (nx + 1) + i;
  };
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        m.vertices.push_back({i * hx, j * hy, k * hz});
  // Kuhn split along the main diagonal v000-v111.
  static const int tets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7},
                                 {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int corner[8] = {grid(i, j, k),         grid(i + 1, j, k),
                               grid(i, j + 1, k),     grid(i + 1, j + 1, k),
                               grid(i, j, k + 1),     grid(i + 1, j, k + 1),
                               grid(i, j + 1, k + 1), grid(i + 1, j + 1, k + 1)};
        for (const auto& t : tets) {
          m.cells.push_back({corner[t[0]], corner[t[1]], corner[t[2]], corner[t[3]]});
          m.cell_subdomain.push_back(1);
        }
      }
  auto quad = [&](int a, int b, int c, int d, int label) {
    // Triangulated to match the Kuhn faces (diagonal a-c of each grid face).
    m.boundary_facets.push_back({{a, b, c}, label, -1, -1});
    m.boundary_facets.push_back({{a, c, d}, label, -1, -1});
  };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) {
      quad(grid(0, j, k), grid(0, j + 1, k), grid(0, j + 1, k + 1), grid(0, j, k + 1), 2);
      quad(grid(nx, j, k), grid(nx, j + 1, k), grid(nx, j + 1, k + 1), grid(nx, j, k + 1), 3);
    }
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) {
      quad(grid(i, 0, k), grid(i + 1, 0, k), grid(i + 1, 0, k + 1), grid(i, 0, k + 1), 4);
      quad(grid(i, ny, k), grid(i + 1, ny, k), grid(i + 1, ny, k + 1), grid(i, ny, k + 1), 5);
    }
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      quad(grid(i, j, 0), grid(i + 1, j, 0), grid(i + 1, j + 1, 0), grid(i, j + 1, 0), 6);
      quad(grid(i, j, nz), grid(i + 1, j, nz), grid(i + 1, j + 1, nz), grid(i, j + 1, nz), 7);
    }
  m.finalize();
  return m;
}

struct AnnulusLabels {
  std::string domain = "domain";
  std::string inner = "inner", outer = "outer";
  std::string side_start = "side_start", side_end = "side_end";
};

/// 2D wedge between two circular arcs (radii r0 < r1, angles t0..t1),
/// crossed-triangle pattern on the structured (r, theta) grid.
inline Mesh generate_annulus_sector(double r0, double r1, double t0, double t1,
                                    int nr, int nt,
                                    const AnnulusLabels& labels = {}) {
  require(nr >= 1 && nt >= 1, "generate_annulus_sector: divisions must be >= 1");
  require(r1 > r0 && r0 > 0.0, "generate_annulus_sector: need 0 < r0 < r1");
  require(t1 > t0, "generate_annulus_sector: need t0 < t1");
  Mesh m;
  m.dim = 2;
  m.label_names = {{1, labels.domain},
                   {2, labels.inner},
                   {3, labels.outer},
                   {4, labels.side_start},
                   {5, labels.side_end}};
  const double dr = (r1 - r0) / nr, dt = (t1 - t0) / nt;
  auto at = [&](double r, double t) { return Point{r * std::cos(t), r * std::sin(t), 0.0}; };
  auto grid = [&](int i, int j) { return j * (nr + 1) + i; };
  for (int j = 0; j <= nt; ++j)
    for (int i = 0; i <= nr; ++i)
      m.vertices.push_back(at(r0 + i * dr, t0 + j * dt));
  const int ncenter0 = int(m.vertices.size());
  auto center = [&](int i, int j) { return ncenter0 + j * nr + i; };
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nr; ++i)
      m.vertices.push_back(at(r0 + (i + 0.5) * dr, t0 + (j + 0.5) * dt));
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nr; ++i) {
      const int v00 = grid(i, j), v10 = grid(i + 1, j);
      const int v01 = grid(i, j + 1), v11 = grid(i + 1, j + 1);
      const int vc = center(i, j);
      m.cells.push_back({v00, v10, vc, -1});
      m.cells.push_back({v10, v11, vc, -1});
      m.cells.push_back({v11, v01, vc, -1});
      m.cells.push_back({v01, v00, vc, -1});
      for (int k = 0; k < 4; ++k) m.cell_subdomain.push_back(1);
    }
  for (int j = 0; j < nt; ++j) {
    m.boundary_facets.push_back({{grid(0, j), grid(0, j + 1), -1}, 2, -1, -1});
    m.boundary_facets.push_back({{grid(nr, j), grid(nr, j + 1), -1}, 3, -1, -1});
  }
  for (int i = 0; i < nr; ++i) {
    m.boundary_facets.push_back({{grid(i, 0), grid(i + 1, 0), -1}, 4, -1, -1});
    m.boundary_facets.push_back({{grid(i, nt), grid(i + 1, nt), -1}, 5, -1, -1});
  }
  m.finalize();
  return m;
}

// ---------------------------------------------------------------------------
// Submesh extraction
// ---------------------------------------------------------------------------

/// Cells of a labeled subset of the parent, with parent maps. Child cells
/// keep the parent's local vertex order, so reference coordinates agree
/// between a child cell and its parent cell.
struct SubMesh {
  Mesh mesh;
  std::vector<int> parent_cell;    // child cell -> parent cell
  std::vector<int> parent_vertex;  // child vertex -> parent vertex
};

inline SubMesh extract_subdomain(const Mesh& parent,
                                 const std::vector<std::string>& labels) {
  require(!labels.empty(), "extract_subdomain: empty label set");
  std::set<int> keep;
  for (const auto& name : labels) keep.insert(parent.label_id(name));

  SubMesh sub;
  sub.mesh.dim = parent.dim;
  // Child vertices keep the parent's ordering, so extracting every label
  // yields identity maps.
  std::vector<int> vmap(parent.n_vertices(), -1);
  std::vector<char> used(parent.n_vertices(), 0);
  for (int c = 0; c < int(parent.n_cells()); ++c) {
    if (!keep.count(parent.cell_subdomain[c])) continue;
    for (int k = 0; k <= parent.dim; ++k) used[parent.cells[c][k]] = 1;
  }
  for (int pv = 0; pv < int(parent.n_vertices()); ++pv) {
    if (!used[pv]) continue;
    vmap[pv] = int(sub.mesh.vertices.size());
    sub.mesh.vertices.push_back(parent.vertices[pv]);
    sub.parent_vertex.push_back(pv);
  }
  for (int c = 0; c < int(parent.n_cells()); ++c) {
    if (!keep.count(parent.cell_subdomain[c])) continue;
    std::array<int, 4> child{-1, -1, -1, -1};
    for (int k = 0; k <= parent.dim; ++k) child[k] = vmap[parent.cells[c][k]];
    sub.mesh.cells.push_back(child);
    sub.mesh.cell_subdomain.push_back(parent.cell_subdomain[c]);
    sub.parent_cell.push_back(c);
  }
  require(!sub.mesh.cells.empty(), "extract_subdomain: no cell carries the labels");
  for (int id : keep) sub.mesh.label_names[id] = parent.label_name(id);

  // Parent facets (boundary and labeled interfaces) indexed by sorted key.
  std::map<std::array<int, 3>, int> labeled;
  auto key_of = [&](const Facet& f) {
    std::array<int, 3> key = f.v;
    std::sort(key.begin(), key.begin() + parent.dim);
    return key;
  };
  for (const Facet& f : parent.boundary_facets) labeled[key_of(f)] = f.label;
  for (const Facet& f : parent.interior_facets) labeled[key_of(f)] = f.label;

  // Facets of the submesh: every child facet not shared by two child cells.
  std::map<std::array<int, 3>, int> count;
  for (int c = 0; c < int(sub.mesh.n_cells()); ++c)
    for (int lf = 0; lf <= sub.mesh.dim; ++lf) count[sub.mesh.facet_key(c, lf)]++;

  int wall_id = 0;
  auto wall_label = [&]() {
    if (wall_id) return wall_id;
    if (sub.mesh.has_label("wall")) wall_id = sub.mesh.label_id("wall");
    else {
      wall_id = 1;
      while (sub.mesh.label_names.count(wall_id)) ++wall_id;
      sub.mesh.label_names[wall_id] = "wall";
    }
    return wall_id;
  };
  for (int c = 0; c < int(sub.mesh.n_cells()); ++c)
    for (int lf = 0; lf <= sub.mesh.dim; ++lf) {
      const auto key = sub.mesh.facet_key(c, lf);
      if (count[key] != 1) continue;
      std::array<int, 3> pkey{-1, -1, -1};
      for (int k = 0; k < sub.mesh.dim; ++k) pkey[k] = sub.parent_vertex[key[k]];
      std::sort(pkey.begin(), pkey.begin() + sub.mesh.dim);
      Facet f;
      f.v = key;
      auto it = labeled.find(pkey);
      if (it != labeled.end()) {
        f.label = it->second;
        if (!sub.mesh.label_names.count(f.label))
          sub.mesh.label_names[f.label] = parent.label_name(f.label);
      } else {
        f.label = wall_label();
      }
      sub.mesh.boundary_facets.push_back(f);
    }
  sub.mesh.finalize();
  return sub;
}

/// Facets carrying any of `labels`, as a (dim-1)-mesh with one subdomain
/// label per source facet label. Used for wall-trace fields (WSS).
struct SurfaceMesh {
  Mesh mesh;                     // topological dim = parent.dim - 1
  std::vector<int> parent_facet; // surface cell -> index into collected facets
  std::vector<Facet> facets;     // the collected parent facets, in order
  std::vector<int> parent_vertex;
};

inline SurfaceMesh extract_surface(const Mesh& parent,
                                   const std::vector<std::string>& labels) {
  require(!labels.empty(), "extract_surface: empty label set");
  std::set<int> keep;
  for (const auto& name : labels) keep.insert(parent.label_id(name));
  SurfaceMesh surf;
  surf.mesh.dim = parent.dim - 1;
  surf.mesh.embed_dim = parent.dim;
  std::vector<int> vmap(parent.n_vertices(), -1);
  auto add = [&](const Facet& f) {
    std::array<int, 4> cell{-1, -1, -1, -1};
    for (int k = 0; k < parent.dim; ++k) {
      const int pv = f.v[k];
      if (vmap[pv] < 0) {
        vmap[pv] = int(surf.mesh.vertices.size());
        surf.mesh.vertices.push_back(parent.vertices[pv]);
        surf.parent_vertex.push_back(pv);
      }
      cell[k] = vmap[pv];
    }
    surf.parent_facet.push_back(int(surf.facets.size()));
    surf.facets.push_back(f);
    surf.mesh.cells.push_back(cell);
    surf.mesh.cell_subdomain.push_back(f.label);
    if (!surf.mesh.label_names.count(f.label))
      surf.mesh.label_names[f.label] = parent.label_name(f.label);
  };
  for (const Facet& f : parent.boundary_facets)
    if (keep.count(f.label)) add(f);
  for (const Facet& f : parent.interior_facets)
    if (keep.count(f.label)) add(f);
  require(!surf.mesh.cells.empty(), "extract_surface: no facet carries the labels");
  return surf;  // note: facet meshes skip finalize (no facets-of-facets)
}

}  // namespace ocuflow
