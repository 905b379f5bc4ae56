#include <catch2/catch_amalgamated.hpp>

#include "ocuflow/mesh.hpp"

using namespace ocuflow;

TEST_CASE("generate_rect crossed pattern at nx=ny=1", "[mesh]") {
  const Mesh m = generate_rect(1, 1, 1.0, 1.0);
  REQUIRE(m.n_cells() == 4);
  REQUIRE(m.n_vertices() == 5);
  double vol = 0.0;
  for (int c = 0; c < 4; ++c) vol += m.cell_volume(c);
  REQUIRE(vol == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("generate_rect nx=2 ny=1 facet count", "[mesh]") {
  const Mesh m = generate_rect(2, 1, 1.0, 1.0);
  REQUIRE(m.n_cells() == 8);
  // Perimeter facets by construction: 1 left + 1 right + 2 bottom + 2 top.
  REQUIRE(m.boundary_facets.size() == 6);
}

TEST_CASE("generate_rect 32x32 is uniform with h = 1/32", "[mesh]") {
  const Mesh m = generate_rect(32, 32, 1.0, 1.0);
  const MeshStats s = mesh_stats(m);
  REQUIRE(s.n_elements == 4 * 32 * 32);
  // Cell diameter of the crossed pattern is the quad side.
  REQUIRE(s.h_max == Catch::Approx(1.0 / 32).epsilon(1e-12));
  REQUIRE(s.h_min == Catch::Approx(s.h_max).epsilon(1e-12));
}

TEST_CASE("generate_rect rejects bad input", "[mesh]") {
  REQUIRE_THROWS_AS(generate_rect(0, 1, 1.0, 1.0), Error);
  REQUIRE_THROWS_AS(generate_rect(1, 1, -1.0, 1.0), Error);
}

TEST_CASE("generate_box volume and facets", "[mesh]") {
  const Mesh m = generate_box(2, 2, 2, 1.0, 2.0, 3.0);
  REQUIRE(m.n_cells() == 6 * 8);
  double vol = 0.0;
  for (int c = 0; c < int(m.n_cells()); ++c) vol += m.cell_volume(c);
  REQUIRE(vol == Catch::Approx(6.0).epsilon(1e-12));
  for (const Facet& f : m.boundary_facets) REQUIRE(f.cell >= 0);
}

TEST_CASE("mesh_stats basics", "[mesh]") {
  Mesh m;
  m.dim = 2;
  m.label_names = {{1, "domain"}};
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.cells = {{0, 1, 2, -1}};
  m.cell_subdomain = {1};
  m.finalize();
  const MeshStats s = mesh_stats(m);
  REQUIRE(s.h_min == Catch::Approx(std::sqrt(2.0)));
  REQUIRE(s.h_max == Catch::Approx(std::sqrt(2.0)));
  REQUIRE(s.h_mean == Catch::Approx(std::sqrt(2.0)));

  Mesh two;
  two.dim = 2;
  two.label_names = {{1, "domain"}};
  two.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 1, 0}};
  two.cells = {{0, 1, 2, -1}, {1, 3, 2, -1}};
  two.cell_subdomain = {1, 1};
  two.finalize();
  const MeshStats s2 = mesh_stats(two);
  REQUIRE(s2.h_mean == Catch::Approx(0.5 * (s2.h_min + s2.h_max)));
}

TEST_CASE("facet normals point outward on the unit square", "[mesh]") {
  const Mesh m = generate_rect(4, 4, 1.0, 1.0);
  for (const Point& n : facet_normals(m, "right")) {
    REQUIRE(n[0] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(n[1] == Catch::Approx(0.0).margin(1e-12));
  }
  for (const Point& n : facet_normals(m, "top")) {
    REQUIRE(n[0] == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(n[1] == Catch::Approx(1.0).margin(1e-12));
  }
  // Every normal points from the adjacent cell toward the facet.
  for (const Facet& f : m.boundary_facets) {
    const Point n = facet_normal(m, f);
    REQUIRE(pnorm(n) == Catch::Approx(1.0).epsilon(1e-12));
    const Point d = psub(m.facet_centroid(f), m.cell_centroid(f.cell));
    REQUIRE(pdot(n, d) > 0.0);
  }
}

TEST_CASE("annulus sector outer-arc normals are radial", "[mesh]") {
  const Mesh m = generate_annulus_sector(1.0, 2.0, 0.3, 1.9, 6, 24);
  const int outer = m.label_id("outer");
  for (const Facet& f : m.boundary_facets) {
    if (f.label != outer) continue;
    const Point n = facet_normal(m, f);
    const Point c = m.facet_centroid(f);
    const double r = pnorm(c);
    REQUIRE(std::abs(n[0] - c[0] / r) <= 1e-10);
    REQUIRE(std::abs(n[1] - c[1] / r) <= 1e-10);
  }
}

TEST_CASE("extract_subdomain of everything is the identity", "[mesh]") {
  const Mesh m = generate_rect(3, 3, 1.0, 1.0);
  const SubMesh sub = extract_subdomain(m, {"domain"});
  REQUIRE(sub.mesh.n_cells() == m.n_cells());
  REQUIRE(sub.mesh.n_vertices() == m.n_vertices());
  for (std::size_t c = 0; c < m.n_cells(); ++c) REQUIRE(sub.parent_cell[c] == int(c));
  for (std::size_t v = 0; v < m.n_vertices(); ++v) REQUIRE(sub.parent_vertex[v] == int(v));
}

TEST_CASE("extract_subdomain labels interface facets as wall", "[mesh]") {
  // Two-label split of the unit square down the middle.
  Mesh m = generate_rect(4, 4, 1.0, 1.0);
  m.label_names[9] = "left_half";
  for (int c = 0; c < int(m.n_cells()); ++c)
    if (m.cell_centroid(c)[0] < 0.5) m.cell_subdomain[c] = 9;
  const SubMesh sub = extract_subdomain(m, {"left_half"});
  REQUIRE(sub.mesh.n_cells() == m.n_cells() / 2);
  REQUIRE(sub.mesh.has_label("wall"));
  const int wall = sub.mesh.label_id("wall");
  int n_wall = 0;
  for (const Facet& f : sub.mesh.boundary_facets)
    if (f.label == wall) {
      ++n_wall;
      REQUIRE(sub.mesh.facet_centroid(f)[0] == Catch::Approx(0.5));
    }
  REQUIRE(n_wall == 4);  // one interface edge per grid row
  // Total submesh volume equals the labeled parent volume.
  double vsub = 0.0, vparent = 0.0;
  for (int c = 0; c < int(sub.mesh.n_cells()); ++c) vsub += sub.mesh.cell_volume(c);
  for (int c = 0; c < int(m.n_cells()); ++c)
    if (m.cell_subdomain[c] == 9) vparent += m.cell_volume(c);
  REQUIRE(vsub == Catch::Approx(vparent).epsilon(1e-13));
}

TEST_CASE("extract_subdomain keeps parent facet labels on interfaces", "[mesh]") {
  Mesh m = generate_rect(2, 2, 1.0, 1.0);
  m.label_names[9] = "lower";
  m.label_names[10] = "midline";
  for (int c = 0; c < int(m.n_cells()); ++c)
    if (m.cell_centroid(c)[1] < 0.5) m.cell_subdomain[c] = 9;
  // Tag the interface edges y = 0.5 in the parent.
  std::set<std::array<int, 3>> seen;
  for (int c = 0; c < int(m.n_cells()); ++c)
    for (int lf = 0; lf <= 2; ++lf) {
      const auto key = m.facet_key(c, lf);
      const Point a = m.vertices[key[0]], b = m.vertices[key[1]];
      if (std::abs(a[1] - 0.5) < 1e-12 && std::abs(b[1] - 0.5) < 1e-12 &&
          seen.insert(key).second) {
        Facet f;
        f.v = {key[0], key[1], -1};
        f.label = 10;
        m.interior_facets.push_back(f);
      }
    }
  m.finalize();
  const SubMesh sub = extract_subdomain(m, {"lower"});
  bool saw_midline = false;
  for (const Facet& f : sub.mesh.boundary_facets)
    if (sub.mesh.label_name(f.label) == "midline") saw_midline = true;
  REQUIRE(saw_midline);
  REQUIRE_THROWS_AS(extract_subdomain(m, {"nope"}), Error);
}
