#include <catch2/catch_amalgamated.hpp>

#include "ocuflow/space.hpp"

using namespace ocuflow;

namespace {
Mesh single_triangle() {
  Mesh m;
  m.dim = 2;
  m.label_names = {{1, "domain"}};
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.cells = {{0, 1, 2, -1}};
  m.cell_subdomain = {1};
  m.finalize();
  return m;
}
}  // namespace

TEST_CASE("dof counts", "[space]") {
  const Mesh tri = single_triangle();
  REQUIRE(build_space(tri, 1, Continuity::continuous, 1).n_dofs() == 3);
  REQUIRE(build_space(tri, 2, Continuity::continuous, 1).n_dofs() == 6);

  const Mesh m = generate_rect(2, 1, 1.0, 1.0);  // 8 triangles
  const FunctionSpace dg = build_space(m, 1, Continuity::discontinuous, 2);
  REQUIRE(dg.n_dofs() == 8 * 3 * 2);
  REQUIRE_THROWS_AS(build_space(m, 3, Continuity::continuous, 1), Error);
}

TEST_CASE("continuous spaces share dofs across interfaces", "[space]") {
  const Mesh m = generate_rect(2, 2, 1.0, 1.0);
  const FunctionSpace S = build_space(m, 2, Continuity::continuous, 1);
  // Evaluate a global basis function from both adjacent cells of a shared
  // facet midpoint and compare.
  Field f(S);
  for (int s = 0; s < S.n_scalar_dofs; ++s) {
    const Point& x = S.scalar_dof_coords[s];
    f.coeffs[s] = std::sin(3 * x[0]) + x[1] * x[1];
  }
  // Interior vertex shared by several cells: value must agree from each.
  for (int v = 0; v < int(m.n_vertices()); ++v) {
    std::vector<std::pair<int, Point>> owners;
    for (int c = 0; c < int(m.n_cells()); ++c) {
      const CellMap map = cell_map(m, c);
      for (int k = 0; k < 3; ++k)
        if (m.cells[c][k] == v) owners.push_back({c, map.to_reference(m.vertices[v])});
    }
    if (owners.size() < 2) continue;
    const double ref = evaluate(f, owners[0].first, owners[0].second)[0];
    for (const auto& [c, xi] : owners)
      REQUIRE(evaluate(f, c, xi)[0] == Catch::Approx(ref).margin(1e-12));
  }
}

TEST_CASE("interpolation reproduces constants, linears and quadratics", "[space]") {
  const Mesh m = generate_rect(3, 3, 1.0, 1.0);
  const FunctionSpace p1 = build_space(m, 1, Continuity::continuous, 1);
  const Field c = interpolate_scalar(p1, [](const Point&) { return 4.25; });
  for (double v : c.coeffs) REQUIRE(v == 4.25);

  const Field x = interpolate_scalar(p1, [](const Point& p) { return p[0]; });
  for (int s = 0; s < p1.n_scalar_dofs; ++s)
    REQUIRE(x.coeffs[s] == Catch::Approx(p1.scalar_dof_coords[s][0]).margin(1e-14));

  const FunctionSpace p2 = build_space(m, 2, Continuity::continuous, 1);
  const Field q = interpolate_scalar(p2, [](const Point& p) { return p[0] * p[0]; });
  // P2 reproduces quadratics pointwise.
  for (int cix : {0, 5, 11}) {
    const Point xi{0.21, 0.33, 0.0};
    const CellMap map = cell_map(m, cix);
    const Point phys = map.to_physical(xi);
    REQUIRE(evaluate(q, cix, xi)[0] == Catch::Approx(phys[0] * phys[0]).margin(1e-12));
    const auto grad = evaluate_gradient(q, cix, xi);
    REQUIRE(grad[0][0] == Catch::Approx(2.0 * phys[0]).margin(1e-12));
    REQUIRE(grad[0][1] == Catch::Approx(0.0).margin(1e-12));
  }

  REQUIRE_THROWS_AS(
      interpolate_scalar(p1, [](const Point&) { return std::nan(""); }), Error);
}

TEST_CASE("constant and linear field gradients", "[space]") {
  const Mesh tri = single_triangle();
  const FunctionSpace p1 = build_space(tri, 1, Continuity::continuous, 1);
  const Field lin = interpolate_scalar(p1, [](const Point& p) { return 2 * p[0] + 3 * p[1]; });
  const auto g = evaluate_gradient(lin, 0, Point{0.3, 0.3, 0});
  REQUIRE(g[0][0] == Catch::Approx(2.0).margin(1e-13));
  REQUIRE(g[0][1] == Catch::Approx(3.0).margin(1e-13));

  const Field c = interpolate_scalar(p1, [](const Point&) { return 7.0; });
  REQUIRE(evaluate(c, 0, Point{0.1, 0.5, 0})[0] == Catch::Approx(7.0));
  const auto gc = evaluate_gradient(c, 0, Point{0.1, 0.5, 0});
  REQUIRE(std::abs(gc[0][0]) <= 1e-13);
  REQUIRE(std::abs(gc[0][1]) <= 1e-13);
}

TEST_CASE("boundary dofs of P2 spaces include edge midpoints", "[space]") {
  const Mesh m = generate_rect(2, 2, 1.0, 1.0);
  const FunctionSpace p2 = build_space(m, 2, Continuity::continuous, 1);
  const auto dofs = p2.boundary_scalar_dofs({"left"});
  // 2 edges on the left side: 3 vertices + 2 midpoints.
  REQUIRE(dofs.size() == 5);
  for (int s : dofs) REQUIRE(p2.scalar_dof_coords[s][0] == Catch::Approx(0.0).margin(1e-14));
}
