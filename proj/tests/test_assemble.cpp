#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "ocuflow/assemble.hpp"

using namespace ocuflow;

namespace {

Mesh unit_right_triangle() {
  Mesh m;
  m.dim = 2;
  m.label_names = {{1, "domain"}, {2, "hyp"}, {3, "bottom"}};
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.cells = {{0, 1, 2, -1}};
  m.cell_subdomain = {1};
  m.boundary_facets.push_back({{1, 2, -1}, 2, -1, -1});
  m.boundary_facets.push_back({{0, 1, -1}, 3, -1, -1});
  m.finalize();
  return m;
}

BilinearKernel mass_kernel(int degree) {
  return {degree, [](const AsmContext&, const BasisAt& u, const BasisAt& v) {
            return u.comp == v.comp ? u.v * v.v : 0.0;
          }};
}

BilinearKernel stiffness_kernel(int degree) {
  return {degree, [](const AsmContext&, const BasisAt& u, const BasisAt& v) {
            return u.comp == v.comp ? pdot(u.g, v.g) : 0.0;
          }};
}

}  // namespace

TEST_CASE("P1 mass matrix on the unit right triangle", "[assemble]") {
  const Mesh m = unit_right_triangle();
  const FunctionSpace S = build_space(m, 1, Continuity::continuous, 1);
  Assembler asmr(m);
  const SparseMatrix M = asmr.bilinear(S, S, simplex_rule(2, 2), mass_kernel(2));
  // Exact: area/12 * [[2,1,1],[1,2,1],[1,1,2]], area = 1/2.
  const double a = 0.5 / 12.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      REQUIRE(M.get(i, j) == Catch::Approx(a * (i == j ? 2.0 : 1.0)).epsilon(1e-13));
}

TEST_CASE("P1 stiffness matrix on the unit right triangle", "[assemble]") {
  const Mesh m = unit_right_triangle();
  const FunctionSpace S = build_space(m, 1, Continuity::continuous, 1);
  Assembler asmr(m);
  const SparseMatrix K = asmr.bilinear(S, S, simplex_rule(2, 1), stiffness_kernel(0));
  // Hand-computed: grad l0 = (-1,-1), grad l1 = (1,0), grad l2 = (0,1), area 1/2.
  const double expect[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      REQUIRE(K.get(i, j) == Catch::Approx(expect[i][j]).margin(1e-13));
}

TEST_CASE("zero kernel gives a zero matrix", "[assemble]") {
  const Mesh m = unit_right_triangle();
  const FunctionSpace S = build_space(m, 1, Continuity::continuous, 1);
  Assembler asmr(m);
  const SparseMatrix Z = asmr.bilinear(
      S, S, simplex_rule(2, 1), {0, [](const AsmContext&, const BasisAt&, const BasisAt&) {
         return 0.0;
       }});
  REQUIRE(Z.max_abs() == 0.0);
}

TEST_CASE("under-integration is rejected", "[assemble]") {
  const Mesh m = unit_right_triangle();
  const FunctionSpace S = build_space(m, 2, Continuity::continuous, 1);
  Assembler asmr(m);
  REQUIRE_THROWS_WITH(asmr.bilinear(S, S, simplex_rule(2, 2), mass_kernel(4)),
                      Catch::Matchers::ContainsSubstring("below kernel degree"));
}

TEST_CASE("facet load vector integrates 1 over a unit side", "[assemble]") {
  const Mesh m = generate_rect(3, 3, 1.0, 1.0);
  const FunctionSpace S = build_space(m, 1, Continuity::continuous, 1);
  Assembler asmr(m);
  const Vec b = asmr.facet_linear(S, simplex_rule(1, 2), {m.label_id("left")},
                                  {1, [](const AsmContext&, const BasisAt& v) { return v.v; }});
  double sum = 0.0;
  for (double x : b) sum += x;
  REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("facet mass block on one edge is L/6 [[2,1],[1,2]]", "[assemble]") {
  const Mesh m = unit_right_triangle();
  const FunctionSpace S = build_space(m, 1, Continuity::continuous, 1);
  Assembler asmr(m);
  const SparseMatrix M =
      asmr.facet_bilinear(S, S, simplex_rule(1, 2), {m.label_id("bottom")}, mass_kernel(2));
  const double L = 1.0;
  REQUIRE(M.get(0, 0) == Catch::Approx(2 * L / 6).epsilon(1e-13));
  REQUIRE(M.get(0, 1) == Catch::Approx(L / 6).epsilon(1e-13));
  REQUIRE(M.get(1, 1) == Catch::Approx(2 * L / 6).epsilon(1e-13));
  // And on the hypotenuse, length sqrt(2).
  const SparseMatrix Mh =
      asmr.facet_bilinear(S, S, simplex_rule(1, 2), {m.label_id("hyp")}, mass_kernel(2));
  REQUIRE(Mh.get(1, 2) == Catch::Approx(std::sqrt(2.0) / 6).epsilon(1e-13));

  REQUIRE_THROWS_AS(m.label_id("no_such_label"), Error);
}

TEST_CASE("Galerkin symmetry of symmetric kernels", "[assemble]") {
  const Mesh m = generate_rect(5, 4, 1.0, 1.0);
  const FunctionSpace S = build_space(m, 2, Continuity::continuous, 2);
  Assembler asmr(m);
  const SparseMatrix M = asmr.bilinear(S, S, simplex_rule(2, 4), mass_kernel(4));
  const SparseMatrix Mt = M.transposed();
  double diff = 0.0;
  for (std::size_t k = 0; k < M.nnz(); ++k)
    diff = std::max(diff, std::abs(M.values()[k] - Mt.values()[k]));
  REQUIRE(diff <= 1e-12 * M.max_abs());
}

TEST_CASE("partition of unity: mass row sums equal the load of 1", "[assemble]") {
  const Mesh m = generate_rect(4, 3, 2.0, 1.0);
  for (int degree : {1, 2}) {
    const FunctionSpace S = build_space(m, degree, Continuity::continuous, 1);
    Assembler asmr(m);
    const SparseMatrix M = asmr.bilinear(S, S, simplex_rule(2, 2 * degree), mass_kernel(2 * degree));
    const Vec b = asmr.linear(S, simplex_rule(2, degree),
                              {degree, [](const AsmContext&, const BasisAt& v) { return v.v; }});
    for (int i = 0; i < M.rows(); ++i) {
      double row = 0.0;
      for (int k = M.row_ptr()[i]; k < M.row_ptr()[i + 1]; ++k) row += M.values()[k];
      REQUIRE(row == Catch::Approx(b[i]).margin(1e-14));
    }
  }
}

TEST_CASE("assembly is bit-identical across runs and thread counts", "[assemble]") {
  const Mesh m = generate_rect(8, 8, 1.0, 1.0);
  const FunctionSpace S = build_space(m, 2, Continuity::continuous, 2);
  auto run = [&](const char* threads) {
    setenv("OCUFLOW_THREADS", threads, 1);
    Assembler asmr(m);
    const SparseMatrix A = asmr.bilinear(S, S, simplex_rule(2, 5), stiffness_kernel(4));
    unsetenv("OCUFLOW_THREADS");
    return A.values();
  };
  const Vec v1 = run("1");
  const Vec v4 = run("4");
  const Vec v1b = run("1");
  REQUIRE(v1 == v4);
  REQUIRE(v1 == v1b);
}

TEST_CASE("cross-mesh assembly through submesh parent maps", "[assemble]") {
  // P1 mass of parent-space functions integrated over a submesh region
  // equals direct integration over the labeled parent cells.
  Mesh m = generate_rect(4, 4, 1.0, 1.0);
  m.label_names[9] = "inner";
  for (int c = 0; c < int(m.n_cells()); ++c) {
    const Point x = m.cell_centroid(c);
    if (x[0] > 0.25 && x[0] < 0.75 && x[1] > 0.25 && x[1] < 0.75)
      m.cell_subdomain[c] = 9;
  }
  const SubMesh sub = extract_subdomain(m, {"inner"});
  const FunctionSpace Sp = build_space(m, 1, Continuity::continuous, 1);
  const Field f = interpolate_scalar(Sp, [](const Point& p) { return 1.0 + p[0] + p[1]; });

  Assembler on_sub(sub.mesh);
  on_sub.bind_parent(m, sub.parent_cell);
  const double i_sub = on_sub.integrate(
      simplex_rule(2, 3), [](const AsmContext& ctx) { return ctx.coef[0][0]; }, {&f});

  Assembler on_parent(m);
  on_parent.set_region({9});
  const double i_parent = on_parent.integrate(
      simplex_rule(2, 3), [](const AsmContext& ctx) { return ctx.coef[0][0]; }, {&f});
  REQUIRE(i_sub == Catch::Approx(i_parent).epsilon(1e-13));
}
