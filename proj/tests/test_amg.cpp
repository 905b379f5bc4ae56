#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ocuflow/assemble.hpp"
#include "ocuflow/krylov.hpp"

using namespace ocuflow;

namespace {

SparseMatrix poisson_1d(int n) {
  std::vector<std::pair<int, int>> pattern;
  for (int i = 0; i < n; ++i) {
    pattern.emplace_back(i, i);
    if (i > 0) pattern.emplace_back(i, i - 1);
    if (i < n - 1) pattern.emplace_back(i, i + 1);
  }
  SparseMatrix A(n, n, std::move(pattern));
  for (int i = 0; i < n; ++i) {
    A.add(i, i, 2.0);
    if (i > 0) A.add(i, i - 1, -1.0);
    if (i < n - 1) A.add(i, i + 1, -1.0);
  }
  return A;
}

SparseMatrix p1_laplacian(int n, int& out_dofs) {
  const Mesh m = generate_rect(n, n, 1.0, 1.0);
  static std::vector<FunctionSpace> keep_alive;  // spaces referenced by fields
  const FunctionSpace S = build_space(m, 1, Continuity::continuous, 1);
  Assembler asmr(m);
  SparseMatrix K = asmr.bilinear(
      S, S, simplex_rule(2, 2),
      {2, [](const AsmContext&, const BasisAt& u, const BasisAt& v) { return pdot(u.g, v.g); }});
  // Pin boundary dofs so the operator is SPD.
  const auto bdofs = S.boundary_scalar_dofs({"left", "right", "bottom", "top"});
  std::vector<char> bc(S.n_dofs(), 0);
  for (int d : bdofs) bc[d] = 1;
  Vec rhs(S.n_dofs(), 0.0), val(S.n_dofs(), 0.0);
  K.eliminate_dirichlet(bc, rhs, val);
  out_dofs = S.n_dofs();
  return K;
}

int pc_iterations(const SparseMatrix& A, const AmgHierarchy& h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec b(A.rows());
  for (double& x : b) x = dist(rng);
  SolveReport rep;
  gmres(matrix_op(A), b, amg_pc(h), 1e-8, 100, 300, rep);
  REQUIRE(rep.converged);
  return rep.iterations;
}

}  // namespace

TEST_CASE("amg-preconditioned gmres solves 1D Poisson n=127 in <= 15 iterations",
          "[amg]") {
  const SparseMatrix A = poisson_1d(127);
  const AmgHierarchy h = amg_build(A);
  REQUIRE(h.n_levels() >= 2);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec b(127);
  for (double& x : b) x = dist(rng);
  SolveReport rep;
  const Vec x = gmres(matrix_op(A), b, amg_pc(h), 1e-8, 50, 100, rep);
  REQUIRE(rep.converged);
  REQUIRE(rep.iterations <= 15);
  // Against a dense oracle.
  DenseMatrix D(127, 127);
  for (int i = 0; i < 127; ++i)
    for (int k = A.row_ptr()[i]; k < A.row_ptr()[i + 1]; ++k)
      D(i, A.col_idx()[k]) = A.values()[k];
  const Vec exact = DenseLU(std::move(D)).solve(b);
  for (int i = 0; i < 127; ++i) REQUIRE(x[i] == Catch::Approx(exact[i]).margin(1e-6));
}

TEST_CASE("V-cycle on the identity returns the input", "[amg]") {
  const int n = 50;
  std::vector<std::pair<int, int>> pattern;
  for (int i = 0; i < n; ++i) pattern.emplace_back(i, i);
  SparseMatrix I(n, n, std::move(pattern));
  for (int i = 0; i < n; ++i) I.add(i, i, 1.0);
  const AmgHierarchy h = amg_build(I);
  Vec r(n);
  for (int i = 0; i < n; ++i) r[i] = std::sin(i + 1.0);
  const Vec z = amg_apply(h, r);
  for (int i = 0; i < n; ++i) REQUIRE(z[i] == Catch::Approx(r[i]).margin(1e-13));
}

TEST_CASE("V-cycle is a linear operator", "[amg]") {
  const SparseMatrix A = poisson_1d(200);
  const AmgHierarchy h = amg_build(A);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec r1(200), r2(200);
  for (int i = 0; i < 200; ++i) {
    r1[i] = dist(rng);
    r2[i] = dist(rng);
  }
  const double alpha = 0.731;
  Vec combo(200);
  for (int i = 0; i < 200; ++i) combo[i] = r1[i] + alpha * r2[i];
  const Vec z1 = amg_apply(h, r1);
  const Vec z2 = amg_apply(h, r2);
  const Vec zc = amg_apply(h, combo);
  double scale0 = 0.0;
  for (int i = 0; i < 200; ++i) scale0 = std::max(scale0, std::abs(zc[i]));
  for (int i = 0; i < 200; ++i)
    REQUIRE(zc[i] == Catch::Approx(z1[i] + alpha * z2[i]).margin(1e-12 * std::max(1.0, scale0)));
}

TEST_CASE("near mesh-independence on the 2D P1 Laplacian", "[amg]") {
  int n32 = 0, n64 = 0;
  const SparseMatrix A32 = p1_laplacian(32, n32);
  const SparseMatrix A64 = p1_laplacian(64, n64);
  const AmgHierarchy h32 = amg_build(A32);
  const AmgHierarchy h64 = amg_build(A64);
  const int it32 = pc_iterations(A32, h32, 21);
  const int it64 = pc_iterations(A64, h64, 22);
  INFO("it32=" << it32 << " it64=" << it64);
  REQUIRE(double(it64) <= 1.5 * double(it32));
}

TEST_CASE("aggregation stagnation is reported", "[amg]") {
  // A diagonal matrix has no strong connections: every node becomes a
  // singleton and coarsening cannot proceed.
  const int n = 100;
  std::vector<std::pair<int, int>> pattern;
  for (int i = 0; i < n; ++i) pattern.emplace_back(i, i);
  SparseMatrix D(n, n, std::move(pattern));
  for (int i = 0; i < n; ++i) D.add(i, i, 1.0 + i);
  const AmgHierarchy h = amg_build(D);
  REQUIRE(h.stagnated);
  REQUIRE(h.note.find("coarsening ratio") != std::string::npos);
  // Falls back to a direct solve, which is exact here.
  Vec r(n, 1.0);
  const Vec z = amg_apply(h, r);
  for (int i = 0; i < n; ++i) REQUIRE(z[i] == Catch::Approx(1.0 / (1.0 + i)).epsilon(1e-12));
}
