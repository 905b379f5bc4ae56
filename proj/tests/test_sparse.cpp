#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "ocuflow/sparse.hpp"

using namespace ocuflow;

TEST_CASE("CSR pattern, add, matvec, transpose", "[sparse]") {
  SparseMatrix A(2, 3, {{0, 0}, {0, 2}, {1, 1}, {0, 0}});
  REQUIRE(A.nnz() == 3);
  A.add(0, 0, 4.0);
  A.add(0, 2, -1.0);
  A.add(1, 1, 2.5);
  REQUIRE_THROWS_AS(A.add(1, 0, 1.0), Error);
  const Vec y = A.multiply({1.0, 2.0, 3.0});
  REQUIRE(y[0] == Catch::Approx(1.0));
  REQUIRE(y[1] == Catch::Approx(5.0));

  const SparseMatrix At = A.transposed();
  REQUIRE(At.rows() == 3);
  REQUIRE(At.get(0, 0) == 4.0);
  REQUIRE(At.get(2, 0) == -1.0);
  REQUIRE(At.get(1, 1) == 2.5);

  // Column indices strictly increasing per row.
  for (int i = 0; i < A.rows(); ++i)
    for (int k = A.row_ptr()[i] + 1; k < A.row_ptr()[i + 1]; ++k)
      REQUIRE(A.col_idx()[k] > A.col_idx()[k - 1]);
}

TEST_CASE("dirichlet elimination is symmetric and moves values to rhs", "[sparse]") {
  // 3x3 SPD-ish system, constrain dof 1 to value 2.
  SparseMatrix A(3, 3, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {1, 2}, {2, 1}, {2, 2}});
  A.add(0, 0, 2.0);
  A.add(0, 1, -1.0);
  A.add(1, 0, -1.0);
  A.add(1, 1, 2.0);
  A.add(1, 2, -1.0);
  A.add(2, 1, -1.0);
  A.add(2, 2, 2.0);
  Vec rhs = {1.0, 1.0, 1.0};
  Vec vals = {0.0, 2.0, 0.0};
  std::vector<char> bc = {0, 1, 0};
  A.eliminate_dirichlet(bc, rhs, vals);
  REQUIRE(A.get(0, 1) == 0.0);
  REQUIRE(A.get(1, 0) == 0.0);
  REQUIRE(A.get(1, 1) == 1.0);
  REQUIRE(rhs[1] == 2.0);
  REQUIRE(rhs[0] == Catch::Approx(1.0 + 2.0));  // +(-(-1))*2
  REQUIRE(rhs[2] == Catch::Approx(1.0 + 2.0));
}

TEST_CASE("matrix market export format", "[sparse]") {
  SparseMatrix A(2, 2, {{0, 0}, {1, 0}, {1, 1}});
  A.add(0, 0, 1.5);
  A.add(1, 0, -2.0);
  A.add(1, 1, 0.25);
  write_matrix_market(A, "mm_test.mtx");
  std::ifstream is("mm_test.mtx");
  std::string l0;
  std::getline(is, l0);
  REQUIRE(l0 == "%%MatrixMarket matrix coordinate real general");
  std::string l1;
  std::getline(is, l1);
  REQUIRE(l1 == "2 2 3");
  std::string entry;
  std::getline(is, entry);
  REQUIRE(entry == "1 1 1.5");
}
