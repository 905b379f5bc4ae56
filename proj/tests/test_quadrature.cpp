#include <catch2/catch_amalgamated.hpp>

#include "ocuflow/quadrature.hpp"

using namespace ocuflow;

TEST_CASE("simplex rules integrate monomials to declared order", "[quadrature]") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (int order = 1; order <= 8; ++order) {
      const QuadratureRule rule = simplex_rule(dim, order);
      for (int a = 0; a + 0 <= order; ++a)
        for (int b = 0; a + b <= order && (dim >= 2 || b == 0); ++b)
          for (int c = 0; a + b + c <= order && (dim >= 3 || c == 0); ++c) {
            double s = 0.0;
            for (std::size_t q = 0; q < rule.size(); ++q) {
              const Point& p = rule.points[q];
              s += rule.weights[q] * std::pow(p[0], a) * std::pow(p[1], b) *
                   std::pow(p[2], c);
            }
            const double exact = reference_monomial_integral(dim, a, b, c);
            INFO("dim=" << dim << " order=" << order << " monomial=(" << a << ","
                        << b << "," << c << ")");
            REQUIRE(std::abs(s - exact) <= 1e-12);
          }
    }
  }
}

TEST_CASE("weights are positive and sum to the reference measure", "[quadrature]") {
  for (int dim = 1; dim <= 3; ++dim)
    for (int order : {1, 3, 5, 8}) {
      const QuadratureRule rule = simplex_rule(dim, order);
      double sum = 0.0;
      for (double w : rule.weights) {
        REQUIRE(w > 0.0);
        sum += w;
      }
      REQUIRE(sum == Catch::Approx(reference_measure(dim)).epsilon(1e-13));
    }
}
