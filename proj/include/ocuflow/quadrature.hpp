#pragma once

#include "ocuflow/core.hpp"

namespace ocuflow {

/// Quadrature rule on the reference simplex (segment [0,1], unit triangle,
/// unit tetrahedron). `order` is the declared polynomial exactness.
struct QuadratureRule {
  int dim = 0;
  int order = 0;
  std::vector<Point> points;
  Vec weights;

  std::size_t size() const { return points.size(); }
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, Vec& x, Vec& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Same rule mapped to [0,1].
inline void gauss_legendre_01(int n, Vec& x, Vec& w) {
  gauss_legendre(n, x, w);
  for (int i = 0; i < n; ++i) {
    x[i] = 0.5 * (x[i] + 1.0);
    w[i] *= 0.5;
  }
}

}  // namespace detail

/// Rule of the requested exactness on the reference simplex of dimension
/// `dim`. Built as a conical product of 1D Gauss rules through the Duffy
/// collapse, so weights are positive at every order.
inline QuadratureRule simplex_rule(int dim, int order) {
  require(dim >= 1 && dim <= 3, "simplex_rule: dim must be 1, 2 or 3");
  require(order >= 0, "simplex_rule: negative order");
  QuadratureRule rule;
  rule.dim = dim;
  rule.order = order;
  // The collapse Jacobian raises the per-direction degree: +1 (triangle),
  // +2 (tet); an n-point Gauss rule is exact to degree 2n-1.
  const int p = std::max(order, 1);
  Vec gx, gw;
  if (dim == 1) {
    const int n = (p + 2) / 2;
    detail::gauss_legendre_01(n, gx, gw);
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({gx[i], 0.0, 0.0});
      rule.weights.push_back(gw[i]);
    }
  } else if (dim == 2) {
    const int n = (p + 3) / 2;
    detail::gauss_legendre_01(n, gx, gw);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double xi = gx[i], eta = gx[j];
        rule.points.push_back({xi * (1.0 - eta), eta, 0.0});
        rule.weights.push_back(gw[i] * gw[j] * (1.0 - eta));
      }
  } else {
    const int n = (p + 4) / 2;
    detail::gauss_legendre_01(n, gx, gw);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double xi = gx[i], eta = gx[j], zeta = gx[k];
          rule.points.push_back(
              {xi * (1.0 - eta) * (1.0 - zeta), eta * (1.0 - zeta), zeta});
          rule.weights.push_back(gw[i] * gw[j] * gw[k] * (1.0 - eta) *
                                 (1.0 - zeta) * (1.0 - zeta));
        }
  }
  return rule;
}

/// Reference simplex measure: 1, 1/2, 1/6.
inline double reference_measure(int dim) {
  return dim == 1 ? 1.0 : (dim == 2 ? 0.5 : 1.0 / 6.0);
}

/// Exact integral of x^a y^b z^c over the reference simplex:
/// a! b! c! / (a+b+c+dim)!. Used by the exactness tests.
inline double reference_monomial_integral(int dim, int a, int b, int c) {
  auto fact = [](int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) * fact(c) / fact(a + b + c + dim);
}

}  // namespace ocuflow
