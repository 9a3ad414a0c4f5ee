// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_QUADRATURE_HPP
#define AFEM_QUADRATURE_HPP

#include <vector>

namespace afem
{

// Quadrature point on the reference triangle in barycentric coordinates. Weights
// sum to one, so physical integrals are area times the weighted sum.
struct QuadPoint
{
  double l0, l1, l2, w;
};

struct QuadRule
{
  std::vector<QuadPoint> pts;
  int exactness = 0; // exact for polynomials up to this total degree
};

// Symmetric rule used to assemble degree-p elements; exactness >= 2p+2.
const QuadRule& triangle_rule(int degree);

// Smallest stored rule exact for the given total polynomial degree.
const QuadRule& triangle_rule_exact(int poly_degree);

// Conical-product rule from n-point Gauss rules; exact through total degree 2n-2.
QuadRule conical_rule(int n);

// Gauss-Legendre rule on [0,1]; weights sum to one; exact through degree 2n-1.
struct GaussRule
{
  std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

} // namespace afem

#endif // AFEM_QUADRATURE_HPP
