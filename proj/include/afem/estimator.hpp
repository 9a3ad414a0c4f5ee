// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_ESTIMATOR_HPP
#define AFEM_ESTIMATOR_HPP

#include <functional>
#include <vector>

#include "afem/eigensolver.hpp"

namespace afem
{

// Per-triangle squared indicators for every cluster member j. total[T] is the
// marking quantity sum_j (eta2[j][T] + eta2_star[j][T]); every entry is finite
// and nonnegative, and global values decompose additively over triangles.
struct IndicatorField
{
  int N = 0;
  int n_tri = 0;
  std::vector<std::vector<double>> eta2;      // [j][T] primal
  std::vector<std::vector<double>> eta2_star; // [j][T] adjoint
  std::vector<std::vector<double>> osc2;      // diagnostic, not marked on
  std::vector<std::vector<double>> osc2_star;
  std::vector<double> total;
};

// Discrete source solutions w_j = K u_j, w*_j = K* u*_j for the orthonormal
// cluster bases, as full coefficient vectors. One real factorization and its
// transpose serve all 2N right-hand sides.
struct SourceSolutions
{
  std::vector<std::vector<Complex>> w;
  std::vector<std::vector<Complex>> w_star;
};

SourceSolutions source_solutions(const FeSpace& space, const OperatorPencil& p,
                                 const Cluster& c);

// Squared residual indicators eta(f,T)^2 = h_T^2 ||R_T||^2 + sum_e h_e ||J_e||^2
// per triangle. The jump of an interior edge is charged fully to both adjacent
// triangles; boundary edges contribute nothing. With adjoint = true the
// convection sign in the element residual flips (the coefficients are real and
// divergence free, so the adjoint operator differs only there).
std::vector<double> local_indicators(const FeSpace& space, const CoefficientField& coeffs,
                                     const std::vector<double>& f,
                                     const std::vector<double>& w, bool adjoint);
std::vector<double> local_indicators(const FeSpace& space, const CoefficientField& coeffs,
                                     const std::vector<Complex>& f,
                                     const std::vector<Complex>& w, bool adjoint);
// Right-hand side given as a function instead of a finite element field.
std::vector<double> local_indicators(const FeSpace& space, const CoefficientField& coeffs,
                                     const std::function<double(Point2)>& f,
                                     const std::vector<double>& w, bool adjoint);

// Squared data oscillation: the residual and jump tails left by the local
// L2 projection onto polynomials of degree 2p-1, weighted like the indicators.
std::vector<double> oscillation(const FeSpace& space, const CoefficientField& coeffs,
                                const std::vector<double>& f,
                                const std::vector<double>& w, bool adjoint);
std::vector<double> oscillation(const FeSpace& space, const CoefficientField& coeffs,
                                const std::vector<Complex>& f,
                                const std::vector<Complex>& w, bool adjoint);
std::vector<double> oscillation(const FeSpace& space, const CoefficientField& coeffs,
                                const std::function<double(Point2)>& f,
                                const std::vector<double>& w, bool adjoint);

// Runs the source solves and fills the whole field for a solved, adjoint-matched,
// orthonormalized cluster. Real clusters take a real arithmetic fast path.
IndicatorField cluster_indicators(const FeSpace& space, const CoefficientField& coeffs,
                                  const OperatorPencil& p, const Cluster& c);

// sum_j sum_{T in subset} (eta2 + eta2_star); the first overload is global.
double cluster_estimator(const IndicatorField& ind);
double cluster_estimator(const IndicatorField& ind, const std::vector<int>& subset);

} // namespace afem

#endif // AFEM_ESTIMATOR_HPP
