// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_EIGENSOLVER_HPP
#define AFEM_EIGENSOLVER_HPP

#include <complex>
#include <memory>
#include <vector>

#include "afem/assembly.hpp"

namespace afem
{

using Complex = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

// A real sparse matrix applied to a complex vector, componentwise.
inline VecC mul_real(const SpMat& s, const VecC& x)
{
  VecC out(x.size());
  out.real() = s * x.real().eval();
  out.imag() = s * x.imag().eval();
  return out;
}

// Value of the discrete form on a coefficient vector: conj(u)^T A u. The test
// argument is conjugated, so the real part is positive for coercive forms.
Complex form_value(const SpMat& a, const VecC& u);

struct EigenPair
{
  Complex lambda;
  VecC u;          // free-dof coefficients, scaled so |form_value(A,u)| = 1
  double residual; // ||A u - lambda M u||_2 / ||A u||_2
};

enum class EigenPath
{
  Auto,  // dense below the size threshold, Krylov above
  Dense,
  Krylov,
};

struct ClusterOptions
{
  int n = 0; // eigenvalues skipped below the window
  int N = 1; // cluster size
  Complex shift{0.0, 0.0};
  EigenPath path = EigenPath::Auto;
  double tol = 1e-12; // Krylov convergence tolerance (relative Ritz residual)
  int max_restarts = 80;
  int extra = 3; // eigenvalues computed beyond the window for certification
};

// One factored shifted operator; the primal solve builds it and the adjoint
// solve reuses it through the conjugate-transposed view.
struct ShiftedFactor;

// An eigenvalue cluster: the N pairs ranked n+1 .. n+N when the eigenvalues
// nearest the shift are ordered by (modulus, argument, solver index).
struct Cluster
{
  int n = 0;
  int N = 0;
  Complex shift{0.0, 0.0};
  std::vector<EigenPair> pairs;   // primal, modulus-ascending
  std::vector<EigenPair> adjoint; // adjoint[j] matched to pairs[j]
  std::vector<Complex> nearby;    // certified eigenvalues incl. the window
  double separation = 0.0;        // |lambda_{n+N+1}| - |lambda_{n+N}|
  double adjoint_mismatch = 0.0;  // max_j |lambda_j - conj(lambda*_j)| / |lambda_j|

  // Filled by orthonormalize_cluster; mass-orthonormal, same span as the raw
  // eigenvectors, which stay untouched in pairs/adjoint.
  MatC basis;
  MatC adjoint_basis;
  double gram_error = 0.0; // max |Q^H M Q - I| over both bases

  std::shared_ptr<ShiftedFactor> factor; // internal, reused by the adjoint solve
};

// True when every eigenvector is real up to roundoff (max |Im| <= 1e-10 max |Re|).
bool cluster_is_real(const Cluster& c);

// Arithmetic mean of the primal cluster eigenvalues.
Complex cluster_mean(const Cluster& c);

// Solves A u = lambda M u for the cluster nearest opt.shift. Every returned
// pair satisfies the 1e-9 relative residual bound. Throws NumericalError on
// non-convergence or when the window boundary falls between two distinct
// eigenvalues of equal modulus (relative 1e-10), which no ordering resolves.
Cluster solve_cluster(const OperatorPencil& p, const ClusterOptions& opt);

// Solves the transposed pencil near conj(shift) and matches each adjoint
// eigenvalue to a primal one greedily by |lambda_j - conj(lambda*_k)|. Throws
// NumericalError when the matched mismatch exceeds 1e-8 relative.
void solve_adjoint_cluster(const OperatorPencil& p, Cluster& c);

// Modified Gram-Schmidt in the mass inner product, one reorthogonalization
// pass, applied to the primal and (when present) adjoint eigenvectors. Fills
// basis, adjoint_basis, gram_error. Throws NumericalError on rank deficiency.
void orthonormalize_cluster(const OperatorPencil& p, Cluster& c);

// Gap max(delta(U,W), delta(W,U)) between the spans of the columns of U and W,
// measured in the inner product of the SPD Gram matrix g via principal angles.
double subspace_gap(const MatC& u, const MatC& w, const SpMat& g);

} // namespace afem

#endif // AFEM_EIGENSOLVER_HPP
