// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_ASSEMBLY_HPP
#define AFEM_ASSEMBLY_HPP

#include <complex>
#include <map>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "afem/space.hpp"

namespace afem
{

struct ElemCoeff
{
  Sym2 A{1.0, 0.0, 1.0}; // symmetric positive definite diffusion
  Point2 b{0.0, 0.0};    // convection, constant per subdomain
  double c = 0.0;        // reaction
};

// Piecewise-constant coefficients keyed by subdomain tag.
class CoefficientField
{
public:
  void set(int tag, const ElemCoeff& c) { by_tag_[tag] = c; }
  const ElemCoeff& at(int tag) const;

private:
  std::map<int, ElemCoeff> by_tag_;
};

using SpMat = Eigen::SparseMatrix<double>;

// Discrete operator and mass matrix on the free dofs. Entry (i,j) applies the
// form to trial function j and test function i, so eigenvectors of A x = l M x
// are the discrete eigenfunctions. Assembly is real; complex right-hand sides
// are solved componentwise against the one cached factorization.
struct OperatorPencil
{
  SpMat A;
  SpMat M;
  int n = 0;

  // Non-const because SparseLU::transpose() is a mutating accessor in Eigen.
  Eigen::SparseLU<SpMat>& factorization() const;

private:
  mutable std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
};

// Exact element matrices of the form and of the mass bilinear form.
void element_matrices(const FeSpace& space, const ElemCoeff& coeff, int t,
                      Eigen::MatrixXd& Ae, Eigen::MatrixXd& Me);

OperatorPencil assemble_pencil(const FeSpace& space, const CoefficientField& coeffs);

// Transposed pair; its eigenvalues are the complex conjugates of the originals.
OperatorPencil adjoint_pencil(const OperatorPencil& p);

// Mass right-hand side M u for a free-dof coefficient vector u.
Eigen::VectorXd assemble_rhs_mass(const OperatorPencil& p, const Eigen::VectorXd& u);
Eigen::VectorXcd assemble_rhs_mass(const OperatorPencil& p, const Eigen::VectorXcd& u);

// Load vector (f, phi_i) over the free dofs for a general right-hand side.
Eigen::VectorXd assemble_rhs(const FeSpace& space, const std::function<double(Point2)>& f);

// Direct solve with A (or its transpose), reusing the cached factorization.
// A relative residual above 1e-10 after one refinement step throws NumericalError.
Eigen::VectorXd solve_linear(const OperatorPencil& p, const Eigen::VectorXd& rhs,
                             bool transpose = false);
Eigen::VectorXcd solve_linear(const OperatorPencil& p, const Eigen::VectorXcd& rhs,
                              bool transpose = false);

} // namespace afem

#endif // AFEM_ASSEMBLY_HPP
