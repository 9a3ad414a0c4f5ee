// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/assembly.hpp"

#include <vector>

#include "afem/errors.hpp"
#include "afem/parallel.hpp"
#include "afem/quadrature.hpp"

namespace afem
{

const ElemCoeff& CoefficientField::at(int tag) const
{
  auto it = by_tag_.find(tag);
  if (it == by_tag_.end())
    throw ConfigError("coefficients: no data for subdomain tag " + std::to_string(tag));
  return it->second;
}

void element_matrices(const FeSpace& space, const ElemCoeff& coeff, int t,
                      Eigen::MatrixXd& Ae, Eigen::MatrixXd& Me)
{
  const int loc = space.local_size();
  Ae.setZero(loc, loc);
  Me.setZero(loc, loc);
  const double area = space.mesh().area(t);
  const QuadRule& rule = triangle_rule(space.degree());
  FeSpace::Basis basis;
  for (const QuadPoint& q : rule.pts)
  {
    const double l[3] = {q.l0, q.l1, q.l2};
    space.eval_basis(t, l, false, basis);
    const double w = q.w * area;
    for (int j = 0; j < loc; j++)
    {
      const Point2 flux = apply(coeff.A, basis.grad[j]);
      const double conv = dot(coeff.b, basis.grad[j]) + coeff.c * basis.val[j];
      for (int i = 0; i < loc; i++)
      {
        Ae(i, j) += w * (dot(flux, basis.grad[i]) + conv * basis.val[i]);
        Me(i, j) += w * (basis.val[j] * basis.val[i]); // grouping keeps Me bitwise symmetric
      }
    }
  }
}

OperatorPencil assemble_pencil(const FeSpace& space, const CoefficientField& coeffs)
{
  const int nt = space.mesh().n_triangles();
  const int loc = space.local_size();
  const std::size_t block = static_cast<std::size_t>(loc) * loc;

  // Resolve tags up front: parallel_for bodies must not throw.
  for (int t = 0; t < nt; t++)
    coeffs.at(space.mesh().triangles()[t].tag);

  std::vector<double> abuf(nt * block), mbuf(nt * block);
  parallel_for(nt, [&](int t)
  {
    Eigen::Map<Eigen::MatrixXd> Ae(&abuf[t * block], loc, loc);
    Eigen::Map<Eigen::MatrixXd> Me(&mbuf[t * block], loc, loc);
    Eigen::MatrixXd A(loc, loc), M(loc, loc);
    element_matrices(space, coeffs.at(space.mesh().triangles()[t].tag), t, A, M);
    Ae = A;
    Me = M;
  });

  // serial scatter in element order keeps the result bit-identical
  std::vector<Eigen::Triplet<double>> ta, tm;
  ta.reserve(nt * block);
  tm.reserve(nt * block);
  for (int t = 0; t < nt; t++)
  {
    const int* dofs = space.cell_dofs(t);
    for (int j = 0; j < loc; j++)
    {
      int gj = space.free_index(dofs[j]);
      if (gj < 0)
        continue;
      for (int i = 0; i < loc; i++)
      {
        int gi = space.free_index(dofs[i]);
        if (gi < 0)
          continue;
        ta.emplace_back(gi, gj, abuf[t * block + j * loc + i]);
        tm.emplace_back(gi, gj, mbuf[t * block + j * loc + i]);
      }
    }
  }

  OperatorPencil p;
  p.n = space.n_free();
  p.A.resize(p.n, p.n);
  p.M.resize(p.n, p.n);
  p.A.setFromTriplets(ta.begin(), ta.end());
  p.M.setFromTriplets(tm.begin(), tm.end());
  p.A.makeCompressed();
  p.M.makeCompressed();
  return p;
}

OperatorPencil adjoint_pencil(const OperatorPencil& p)
{
  OperatorPencil out;
  out.n = p.n;
  out.A = SpMat(p.A.transpose());
  out.M = SpMat(p.M.transpose());
  out.A.makeCompressed();
  out.M.makeCompressed();
  return out;
}

Eigen::SparseLU<SpMat>& OperatorPencil::factorization() const
{
  if (!lu_)
  {
    auto f = std::make_shared<Eigen::SparseLU<SpMat>>();
    f->compute(A);
    if (f->info() != Eigen::Success)
      throw NumericalError("solve_linear: operator factorization failed (singular matrix?)");
    lu_ = std::move(f);
  }
  return *lu_;
}

Eigen::VectorXd assemble_rhs_mass(const OperatorPencil& p, const Eigen::VectorXd& u)
{
  return p.M * u;
}

Eigen::VectorXd assemble_rhs(const FeSpace& space, const std::function<double(Point2)>& f)
{
  const Mesh& mesh = space.mesh();
  // two degrees beyond the element matrices to absorb non-polynomial loads
  const QuadRule& rule = triangle_rule(space.degree() + 1);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(space.n_free());
  FeSpace::Basis basis;
  for (int t = 0; t < mesh.n_triangles(); t++)
  {
    const double area = mesh.area(t);
    const int* dofs = space.cell_dofs(t);
    const Triangle& tri = mesh.triangles()[t];
    const Point2 p0 = mesh.point(tri.v[0]), p1 = mesh.point(tri.v[1]), p2 = mesh.point(tri.v[2]);
    for (const QuadPoint& q : rule.pts)
    {
      const double l[3] = {q.l0, q.l1, q.l2};
      space.eval_basis(t, l, false, basis);
      const Point2 x = q.l0 * p0 + q.l1 * p1 + q.l2 * p2;
      const double w = q.w * area * f(x);
      for (int i = 0; i < basis.n; i++)
      {
        const int g = space.free_index(dofs[i]);
        if (g >= 0)
          out[g] += w * basis.val[i];
      }
    }
  }
  return out;
}

Eigen::VectorXcd assemble_rhs_mass(const OperatorPencil& p, const Eigen::VectorXcd& u)
{
  Eigen::VectorXcd out(p.n);
  out.real() = p.M * u.real().eval();
  out.imag() = p.M * u.imag().eval();
  return out;
}

Eigen::VectorXd solve_linear(const OperatorPencil& p, const Eigen::VectorXd& rhs,
                             bool transpose)
{
  auto& lu = p.factorization();
  auto apply_op = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd
  { return transpose ? Eigen::VectorXd(p.A.transpose() * x) : Eigen::VectorXd(p.A * x); };
  auto solve_op = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd
  { return transpose ? Eigen::VectorXd(lu.transpose().solve(b)) : Eigen::VectorXd(lu.solve(b)); };

  Eigen::VectorXd x = solve_op(rhs);
  const double scale = std::max(rhs.norm(), 1e-300);
  if ((apply_op(x) - rhs).norm() > 1e-10 * scale)
  {
    x += solve_op(Eigen::VectorXd(rhs - apply_op(x))); // one refinement step
    if ((apply_op(x) - rhs).norm() > 1e-10 * scale)
      throw NumericalError("solve_linear: relative residual above 1e-10");
  }
  return x;
}

Eigen::VectorXcd solve_linear(const OperatorPencil& p, const Eigen::VectorXcd& rhs,
                              bool transpose)
{
  Eigen::VectorXcd x(p.n);
  x.real() = solve_linear(p, Eigen::VectorXd(rhs.real()), transpose);
  x.imag() = solve_linear(p, Eigen::VectorXd(rhs.imag()), transpose);
  return x;
}

} // namespace afem
