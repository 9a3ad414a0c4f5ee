// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/assembly.hpp"

#include <cmath>

#include <doctest.h>

#include "afem/errors.hpp"
#include "afem/quadrature.hpp"

using namespace afem;

namespace
{

CoefficientField kellogg_coeffs()
{
  CoefficientField f;
  ElemCoeff strong{{10.0, 0.0, 10.0}, {2.0, 2.0}, 0.0};
  ElemCoeff weak{{1.0, 0.0, 1.0}, {2.0, 2.0}, 0.0};
  f.set(1, strong);
  f.set(3, strong);
  f.set(2, weak);
  f.set(4, weak);
  return f;
}

FeSpace kellogg_space(int degree, int rounds = 2)
{
  Mesh m = Mesh::kellogg();
  for (int i = 0; i < rounds; i++)
    m = m.uniform_refine();
  return FeSpace(m, degree);
}

} // namespace

TEST_CASE("P1 element mass matrix has the exact closed form")
{
  std::vector<Point2> pts = {{0.2, 0.1}, {1.3, 0.4}, {0.5, 1.7}};
  Mesh single(pts, {Triangle{{0, 1, 2}, 0, 0}});
  FeSpace s(single, 1);
  Eigen::MatrixXd Ae, Me;
  element_matrices(s, ElemCoeff{}, 0, Ae, Me);
  double a = single.area(0);
  Eigen::Matrix3d ref;
  ref << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  ref *= a / 12.0;
  CHECK((Me - ref).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("P1 stiffness on the unit right triangle")
{
  std::vector<Point2> pts = {{0, 0}, {1, 0}, {0, 1}};
  Mesh single(pts, {Triangle{{0, 1, 2}, 0, 0}});
  FeSpace s(single, 1);
  Eigen::MatrixXd Ae, Me;
  element_matrices(s, ElemCoeff{}, 0, Ae, Me);
  Eigen::Matrix3d ref;
  ref << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  CHECK((Ae - ref).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("element matrices are integrated exactly")
{
  // recomputing with a much stronger rule must not change anything
  FeSpace s = kellogg_space(3, 1);
  ElemCoeff c{{3.0, 0.5, 2.0}, {1.5, -0.5}, 0.7};
  const QuadRule& strong = triangle_rule_exact(14);
  FeSpace::Basis basis;
  for (int t : {0, 7, 13})
  {
    Eigen::MatrixXd Ae, Me;
    element_matrices(s, c, t, Ae, Me);
    int loc = s.local_size();
    Eigen::MatrixXd Ar = Eigen::MatrixXd::Zero(loc, loc);
    Eigen::MatrixXd Mr = Eigen::MatrixXd::Zero(loc, loc);
    double area = s.mesh().area(t);
    for (const QuadPoint& q : strong.pts)
    {
      double l[3] = {q.l0, q.l1, q.l2};
      s.eval_basis(t, l, false, basis);
      for (int j = 0; j < loc; j++)
        for (int i = 0; i < loc; i++)
        {
          Ar(i, j) += q.w * area *
                      (dot(apply(c.A, basis.grad[j]), basis.grad[i]) +
                       (dot(c.b, basis.grad[j]) + c.c * basis.val[j]) * basis.val[i]);
          Mr(i, j) += q.w * area * basis.val[j] * basis.val[i];
        }
    }
    CHECK((Ae - Ar).cwiseAbs().maxCoeff() <= 1e-13 * Ar.cwiseAbs().maxCoeff());
    CHECK((Me - Mr).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("pure diffusion gives a symmetric operator and an SPD mass matrix")
{
  for (int degree : {1, 2, 3})
  {
    FeSpace s = kellogg_space(degree, 1);
    CoefficientField f;
    ElemCoeff iso{{2.0, 0.3, 1.0}, {0.0, 0.0}, 0.5};
    for (int tag : {1, 2, 3, 4})
      f.set(tag, iso);
    OperatorPencil p = assemble_pencil(s, f);
    CHECK(p.n == s.n_free());
    Eigen::MatrixXd A(p.A), M(p.M);
    CHECK((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * A.cwiseAbs().maxCoeff());
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ea(0.5 * (A + A.transpose()));
    CHECK(ea.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("convection contributes an antisymmetric free-dof block")
{
  // with b constant and zero boundary values, integration by parts makes the
  // convection block exactly antisymmetric
  for (int degree : {1, 2})
  {
    FeSpace s = kellogg_space(degree, 1);
    CoefficientField with = kellogg_coeffs();
    CoefficientField without = kellogg_coeffs();
    ElemCoeff strong{{10.0, 0.0, 10.0}, {0.0, 0.0}, 0.0};
    ElemCoeff weak{{1.0, 0.0, 1.0}, {0.0, 0.0}, 0.0};
    without.set(1, strong);
    without.set(3, strong);
    without.set(2, weak);
    without.set(4, weak);
    Eigen::MatrixXd C = Eigen::MatrixXd(assemble_pencil(s, with).A) -
                        Eigen::MatrixXd(assemble_pencil(s, without).A);
    CHECK((C + C.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * C.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("mass right-hand side equals elementwise integration")
{
  FeSpace s = kellogg_space(2, 1);
  OperatorPencil p = assemble_pencil(s, kellogg_coeffs());
  std::function<double(Point2)> fn = [](Point2 q)
  { return (1.0 - q.x * q.x) * (1.0 - q.y * q.y) * (q.x + 0.3); };
  std::vector<double> full = interpolate(s, fn);
  Eigen::VectorXd ufree(s.n_free());
  for (int k = 0; k < s.n_free(); k++)
    ufree[k] = full[s.free_dofs()[k]];
  // zero out constrained entries so both sides represent the same function
  std::vector<double> zeroed = to_full<double>(s, ufree);

  Eigen::VectorXd rhs = assemble_rhs_mass(p, ufree);
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(s.n_free());
  const QuadRule& rule = triangle_rule(2);
  FeSpace::Basis basis;
  for (int t = 0; t < s.mesh().n_triangles(); t++)
  {
    double area = s.mesh().area(t);
    const int* dofs = s.cell_dofs(t);
    for (const QuadPoint& q : rule.pts)
    {
      double l[3] = {q.l0, q.l1, q.l2};
      s.eval_basis(t, l, false, basis);
      double val = 0.0;
      for (int i = 0; i < basis.n; i++)
        val += zeroed[dofs[i]] * basis.val[i];
      for (int i = 0; i < basis.n; i++)
      {
        int g = s.free_index(dofs[i]);
        if (g >= 0)
          ref[g] += q.w * area * val * basis.val[i];
      }
    }
  }
  CHECK((rhs - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
}

TEST_CASE("direct solves meet the residual contract, including transposed")
{
  FeSpace s = kellogg_space(2, 2);
  OperatorPencil p = assemble_pencil(s, kellogg_coeffs());
  Eigen::VectorXd xstar(s.n_free());
  for (int k = 0; k < s.n_free(); k++)
    xstar[k] = std::sin(0.7 * k + 0.2);

  Eigen::VectorXd b = p.A * xstar;
  Eigen::VectorXd x = solve_linear(p, b);
  CHECK((p.A * x - b).norm() <= 1e-10 * b.norm());
  CHECK((x - xstar).norm() <= 1e-8 * xstar.norm());

  Eigen::VectorXd bt = p.A.transpose() * xstar;
  Eigen::VectorXd xt = solve_linear(p, bt, true);
  CHECK((p.A.transpose() * xt - bt).norm() <= 1e-10 * bt.norm());

  // the transposed solve agrees with solving against the transposed pencil
  OperatorPencil padj = adjoint_pencil(p);
  Eigen::VectorXd xt2 = solve_linear(padj, bt);
  CHECK((xt - xt2).norm() <= 1e-9 * xt.norm());

  // complex right-hand side splits into two real solves
  Eigen::VectorXcd bc(s.n_free());
  bc.real() = b;
  bc.imag() = 0.5 * bt;
  Eigen::VectorXcd xc = solve_linear(p, bc);
  CHECK((xc.real() - x).norm() <= 1e-12 * x.norm());

  // repeated solves reuse the factorization and reproduce bitwise
  Eigen::VectorXd again = solve_linear(p, b);
  CHECK((again - x).norm() == 0.0);
}

TEST_CASE("assembly is deterministic")
{
  FeSpace s = kellogg_space(2, 2);
  OperatorPencil p1 = assemble_pencil(s, kellogg_coeffs());
  OperatorPencil p2 = assemble_pencil(s, kellogg_coeffs());
  CHECK(Eigen::Map<const Eigen::VectorXd>(p1.A.valuePtr(), p1.A.nonZeros()) ==
        Eigen::Map<const Eigen::VectorXd>(p2.A.valuePtr(), p2.A.nonZeros()));
  CHECK(Eigen::Map<const Eigen::VectorXd>(p1.M.valuePtr(), p1.M.nonZeros()) ==
        Eigen::Map<const Eigen::VectorXd>(p2.M.valuePtr(), p2.M.nonZeros()));
}

TEST_CASE("missing subdomain tags are reported")
{
  FeSpace s(Mesh::kellogg(), 1);
  CoefficientField partial;
  partial.set(1, ElemCoeff{});
  CHECK_THROWS_AS(assemble_pencil(s, partial), ConfigError);
}
