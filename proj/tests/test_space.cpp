// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/space.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

using namespace afem;

namespace
{

Mesh test_mesh()
{
  // mixed-orientation mesh: one uniform round plus a local bisection
  Mesh m = Mesh::kellogg().uniform_refine();
  return m.bisect({0, 5, 11});
}

const std::vector<std::array<double, 3>> kProbes = {
    {0.2, 0.3, 0.5}, {0.6, 0.1, 0.3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.05, 0.9, 0.05}};

struct Mono
{
  int a, b;
};

std::vector<Mono> monomials_up_to(int p)
{
  std::vector<Mono> out;
  for (int d = 0; d <= p; d++)
    for (int a = d; a >= 0; a--)
      out.push_back({a, d - a});
  return out;
}

double mono_val(Mono m, Point2 p) { return std::pow(p.x, m.a) * std::pow(p.y, m.b); }

double mono_dx(Mono m, Point2 p)
{
  return m.a == 0 ? 0.0 : m.a * std::pow(p.x, m.a - 1) * std::pow(p.y, m.b);
}

double mono_dy(Mono m, Point2 p)
{
  return m.b == 0 ? 0.0 : m.b * std::pow(p.x, m.a) * std::pow(p.y, m.b - 1);
}

double mono_dxx(Mono m, Point2 p)
{
  return m.a < 2 ? 0.0 : m.a * (m.a - 1) * std::pow(p.x, m.a - 2) * std::pow(p.y, m.b);
}

double mono_dxy(Mono m, Point2 p)
{
  return (m.a < 1 || m.b < 1) ? 0.0
                              : m.a * m.b * std::pow(p.x, m.a - 1) * std::pow(p.y, m.b - 1);
}

double mono_dyy(Mono m, Point2 p)
{
  return m.b < 2 ? 0.0 : m.b * (m.b - 1) * std::pow(p.x, m.a) * std::pow(p.y, m.b - 2);
}

Point2 bary_to_point(const Mesh& mesh, int t, const double l[3])
{
  const auto& v = mesh.triangles()[t].v;
  return l[0] * mesh.point(v[0]) + l[1] * mesh.point(v[1]) + l[2] * mesh.point(v[2]);
}

} // namespace

TEST_CASE("dof counts by degree")
{
  Mesh m = test_mesh();
  int V = m.n_points(), E = m.n_edges(), T = m.n_triangles();
  CHECK(FeSpace(m, 1).n_dofs() == V);
  CHECK(FeSpace(m, 2).n_dofs() == V + E);
  CHECK(FeSpace(m, 3).n_dofs() == V + 2 * E + T);
  CHECK(FeSpace(m, 1).local_size() == 3);
  CHECK(FeSpace(m, 2).local_size() == 6);
  CHECK(FeSpace(m, 3).local_size() == 10);
  CHECK_THROWS(FeSpace(m, 0));
  CHECK_THROWS(FeSpace(m, 4));
}

TEST_CASE("boundary dofs are constrained, interior dofs are free")
{
  // on the coarse four-quadrant mesh the origin is the only interior vertex
  Mesh k = Mesh::kellogg();
  FeSpace p1(k, 1);
  CHECK(p1.n_free() == 1);
  CHECK(p1.free_dofs()[0] == 4);

  for (int degree : {1, 2, 3})
  {
    FeSpace s(test_mesh(), degree);
    int free = 0;
    for (int d = 0; d < s.n_dofs(); d++)
    {
      Point2 p = s.dof_point(d);
      bool on_boundary = std::abs(std::abs(p.x) - 1.0) < 1e-14 || std::abs(std::abs(p.y) - 1.0) < 1e-14;
      CHECK(s.is_dirichlet(d) == on_boundary);
      if (!s.is_dirichlet(d))
      {
        CHECK(s.free_index(d) == free);
        CHECK(s.free_dofs()[free] == d);
        free++;
      }
      else
        CHECK(s.free_index(d) == -1);
    }
    CHECK(free == s.n_free());
  }
}

TEST_CASE("partition of unity and vanishing gradient sum")
{
  Mesh m = test_mesh();
  for (int degree : {1, 2, 3})
  {
    FeSpace s(m, degree);
    FeSpace::Basis basis;
    for (int t = 0; t < m.n_triangles(); t += 3)
      for (const auto& l : kProbes)
      {
        s.eval_basis(t, l.data(), true, basis);
        double sum = 0.0;
        Point2 gsum{0, 0};
        Sym2 hsum{};
        for (int i = 0; i < basis.n; i++)
        {
          sum += basis.val[i];
          gsum = gsum + basis.grad[i];
          hsum.xx += basis.hess[i].xx;
          hsum.xy += basis.hess[i].xy;
          hsum.yy += basis.hess[i].yy;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(gsum.x) <= 1e-12);
        CHECK(std::abs(gsum.y) <= 1e-12);
        CHECK(std::abs(hsum.xx) <= 1e-11);
        CHECK(std::abs(hsum.xy) <= 1e-11);
        CHECK(std::abs(hsum.yy) <= 1e-11);
      }
  }
}

TEST_CASE("basis functions are nodal")
{
  Mesh m = test_mesh();
  for (int degree : {1, 2, 3})
  {
    FeSpace s(m, degree);
    FeSpace::Basis basis;
    std::vector<std::array<double, 3>> nodes;
    for (int t = 0; t < m.n_triangles(); t += 5)
    {
      s.local_nodes(t, nodes);
      for (int j = 0; j < static_cast<int>(nodes.size()); j++)
      {
        s.eval_basis(t, nodes[j].data(), false, basis);
        for (int i = 0; i < basis.n; i++)
          CHECK(basis.val[i] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        // the local node must coincide with the global dof point
        Point2 p = bary_to_point(m, t, nodes[j].data());
        Point2 q = s.dof_point(s.cell_dofs(t)[j]);
        CHECK(std::abs(p.x - q.x) <= 1e-14);
        CHECK(std::abs(p.y - q.y) <= 1e-14);
      }
    }
  }
}

TEST_CASE("interpolation reproduces polynomials with derivatives")
{
  Mesh m = test_mesh();
  for (int degree : {1, 2, 3})
  {
    FeSpace s(m, degree);
    for (Mono mono : monomials_up_to(degree))
    {
      std::function<double(Point2)> f = [mono](Point2 p) { return mono_val(mono, p); };
      std::vector<double> coeff = interpolate(s, f);
      for (int t = 0; t < m.n_triangles(); t += 4)
        for (const auto& l : kProbes)
        {
          Point2 p = bary_to_point(m, t, l.data());
          FieldValue<double> fv = eval_field(s, coeff, t, l.data(), true);
          CHECK(std::abs(fv.val - mono_val(mono, p)) <= 1e-13);
          CHECK(std::abs(fv.dx - mono_dx(mono, p)) <= 1e-12);
          CHECK(std::abs(fv.dy - mono_dy(mono, p)) <= 1e-12);
          CHECK(std::abs(fv.hxx - mono_dxx(mono, p)) <= 1e-11);
          CHECK(std::abs(fv.hxy - mono_dxy(mono, p)) <= 1e-11);
          CHECK(std::abs(fv.hyy - mono_dyy(mono, p)) <= 1e-11);
        }
    }
  }
}

TEST_CASE("traces agree across interior edges")
{
  Mesh m = test_mesh();
  for (int degree : {1, 2, 3})
  {
    FeSpace s(m, degree);
    // a wiggly nodal field with no special structure
    std::function<double(Point2)> f = [](Point2 p)
    { return std::sin(3.0 * p.x) * std::cos(2.0 * p.y) + p.x * p.y; };
    std::vector<double> coeff = interpolate(s, f);
    for (int e = 0; e < m.n_edges(); e++)
    {
      const Edge& edge = m.edges()[e];
      if (edge.boundary)
        continue;
      for (double t01 : {0.17, 0.5, 0.83})
      {
        double vals[2];
        for (int side = 0; side < 2; side++)
        {
          int t = edge.tri[side];
          const auto& v = m.triangles()[t].v;
          double l[3] = {0, 0, 0};
          for (int i = 0; i < 3; i++)
          {
            if (v[i] == edge.a)
              l[i] = 1.0 - t01;
            if (v[i] == edge.b)
              l[i] = t01;
          }
          vals[side] = eval_field(s, coeff, t, l, false).val;
        }
        CHECK(std::abs(vals[0] - vals[1]) <= 1e-13);
      }
    }
  }
}

TEST_CASE("complex coefficient fields evaluate with complex arithmetic")
{
  using C = std::complex<double>;
  Mesh m = Mesh::kellogg();
  FeSpace s(m, 2);
  std::function<C(Point2)> f = [](Point2 p) { return C(p.x * p.x, p.y); };
  std::vector<C> coeff = interpolate(s, f);
  double l[3] = {0.25, 0.5, 0.25};
  Point2 p = bary_to_point(m, 0, l);
  FieldValue<C> fv = eval_field(s, coeff, 0, l, true);
  CHECK(std::abs(fv.val - C(p.x * p.x, p.y)) <= 1e-13);
  CHECK(std::abs(fv.dx - C(2.0 * p.x, 0.0)) <= 1e-12);
  CHECK(std::abs(fv.dy - C(0.0, 1.0)) <= 1e-12);
  CHECK(std::abs(fv.hxx - C(2.0, 0.0)) <= 1e-11);
}

TEST_CASE("free vector expansion places zeros on the boundary")
{
  FeSpace s(Mesh::kellogg(), 2);
  std::vector<double> free(s.n_free());
  for (int k = 0; k < s.n_free(); k++)
    free[k] = 1.0 + k;
  std::vector<double> full = to_full<double>(s, free);
  for (int d = 0; d < s.n_dofs(); d++)
    CHECK(full[d] == (s.is_dirichlet(d) ? 0.0 : 1.0 + s.free_index(d)));
}
