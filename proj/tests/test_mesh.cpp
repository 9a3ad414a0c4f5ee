// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <doctest.h>

#include "afem/errors.hpp"

using namespace afem;

namespace
{

// Canonical triangle identity by vertex coordinates, for mesh comparisons.
std::multiset<std::string> triangle_keys(const Mesh& m)
{
  std::multiset<std::string> keys;
  for (const Triangle& t : m.triangles())
  {
    std::array<std::pair<double, double>, 3> c;
    for (int i = 0; i < 3; i++)
      c[i] = {m.point(t.v[i]).x, m.point(t.v[i]).y};
    std::sort(c.begin(), c.end());
    std::ostringstream os;
    os.precision(17);
    for (auto& p : c)
      os << p.first << ',' << p.second << ';';
    keys.insert(os.str());
  }
  return keys;
}

int euler_characteristic(const Mesh& m)
{
  return m.n_points() - m.n_edges() + m.n_triangles();
}

double total_area(const Mesh& m)
{
  double s = 0.0;
  for (int t = 0; t < m.n_triangles(); t++)
    s += m.area(t);
  return s;
}

std::vector<int> random_marks(const Mesh& m, std::mt19937& gen)
{
  std::vector<int> out;
  for (int t = 0; t < m.n_triangles(); t++)
    if (gen() % 4 == 0)
      out.push_back(t);
  if (out.empty())
    out.push_back(static_cast<int>(gen() % m.n_triangles()));
  return out;
}

} // namespace

TEST_CASE("initial meshes have the documented counts")
{
  Mesh sq = Mesh::unit_square();
  CHECK(sq.n_triangles() == 2);
  CHECK(sq.n_points() == 4);
  CHECK(sq.n_edges() == 5);
  int interior = 0;
  for (const Edge& e : sq.edges())
    if (!e.boundary)
      interior++;
  CHECK(interior == 1);
  CHECK(total_area(sq) == doctest::Approx(1.0).epsilon(1e-14));

  Mesh grid = Mesh::unit_square_2x2();
  CHECK(grid.n_triangles() == 8);
  CHECK(grid.n_points() == 9);
  CHECK(total_area(grid) == doctest::Approx(1.0).epsilon(1e-14));

  Mesh k = Mesh::kellogg();
  CHECK(k.n_triangles() == 8);
  CHECK(k.n_points() == 9);
  CHECK(k.n_edges() == 16);
  CHECK(total_area(k) == doctest::Approx(4.0).epsilon(1e-14));
  // quadrant tags: the triangle containing a probe point carries the quadrant tag
  for (int t = 0; t < k.n_triangles(); t++)
  {
    const Triangle& tri = k.triangles()[t];
    Point2 c = (1.0 / 3.0) * (k.point(tri.v[0]) + k.point(tri.v[1]) + k.point(tri.v[2]));
    int expect = c.x > 0 ? (c.y > 0 ? 1 : 4) : (c.y > 0 ? 2 : 3);
    CHECK(tri.tag == expect);
    CHECK(tri.gen == 0);
  }
}

TEST_CASE("initial refinement edge is the longest edge")
{
  Mesh k = Mesh::kellogg();
  for (const Triangle& t : k.triangles())
  {
    double ref = norm(k.point(t.v[1]) - k.point(t.v[2]));
    double e1 = norm(k.point(t.v[2]) - k.point(t.v[0]));
    double e2 = norm(k.point(t.v[0]) - k.point(t.v[1]));
    CHECK(ref >= e1);
    CHECK(ref >= e2);
    CHECK(ref == doctest::Approx(std::sqrt(2.0)));
  }
}

TEST_CASE("bisecting one unit-square triangle splits both at the shared edge")
{
  Mesh sq = Mesh::unit_square();
  Mesh r = sq.bisect({0});
  CHECK(r.n_triangles() == 4);
  CHECK(r.n_points() == 5);
  // the new vertex is the diagonal midpoint
  CHECK(r.point(4).x == doctest::Approx(0.5));
  CHECK(r.point(4).y == doctest::Approx(0.5));
  for (const Triangle& t : r.triangles())
  {
    CHECK(t.gen == 1);
    CHECK(t.v[0] == 4); // children carry the midpoint as their newest vertex
  }
  CHECK(total_area(r) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("child connectivity follows the bisection rule")
{
  // Parent (v0,v1,v2); children must be (m,v0,v1) and (m,v2,v0).
  std::vector<Point2> pts = {{0, 0}, {2, 0}, {0, 2}};
  Mesh single(pts, {Triangle{{0, 1, 2}, 7, 0}});
  Mesh r = single.bisect({0});
  REQUIRE(r.n_triangles() == 2);
  const Triangle& c0 = r.triangles()[0];
  const Triangle& c1 = r.triangles()[1];
  CHECK(c0.v == std::array<int, 3>{3, 0, 1});
  CHECK(c1.v == std::array<int, 3>{3, 2, 0});
  CHECK(r.point(3).x == doctest::Approx(1.0));
  CHECK(r.point(3).y == doctest::Approx(1.0));
  CHECK(c0.tag == 7);
  CHECK(c1.tag == 7);
  CHECK(c0.gen == 1);
}

TEST_CASE("closure keeps the mesh conforming and terminates")
{
  Mesh m = Mesh::kellogg();
  std::mt19937 gen(12345);
  for (int round = 0; round < 8; round++)
  {
    auto marks = random_marks(m, gen);
    Mesh r = m.bisect(marks); // construction validates conformity
    CHECK(r.n_triangles() >= m.n_triangles() + static_cast<int>(marks.size()));
    CHECK(euler_characteristic(r) == 1);
    CHECK(total_area(r) == doctest::Approx(4.0).epsilon(1e-12));
    // vertex nesting: the parent coordinates are a prefix of the child's
    for (int v = 0; v < m.n_points(); v++)
    {
      CHECK(r.point(v).x == m.point(v).x);
      CHECK(r.point(v).y == m.point(v).y);
    }
    m = r;
  }
}

TEST_CASE("nonconforming input is rejected")
{
  std::vector<Point2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
  std::vector<Triangle> tris = {Triangle{{0, 1, 4}, 0, 0}, Triangle{{1, 2, 4}, 0, 0},
                                Triangle{{0, 2, 3}, 0, 0}};
  // the left half is unsplit, so vertex 4 hangs on its diagonal edge; the CCW check
  // must not fire first
  CHECK_THROWS_AS(Mesh(pts, tris), Error);
}

TEST_CASE("orientation and duplicate vertices are rejected")
{
  std::vector<Point2> pts = {{0, 0}, {1, 0}, {0, 1}};
  CHECK_THROWS_AS(Mesh(pts, {Triangle{{0, 2, 1}, 0, 0}}), std::invalid_argument);
  std::vector<Point2> dup = {{0, 0}, {1, 0}, {0, 1}, {1, 0}};
  CHECK_THROWS_AS(Mesh(dup, {Triangle{{0, 1, 2}, 0, 0}, Triangle{{3, 2, 1}, 0, 0}}),
                  std::invalid_argument);
}

TEST_CASE("uniform refinement quarters every triangle")
{
  Mesh k = Mesh::kellogg();
  Mesh r = k.uniform_refine();
  CHECK(r.n_triangles() == 4 * k.n_triangles());
  CHECK(euler_characteristic(r) == 1);
  for (const Triangle& t : r.triangles())
    CHECK(t.gen == 2);
  // the longest edge halves
  double dk = 0, dr = 0;
  for (int t = 0; t < k.n_triangles(); t++)
    dk = std::max(dk, k.diam(t));
  for (int t = 0; t < r.n_triangles(); t++)
    dr = std::max(dr, r.diam(t));
  CHECK(dr == doctest::Approx(0.5 * dk));
  // tags survive
  for (const Triangle& t : r.triangles())
  {
    Point2 c = (1.0 / 3.0) * (r.point(t.v[0]) + r.point(t.v[1]) + r.point(t.v[2]));
    int expect = c.x > 0 ? (c.y > 0 ? 1 : 4) : (c.y > 0 ? 2 : 3);
    CHECK(t.tag == expect);
  }
}

TEST_CASE("bisecting everything doubles the triangle count")
{
  Mesh k = Mesh::kellogg();
  std::vector<int> all;
  for (int t = 0; t < k.n_triangles(); t++)
    all.push_back(t);
  Mesh r = k.bisect(all);
  CHECK(r.n_triangles() == 2 * k.n_triangles());
}

TEST_CASE("shape regularity values")
{
  // right isosceles: diam/sqrt(area) = sqrt(2)*L / sqrt(L^2/2) = 2
  CHECK(shape_regularity(Mesh::unit_square()) == doctest::Approx(2.0).epsilon(1e-14));
  // equilateral: 1 / sqrt(sqrt(3)/4) = 2/3^(1/4)
  std::vector<Point2> pts = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}};
  Mesh eq(pts, {Triangle{{0, 1, 2}, 0, 0}});
  CHECK(shape_regularity(eq) == doctest::Approx(1.5196713713031853).epsilon(1e-12));
  // newest-vertex bisection of right isosceles meshes stays in one similarity class
  Mesh m = Mesh::kellogg();
  std::mt19937 gen(99);
  for (int round = 0; round < 6; round++)
    m = m.bisect(random_marks(m, gen));
  CHECK(shape_regularity(m) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("minimum angle never degrades below the uniform bound")
{
  Mesh base = Mesh::kellogg();
  double bound = min_angle(base.uniform_refine().uniform_refine());
  Mesh m = base;
  std::mt19937 gen(2023);
  for (int round = 0; round < 10; round++)
  {
    m = (round % 2 == 0) ? m.bisect(random_marks(m, gen)) : m.refine_marked(random_marks(m, gen));
    CHECK(min_angle(m) >= bound - 1e-12);
  }
}

TEST_CASE("overlay produces the smallest common refinement")
{
  Mesh root = Mesh::unit_square();
  Mesh a = root.bisect({0});
  a = a.bisect({0, 1});
  Mesh b = root.bisect({1});
  Mesh ov = overlay(a, b);

  CHECK(euler_characteristic(ov) == 1);
  CHECK(total_area(ov) == doctest::Approx(1.0).epsilon(1e-14));
  // cardinality bound for the common refinement
  int nr = root.n_triangles();
  CHECK(ov.n_triangles() - nr <= (a.n_triangles() - nr) + (b.n_triangles() - nr));
  // the overlay refines both inputs: every input leaf is a union of overlay leaves
  CHECK(ov.n_triangles() >= a.n_triangles());
  CHECK(ov.n_triangles() >= b.n_triangles());

  // idempotence
  CHECK(triangle_keys(overlay(a, a)) == triangle_keys(a));
  // symmetry up to triangle identity
  CHECK(triangle_keys(overlay(b, a)) == triangle_keys(ov));
  // overlays from different initial meshes are rejected
  CHECK_THROWS_AS(overlay(a, Mesh::kellogg()), std::invalid_argument);
}

TEST_CASE("overlay of nested meshes returns the finer one")
{
  Mesh root = Mesh::kellogg();
  std::mt19937 gen(7);
  Mesh fine = root;
  for (int i = 0; i < 3; i++)
    fine = fine.bisect(random_marks(fine, gen));
  CHECK(triangle_keys(overlay(root, fine)) == triangle_keys(fine));
  CHECK(triangle_keys(overlay(fine, root)) == triangle_keys(fine));
}

TEST_CASE("text export round trip of counts and connectivity")
{
  Mesh k = Mesh::kellogg().uniform_refine();
  std::ostringstream os;
  write_text(k, os);
  std::istringstream is(os.str());
  int nv = 0, nt = 0;
  is >> nv >> nt;
  CHECK(nv == k.n_points());
  CHECK(nt == k.n_triangles());
  for (int v = 0; v < nv; v++)
  {
    double x, y;
    is >> x >> y;
    CHECK(x == k.point(v).x);
    CHECK(y == k.point(v).y);
  }
  for (int t = 0; t < nt; t++)
  {
    int a, b, c, tag, gen;
    is >> a >> b >> c >> tag >> gen;
    CHECK(std::array<int, 3>{a, b, c} == k.triangles()[t].v);
    CHECK(tag == k.triangles()[t].tag);
    CHECK(gen == k.triangles()[t].gen);
  }
}

TEST_CASE("vtk export structure")
{
  Mesh sq = Mesh::unit_square();
  std::ostringstream os;
  write_vtk(sq, os);
  std::string s = os.str();
  CHECK(s.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(s.find("POINTS 4 double") != std::string::npos);
  CHECK(s.find("CELLS 2 8") != std::string::npos);
  CHECK(s.find("CELL_TYPES 2") != std::string::npos);
  CHECK(s.find("\n5\n") != std::string::npos);
}

TEST_CASE("unknown geometry names are rejected")
{
  CHECK_THROWS_AS(Mesh::make("sphere"), ConfigError);
  CHECK(Mesh::make("kellogg").n_triangles() == 8);
}
