// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/mesh.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <utility>

#include "afem/errors.hpp"

namespace afem
{

namespace
{

using PointKey = std::array<std::uint64_t, 2>;
using TriKey = std::array<std::uint64_t, 6>;

PointKey point_key(Point2 p)
{
  return {std::bit_cast<std::uint64_t>(p.x), std::bit_cast<std::uint64_t>(p.y)};
}

TriKey tri_key(Point2 a, Point2 b, Point2 c)
{
  return {std::bit_cast<std::uint64_t>(a.x), std::bit_cast<std::uint64_t>(a.y),
          std::bit_cast<std::uint64_t>(b.x), std::bit_cast<std::uint64_t>(b.y),
          std::bit_cast<std::uint64_t>(c.x), std::bit_cast<std::uint64_t>(c.y)};
}

double signed_area2(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

void print_g17(std::ostream& os, double v)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

// Rotates the vertex list so that the refinement edge, chosen as the longest edge
// with ties broken by the lexicographically smallest vertex-index pair, becomes
// (v[1], v[2]).
Triangle with_initial_refinement_edge(const std::vector<Point2>& pts,
                                      const std::array<int, 3>& c, int tag)
{
  int best = 0;
  double best_len = -1.0;
  std::pair<int, int> best_pair{-1, -1};
  for (int i = 0; i < 3; i++)
  {
    int a = c[(i + 1) % 3], b = c[(i + 2) % 3];
    double len = norm(pts[a] - pts[b]);
    std::pair<int, int> pair{std::min(a, b), std::max(a, b)};
    if (len > best_len || (len == best_len && pair < best_pair))
    {
      best = i;
      best_len = len;
      best_pair = pair;
    }
  }
  return Triangle{{c[best], c[(best + 1) % 3], c[(best + 2) % 3]}, tag, 0};
}

Mesh make_initial(std::vector<Point2> pts, const std::vector<std::array<int, 3>>& conn,
                  const std::vector<int>& tags)
{
  std::vector<Triangle> tris;
  tris.reserve(conn.size());
  for (std::size_t t = 0; t < conn.size(); t++)
    tris.push_back(with_initial_refinement_edge(pts, conn[t], tags[t]));
  return Mesh(std::move(pts), std::move(tris));
}

} // namespace

Mesh::Mesh(std::vector<Point2> points, std::vector<Triangle> triangles)
  : points_(std::move(points)), tris_(std::move(triangles))
{
  root_points_ = points_;
  root_tris_ = tris_;
  build_edges();
}

void Mesh::build_edges()
{
  const int np = n_points();
  edges_.clear();
  tri_edges_.assign(tris_.size(), {-1, -1, -1});

  std::map<std::pair<int, int>, int> index;
  for (int t = 0; t < n_triangles(); t++)
  {
    const auto& v = tris_[t].v;
    if (v[0] == v[1] || v[1] == v[2] || v[2] == v[0])
      throw std::invalid_argument("mesh: triangle with repeated vertices");
    for (int i = 0; i < 3; i++)
    {
      int a = v[(i + 1) % 3], b = v[(i + 2) % 3];
      if (a < 0 || a >= np || b < 0 || b >= np)
        throw std::invalid_argument("mesh: vertex index out of range");
      auto key = std::minmax(a, b);
      auto [it, fresh] = index.try_emplace(key, n_edges());
      if (fresh)
        edges_.push_back(Edge{key.first, key.second, {t, -1}, false});
      else
      {
        Edge& e = edges_[it->second];
        if (e.tri[1] != -1)
          throw Error("mesh: edge shared by more than two triangles");
        e.tri[1] = t;
      }
      tri_edges_[t][i] = it->second;
    }
    if (signed_area2(points_[v[0]], points_[v[1]], points_[v[2]]) <= 0.0)
      throw std::invalid_argument("mesh: triangle not counterclockwise");
  }

  std::map<PointKey, int> coords;
  for (int v = 0; v < np; v++)
    if (!coords.emplace(point_key(points_[v]), v).second)
      throw std::invalid_argument("mesh: duplicate vertex coordinates");

  vertex_boundary_.assign(np, 0);
  for (Edge& e : edges_)
  {
    e.boundary = (e.tri[1] == -1);
    if (e.boundary)
      vertex_boundary_[e.a] = vertex_boundary_[e.b] = 1;
    // Bisection only ever creates hanging vertices at edge midpoints, so a vertex
    // sitting exactly on an edge midpoint means the closure failed.
    if (coords.count(point_key(0.5 * (points_[e.a] + points_[e.b]))))
      throw Error("mesh: hanging vertex detected");
  }
}

double Mesh::area(int t) const
{
  const auto& v = tris_[t].v;
  return 0.5 * signed_area2(points_[v[0]], points_[v[1]], points_[v[2]]);
}

double Mesh::diam(int t) const
{
  const auto& v = tris_[t].v;
  double d01 = norm(points_[v[0]] - points_[v[1]]);
  double d12 = norm(points_[v[1]] - points_[v[2]]);
  double d20 = norm(points_[v[2]] - points_[v[0]]);
  return std::max({d01, d12, d20});
}

Mesh Mesh::bisect(const std::vector<int>& marked) const
{
  std::vector<char> em(edges_.size(), 0);
  for (int t : marked)
  {
    if (t < 0 || t >= n_triangles())
      throw std::invalid_argument("bisect: triangle id out of range");
    em[tri_edges_[t][0]] = 1;
  }
  return refine_edges(std::move(em));
}

Mesh Mesh::refine_marked(const std::vector<int>& marked) const
{
  std::vector<char> em(edges_.size(), 0);
  for (int t : marked)
  {
    if (t < 0 || t >= n_triangles())
      throw std::invalid_argument("refine_marked: triangle id out of range");
    for (int i = 0; i < 3; i++)
      em[tri_edges_[t][i]] = 1;
  }
  return refine_edges(std::move(em));
}

Mesh Mesh::uniform_refine() const
{
  std::vector<int> all(tris_.size());
  for (int t = 0; t < n_triangles(); t++)
    all[t] = t;
  return refine_marked(all);
}

Mesh Mesh::refine_edges(std::vector<char> em) const
{
  // Closure: a triangle with any marked edge must have its refinement edge marked.
  // Each pass can only add marks, so the loop terminates.
  bool changed = true;
  while (changed)
  {
    changed = false;
    for (std::size_t t = 0; t < tris_.size(); t++)
    {
      const auto& te = tri_edges_[t];
      if ((em[te[0]] | em[te[1]] | em[te[2]]) && !em[te[0]])
      {
        em[te[0]] = 1;
        changed = true;
      }
    }
  }

  std::vector<Point2> pts = points_;
  std::map<std::pair<int, int>, int> mid;
  for (std::size_t e = 0; e < edges_.size(); e++)
    if (em[e])
    {
      mid.emplace(std::make_pair(edges_[e].a, edges_[e].b), static_cast<int>(pts.size()));
      pts.push_back(0.5 * (points_[edges_[e].a] + points_[edges_[e].b]));
    }

  // Child refinement edges are edges of this mesh; grandchild refinement edges end
  // in a fresh midpoint vertex, so the recursion stops after at most two levels.
  std::vector<Triangle> out;
  out.reserve(tris_.size() * 2);
  auto split = [&](auto&& self, const Triangle& t) -> void
  {
    auto key = std::minmax(t.v[1], t.v[2]);
    auto it = mid.find(key);
    if (it == mid.end())
    {
      out.push_back(t);
      return;
    }
    int m = it->second;
    self(self, Triangle{{m, t.v[0], t.v[1]}, t.tag, t.gen + 1});
    self(self, Triangle{{m, t.v[2], t.v[0]}, t.tag, t.gen + 1});
  };
  for (const Triangle& t : tris_)
    split(split, t);

  Mesh r;
  r.points_ = std::move(pts);
  r.tris_ = std::move(out);
  r.root_points_ = root_points_;
  r.root_tris_ = root_tris_;
  r.build_edges();
  return r;
}

Mesh Mesh::make(const std::string& name)
{
  if (name == "unit_square")
    return unit_square();
  if (name == "unit_square_2x2")
    return unit_square_2x2();
  if (name == "kellogg")
    return kellogg();
  throw ConfigError("unknown mesh geometry '" + name +
                    "' (known: unit_square, unit_square_2x2, kellogg)");
}

Mesh Mesh::unit_square()
{
  std::vector<Point2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  return make_initial(std::move(pts), {{0, 1, 2}, {0, 2, 3}}, {0, 0});
}

Mesh Mesh::unit_square_2x2()
{
  std::vector<Point2> pts;
  for (int j = 0; j < 3; j++)
    for (int i = 0; i < 3; i++)
      pts.push_back({0.5 * i, 0.5 * j});
  std::vector<std::array<int, 3>> conn;
  std::vector<int> tags;
  for (int j = 0; j < 2; j++)
    for (int i = 0; i < 2; i++)
    {
      int ll = 3 * j + i, lr = ll + 1, ul = ll + 3, ur = ll + 4;
      conn.push_back({ll, lr, ur});
      conn.push_back({ll, ur, ul});
      tags.push_back(0);
      tags.push_back(0);
    }
  return make_initial(std::move(pts), conn, tags);
}

Mesh Mesh::kellogg()
{
  // (-1,1)^2 split into four unit quadrants; each quadrant is split by its diagonal
  // through the origin, so all eight right triangles meet at the interface corner.
  // Tags number the quadrants counterclockwise starting from the positive one.
  std::vector<Point2> pts;
  for (int j = 0; j < 3; j++)
    for (int i = 0; i < 3; i++)
      pts.push_back({static_cast<double>(i - 1), static_cast<double>(j - 1)});
  std::vector<std::array<int, 3>> conn = {
      {4, 5, 8}, {4, 8, 7}, // quadrant 1: (0,1)^2
      {4, 7, 6}, {4, 6, 3}, // quadrant 2: (-1,0)x(0,1)
      {4, 3, 0}, {4, 0, 1}, // quadrant 3: (-1,0)^2
      {4, 1, 2}, {4, 2, 5}, // quadrant 4: (0,1)x(-1,0)
  };
  std::vector<int> tags = {1, 1, 2, 2, 3, 3, 4, 4};
  return make_initial(std::move(pts), conn, tags);
}

double shape_regularity(const Mesh& mesh)
{
  double worst = 0.0;
  for (int t = 0; t < mesh.n_triangles(); t++)
    worst = std::max(worst, mesh.diam(t) / std::sqrt(mesh.area(t)));
  return worst;
}

double min_angle(const Mesh& mesh)
{
  double best = 4.0;
  for (int t = 0; t < mesh.n_triangles(); t++)
  {
    const auto& v = mesh.triangles()[t].v;
    for (int i = 0; i < 3; i++)
    {
      Point2 u = mesh.point(v[(i + 1) % 3]) - mesh.point(v[i]);
      Point2 w = mesh.point(v[(i + 2) % 3]) - mesh.point(v[i]);
      double c = dot(u, w) / (norm(u) * norm(w));
      best = std::min(best, std::acos(std::clamp(c, -1.0, 1.0)));
    }
  }
  return best;
}

Mesh overlay(const Mesh& a, const Mesh& b)
{
  if (a.root_points().size() != b.root_points().size() ||
      a.root_triangles().size() != b.root_triangles().size())
    throw std::invalid_argument("overlay: meshes have different initial meshes");
  for (std::size_t v = 0; v < a.root_points().size(); v++)
    if (point_key(a.root_points()[v]) != point_key(b.root_points()[v]))
      throw std::invalid_argument("overlay: meshes have different initial meshes");
  for (std::size_t t = 0; t < a.root_triangles().size(); t++)
  {
    const Triangle& ta = a.root_triangles()[t];
    const Triangle& tb = b.root_triangles()[t];
    if (ta.v != tb.v || ta.tag != tb.tag)
      throw std::invalid_argument("overlay: meshes have different initial meshes");
  }

  auto leaves = [](const Mesh& m)
  {
    std::set<TriKey> s;
    for (const Triangle& t : m.triangles())
      s.insert(tri_key(m.point(t.v[0]), m.point(t.v[1]), m.point(t.v[2])));
    return s;
  };
  const std::set<TriKey> la = leaves(a), lb = leaves(b);

  std::vector<Point2> pts = a.root_points();
  std::map<PointKey, int> coords;
  for (std::size_t v = 0; v < pts.size(); v++)
    coords.emplace(point_key(pts[v]), static_cast<int>(v));
  auto vertex_id = [&](Point2 p)
  {
    auto [it, fresh] = coords.try_emplace(point_key(p), static_cast<int>(pts.size()));
    if (fresh)
      pts.push_back(p);
    return it->second;
  };

  std::vector<Triangle> out;
  // A node is emitted once the walk has reached a leaf of both meshes on its branch;
  // descending only until then yields the smallest common refinement.
  auto walk = [&](auto&& self, Point2 p0, Point2 p1, Point2 p2, int tag, int gen,
                  bool ca, bool cb, int depth) -> void
  {
    if (depth > 64)
      throw Error("overlay: runaway refinement walk");
    TriKey k = tri_key(p0, p1, p2);
    ca = ca || la.count(k);
    cb = cb || lb.count(k);
    if (ca && cb)
    {
      out.push_back(Triangle{{vertex_id(p0), vertex_id(p1), vertex_id(p2)}, tag, gen});
      return;
    }
    Point2 m = 0.5 * (p1 + p2);
    self(self, m, p0, p1, tag, gen + 1, ca, cb, depth + 1);
    self(self, m, p2, p0, tag, gen + 1, ca, cb, depth + 1);
  };
  for (const Triangle& t : a.root_triangles())
    walk(walk, a.root_points()[t.v[0]], a.root_points()[t.v[1]], a.root_points()[t.v[2]],
         t.tag, 0, false, false, 0);

  Mesh r;
  r.points_ = std::move(pts);
  r.tris_ = std::move(out);
  r.root_points_ = a.root_points();
  r.root_tris_ = a.root_triangles();
  r.build_edges();
  return r;
}

void write_vtk(const Mesh& mesh, std::ostream& os)
{
  os << "# vtk DataFile Version 3.0\n";
  os << "afem mesh\n";
  os << "ASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << mesh.n_points() << " double\n";
  for (const Point2& p : mesh.points())
  {
    print_g17(os, p.x);
    os << ' ';
    print_g17(os, p.y);
    os << " 0\n";
  }
  os << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const Triangle& t : mesh.triangles())
    os << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  os << "CELL_TYPES " << mesh.n_triangles() << '\n';
  for (int t = 0; t < mesh.n_triangles(); t++)
    os << "5\n";
  os << "CELL_DATA " << mesh.n_triangles() << '\n';
  os << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
  for (const Triangle& t : mesh.triangles())
    os << t.tag << '\n';
  os << "SCALARS generation int 1\nLOOKUP_TABLE default\n";
  for (const Triangle& t : mesh.triangles())
    os << t.gen << '\n';
}

void write_text(const Mesh& mesh, std::ostream& os)
{
  os << mesh.n_points() << ' ' << mesh.n_triangles() << '\n';
  for (const Point2& p : mesh.points())
  {
    print_g17(os, p.x);
    os << ' ';
    print_g17(os, p.y);
    os << '\n';
  }
  for (const Triangle& t : mesh.triangles())
    os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.tag << ' ' << t.gen << '\n';
}

} // namespace afem
