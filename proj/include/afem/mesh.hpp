// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_MESH_HPP
#define AFEM_MESH_HPP

#include <array>
#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

namespace afem
{

struct Point2
{
  double x = 0.0, y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

struct Triangle
{
  // Vertices in counterclockwise order. v[0] is the newest vertex; the refinement
  // edge is (v[1], v[2]).
  std::array<int, 3> v = {-1, -1, -1};
  int tag = 0; // subdomain tag, inherited under refinement
  int gen = 0; // bisections separating this triangle from its initial ancestor
};

struct Edge
{
  int a = -1, b = -1;             // endpoint vertices, a < b
  std::array<int, 2> tri = {-1, -1}; // adjacent triangles; tri[1] = -1 on the boundary
  bool boundary = false;
};

// Conforming triangulation refined by newest-vertex bisection. Meshes are immutable;
// refinement returns a new mesh. Each mesh keeps a copy of the initial mesh it descends
// from so that two refinements of the same initial mesh can be overlaid.
class Mesh
{
public:
  Mesh() = default;
  Mesh(std::vector<Point2> points, std::vector<Triangle> triangles);

  // Named initial meshes: "unit_square", "unit_square_2x2", "kellogg".
  static Mesh make(const std::string& name);
  static Mesh unit_square();
  static Mesh unit_square_2x2();
  static Mesh kellogg();

  int n_points() const { return static_cast<int>(points_.size()); }
  int n_triangles() const { return static_cast<int>(tris_.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Point2>& points() const { return points_; }
  const std::vector<Triangle>& triangles() const { return tris_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Point2 point(int v) const { return points_[v]; }

  // Edge ids per triangle; local edge i connects v[(i+1)%3] and v[(i+2)%3], so local
  // edge 0 is the refinement edge.
  const std::array<int, 3>& tri_edges(int t) const { return tri_edges_[t]; }
  bool vertex_on_boundary(int v) const { return vertex_boundary_[v] != 0; }

  double area(int t) const;
  double diam(int t) const;

  // One bisection of each marked triangle at the midpoint of its refinement edge,
  // plus conformity closure. Ids out of range throw std::invalid_argument.
  Mesh bisect(const std::vector<int>& marked) const;
  // All three edges of each marked triangle are bisected (four children similar to
  // the parent), plus conformity closure. This is the refinement step used by the
  // adaptive loop; one call on all triangles halves the mesh size.
  Mesh refine_marked(const std::vector<int>& marked) const;
  Mesh uniform_refine() const;

  const std::vector<Point2>& root_points() const { return root_points_; }
  const std::vector<Triangle>& root_triangles() const { return root_tris_; }

private:
  friend Mesh overlay(const Mesh& a, const Mesh& b);

  Mesh refine_edges(std::vector<char> edge_marked) const;
  void build_edges();

  std::vector<Point2> points_;
  std::vector<Triangle> tris_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<char> vertex_boundary_;
  std::vector<Point2> root_points_;
  std::vector<Triangle> root_tris_;
};

// max over T of diam(T) / sqrt(area(T)); 2 for right isosceles triangles
double shape_regularity(const Mesh& mesh);
// smallest interior angle over all triangles, in radians
double min_angle(const Mesh& mesh);

// Smallest common refinement of two meshes descending from the same initial mesh.
// Throws std::invalid_argument when the initial meshes differ.
Mesh overlay(const Mesh& a, const Mesh& b);

void write_vtk(const Mesh& mesh, std::ostream& os);  // legacy ASCII, cell type 5
void write_text(const Mesh& mesh, std::ostream& os); // header line, coordinates, connectivity

} // namespace afem

#endif // AFEM_MESH_HPP
