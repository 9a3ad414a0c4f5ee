// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_SPACE_HPP
#define AFEM_SPACE_HPP

#include <complex>
#include <functional>
#include <vector>

#include "afem/mesh.hpp"

namespace afem
{

struct Sym2
{
  double xx = 0.0, xy = 0.0, yy = 0.0;
};

inline Point2 apply(const Sym2& m, Point2 v)
{
  return {m.xx * v.x + m.xy * v.y, m.xy * v.x + m.yy * v.y};
}

// Continuous Lagrange space of degree 1, 2 or 3 with homogeneous Dirichlet
// conditions on the whole boundary and equispaced nodes.
//
// Global dof order: one dof per vertex (vertex id), then degree-1 dofs per edge
// counted from the lower-numbered endpoint (edge id), then one dof per triangle
// for degree 3. Local dof order inside a cell: the three vertices, then the edge
// dofs of local edges 0,1,2 (edge i opposite vertex i) in the global edge
// direction, then the interior dof. Both triangles at an edge therefore agree on
// every shared dof, which makes the space H1-conforming.
class FeSpace
{
public:
  FeSpace(Mesh mesh, int degree);

  const Mesh& mesh() const { return mesh_; }
  int degree() const { return degree_; }
  int n_dofs() const { return n_dofs_; }
  int n_free() const { return static_cast<int>(free_dofs_.size()); }
  int local_size() const { return (degree_ + 1) * (degree_ + 2) / 2; }

  const int* cell_dofs(int t) const { return &cell_dofs_[static_cast<std::size_t>(t) * local_size()]; }
  Point2 dof_point(int dof) const { return dof_points_[dof]; }
  bool is_dirichlet(int dof) const { return dirichlet_[dof] != 0; }
  int free_index(int dof) const { return free_index_[dof]; } // -1 when constrained
  const std::vector<int>& free_dofs() const { return free_dofs_; }

  // Barycentric coordinates of the local dof nodes of one cell.
  void local_nodes(int t, std::vector<std::array<double, 3>>& bary) const;

  struct Basis
  {
    int n = 0;
    double val[10];
    Point2 grad[10];
    Sym2 hess[10];
  };
  // Basis values at a barycentric point of cell t with physical derivatives;
  // second derivatives are filled only when requested.
  void eval_basis(int t, const double l[3], bool with_hess, Basis& out) const;

private:
  Mesh mesh_;
  int degree_ = 1;
  int n_dofs_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<Point2> dof_points_;
  std::vector<char> dirichlet_;
  std::vector<int> free_index_;
  std::vector<int> free_dofs_;
};

// Value and derivatives of a finite element field at a barycentric point. The
// coefficient vector covers all dofs including constrained ones.
template <class S>
struct FieldValue
{
  S val{};
  S dx{}, dy{};
  S hxx{}, hxy{}, hyy{};
};

template <class S>
FieldValue<S> eval_field(const FeSpace& space, const std::vector<S>& full, int t,
                         const double l[3], bool with_hess)
{
  FeSpace::Basis basis;
  space.eval_basis(t, l, with_hess, basis);
  const int* dofs = space.cell_dofs(t);
  FieldValue<S> out;
  for (int i = 0; i < basis.n; i++)
  {
    const S c = full[dofs[i]];
    out.val += c * basis.val[i];
    out.dx += c * basis.grad[i].x;
    out.dy += c * basis.grad[i].y;
    if (with_hess)
    {
      out.hxx += c * basis.hess[i].xx;
      out.hxy += c * basis.hess[i].xy;
      out.hyy += c * basis.hess[i].yy;
    }
  }
  return out;
}

// Nodal interpolation; exact on the space itself.
template <class S>
std::vector<S> interpolate(const FeSpace& space, const std::function<S(Point2)>& f)
{
  std::vector<S> out(space.n_dofs());
  for (int d = 0; d < space.n_dofs(); d++)
    out[d] = f(space.dof_point(d));
  return out;
}

// Expansion of a free-dof vector to a full coefficient vector (zeros on the
// boundary) and the converse restriction.
template <class S, class Vec>
std::vector<S> to_full(const FeSpace& space, const Vec& free)
{
  std::vector<S> out(space.n_dofs(), S(0));
  for (int k = 0; k < space.n_free(); k++)
    out[space.free_dofs()[k]] = free[k];
  return out;
}

} // namespace afem

#endif // AFEM_SPACE_HPP
