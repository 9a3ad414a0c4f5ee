// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/space.hpp"

#include <array>
#include <stdexcept>

#include "afem/errors.hpp"

namespace afem
{

namespace
{

inline void add_self(Sym2& h, Point2 g, double c)
{
  h.xx += c * g.x * g.x;
  h.xy += c * g.x * g.y;
  h.yy += c * g.y * g.y;
}

inline void add_pair(Sym2& h, Point2 ga, Point2 gb, double c)
{
  h.xx += 2.0 * c * ga.x * gb.x;
  h.xy += c * (ga.x * gb.y + gb.x * ga.y);
  h.yy += 2.0 * c * ga.y * gb.y;
}

} // namespace

FeSpace::FeSpace(Mesh mesh, int degree) : mesh_(std::move(mesh)), degree_(degree)
{
  if (degree_ < 1 || degree_ > 3)
    throw std::invalid_argument("FeSpace: degree must be 1, 2 or 3");

  const int nv = mesh_.n_points();
  const int ne = mesh_.n_edges();
  const int nt = mesh_.n_triangles();
  const int per_edge = degree_ - 1;
  n_dofs_ = nv + per_edge * ne + (degree_ == 3 ? nt : 0);

  dof_points_.resize(n_dofs_);
  dirichlet_.assign(n_dofs_, 0);
  for (int v = 0; v < nv; v++)
  {
    dof_points_[v] = mesh_.point(v);
    dirichlet_[v] = mesh_.vertex_on_boundary(v) ? 1 : 0;
  }
  for (int e = 0; e < ne; e++)
  {
    const Edge& edge = mesh_.edges()[e];
    for (int k = 0; k < per_edge; k++)
    {
      int dof = nv + e * per_edge + k;
      double f = static_cast<double>(k + 1) / degree_;
      dof_points_[dof] = mesh_.point(edge.a) + f * (mesh_.point(edge.b) - mesh_.point(edge.a));
      dirichlet_[dof] = edge.boundary ? 1 : 0;
    }
  }
  if (degree_ == 3)
  {
    const double third = 1.0 / 3.0;
    for (int t = 0; t < nt; t++)
    {
      const auto& v = mesh_.triangles()[t].v;
      dof_points_[nv + per_edge * ne + t] =
          third * (mesh_.point(v[0]) + mesh_.point(v[1]) + mesh_.point(v[2]));
    }
  }

  cell_dofs_.assign(static_cast<std::size_t>(nt) * local_size(), -1);
  for (int t = 0; t < nt; t++)
  {
    int* dofs = &cell_dofs_[static_cast<std::size_t>(t) * local_size()];
    const auto& v = mesh_.triangles()[t].v;
    dofs[0] = v[0];
    dofs[1] = v[1];
    dofs[2] = v[2];
    if (degree_ >= 2)
      for (int i = 0; i < 3; i++)
      {
        int e = mesh_.tri_edges(t)[i];
        for (int k = 0; k < per_edge; k++)
          dofs[3 + per_edge * i + k] = nv + e * per_edge + k;
      }
    if (degree_ == 3)
      dofs[9] = nv + per_edge * ne + t;
  }

  free_index_.assign(n_dofs_, -1);
  for (int d = 0; d < n_dofs_; d++)
    if (!dirichlet_[d])
    {
      free_index_[d] = static_cast<int>(free_dofs_.size());
      free_dofs_.push_back(d);
    }
}

void FeSpace::local_nodes(int t, std::vector<std::array<double, 3>>& bary) const
{
  bary.assign(local_size(), {0.0, 0.0, 0.0});
  bary[0] = {1.0, 0.0, 0.0};
  bary[1] = {0.0, 1.0, 0.0};
  bary[2] = {0.0, 0.0, 1.0};
  if (degree_ == 1)
    return;
  const auto& v = mesh_.triangles()[t].v;
  const int per_edge = degree_ - 1;
  for (int i = 0; i < 3; i++)
  {
    int ia = (i + 1) % 3, ib = (i + 2) % 3;
    // Edge nodes count from the lower-numbered global endpoint on both sides.
    if (v[ia] > v[ib])
      std::swap(ia, ib);
    for (int k = 0; k < per_edge; k++)
    {
      double f = static_cast<double>(k + 1) / degree_;
      std::array<double, 3> b = {0.0, 0.0, 0.0};
      b[ia] = 1.0 - f;
      b[ib] = f;
      bary[3 + per_edge * i + k] = b;
    }
  }
  if (degree_ == 3)
    bary[9] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
}

void FeSpace::eval_basis(int t, const double l[3], bool with_hess, Basis& out) const
{
  const auto& v = mesh_.triangles()[t].v;
  const Point2 p0 = mesh_.point(v[0]), p1 = mesh_.point(v[1]), p2 = mesh_.point(v[2]);
  const double s = 1.0 / cross(p1 - p0, p2 - p0); // 1 / (2 area), positive for CCW cells
  const Point2 g[3] = {{(p1.y - p2.y) * s, (p2.x - p1.x) * s},
                       {(p2.y - p0.y) * s, (p0.x - p2.x) * s},
                       {(p0.y - p1.y) * s, (p1.x - p0.x) * s}};

  out.n = local_size();
  for (int i = 0; i < out.n; i++)
  {
    out.val[i] = 0.0;
    out.grad[i] = {0.0, 0.0};
    out.hess[i] = {};
  }

  if (degree_ == 1)
  {
    for (int i = 0; i < 3; i++)
    {
      out.val[i] = l[i];
      out.grad[i] = g[i];
    }
    return;
  }

  if (degree_ == 2)
  {
    for (int i = 0; i < 3; i++)
    {
      out.val[i] = l[i] * (2.0 * l[i] - 1.0);
      out.grad[i] = (4.0 * l[i] - 1.0) * g[i];
      if (with_hess)
        add_self(out.hess[i], g[i], 4.0);
    }
    for (int i = 0; i < 3; i++)
    {
      int a = (i + 1) % 3, b = (i + 2) % 3;
      out.val[3 + i] = 4.0 * l[a] * l[b];
      out.grad[3 + i] = 4.0 * l[b] * g[a] + 4.0 * l[a] * g[b];
      if (with_hess)
        add_pair(out.hess[3 + i], g[a], g[b], 4.0);
    }
    return;
  }

  // degree 3
  for (int i = 0; i < 3; i++)
  {
    double li = l[i];
    out.val[i] = 0.5 * li * (3.0 * li - 1.0) * (3.0 * li - 2.0);
    out.grad[i] = (0.5 * (27.0 * li * li - 18.0 * li + 2.0)) * g[i];
    if (with_hess)
      add_self(out.hess[i], g[i], 27.0 * li - 9.0);
  }
  for (int i = 0; i < 3; i++)
  {
    int a = (i + 1) % 3, b = (i + 2) % 3;
    if (v[a] > v[b])
      std::swap(a, b);
    // Nodes at fractions 1/3 and 2/3 from the lower-numbered endpoint.
    for (int k = 0; k < 2; k++)
    {
      double la = l[a], lb = l[b];
      Point2 ga = g[a], gb = g[b];
      if (k == 1)
      {
        std::swap(la, lb);
        std::swap(ga, gb);
      }
      int idx = 3 + 2 * i + k;
      out.val[idx] = 4.5 * la * lb * (3.0 * la - 1.0);
      out.grad[idx] = (4.5 * lb * (6.0 * la - 1.0)) * ga + (4.5 * la * (3.0 * la - 1.0)) * gb;
      if (with_hess)
      {
        add_self(out.hess[idx], ga, 27.0 * lb);
        add_pair(out.hess[idx], ga, gb, 4.5 * (6.0 * la - 1.0));
      }
    }
  }
  out.val[9] = 27.0 * l[0] * l[1] * l[2];
  out.grad[9] = 27.0 * (l[1] * l[2] * g[0] + l[0] * l[2] * g[1] + l[0] * l[1] * g[2]);
  if (with_hess)
  {
    add_pair(out.hess[9], g[0], g[1], 27.0 * l[2]);
    add_pair(out.hess[9], g[0], g[2], 27.0 * l[1]);
    add_pair(out.hess[9], g[1], g[2], 27.0 * l[0]);
  }
}

} // namespace afem
