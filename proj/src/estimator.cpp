// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/estimator.hpp"

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "afem/errors.hpp"
#include "afem/parallel.hpp"
#include "afem/quadrature.hpp"

namespace afem
{
namespace
{

inline double abs2(double v) { return v * v; }
inline double abs2(Complex v) { return std::norm(v); }

// Load evaluators share one call shape: value at quadrature point l of
// triangle t with physical location x.
template <class S>
struct FieldRhs
{
  const FeSpace& space;
  const std::vector<S>& f;
  S operator()(int t, const double l[3], Point2) const
  {
    return eval_field(space, f, t, l, false).val;
  }
};

struct FunctionRhs
{
  const std::function<double(Point2)>& f;
  double operator()(int, const double*, Point2 x) const { return f(x); }
};

// Strong residual r = f + A:H(w) -+ b.grad(w) - c w. The diffusion matrix is
// constant per element, so div(A grad w) collapses to the Hessian contraction.
// csign is -1 for the primal operator and +1 for its adjoint.
template <class S, class Rhs>
S strong_residual(const ElemCoeff& cf, const Rhs& rhs, const FieldValue<S>& fe,
                  int t, const double l[3], Point2 x, double csign)
{
  const S diff = cf.A.xx * fe.hxx + 2.0 * cf.A.xy * fe.hxy + cf.A.yy * fe.hyy;
  const S conv = cf.b.x * fe.dx + cf.b.y * fe.dy;
  return rhs(t, l, x) + diff + csign * conv - cf.c * fe.val;
}

// Normal flux jump of A grad(w) across interior edge e at the points s of the
// [0,1] parameterization from endpoint a to b. The normal comes from the
// canonical a < b orientation, so |J|^2 does not depend on the side order.
template <class S>
void edge_jump_values(const FeSpace& space, const CoefficientField& coeffs,
                      const std::vector<S>& w, int e, const GaussRule& g,
                      std::vector<S>& out)
{
  const Mesh& mesh = space.mesh();
  const Edge& ed = mesh.edges()[e];
  const Point2 pa = mesh.point(ed.a);
  const Point2 pb = mesh.point(ed.b);
  const double len = norm(pb - pa);
  const Point2 nrm{(pb.y - pa.y) / len, (pa.x - pb.x) / len};
  const int npts = static_cast<int>(g.x.size());
  out.assign(npts, S(0));
  for (int side = 0; side < 2; side++)
  {
    const int t = ed.tri[side];
    const Triangle& tri = mesh.triangles()[t];
    const Sym2& A = coeffs.at(tri.tag).A;
    int ia = -1, ib = -1;
    for (int k = 0; k < 3; k++)
    {
      if (tri.v[k] == ed.a)
        ia = k;
      if (tri.v[k] == ed.b)
        ib = k;
    }
    const double sgn = side == 0 ? 1.0 : -1.0;
    for (int q = 0; q < npts; q++)
    {
      double l[3] = {0.0, 0.0, 0.0};
      l[ia] = 1.0 - g.x[q];
      l[ib] = g.x[q];
      const FieldValue<S> fe = eval_field(space, w, t, l, false);
      const S fx = A.xx * fe.dx + A.xy * fe.dy;
      const S fy = A.xy * fe.dx + A.yy * fe.dy;
      out[q] += sgn * (fx * nrm.x + fy * nrm.y);
    }
  }
}

void check_sizes(const FeSpace& space, std::size_t f, std::size_t w, const char* where)
{
  if (f != static_cast<std::size_t>(space.n_dofs()) || f != w)
    throw ConfigError(std::string(where) + ": coefficient vectors must cover all dofs");
}

std::vector<double> edge_lengths(const Mesh& mesh)
{
  std::vector<double> len(mesh.n_edges());
  for (int e = 0; e < mesh.n_edges(); e++)
  {
    const Edge& ed = mesh.edges()[e];
    len[e] = norm(mesh.point(ed.b) - mesh.point(ed.a));
  }
  return len;
}

// Resolve every tag once up front; parallel_for bodies must not throw.
void check_tags(const Mesh& mesh, const CoefficientField& coeffs)
{
  for (const Triangle& tri : mesh.triangles())
    coeffs.at(tri.tag);
}

template <class S, class Rhs>
std::vector<double> indicators_impl(const FeSpace& space, const CoefficientField& coeffs,
                                    const Rhs& rhs, const std::vector<S>& w, bool adjoint,
                                    const QuadRule& erule)
{
  const Mesh& mesh = space.mesh();
  const int nt = mesh.n_triangles();
  const int ne = mesh.n_edges();
  const double csign = adjoint ? 1.0 : -1.0;
  check_tags(mesh, coeffs);

  std::vector<double> elem(nt);
  parallel_for(nt, [&](int t)
  {
    const Triangle& tri = mesh.triangles()[t];
    const ElemCoeff& cf = coeffs.at(tri.tag);
    const Point2 p0 = mesh.point(tri.v[0]);
    const Point2 p1 = mesh.point(tri.v[1]);
    const Point2 p2 = mesh.point(tri.v[2]);
    double acc = 0.0;
    for (const QuadPoint& q : erule.pts)
    {
      const double l[3] = {q.l0, q.l1, q.l2};
      const Point2 x = q.l0 * p0 + q.l1 * p1 + q.l2 * p2;
      const FieldValue<S> fe = eval_field(space, w, t, l, true);
      acc += q.w * abs2(strong_residual(cf, rhs, fe, t, l, x, csign));
    }
    const double h = mesh.diam(t);
    elem[t] = h * h * mesh.area(t) * acc;
  });

  // One jump integral per interior edge; charged to both triangles below.
  const std::vector<double> elen = edge_lengths(mesh);
  const GaussRule& grule = gauss_legendre(space.degree() + 1);
  std::vector<double> jump(ne);
  parallel_for(ne, [&](int e)
  {
    if (mesh.edges()[e].boundary)
    {
      jump[e] = 0.0;
      return;
    }
    std::vector<S> vals;
    edge_jump_values(space, coeffs, w, e, grule, vals);
    double acc = 0.0;
    for (std::size_t q = 0; q < vals.size(); q++)
      acc += grule.w[q] * abs2(vals[q]);
    jump[e] = elen[e] * acc;
  });

  std::vector<double> out(nt);
  for (int t = 0; t < nt; t++)
  {
    double v = elem[t];
    for (int e : mesh.tri_edges(t))
      if (!mesh.edges()[e].boundary)
        v += elen[e] * jump[e];
    out[t] = v;
  }
  return out;
}

// Values of an L2-orthonormal polynomial basis of total degree <= k on the
// reference triangle at the points of rule. Columns are Cholesky-orthogonalized
// monomials; rule must be exact through degree 2k.
Eigen::MatrixXd reference_onb(const QuadRule& rule, int k)
{
  const int npts = static_cast<int>(rule.pts.size());
  const int dim = (k + 1) * (k + 2) / 2;
  Eigen::MatrixXd V(npts, dim);
  Eigen::VectorXd wq(npts);
  for (int q = 0; q < npts; q++)
  {
    const double x = rule.pts[q].l1;
    const double y = rule.pts[q].l2;
    wq(q) = 0.5 * rule.pts[q].w; // reference triangle has area 1/2
    int c = 0;
    for (int d = 0; d <= k; d++)
      for (int ax = d; ax >= 0; ax--)
        V(q, c++) = std::pow(x, ax) * std::pow(y, d - ax);
  }
  const Eigen::MatrixXd G = V.transpose() * wq.asDiagonal() * V;
  const Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw NumericalError("oscillation: projector Gram factorization failed");
  return llt.matrixL().solve(V.transpose()).transpose();
}

// sqrt(2i+1) P_i(2s-1) for i <= k: exactly orthonormal on the unit interval.
Eigen::MatrixXd legendre_onb(const GaussRule& g, int k)
{
  const int npts = static_cast<int>(g.x.size());
  Eigen::MatrixXd B(npts, k + 1);
  for (int q = 0; q < npts; q++)
  {
    const double x = 2.0 * g.x[q] - 1.0;
    double pm = 0.0, pc = 1.0;
    for (int i = 0; i <= k; i++)
    {
      B(q, i) = std::sqrt(2.0 * i + 1.0) * pc;
      const double pn = i == 0 ? x : ((2.0 * i + 1.0) * x * pc - i * pm) / (i + 1.0);
      pm = pc;
      pc = pn;
    }
  }
  return B;
}

// Squared projection tail ||r||^2 - sum_i |<r, phi_i>|^2 in the discrete inner
// product diag(wq); clamped at zero against roundoff.
template <class S>
double projection_tail(const std::vector<S>& vals, const Eigen::VectorXd& wq,
                       const Eigen::MatrixXd& B)
{
  double norm2 = 0.0;
  for (std::size_t q = 0; q < vals.size(); q++)
    norm2 += wq(static_cast<int>(q)) * abs2(vals[q]);
  double proj2 = 0.0;
  for (int i = 0; i < B.cols(); i++)
  {
    S m{};
    for (std::size_t q = 0; q < vals.size(); q++)
      m += wq(static_cast<int>(q)) * vals[q] * B(static_cast<int>(q), i);
    proj2 += abs2(m);
  }
  return std::max(0.0, norm2 - proj2);
}

template <class S, class Rhs>
std::vector<double> oscillation_impl(const FeSpace& space, const CoefficientField& coeffs,
                                     const Rhs& rhs, const std::vector<S>& w, bool adjoint)
{
  const Mesh& mesh = space.mesh();
  const int nt = mesh.n_triangles();
  const int ne = mesh.n_edges();
  const int p = space.degree();
  const int k = 2 * p - 1; // projection degree
  const double csign = adjoint ? 1.0 : -1.0;
  check_tags(mesh, coeffs);

  // Element tails. The rule is exact through 4p >= 2k, so the discrete
  // projection is the true L2 projection for polynomial residuals.
  const QuadRule& erule = triangle_rule_exact(4 * p);
  const int npts = static_cast<int>(erule.pts.size());
  const Eigen::MatrixXd Bt = reference_onb(erule, k);
  Eigen::VectorXd wt(npts);
  for (int q = 0; q < npts; q++)
    wt(q) = 0.5 * erule.pts[q].w;

  std::vector<double> elem(nt);
  parallel_for(nt, [&](int t)
  {
    const Triangle& tri = mesh.triangles()[t];
    const ElemCoeff& cf = coeffs.at(tri.tag);
    const Point2 p0 = mesh.point(tri.v[0]);
    const Point2 p1 = mesh.point(tri.v[1]);
    const Point2 p2 = mesh.point(tri.v[2]);
    std::vector<S> vals(npts);
    for (int q = 0; q < npts; q++)
    {
      const QuadPoint& qp = erule.pts[q];
      const double l[3] = {qp.l0, qp.l1, qp.l2};
      const Point2 x = qp.l0 * p0 + qp.l1 * p1 + qp.l2 * p2;
      const FieldValue<S> fe = eval_field(space, w, t, l, true);
      vals[q] = strong_residual(cf, rhs, fe, t, l, x, csign);
    }
    const double h = mesh.diam(t);
    // Affine pullback: the physical tail is 2 area times the reference tail.
    elem[t] = h * h * 2.0 * mesh.area(t) * projection_tail(vals, wt, Bt);
  });

  const std::vector<double> elen = edge_lengths(mesh);
  const GaussRule& grule = gauss_legendre(2 * p);
  const Eigen::MatrixXd Be = legendre_onb(grule, k);
  Eigen::VectorXd we(static_cast<int>(grule.x.size()));
  for (int q = 0; q < we.size(); q++)
    we(q) = grule.w[q];

  std::vector<double> eosc(ne);
  parallel_for(ne, [&](int e)
  {
    if (mesh.edges()[e].boundary)
    {
      eosc[e] = 0.0;
      return;
    }
    std::vector<S> vals;
    edge_jump_values(space, coeffs, w, e, grule, vals);
    eosc[e] = elen[e] * projection_tail(vals, we, Be);
  });

  std::vector<double> out(nt);
  for (int t = 0; t < nt; t++)
  {
    double v = elem[t];
    for (int e : mesh.tri_edges(t))
      if (!mesh.edges()[e].boundary)
        v += elen[e] * eosc[e];
    out[t] = v;
  }
  return out;
}

std::vector<double> real_parts(const std::vector<Complex>& v)
{
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); i++)
    out[i] = v[i].real();
  return out;
}

} // namespace

SourceSolutions source_solutions(const FeSpace& space, const OperatorPencil& p,
                                 const Cluster& c)
{
  if (space.n_free() != p.n)
    throw ConfigError("source_solutions: space and pencil disagree");
  if (c.basis.rows() != p.n || c.basis.cols() != c.N)
    throw Error("source_solutions: orthonormalized cluster basis required");

  SourceSolutions out;
  out.w.resize(c.N);
  for (int j = 0; j < c.N; j++)
  {
    const VecC rhs = mul_real(p.M, VecC(c.basis.col(j)));
    out.w[j] = to_full<Complex>(space, solve_linear(p, rhs));
  }
  if (c.adjoint_basis.cols() == c.N)
  {
    out.w_star.resize(c.N);
    for (int j = 0; j < c.N; j++)
    {
      const VecC rhs = mul_real(p.M, VecC(c.adjoint_basis.col(j)));
      out.w_star[j] = to_full<Complex>(space, solve_linear(p, rhs, true));
    }
  }
  return out;
}

std::vector<double> local_indicators(const FeSpace& space, const CoefficientField& coeffs,
                                     const std::vector<double>& f,
                                     const std::vector<double>& w, bool adjoint)
{
  check_sizes(space, f.size(), w.size(), "local_indicators");
  return indicators_impl(space, coeffs, FieldRhs<double>{space, f}, w, adjoint,
                         triangle_rule(space.degree()));
}

std::vector<double> local_indicators(const FeSpace& space, const CoefficientField& coeffs,
                                     const std::vector<Complex>& f,
                                     const std::vector<Complex>& w, bool adjoint)
{
  check_sizes(space, f.size(), w.size(), "local_indicators");
  return indicators_impl(space, coeffs, FieldRhs<Complex>{space, f}, w, adjoint,
                         triangle_rule(space.degree()));
}

std::vector<double> local_indicators(const FeSpace& space, const CoefficientField& coeffs,
                                     const std::function<double(Point2)>& f,
                                     const std::vector<double>& w, bool adjoint)
{
  check_sizes(space, w.size(), w.size(), "local_indicators");
  return indicators_impl(space, coeffs, FunctionRhs{f}, w, adjoint,
                         triangle_rule_exact(4 * space.degree()));
}

std::vector<double> oscillation(const FeSpace& space, const CoefficientField& coeffs,
                                const std::vector<double>& f,
                                const std::vector<double>& w, bool adjoint)
{
  check_sizes(space, f.size(), w.size(), "oscillation");
  return oscillation_impl(space, coeffs, FieldRhs<double>{space, f}, w, adjoint);
}

std::vector<double> oscillation(const FeSpace& space, const CoefficientField& coeffs,
                                const std::vector<Complex>& f,
                                const std::vector<Complex>& w, bool adjoint)
{
  check_sizes(space, f.size(), w.size(), "oscillation");
  return oscillation_impl(space, coeffs, FieldRhs<Complex>{space, f}, w, adjoint);
}

std::vector<double> oscillation(const FeSpace& space, const CoefficientField& coeffs,
                                const std::function<double(Point2)>& f,
                                const std::vector<double>& w, bool adjoint)
{
  check_sizes(space, w.size(), w.size(), "oscillation");
  return oscillation_impl(space, coeffs, FunctionRhs{f}, w, adjoint);
}

IndicatorField cluster_indicators(const FeSpace& space, const CoefficientField& coeffs,
                                  const OperatorPencil& p, const Cluster& c)
{
  if (c.basis.cols() != c.N || c.adjoint_basis.cols() != c.N)
    throw Error("cluster_indicators: orthonormalized primal and adjoint bases required");
  const SourceSolutions src = source_solutions(space, p, c);

  IndicatorField ind;
  ind.N = c.N;
  ind.n_tri = space.mesh().n_triangles();
  ind.eta2.resize(c.N);
  ind.eta2_star.resize(c.N);
  ind.osc2.resize(c.N);
  ind.osc2_star.resize(c.N);

  // Real clusters (conjugation-closed spectra away from the real axis never
  // reach here) drop the structurally zero imaginary parts.
  const bool realc = cluster_is_real(c);
  for (int j = 0; j < c.N; j++)
  {
    if (realc)
    {
      const std::vector<double> u = real_parts(to_full<Complex>(space, VecC(c.basis.col(j))));
      const std::vector<double> us =
          real_parts(to_full<Complex>(space, VecC(c.adjoint_basis.col(j))));
      const std::vector<double> w = real_parts(src.w[j]);
      const std::vector<double> ws = real_parts(src.w_star[j]);
      ind.eta2[j] = local_indicators(space, coeffs, u, w, false);
      ind.eta2_star[j] = local_indicators(space, coeffs, us, ws, true);
      ind.osc2[j] = oscillation(space, coeffs, u, w, false);
      ind.osc2_star[j] = oscillation(space, coeffs, us, ws, true);
    }
    else
    {
      const std::vector<Complex> u = to_full<Complex>(space, VecC(c.basis.col(j)));
      const std::vector<Complex> us = to_full<Complex>(space, VecC(c.adjoint_basis.col(j)));
      ind.eta2[j] = local_indicators(space, coeffs, u, src.w[j], false);
      ind.eta2_star[j] = local_indicators(space, coeffs, us, src.w_star[j], true);
      ind.osc2[j] = oscillation(space, coeffs, u, src.w[j], false);
      ind.osc2_star[j] = oscillation(space, coeffs, us, src.w_star[j], true);
    }
  }

  ind.total.assign(ind.n_tri, 0.0);
  for (int j = 0; j < c.N; j++)
    for (int t = 0; t < ind.n_tri; t++)
      ind.total[t] += ind.eta2[j][t] + ind.eta2_star[j][t];
  for (int t = 0; t < ind.n_tri; t++)
    if (!std::isfinite(ind.total[t]) || ind.total[t] < 0.0)
      throw NumericalError("cluster_indicators: nonfinite indicator");
  return ind;
}

double cluster_estimator(const IndicatorField& ind)
{
  double s = 0.0;
  for (int t = 0; t < ind.n_tri; t++)
    s += ind.total[t];
  return s;
}

double cluster_estimator(const IndicatorField& ind, const std::vector<int>& subset)
{
  double s = 0.0;
  for (int t : subset)
  {
    if (t < 0 || t >= ind.n_tri)
      throw ConfigError("cluster_estimator: triangle index out of range");
    s += ind.total[t];
  }
  return s;
}

} // namespace afem
