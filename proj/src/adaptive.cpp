// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "afem/assembly.hpp"
#include "afem/errors.hpp"

namespace afem
{

MarkResult dorfler_mark(const std::vector<double>& ind, double theta)
{
  if (!(theta > 0.0) || theta > 1.0)
    throw ConfigError("dorfler_mark: theta must lie in (0, 1]");
  double tot = 0.0;
  for (double v : ind)
  {
    if (!std::isfinite(v) || v < 0.0)
      throw NumericalError("dorfler_mark: indicators must be finite and nonnegative");
    tot += v;
  }
  MarkResult out;
  if (tot == 0.0)
  {
    out.all_zero = true;
    return out;
  }

  std::vector<int> order(ind.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ind[a] != ind[b] ? ind[a] > ind[b] : a < b; });

  // The descending prefix is a minimal set reaching the target; zeros cannot
  // help, so marking stops there even when roundoff keeps the sum short.
  const double target = theta * tot;
  double sum = 0.0;
  for (int t : order)
  {
    if (ind[t] <= 0.0)
      break;
    out.marked.push_back(t);
    sum += ind[t];
    if (sum >= target)
      break;
  }
  std::sort(out.marked.begin(), out.marked.end());
  return out;
}

AfemResult run_afem(const Mesh& initial, int degree, const CoefficientField& coeffs,
                    const AfemOptions& opts, const LevelHook& hook)
{
  if (degree < 1 || degree > 3)
    throw ConfigError("run_afem: degree must be 1, 2 or 3");
  if (!(opts.theta > 0.0) || opts.theta > 1.0)
    throw ConfigError("run_afem: theta must lie in (0, 1]");
  if (opts.n < 0 || opts.N < 1)
    throw ConfigError("run_afem: need n >= 0 and N >= 1");
  if (opts.max_levels < 1 || opts.max_dofs < 1)
    throw ConfigError("run_afem: max_levels and max_dofs must be positive");

  AfemResult result;
  Mesh mesh = initial;
  // Startup: the window plus slack has to fit into the discrete space.
  const int want = opts.n + opts.N + 5;
  for (int round = 0; FeSpace(mesh, degree).n_free() < want; round++)
  {
    if (round >= 30)
      throw ConfigError("run_afem: cannot reach the requested window size");
    mesh = mesh.uniform_refine();
  }

  Complex shift = opts.shift;
  for (int level = 0;; level++)
  {
    const auto t0 = std::chrono::steady_clock::now();
    FeSpace space(mesh, degree);
    OperatorPencil pencil = assemble_pencil(space, coeffs);

    ClusterOptions copts;
    copts.n = opts.n;
    copts.N = opts.N;
    copts.shift = shift;
    copts.path = opts.path;
    Cluster cluster = solve_cluster(pencil, copts);
    solve_adjoint_cluster(pencil, cluster);
    orthonormalize_cluster(pencil, cluster);

    const IndicatorField ind = cluster_indicators(space, coeffs, pencil, cluster);
    const MarkResult mark = dorfler_mark(ind.total, opts.theta);

    LevelRecord rec;
    rec.level = level;
    rec.n_tri = mesh.n_triangles();
    rec.n_dof = space.n_free();
    rec.n_marked = static_cast<int>(mark.marked.size());
    for (const EigenPair& pr : cluster.pairs)
      rec.eigenvalues.push_back(pr.lambda);
    rec.lambda_hat = cluster_mean(cluster);
    for (int j = 0; j < ind.N; j++)
      for (int t = 0; t < ind.n_tri; t++)
      {
        rec.eta2 += ind.eta2[j][t];
        rec.eta2_star += ind.eta2_star[j][t];
        rec.osc2 += ind.osc2[j][t] + ind.osc2_star[j][t];
      }
    rec.separation = cluster.separation;
    rec.adjoint_mismatch = cluster.adjoint_mismatch;
    rec.gram_error = cluster.gram_error;
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(rec);
    if (hook)
      hook(LevelState{result.history.back(), mesh, space, pencil, cluster, ind});

    if (mark.all_zero)
      result.stop_reason = "all_zero";
    else if (rec.eta2 + rec.eta2_star <= opts.estimator_floor)
      result.stop_reason = "estimator_floor";
    else if (rec.n_dof >= opts.max_dofs)
      result.stop_reason = "max_dofs";
    else if (level + 1 >= opts.max_levels)
      result.stop_reason = "max_levels";
    if (!result.stop_reason.empty())
    {
      result.mesh = mesh;
      result.cluster = cluster;
      return result;
    }

    mesh = mesh.refine_marked(mark.marked);
    // Keep the factorization shift inside the moving window.
    if (opts.adapt_shift)
      shift = 0.5 * (cluster.pairs.front().lambda + cluster.pairs.back().lambda);
  }
}

double fit_rate(const std::vector<double>& x, const std::vector<double>& y, int window)
{
  if (x.size() != y.size())
    throw ConfigError("fit_rate: input lengths differ");
  if (window < 3)
    throw ConfigError("fit_rate: window must be at least 3");
  const int n = static_cast<int>(x.size());
  const int w = std::min(window, n);
  if (w < 3)
    throw ConfigError("fit_rate: need at least 3 points");

  double mx = 0.0, my = 0.0;
  for (int i = n - w; i < n; i++)
  {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw NumericalError("fit_rate: data must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= w;
  my /= w;
  double sxx = 0.0, sxy = 0.0;
  for (int i = n - w; i < n; i++)
  {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0)
    throw NumericalError("fit_rate: abscissae are constant");
  return sxy / sxx;
}

} // namespace afem
