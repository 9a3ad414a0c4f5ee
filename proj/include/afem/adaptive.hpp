// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_ADAPTIVE_HPP
#define AFEM_ADAPTIVE_HPP

#include <functional>
#include <string>
#include <vector>

#include "afem/estimator.hpp"

namespace afem
{

// Bulk marking result. marked is sorted ascending; all_zero reports a zero
// total estimator, in which case nothing is marked.
struct MarkResult
{
  std::vector<int> marked;
  bool all_zero = false;
};

// Smallest set M with sum_{T in M} ind[T] >= theta * sum_T ind[T], built from
// the indicators in descending order with ties broken toward lower ids. theta
// must lie in (0, 1]; indicators must be finite and nonnegative.
MarkResult dorfler_mark(const std::vector<double>& ind, double theta);

struct AfemOptions
{
  int n = 0;                 // eigenvalues skipped below the cluster
  int N = 1;                 // cluster size
  Complex shift{0.0, 0.0};   // initial shift; tracks the cluster when adapt_shift
  double theta = 0.5;        // bulk marking fraction
  int max_dofs = 50000;      // stop after the first level solved at or above
  int max_levels = 40;
  double estimator_floor = 1e-10; // stop once eta2 + eta2_star falls below
  bool adapt_shift = true;
  EigenPath path = EigenPath::Auto;
};

// Per-level trace of the adaptive loop. eta2 and eta2_star are the global
// squared primal and adjoint estimators; osc2 bundles both oscillation parts.
// seconds is wall time for the level and is excluded from serialized reports.
struct LevelRecord
{
  int level = 0;
  int n_tri = 0;
  int n_dof = 0;
  int n_marked = 0;
  std::vector<Complex> eigenvalues;
  Complex lambda_hat{0.0, 0.0};
  double eta2 = 0.0;
  double eta2_star = 0.0;
  double osc2 = 0.0;
  double separation = 0.0;
  double adjoint_mismatch = 0.0;
  double gram_error = 0.0;
  double seconds = 0.0;
};

// Everything a level observer may inspect; references stay valid only during
// the callback.
struct LevelState
{
  const LevelRecord& record;
  const Mesh& mesh;
  const FeSpace& space;
  const OperatorPencil& pencil;
  const Cluster& cluster;
  const IndicatorField& indicators;
};

using LevelHook = std::function<void(const LevelState&)>;

struct AfemResult
{
  std::vector<LevelRecord> history;
  Mesh mesh;               // mesh of the last solved level
  Cluster cluster;         // cluster of the last solved level
  std::string stop_reason; // max_dofs, max_levels, estimator_floor, all_zero
};

// Adaptive loop solve -> estimate -> mark -> refine. The initial mesh is
// uniformly refined until the space holds the window with slack, every level
// solves the primal and adjoint cluster, marks on the summed indicator field
// and refines all three edges of each marked triangle.
AfemResult run_afem(const Mesh& initial, int degree, const CoefficientField& coeffs,
                    const AfemOptions& opts, const LevelHook& hook = {});

// Least squares slope of log y against log x over the trailing window entries;
// at least 3 points, positive data.
double fit_rate(const std::vector<double>& x, const std::vector<double>& y, int window);

} // namespace afem

#endif // AFEM_ADAPTIVE_HPP
