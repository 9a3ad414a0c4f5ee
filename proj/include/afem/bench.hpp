// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#ifndef AFEM_BENCH_HPP
#define AFEM_BENCH_HPP

#include <limits>
#include <string>
#include <vector>

#include "afem/adaptive.hpp"

namespace afem
{

inline constexpr const char* kVersion = "0.1.0";

// Registered benchmark problem: geometry name, coefficients, reference
// eigenvalues sorted by modulus (empty when no trusted values exist) and the
// default cluster window used when the config does not pick one.
struct ProblemDef
{
  std::string id;
  std::string geometry;
  CoefficientField coeffs;
  std::vector<Complex> references;
  std::string reference_note;
  int default_n = 0;
  int default_N = 1;
  Complex default_shift{0.0, 0.0};
};

ProblemDef registry_get(const std::string& id);
std::vector<std::string> registry_ids();

// One JSON document configures a run. problem, degree and theta are required;
// n and N default to the problem window, everything else to the values below.
struct BenchConfig
{
  std::string problem;
  int degree = 0;
  double theta = 0.0;
  int n = -1;
  int N = -1;
  Complex shift{0.0, 0.0};
  bool shift_set = false;
  int max_dofs = 50000;
  int max_levels = 40;
  double estimator_floor = 1e-10;
  bool adapt_shift = true;
  std::string solver = "auto"; // auto | dense | krylov
  int rate_window = 5;
  std::string output_dir = ".";
};

// Parse failures throw ConfigError naming the offending field.
BenchConfig parse_config(const std::string& text);
BenchConfig load_config(const std::string& path);

struct RunReport
{
  BenchConfig config; // echoed with the effective window and shift filled in
  ProblemDef problem;
  std::vector<LevelRecord> history;
  // errors[l][j] = |lambda_j - reference|; NaN where no reference covers j.
  std::vector<std::vector<double>> errors;
  std::string stop_reason;
  // Trailing-window log-log slopes; NaN when not computable.
  double slope_estimator = std::numeric_limits<double>::quiet_NaN();
  double slope_mean_error = std::numeric_limits<double>::quiet_NaN();
};

// Runs the adaptive loop for the configuration; with write_files the report is
// also serialized as history.csv, report.json and convergence.svg under
// output_dir. Identical configs produce byte-identical files. The hook sees
// every level as it completes.
RunReport run_benchmark(const BenchConfig& cfg, bool write_files = true,
                        const LevelHook& hook = {});

// CSV with the fixed header level,n_tri,n_dof,n_marked,eta2,eta2_star,osc2,
// lambda_hat_re,lambda_hat_im and per window member lam{g}_re,lam{g}_im,err{g}
// (g counts eigenvalues from 1); values carry 17 significant digits, err cells
// without a reference stay empty.
std::string format_history_csv(const RunReport& r);

// The parsed counterpart. Only CSV-carried record fields are populated.
struct HistoryTable
{
  int first_index = 1; // eigenvalue number of the first lam column
  std::vector<LevelRecord> records;
  std::vector<std::vector<double>> errors; // NaN for empty cells
};
HistoryTable parse_history_csv(const std::string& text);

// Config echo, per-level trace without wall times, fitted slopes and an
// environment stamp; no timestamps, so reruns are byte-identical.
std::string format_report_json(const RunReport& r);

// Log-log SVG: one polyline for each of sqrt(eta2) and sqrt(eta2_star), one
// per tracked eigenvalue error, and a dashed guide of the given slope that
// gets no legend entry. Needs at least two levels.
std::string emit_plot(const RunReport& r, double guide_slope);

// Legacy VTK dump of a mesh with tag and generation cell data.
std::string mesh_to_vtk(const Mesh& mesh);

} // namespace afem

#endif // AFEM_BENCH_HPP
