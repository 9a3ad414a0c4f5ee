// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "afem/bench.hpp"
#include "afem/errors.hpp"

namespace
{

void print_level(const afem::LevelRecord& rec)
{
  std::printf("level %3d  n_tri %7d  n_dof %7d  marked %6d  eta %.6e  eta* %.6e  "
              "lambda_hat %.12g%+.12gi\n",
              rec.level, rec.n_tri, rec.n_dof, rec.n_marked, std::sqrt(rec.eta2),
              std::sqrt(rec.eta2_star), rec.lambda_hat.real(), rec.lambda_hat.imag());
  std::fflush(stdout);
}

std::string fit_text(double v)
{
  if (!std::isfinite(v))
    return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cmd_run(const std::string& path)
{
  const afem::BenchConfig cfg = afem::load_config(path);
  const afem::RunReport rep = afem::run_benchmark(
      cfg, true, [](const afem::LevelState& s) { print_level(s.record); });

  std::printf("stop: %s\n", rep.stop_reason.c_str());
  if (!rep.history.empty())
  {
    const afem::LevelRecord& last = rep.history.back();
    for (int j = 0; j < rep.config.N; j++)
    {
      const int g = rep.config.n + 1 + j;
      std::printf("  lambda_%d = %.12g%+.12gi", g, last.eigenvalues[j].real(),
                  last.eigenvalues[j].imag());
      const double e = rep.errors.back()[j];
      if (std::isfinite(e))
        std::printf("  |err| = %.3e", e);
      std::printf("\n");
    }
  }
  std::printf("slopes over trailing %d levels: estimator %s, mean error %s\n",
              rep.config.rate_window, fit_text(rep.slope_estimator).c_str(),
              fit_text(rep.slope_mean_error).c_str());
  std::printf("wrote %s/history.csv and report.json%s\n", rep.config.output_dir.c_str(),
              rep.history.size() >= 2 ? " and convergence.svg" : "");
  return 0;
}

int cmd_rates(const std::string& path, int window)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw afem::ConfigError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const afem::HistoryTable table = afem::parse_history_csv(ss.str());
  if (window < 3)
    throw afem::ConfigError("--window must be at least 3");

  std::vector<double> dofs, est, meanerr;
  bool mean_ok = !table.records.empty();
  for (std::size_t l = 0; l < table.records.size(); l++)
  {
    dofs.push_back(table.records[l].n_dof);
    est.push_back(std::sqrt(table.records[l].eta2 + table.records[l].eta2_star));
    double m = 0.0;
    for (double e : table.errors[l])
    {
      if (!std::isfinite(e))
        mean_ok = false;
      m += e;
    }
    meanerr.push_back(m / std::max<std::size_t>(1, table.errors[l].size()));
  }
  const auto fit = [&](const std::vector<double>& y) -> double
  {
    try
    {
      return afem::fit_rate(dofs, y, window);
    }
    catch (const afem::Error&)
    {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  std::printf("levels: %zu, window: %d\n", table.records.size(), window);
  std::printf("estimator slope: %s\n", fit_text(fit(est)).c_str());
  std::printf("mean error slope: %s\n",
              fit_text(mean_ok ? fit(meanerr) : std::numeric_limits<double>::quiet_NaN())
                  .c_str());
  return 0;
}

int cmd_mesh_dump(const std::string& path, int level)
{
  afem::BenchConfig cfg = afem::load_config(path);
  if (level < 0)
    throw afem::ConfigError("--level must be nonnegative");
  if (level + 1 < cfg.max_levels)
    cfg.max_levels = level + 1; // no need to refine past the requested level

  std::optional<afem::Mesh> captured;
  afem::run_benchmark(cfg, false,
                      [&](const afem::LevelState& s)
                      {
                        if (s.record.level == level)
                          captured = s.mesh;
                      });
  if (!captured)
    throw afem::NumericalError("run stopped before level " + std::to_string(level));
  std::fputs(afem::mesh_to_vtk(*captured).c_str(), stdout);
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"adaptive finite element eigenvalue benchmarks"};
  app.require_subcommand(1);

  std::string run_cfg, rates_csv, dump_cfg;
  int window = 5;
  int level = 0;

  CLI::App* run = app.add_subcommand("run", "execute a benchmark configuration");
  run->add_option("config", run_cfg, "JSON configuration file")->required();

  CLI::App* rates = app.add_subcommand("rates", "fit convergence slopes from a history CSV");
  rates->add_option("history", rates_csv, "history.csv produced by a run")->required();
  rates->add_option("--window", window, "trailing levels used for the fit (default 5)");

  CLI::App* dump =
      app.add_subcommand("mesh-dump", "print the mesh of one level as legacy VTK");
  dump->add_option("config", dump_cfg, "JSON configuration file")->required();
  dump->add_option("--level", level, "adaptive level to dump")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    // --help and --version exit cleanly; everything else is a usage error.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try
  {
    if (run->parsed())
      return cmd_run(run_cfg);
    if (rates->parsed())
      return cmd_rates(rates_csv, window);
    return cmd_mesh_dump(dump_cfg, level);
  }
  catch (const afem::ConfigError& e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  catch (const std::exception& e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
