// Copyright (c) the afem project contributors.
// SPDX-License-Identifier: Apache-2.0

#include "afem/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>

#include "json.hpp"

#include "afem/errors.hpp"

namespace afem
{
namespace
{

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Complex> square_spectrum(double offset, int count)
{
  std::vector<double> vals;
  for (int m = 1; m <= 12; m++)
    for (int n = 1; n <= 12; n++)
      vals.push_back(M_PI * M_PI * (m * m + n * n) + offset);
  std::sort(vals.begin(), vals.end());
  std::vector<Complex> out;
  for (int i = 0; i < count; i++)
    out.emplace_back(vals[i], 0.0);
  return out;
}

std::string fmt17(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt10(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true)
  {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos)
    {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(const std::string& s, const char* what)
{
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError(std::string("history.csv: malformed ") + what + " '" + s + "'");
  return v;
}

int parse_index(const std::string& s, const char* what)
{
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw ConfigError(std::string("history.csv: malformed ") + what + " '" + s + "'");
  return static_cast<int>(v);
}

double safe_fit(const std::vector<double>& x, const std::vector<double>& y, int window)
{
  if (static_cast<int>(x.size()) < 3 || window < 3)
    return kNaN;
  try
  {
    return fit_rate(x, y, window);
  }
  catch (const Error&)
  {
    return kNaN;
  }
}

} // namespace

ProblemDef registry_get(const std::string& id)
{
  if (id == "kellogg")
  {
    ProblemDef def;
    def.id = "kellogg";
    def.geometry = "kellogg";
    const ElemCoeff strong{{10.0, 0.0, 10.0}, {2.0, 2.0}, 0.0};
    const ElemCoeff weak{{1.0, 0.0, 1.0}, {2.0, 2.0}, 0.0};
    def.coeffs.set(1, strong);
    def.coeffs.set(3, strong);
    def.coeffs.set(2, weak);
    def.coeffs.set(4, weak);
    def.references = {
        {17.714316836537, 0.0}, {20.741585348761, 0.0}, {37.145042894655, 0.0},
        {43.608009384122, 0.0}, {48.640297883881, 0.0}, {49.129389042157, 0.0},
        {63.720910445531, 0.0}, {69.110565445000, 0.0}, {77.939634255303, 0.0},
        {78.541679776972, 0.0}, {94.585833879139, 0.0}, {94.921224922705, 0.0}};
    def.reference_note =
        "interface benchmark; values from high-order adaptive reference runs, "
        "first eigenvalue certified to about 1e-6";
    def.default_n = 0;
    def.default_N = 12;
    return def;
  }
  if (id == "laplace_square")
  {
    ProblemDef def;
    def.id = "laplace_square";
    def.geometry = "unit_square_2x2";
    def.coeffs.set(0, ElemCoeff{});
    def.references = square_spectrum(0.0, 20);
    def.reference_note = "analytic: pi^2 (m^2 + n^2) with multiplicity";
    def.default_N = 1;
    return def;
  }
  if (id == "convection_square")
  {
    ProblemDef def;
    def.id = "convection_square";
    def.geometry = "unit_square_2x2";
    def.coeffs.set(0, ElemCoeff{{1.0, 0.0, 1.0}, {2.0, 2.0}, 0.0});
    // Constant drift shifts the Dirichlet Laplacian spectrum by |b|^2 / 4.
    def.references = square_spectrum(2.0, 20);
    def.reference_note = "analytic: pi^2 (m^2 + n^2) + |b|^2/4";
    def.default_N = 3;
    return def;
  }
  throw ConfigError("unknown problem '" + id +
                    "' (known: kellogg, laplace_square, convection_square)");
}

std::vector<std::string> registry_ids()
{
  return {"kellogg", "laplace_square", "convection_square"};
}

BenchConfig parse_config(const std::string& text)
{
  json doc;
  try
  {
    doc = json::parse(text);
  }
  catch (const json::exception& e)
  {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw ConfigError("config: top level must be an object");

  static const std::set<std::string> known = {
      "problem",     "degree",     "theta",           "n",           "N",
      "shift_re",    "shift_im",   "max_dofs",        "max_levels",  "estimator_floor",
      "adapt_shift", "solver",     "rate_window",     "output_dir"};
  for (const auto& item : doc.items())
    if (!known.count(item.key()))
      throw ConfigError("config: unknown field '" + item.key() + "'");

  auto need = [&](const char* field) -> const json&
  {
    if (!doc.contains(field))
      throw ConfigError(std::string("config: missing required field '") + field + "'");
    return doc.at(field);
  };
  auto as_int = [&](const json& v, const char* field) -> int
  {
    if (!v.is_number_integer())
      throw ConfigError(std::string("config: field '") + field + "' must be an integer");
    return v.get<int>();
  };
  auto as_num = [&](const json& v, const char* field) -> double
  {
    if (!v.is_number())
      throw ConfigError(std::string("config: field '") + field + "' must be a number");
    return v.get<double>();
  };
  auto as_str = [&](const json& v, const char* field) -> std::string
  {
    if (!v.is_string())
      throw ConfigError(std::string("config: field '") + field + "' must be a string");
    return v.get<std::string>();
  };

  BenchConfig cfg;
  cfg.problem = as_str(need("problem"), "problem");
  cfg.degree = as_int(need("degree"), "degree");
  cfg.theta = as_num(need("theta"), "theta");
  if (cfg.degree < 1 || cfg.degree > 3)
    throw ConfigError("config: field 'degree' must be 1, 2 or 3");
  if (!(cfg.theta > 0.0) || cfg.theta > 1.0)
    throw ConfigError("config: field 'theta' must lie in (0, 1]");

  if (doc.contains("n"))
  {
    cfg.n = as_int(doc["n"], "n");
    if (cfg.n < 0)
      throw ConfigError("config: field 'n' must be nonnegative");
  }
  if (doc.contains("N"))
  {
    cfg.N = as_int(doc["N"], "N");
    if (cfg.N < 1)
      throw ConfigError("config: field 'N' must be positive");
  }
  if (doc.contains("shift_re") || doc.contains("shift_im"))
  {
    const double re = doc.contains("shift_re") ? as_num(doc["shift_re"], "shift_re") : 0.0;
    const double im = doc.contains("shift_im") ? as_num(doc["shift_im"], "shift_im") : 0.0;
    cfg.shift = Complex(re, im);
    cfg.shift_set = true;
  }
  if (doc.contains("max_dofs"))
  {
    cfg.max_dofs = as_int(doc["max_dofs"], "max_dofs");
    if (cfg.max_dofs < 1)
      throw ConfigError("config: field 'max_dofs' must be positive");
  }
  if (doc.contains("max_levels"))
  {
    cfg.max_levels = as_int(doc["max_levels"], "max_levels");
    if (cfg.max_levels < 1)
      throw ConfigError("config: field 'max_levels' must be positive");
  }
  if (doc.contains("estimator_floor"))
  {
    cfg.estimator_floor = as_num(doc["estimator_floor"], "estimator_floor");
    if (!(cfg.estimator_floor >= 0.0))
      throw ConfigError("config: field 'estimator_floor' must be nonnegative");
  }
  if (doc.contains("adapt_shift"))
  {
    if (!doc["adapt_shift"].is_boolean())
      throw ConfigError("config: field 'adapt_shift' must be a boolean");
    cfg.adapt_shift = doc["adapt_shift"].get<bool>();
  }
  if (doc.contains("solver"))
  {
    cfg.solver = as_str(doc["solver"], "solver");
    if (cfg.solver != "auto" && cfg.solver != "dense" && cfg.solver != "krylov")
      throw ConfigError("config: field 'solver' must be auto, dense or krylov");
  }
  if (doc.contains("rate_window"))
  {
    cfg.rate_window = as_int(doc["rate_window"], "rate_window");
    if (cfg.rate_window < 3)
      throw ConfigError("config: field 'rate_window' must be at least 3");
  }
  if (doc.contains("output_dir"))
    cfg.output_dir = as_str(doc["output_dir"], "output_dir");
  return cfg;
}

BenchConfig load_config(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError("config: cannot read '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

RunReport run_benchmark(const BenchConfig& cfg, bool write_files, const LevelHook& hook)
{
  RunReport rep;
  rep.problem = registry_get(cfg.problem);
  rep.config = cfg;
  rep.config.n = cfg.n >= 0 ? cfg.n : rep.problem.default_n;
  rep.config.N = cfg.N >= 1 ? cfg.N : rep.problem.default_N;
  if (!cfg.shift_set)
    rep.config.shift = rep.problem.default_shift;
  rep.config.shift_set = true;

  AfemOptions opts;
  opts.n = rep.config.n;
  opts.N = rep.config.N;
  opts.shift = rep.config.shift;
  opts.theta = cfg.theta;
  opts.max_dofs = cfg.max_dofs;
  opts.max_levels = cfg.max_levels;
  opts.estimator_floor = cfg.estimator_floor;
  opts.adapt_shift = cfg.adapt_shift;
  opts.path = cfg.solver == "dense"    ? EigenPath::Dense
              : cfg.solver == "krylov" ? EigenPath::Krylov
                                       : EigenPath::Auto;

  AfemResult res =
      run_afem(Mesh::make(rep.problem.geometry), cfg.degree, rep.problem.coeffs, opts, hook);
  rep.history = std::move(res.history);
  rep.stop_reason = res.stop_reason;

  // Reference errors: the window member j carries eigenvalue number n+1+j.
  const std::vector<Complex>& refs = rep.problem.references;
  rep.errors.resize(rep.history.size());
  for (std::size_t l = 0; l < rep.history.size(); l++)
    for (int j = 0; j < rep.config.N; j++)
    {
      const std::size_t g = static_cast<std::size_t>(rep.config.n) + j;
      rep.errors[l].push_back(g < refs.size()
                                  ? std::abs(rep.history[l].eigenvalues[j] - refs[g])
                                  : kNaN);
    }

  std::vector<double> dofs, est, meanerr;
  bool mean_ok = true;
  for (std::size_t l = 0; l < rep.history.size(); l++)
  {
    dofs.push_back(rep.history[l].n_dof);
    est.push_back(std::sqrt(rep.history[l].eta2 + rep.history[l].eta2_star));
    double m = 0.0;
    for (double e : rep.errors[l])
    {
      if (!std::isfinite(e))
        mean_ok = false;
      m += e;
    }
    meanerr.push_back(m / std::max(1, rep.config.N));
  }
  rep.slope_estimator = safe_fit(dofs, est, cfg.rate_window);
  rep.slope_mean_error = mean_ok ? safe_fit(dofs, meanerr, cfg.rate_window) : kNaN;

  if (write_files)
  {
    const std::filesystem::path dir(cfg.output_dir.empty() ? "." : cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec && !std::filesystem::is_directory(dir))
      throw ConfigError("cannot create output directory '" + dir.string() + "'");
    const auto write = [&](const char* name, const std::string& body)
    {
      std::ofstream out(dir / name, std::ios::binary);
      if (!out)
        throw ConfigError("cannot write '" + (dir / name).string() + "'");
      out << body;
    };
    write("history.csv", format_history_csv(rep));
    write("report.json", format_report_json(rep));
    if (rep.history.size() >= 2)
      write("convergence.svg", emit_plot(rep, -static_cast<double>(cfg.degree)));
  }
  return rep;
}

std::string format_history_csv(const RunReport& r)
{
  std::string out = "level,n_tri,n_dof,n_marked,eta2,eta2_star,osc2,lambda_hat_re,lambda_hat_im";
  for (int j = 0; j < r.config.N; j++)
  {
    const std::string g = std::to_string(r.config.n + 1 + j);
    out += ",lam" + g + "_re,lam" + g + "_im,err" + g;
  }
  out += "\n";
  for (std::size_t l = 0; l < r.history.size(); l++)
  {
    const LevelRecord& rec = r.history[l];
    out += std::to_string(rec.level) + "," + std::to_string(rec.n_tri) + "," +
           std::to_string(rec.n_dof) + "," + std::to_string(rec.n_marked) + "," +
           fmt17(rec.eta2) + "," + fmt17(rec.eta2_star) + "," + fmt17(rec.osc2) + "," +
           fmt17(rec.lambda_hat.real()) + "," + fmt17(rec.lambda_hat.imag());
    for (int j = 0; j < r.config.N; j++)
    {
      out += "," + fmt17(rec.eigenvalues[j].real()) + "," + fmt17(rec.eigenvalues[j].imag());
      const double e = l < r.errors.size() && j < static_cast<int>(r.errors[l].size())
                           ? r.errors[l][j]
                           : kNaN;
      out += ",";
      if (std::isfinite(e))
        out += fmt17(e);
    }
    out += "\n";
  }
  return out;
}

HistoryTable parse_history_csv(const std::string& text)
{
  std::vector<std::string> lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty())
    lines.pop_back();
  if (lines.empty())
    throw ConfigError("history.csv: empty document");

  const std::vector<std::string> head = split(lines[0], ',');
  static const char* fixed[] = {"level",     "n_tri", "n_dof",        "n_marked",
                                "eta2",      "eta2_star", "osc2",     "lambda_hat_re",
                                "lambda_hat_im"};
  if (head.size() < 9 || (head.size() - 9) % 3 != 0)
    throw ConfigError("history.csv: unexpected column count");
  for (int i = 0; i < 9; i++)
    if (head[i] != fixed[i])
      throw ConfigError("history.csv: unexpected header column '" + head[i] + "'");
  const int K = static_cast<int>((head.size() - 9) / 3);

  HistoryTable table;
  for (int j = 0; j < K; j++)
  {
    const std::string& re = head[9 + 3 * j];
    if (re.size() < 6 || re.compare(0, 3, "lam") != 0 ||
        re.compare(re.size() - 3, 3, "_re") != 0)
      throw ConfigError("history.csv: unexpected header column '" + re + "'");
    const int g = parse_index(re.substr(3, re.size() - 6), "eigenvalue index");
    if (j == 0)
      table.first_index = g;
    const std::string gs = std::to_string(g);
    if (g != table.first_index + j || head[10 + 3 * j] != "lam" + gs + "_im" ||
        head[11 + 3 * j] != "err" + gs)
      throw ConfigError("history.csv: unexpected header column '" + head[10 + 3 * j] + "'");
  }

  for (std::size_t li = 1; li < lines.size(); li++)
  {
    const std::vector<std::string> cell = split(lines[li], ',');
    if (cell.size() != head.size())
      throw ConfigError("history.csv: row with wrong column count");
    LevelRecord rec;
    rec.level = parse_index(cell[0], "level");
    rec.n_tri = parse_index(cell[1], "n_tri");
    rec.n_dof = parse_index(cell[2], "n_dof");
    rec.n_marked = parse_index(cell[3], "n_marked");
    rec.eta2 = parse_double(cell[4], "eta2");
    rec.eta2_star = parse_double(cell[5], "eta2_star");
    rec.osc2 = parse_double(cell[6], "osc2");
    rec.lambda_hat = Complex(parse_double(cell[7], "lambda_hat_re"),
                             parse_double(cell[8], "lambda_hat_im"));
    std::vector<double> errs;
    for (int j = 0; j < K; j++)
    {
      rec.eigenvalues.emplace_back(parse_double(cell[9 + 3 * j], "eigenvalue"),
                                   parse_double(cell[10 + 3 * j], "eigenvalue"));
      const std::string& e = cell[11 + 3 * j];
      errs.push_back(e.empty() ? kNaN : parse_double(e, "error"));
    }
    table.records.push_back(std::move(rec));
    table.errors.push_back(std::move(errs));
  }
  return table;
}

std::string format_report_json(const RunReport& r)
{
  json j;
  j["config"] = {{"problem", r.config.problem},
                 {"degree", r.config.degree},
                 {"theta", r.config.theta},
                 {"n", r.config.n},
                 {"N", r.config.N},
                 {"shift_re", r.config.shift.real()},
                 {"shift_im", r.config.shift.imag()},
                 {"max_dofs", r.config.max_dofs},
                 {"max_levels", r.config.max_levels},
                 {"estimator_floor", r.config.estimator_floor},
                 {"adapt_shift", r.config.adapt_shift},
                 {"solver", r.config.solver},
                 {"rate_window", r.config.rate_window},
                 {"output_dir", r.config.output_dir}};
  json refs = json::array();
  for (Complex v : r.problem.references)
    refs.push_back({v.real(), v.imag()});
  j["problem"] = {{"id", r.problem.id},
                  {"geometry", r.problem.geometry},
                  {"references", refs},
                  {"reference_note", r.problem.reference_note}};
  json hist = json::array();
  for (std::size_t l = 0; l < r.history.size(); l++)
  {
    const LevelRecord& rec = r.history[l];
    json jr = {{"level", rec.level},
               {"n_tri", rec.n_tri},
               {"n_dof", rec.n_dof},
               {"n_marked", rec.n_marked},
               {"eta2", rec.eta2},
               {"eta2_star", rec.eta2_star},
               {"osc2", rec.osc2},
               {"lambda_hat_re", rec.lambda_hat.real()},
               {"lambda_hat_im", rec.lambda_hat.imag()},
               {"adjoint_mismatch", rec.adjoint_mismatch},
               {"gram_error", rec.gram_error}};
    jr["separation"] = std::isfinite(rec.separation) ? json(rec.separation) : json();
    json evs = json::array(), errs = json::array();
    for (std::size_t k = 0; k < rec.eigenvalues.size(); k++)
    {
      evs.push_back({rec.eigenvalues[k].real(), rec.eigenvalues[k].imag()});
      const double e = l < r.errors.size() && k < r.errors[l].size() ? r.errors[l][k] : kNaN;
      errs.push_back(std::isfinite(e) ? json(e) : json());
    }
    jr["eigenvalues"] = evs;
    jr["errors"] = errs;
    hist.push_back(jr);
  }
  j["history"] = hist;
  j["slopes"] = {
      {"window", r.config.rate_window},
      {"estimator", std::isfinite(r.slope_estimator) ? json(r.slope_estimator) : json()},
      {"mean_error", std::isfinite(r.slope_mean_error) ? json(r.slope_mean_error) : json()}};
  j["stop_reason"] = r.stop_reason;
  j["environment"] = {
      {"library", "afem"},
      {"version", kVersion},
      {"determinism", "fixed seeds and serial reductions; thread-count independent"}};
  return j.dump(2) + "\n";
}

std::string emit_plot(const RunReport& r, double guide_slope)
{
  if (r.history.size() < 2)
    throw ConfigError("emit_plot: need at least 2 levels");

  struct Series
  {
    std::string label;
    std::vector<double> vals; // aligned with history; nonpositive points skipped
  };
  std::vector<Series> series;
  Series eta{"eta", {}}, etas{"eta*", {}};
  for (const LevelRecord& rec : r.history)
  {
    eta.vals.push_back(std::sqrt(std::max(0.0, rec.eta2)));
    etas.vals.push_back(std::sqrt(std::max(0.0, rec.eta2_star)));
  }
  series.push_back(std::move(eta));
  series.push_back(std::move(etas));
  for (int j = 0; j < r.config.N; j++)
  {
    Series s{"err" + std::to_string(r.config.n + 1 + j), {}};
    bool any = false;
    for (std::size_t l = 0; l < r.history.size(); l++)
    {
      const double e = l < r.errors.size() && j < static_cast<int>(r.errors[l].size())
                           ? r.errors[l][j]
                           : kNaN;
      s.vals.push_back(e);
      any = any || (std::isfinite(e) && e > 0.0);
    }
    if (any)
      series.push_back(std::move(s));
  }

  double xmin = 1e300, xmax = 0.0, ymin = 1e300, ymax = 0.0;
  for (const LevelRecord& rec : r.history)
  {
    xmin = std::min(xmin, static_cast<double>(rec.n_dof));
    xmax = std::max(xmax, static_cast<double>(rec.n_dof));
  }
  for (const Series& s : series)
    for (double v : s.vals)
      if (std::isfinite(v) && v > 0.0)
      {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
  if (!(xmin > 0.0) || xmax <= xmin || ymin > ymax)
    throw NumericalError("emit_plot: degenerate data range");

  // Guide through (xmax, 0.6 ymin) with the requested slope.
  const double g0 = 0.6 * ymin * std::pow(xmin / xmax, guide_slope);
  const double g1 = 0.6 * ymin;
  ymin = std::min(ymin, std::min(g0, g1));
  ymax = std::max(ymax, std::max(g0, g1));
  if (ymax == ymin)
  {
    ymax *= 10.0;
    ymin /= 10.0;
  }

  const double px0 = 70.0, px1 = 580.0, py0 = 545.0, py1 = 20.0;
  const double lx0 = std::log(xmin), lx1 = std::log(xmax);
  const double ly0 = std::log(ymin), ly1 = std::log(ymax);
  const auto px = [&](double x) { return px0 + (std::log(x) - lx0) / (lx1 - lx0) * (px1 - px0); };
  const auto py = [&](double y) { return py0 + (std::log(y) - ly0) / (ly1 - ly0) * (py1 - py0); };

  static const char* palette[16] = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
      "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
      "#98df8a", "#ff9896", "#c5b0d5", "#c49c94"};

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";

  // Decade grid lines and tick labels.
  for (int d = static_cast<int>(std::ceil(std::log10(xmin) - 1e-12));
       d <= static_cast<int>(std::floor(std::log10(xmax) + 1e-12)); d++)
  {
    const double x = px(std::pow(10.0, d));
    svg += "<line class=\"grid\" x1=\"" + fmt10(x) + "\" y1=\"" + fmt10(py1) + "\" x2=\"" +
           fmt10(x) + "\" y2=\"" + fmt10(py0) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text class=\"tick\" x=\"" + fmt10(x) + "\" y=\"562\" text-anchor=\"middle\">1e" +
           std::to_string(d) + "</text>\n";
  }
  for (int d = static_cast<int>(std::ceil(std::log10(ymin) - 1e-12));
       d <= static_cast<int>(std::floor(std::log10(ymax) + 1e-12)); d++)
  {
    const double y = py(std::pow(10.0, d));
    svg += "<line class=\"grid\" x1=\"" + fmt10(px0) + "\" y1=\"" + fmt10(y) + "\" x2=\"" +
           fmt10(px1) + "\" y2=\"" + fmt10(y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text class=\"tick\" x=\"64\" y=\"" + fmt10(y + 4.0) +
           "\" text-anchor=\"end\">1e" + std::to_string(d) + "</text>\n";
  }
  svg += "<rect x=\"70\" y=\"20\" width=\"510\" height=\"525\" fill=\"none\" "
         "stroke=\"black\"/>\n";
  svg += "<text class=\"axis\" x=\"325\" y=\"588\" text-anchor=\"middle\">degrees of "
         "freedom</text>\n";

  // Dashed slope guide; deliberately absent from the legend.
  svg += "<polyline class=\"guide\" fill=\"none\" stroke=\"#888888\" "
         "stroke-dasharray=\"6 4\" points=\"" +
         fmt10(px(xmin)) + "," + fmt10(py(g0)) + " " + fmt10(px(xmax)) + "," + fmt10(py(g1)) +
         "\"/>\n";

  int drawn = 0;
  for (const Series& s : series)
  {
    std::string pts;
    int npts = 0;
    for (std::size_t l = 0; l < r.history.size(); l++)
    {
      const double v = s.vals[l];
      if (!(std::isfinite(v) && v > 0.0))
        continue;
      if (npts)
        pts += " ";
      pts += fmt10(px(r.history[l].n_dof)) + "," + fmt10(py(v));
      npts++;
    }
    if (npts < 2)
      continue;
    const char* color = palette[drawn % 16];
    svg += "<polyline class=\"series\" data-label=\"" + s.label +
           "\" fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
           pts + "\"/>\n";
    const double ly = 40.0 + 18.0 * drawn;
    svg += "<line class=\"key\" x1=\"600\" y1=\"" + fmt10(ly - 4.0) + "\" x2=\"618\" y2=\"" +
           fmt10(ly - 4.0) + "\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
    svg += "<text class=\"legend\" x=\"624\" y=\"" + fmt10(ly) + "\">" + s.label + "</text>\n";
    drawn++;
  }
  svg += "</svg>\n";
  return svg;
}

std::string mesh_to_vtk(const Mesh& mesh)
{
  std::string out = "# vtk DataFile Version 3.0\nafem mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out += "POINTS " + std::to_string(mesh.n_points()) + " double\n";
  for (int v = 0; v < mesh.n_points(); v++)
  {
    const Point2 p = mesh.point(v);
    out += fmt17(p.x) + " " + fmt17(p.y) + " 0\n";
  }
  const int nt = mesh.n_triangles();
  out += "CELLS " + std::to_string(nt) + " " + std::to_string(4 * nt) + "\n";
  for (const Triangle& t : mesh.triangles())
    out += "3 " + std::to_string(t.v[0]) + " " + std::to_string(t.v[1]) + " " +
           std::to_string(t.v[2]) + "\n";
  out += "CELL_TYPES " + std::to_string(nt) + "\n";
  for (int t = 0; t < nt; t++)
    out += "5\n";
  out += "CELL_DATA " + std::to_string(nt) + "\nSCALARS tag int 1\nLOOKUP_TABLE default\n";
  for (const Triangle& t : mesh.triangles())
    out += std::to_string(t.tag) + "\n";
  out += "SCALARS generation int 1\nLOOKUP_TABLE default\n";
  for (const Triangle& t : mesh.triangles())
    out += std::to_string(t.gen) + "\n";
  return out;
}

} // namespace afem
