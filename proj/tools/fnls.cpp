// fnls: command-line driver for the inflation experiments, the invariant
// suite and the (alpha, beta) sweep. Exit codes: 0 success, 1 check failure,
// 2 config error, 3 resource error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fnls/checks.hpp"
#include "fnls/iterates.hpp"
#include "fnls/params.hpp"
#include "fnls/solver.hpp"
#include "fnls/torus.hpp"

namespace fs = std::filesystem;
using namespace fnls;

namespace {

constexpr int exit_ok = 0, exit_check = 1, exit_config = 2, exit_resource = 3;

struct Common {
  std::string config;
  std::optional<double> alpha, beta, s, sigma, eps, theta, T;
  std::optional<int> k;
  std::vector<std::int64_t> Ns;
  std::string out;
  unsigned jobs = 1;
  bool overwrite = false;
  bool json = false;
  bool verbose = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "params JSON file")->check(CLI::ExistingFile);
  app->add_option("--alpha", c.alpha, "dispersion order");
  app->add_option("--beta", c.beta, "derivative order of the nonlinearity");
  app->add_option("--s", c.s, "data regularity");
  app->add_option("--sigma", c.sigma, "measured regularity");
  app->add_option("--eps", c.eps, "size parameter");
  app->add_option("--N", c.Ns, "frequency scale(s)");
  app->add_option("--theta", c.theta, "support-width exponent");
  app->add_option("--k", c.k, "iterate depth");
  app->add_option("--T", c.T, "final time");
  app->add_option("--out", c.out, "output directory (default $FNLS_OUT or .)");
  app->add_option("--jobs", c.jobs, "worker cap")->check(CLI::PositiveNumber);
  app->add_flag("--overwrite", c.overwrite, "replace existing outputs");
  app->add_flag("--json", c.json, "machine-readable summary on stdout");
  app->add_flag("-v,--verbose", c.verbose, "progress on stderr");
}

struct Loaded {
  ParamsSpec spec;
  nlohmann::json config = nlohmann::json::object();
  bool has(const Common& c, const char* key, bool flag_given) const {
    return flag_given || config.contains(key);
  }
};

Loaded load(const Common& c) {
  Loaded l;
  if (!c.config.empty()) {
    std::ifstream in(c.config);
    try {
      l.config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("cannot parse ") + c.config + ": " + e.what());
    }
    merge_params_json(l.spec, l.config);
  }
  if (c.alpha) l.spec.alpha = *c.alpha;
  if (c.beta) l.spec.beta = *c.beta;
  if (c.s) l.spec.s = *c.s;
  if (c.sigma) l.spec.sigma = *c.sigma;
  if (c.eps) l.spec.eps = *c.eps;
  if (c.theta) l.spec.theta = *c.theta;
  if (c.k) l.spec.k = *c.k;
  if (c.T) l.spec.T = *c.T;
  if (c.Ns.size() == 1) l.spec.N = c.Ns.front();
  return l;
}

std::vector<std::int64_t> frequency_list(const Common& c, const Loaded& l, std::vector<std::int64_t> fallback) {
  if (!c.Ns.empty()) return c.Ns;
  try {
    if (l.config.contains("Ns")) return l.config["Ns"].get<std::vector<std::int64_t>>();
    if (l.config.contains("N")) return {l.config["N"].get<std::int64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("Ns: ") + e.what());
  }
  return fallback;
}

fs::path out_dir(const Common& c) {
  std::string dir = c.out;
  if (dir.empty()) {
    const char* env = std::getenv("FNLS_OUT");
    dir = env && *env ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

/// Writes text to dir/name; an existing file needs --overwrite.
void write_output(const Common& c, const std::string& name, const std::string& text) {
  const fs::path path = out_dir(c) / name;
  if (fs::exists(path) && !c.overwrite)
    throw ConfigError(path.string() + " exists; pass --overwrite to replace it");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os << text;
  if (!os) throw ConfigError("cannot write " + path.string());
}

void soft_warn_eps(double eps) {
  if (eps >= 0.25) std::cerr << "warning: eps = " << eps << " is not small; running anyway\n";
}

int require_flags(CLI::App* app, const std::vector<std::pair<const char*, bool>>& needed) {
  std::string missing;
  for (const auto& [name, ok] : needed)
    if (!ok) missing += std::string(" --") + name;
  if (missing.empty()) return exit_ok;
  std::cerr << "missing required flag(s):" << missing << "\n\n" << app->help();
  return exit_config;
}

int cmd_torus(CLI::App* app, const Common& c, bool trajectory, int kmodes) {
  const Loaded l = load(c);
  if (int rc = require_flags(app, {{"eps", l.has(c, "eps", c.eps.has_value())},
                                   {"beta", l.has(c, "beta", c.beta.has_value())}}))
    return rc;
  soft_warn_eps(l.spec.eps);
  ExperimentParams p;
  p.alpha = l.spec.alpha;
  p.beta = l.spec.beta;
  p.s = l.spec.s;
  p.sigma = l.spec.sigma;
  p.eps = l.spec.eps;
  const TorusInflationReport r = inflation_experiment_torus(p);
  std::ostringstream csv_out;
  write_torus_header(csv_out);
  write_torus_row(csv_out, r);
  write_output(c, "torus_inflation.csv", csv_out.str());
  if (trajectory) {
    // desk-scale trajectory at the first --N (default 16) up to the torus time
    p.N = frequency_list(c, l, {16}).front();
    const TorusData d = torus_data(p);
    const double T = choose_time_torus(static_cast<double>(p.N), p.s, p.sigma, p.beta);
    std::ostringstream tr;
    write_trajectory(tr, ode_oracle(d, kmodes, T));
    write_output(c, "torus_trajectory.csv", tr.str());
  }
  const bool ok = r.all() && r.conclusion;
  if (c.json) {
    std::cout << nlohmann::ordered_json{{"command", "torus-inflation"}, {"N", r.N},         {"T", r.T},
                                        {"phi_norm", r.phi_norm},       {"growth", r.growth},
                                        {"data_small", r.data_small},   {"time_small", r.time_small},
                                        {"growth_large", r.growth_large}, {"ok", ok}}
                     .dump(2)
              << "\n";
  } else {
    std::cout << "smallest N = " << r.N << ", T = " << csv::field(r.T) << ", ||phi|| = " << csv::field(r.phi_norm)
              << ", growth = " << csv::field(r.growth) << (ok ? "  [all thresholds met]" : "  [threshold missed]")
              << "\n";
  }
  return ok ? exit_ok : exit_check;
}

int cmd_line(CLI::App* app, const Common& c) {
  const Loaded l = load(c);
  if (int rc = require_flags(app, {{"eps", l.has(c, "eps", c.eps.has_value())}})) return rc;
  soft_warn_eps(l.spec.eps);
  std::ostringstream csv_out;
  write_line_inflation_header(csv_out);
  bool ok = true;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::int64_t N : frequency_list(c, l, {8, 16, 32})) {
    ParamsSpec spec = l.spec;
    spec.N = N;
    spec.tag = RegimeTag::inflation_line;
    if (!c.T && !l.config.contains("T")) spec.T.reset();  // 1/log N per N
    const ExperimentParams p = resolve(spec);
    IterateOptions io;
    io.jobs = c.jobs;
    if (c.verbose) std::cerr << "line inflation N = " << N << " k = " << p.k << "\n";
    const LineInflationRow r = inflation_experiment_line(p, io);
    write_line_inflation_row(csv_out, r);
    const bool row_ok = r.tail <= p.eps && r.phi_norm <= 2.0 * p.eps;
    ok = ok && row_ok;
    rows.push_back({{"N", N}, {"band_norm", r.band_norm}, {"prediction", r.prediction}, {"tail", r.tail},
                    {"ok", row_ok}});
  }
  write_output(c, "line_inflation.csv", csv_out.str());
  if (c.json)
    std::cout << nlohmann::ordered_json{{"command", "line-inflation"}, {"rows", rows}, {"ok", ok}}.dump(2) << "\n";
  else
    std::cout << "line inflation: " << rows.size() << " rows, " << (ok ? "tail and data bounds met" : "bound missed")
              << "\n";
  return ok ? exit_ok : exit_check;
}

int cmd_checks(const Common& c, const std::vector<std::string>& corrupt) {
  const Loaded l = load(c);
  CheckOptions o;
  o.alpha = l.spec.alpha;
  o.beta = l.spec.beta;
  o.eps = l.spec.eps;
  o.jobs = c.jobs;
  o.corrupt.insert(corrupt.begin(), corrupt.end());
  const auto results = run_checks(o);
  const auto report = checks_report(results);
  const std::string text = report.dump(2) + "\n";
  write_output(c, "checks.json", text);
  if (c.json) {
    std::cout << text;
  } else {
    for (const auto& r : results) std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "\n";
  }
  if (!report["all_pass"].get<bool>()) {
    std::cerr << "failed checks:";
    for (const auto& f : report["failures"]) std::cerr << " " << f.get<std::string>();
    std::cerr << "\n";
    return exit_check;
  }
  return exit_ok;
}

std::vector<SweepCell> parse_grid(const std::string& text) {
  std::vector<SweepCell> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("grid cell '" + item + "' is not alpha:beta");
    try {
      grid.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::exception&) {
      throw ConfigError("grid cell '" + item + "' is not numeric");
    }
  }
  return grid;
}

int cmd_sweep(const Common& c, const std::optional<std::string>& grid_flag, std::optional<double> T_obs) {
  const Loaded l = load(c);
  std::vector<SweepCell> grid;
  if (grid_flag) {
    grid = parse_grid(*grid_flag);
  } else if (l.config.contains("grid")) {
    try {
      for (const auto& cell : l.config["grid"]) grid.push_back({cell.at(0).get<double>(), cell.at(1).get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
  } else {
    grid = {{2.0, 1.0}, {4.0, 1.0}, {3.0, 1.0}};
  }
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  ExperimentParams tmpl;
  tmpl.s = l.spec.s;
  tmpl.sigma = l.spec.sigma;
  tmpl.eps = l.has(c, "eps", c.eps.has_value()) ? l.spec.eps : 0.5;
  tmpl.theta = l.spec.theta.value_or(1.5);
  SweepOptions o;
  o.Ns = frequency_list(c, l, {8, 16, 32});
  o.T_obs = T_obs.value_or(l.config.value("T_obs", 1.0));
  o.jobs = c.jobs;
  const auto rows = phase_diagram_sweep(grid, tmpl, o);
  std::ostringstream csv_out;
  write_sweep_header(csv_out);
  std::size_t complete = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    write_sweep_row(csv_out, rows[i]);
    if (i % o.Ns.size() == 0 && cell_completed(rows[i])) ++complete;
  }
  write_output(c, "sweep.csv", csv_out.str());
  const double frac = static_cast<double>(complete) / static_cast<double>(grid.size());
  if (c.json) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rows.size(); i += o.Ns.size())
      cells.push_back({{"alpha", rows[i].alpha}, {"beta", rows[i].beta},
                       {"growth_exponent", std::isfinite(rows[i].growth_exponent) ? nlohmann::ordered_json(rows[i].growth_exponent) : nlohmann::ordered_json(nullptr)},
                       {"flags", rows[i].flags}});
    std::cout << nlohmann::ordered_json{{"command", "sweep"}, {"cells", cells}, {"completed_fraction", frac}}.dump(2)
              << "\n";
  } else {
    for (std::size_t i = 0; i < rows.size(); i += o.Ns.size())
      std::cout << "alpha " << rows[i].alpha << " beta " << rows[i].beta << ": exponent "
                << csv::field(rows[i].growth_exponent) << " (" << rows[i].flags << ")\n";
  }
  return frac >= 0.9 ? exit_ok : exit_check;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"fnls: norm inflation experiments for quadratic derivative fractional NLS"};
  app.require_subcommand(1, 1);

  Common torus_c, line_c, checks_c, sweep_c;
  auto* torus = app.add_subcommand("torus-inflation", "smallest N meeting the torus thresholds");
  add_common(torus, torus_c);
  bool trajectory = false;
  int kmodes = 8;
  torus->add_flag("--trajectory", trajectory, "also write a desk-scale mode trajectory");
  torus->add_option("--kmodes", kmodes, "modes kept in the trajectory")->check(CLI::Range(2, 64));

  auto* line = app.add_subcommand("line-inflation", "band restricted iterate norms on the line");
  add_common(line, line_c);

  auto* checks = app.add_subcommand("checks", "run the invariant suite");
  add_common(checks, checks_c);
  std::vector<std::string> corrupt;
  checks->add_option("--corrupt", corrupt, "inject a fault: ak, catalan, support, torus");

  auto* sweep = app.add_subcommand("sweep", "growth exponent over an (alpha, beta) grid");
  add_common(sweep, sweep_c);
  std::optional<std::string> grid;
  std::optional<double> T_obs;
  sweep->add_option("--grid", grid, "cells as alpha:beta,alpha:beta");
  sweep->add_option("--T-obs", T_obs, "observation time");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    if (*torus) return cmd_torus(torus, torus_c, trajectory, kmodes);
    if (*line) return cmd_line(line, line_c);
    if (*checks) return cmd_checks(checks_c, corrupt);
    if (*sweep) return cmd_sweep(sweep_c, grid, T_obs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const RegimeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return exit_resource;
  } catch (const TruncationError& e) {
    std::cerr << "resource error: " << e.what() << " at t = " << e.time() << "\n";
    return exit_resource;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  }
  return exit_config;
}
