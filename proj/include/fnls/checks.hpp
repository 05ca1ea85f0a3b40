#pragma once

// The invariant suite behind `fnls checks`: each check returns a named
// pass/fail record with a JSON detail block. Output is deterministic (fixed
// seeds, no timings) so reruns give byte-identical reports.

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnls/iterates.hpp"
#include "fnls/recurrence.hpp"
#include "fnls/torus.hpp"
#include "fnls/xspace.hpp"

namespace fnls {

struct CheckResult {
  std::string name;
  bool pass = false;
  nlohmann::ordered_json detail;
};

/// Fault names accepted by --corrupt.
inline const std::set<std::string>& corruption_names() {
  static const std::set<std::string> names{"ak", "catalan", "support", "torus"};
  return names;
}

struct CheckOptions {
  double alpha = 2.0;  // line checks run at this (alpha, beta), theta from the window midpoint
  double beta = 1.0;
  double eps = 0.1;
  std::set<std::string> corrupt;
  unsigned jobs = 1;
};

namespace detail {

/// Sum over ordered full binary trees with k leaves of the product of node
/// weights (2 k_right)^beta / (k_node - 1); enumerated tree by tree.
inline std::vector<double> tree_sums(int k, double beta, std::map<int, std::vector<double>>& memo) {
  if (auto it = memo.find(k); it != memo.end()) return it->second;
  std::vector<double> out;
  if (k == 1) {
    out.push_back(1.0);
  } else {
    for (int k1 = 1; k1 < k; ++k1) {
      const int k2 = k - k1;
      const double w = std::pow(2.0 * k2, beta) / (k - 1);
      const auto left = tree_sums(k1, beta, memo), right = tree_sums(k2, beta, memo);
      for (double a : left)
        for (double b : right) out.push_back(w * a * b);
    }
  }
  memo[k] = out;
  return out;
}

inline PiecewisePoly seeded_density(std::mt19937_64& rng) {
  // integer draws keep the stream identical across standard libraries
  auto u = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<double> b{u() * 2.0};
  std::vector<Poly> p;
  const int pieces = 1 + static_cast<int>(u() * 4);
  for (int i = 0; i < pieces; ++i) {
    b.push_back(b.back() + 0.1 + 1.5 * u());
    Poly q(1 + static_cast<std::size_t>(u() * 3));
    for (double& c : q) c = 4.0 * u() - 2.0;
    p.push_back(q);
  }
  return {b, p};
}

inline ExperimentParams line_check_params(const CheckOptions& o, std::int64_t N) {
  ExperimentParams p;
  p.alpha = o.alpha;
  p.beta = o.beta;
  p.eps = o.eps;
  p.N = N;
  p.theta = choose_theta(o.alpha, o.beta);
  p.k = 3;
  p.T = choose_time_line(static_cast<double>(N));
  p.tag = RegimeTag::inflation_line;
  return p;
}

} // namespace detail

inline CheckResult check_support(const CheckOptions& o) {
  CheckResult r{"support_containment", true, {}};
  for (std::int64_t N : {8, 16}) {
    IterateOptions io;
    io.jobs = o.jobs;
    const auto p = detail::line_check_params(o, N);
    auto fam = iterate_full(p, 4, io);
    if (o.corrupt.count("support")) {
      // plant the peak value in the last node, which lies off the support
      cplx peak{};
      for (const cplx& z : fam.v[3])
        if (std::abs(z) > std::abs(peak)) peak = z;
      fam.v[3].back() = peak;
    }
    const auto rep = support_check(fam);
    const auto low = support_check(iterate_low(p, 4, io));
    const double worst = std::max(rep.max_outside_relative, low.max_outside_relative);
    r.pass = r.pass && worst < 1e-14;
    r.detail[std::to_string(N)] = {{"max_outside_relative", worst}, {"cells_checked", rep.cells_checked}};
  }
  return r;
}

inline CheckResult check_low_band_bound(const CheckOptions& o) {
  CheckResult r{"low_band_bound", true, {}};
  for (std::int64_t N : {8, 16}) {
    IterateOptions io;
    io.jobs = o.jobs;
    const auto rep = low_band_bound_check(iterate_low(detail::line_check_params(o, N), 4, io));
    r.pass = r.pass && rep.violations == 0;
    r.detail[std::to_string(N)] = {{"violations", rep.violations}, {"nodes", rep.nodes_checked},
                                   {"max_ratio", rep.max_ratio}};
  }
  return r;
}

inline CheckResult check_factorial(const CheckOptions& o) {
  CheckResult r{"factorial_bound", true, {}};
  for (double beta : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    auto a = compute_ak(beta, 40);
    if (o.corrupt.count("ak")) a.log_values[5] += 20.0;
    const auto rep = check_factorial_bound(a);
    r.pass = r.pass && rep.pass();
    r.detail[csv::field(beta)] = {{"first_violation", rep.first_violation}};
  }
  return r;
}

inline CheckResult check_ak_oracle(const CheckOptions& o) {
  CheckResult r{"ak_tree_oracle", true, {}};
  for (double beta : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    auto a = compute_ak(beta, 12);
    if (o.corrupt.count("ak")) a.log_values[5] += 20.0;
    std::map<int, std::vector<double>> memo;
    double worst = 0.0;
    for (int k = 1; k <= 12; ++k) {
      double ref = 0.0;
      for (double v : detail::tree_sums(k, beta, memo)) ref += v;
      worst = std::max(worst, std::abs(a.value(k) - ref) / ref);
    }
    r.pass = r.pass && worst <= 1e-12;
    r.detail[csv::field(beta)] = {{"max_relative_error", worst}};
  }
  return r;
}

inline CheckResult check_catalan(const CheckOptions& o) {
  CheckResult r{"catalan_majorant", true, {}};
  for (double C0 : {0.5, 1.0, 2.0, 4.0}) {
    const double a1 = o.corrupt.count("catalan") ? -1.0 : 1.7;
    try {
      const auto rep = catalan_majorant_check(C0, a1, 40);
      r.pass = r.pass && rep.pass();
      r.detail[csv::field(C0)] = {{"first_violation", rep.first_violation}};
    } catch (const DomainError& e) {
      r.pass = false;
      r.detail[csv::field(C0)] = {{"error", e.what()}};
    }
  }
  return r;
}

inline CheckResult check_embedding(const CheckOptions&) {
  CheckResult r{"hs_embedding", true, {}};
  std::mt19937_64 rng(17);
  std::size_t failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 20; ++trial) {
    const double s = -1.0 + 0.15 * trial;
    const auto rep = check_hs_embedding(detail::seeded_density(rng), s);
    if (!rep.pass) ++failures;
    worst_margin = std::min(worst_margin, rep.hs_norm - rep.gauge);
  }
  r.pass = failures == 0;
  r.detail = {{"densities", 20}, {"failures", failures}, {"min_margin", worst_margin}};
  return r;
}

inline CheckResult check_multiplier(const CheckOptions&) {
  CheckResult r{"multiplier_invariance", true, {}};
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    HalfLineMeasure G({{1.0, {0.0, 1.0}}}, Density{detail::seeded_density(rng)});
    worst = std::max(worst, multiplier_invariance(G, 0.5 + trial, 3.3).max_discrepancy);
  }
  r.pass = worst <= 1e-14;
  r.detail = {{"max_discrepancy", worst}};
  return r;
}

inline CheckResult check_atom_sentinel(const CheckOptions&) {
  CheckResult r{"atom_at_zero_sentinel", true, {}};
  const auto A = HalfLineMeasure::from_atoms({{0.0, {1.0, 0.0}}});
  bool all_inf = true;
  for (const Gauge& g : {nu0(0.0), nu0(1.0), nu0_tilde(2.0)}) all_inf = all_inf && rho_gauge_global(A, g).infinite();
  const auto ls = l_star(custom_gauge([](double t) { return 1.0 - std::exp(-t); }));
  r.pass = all_inf && ls.never_reaches_one;
  r.detail = {{"atom_gauge_infinite", all_inf}, {"bounded_gauge_lstar_flagged", ls.never_reaches_one}};
  return r;
}

inline CheckResult check_torus_growth(const CheckOptions& o) {
  CheckResult r{"torus_growth_oracle", true, {}};
  double worst = 0.0;
  for (std::int64_t N : {8, 16, 32})
    for (double beta : {0.5, 1.0, 2.0}) {
      ExperimentParams p;
      p.N = N;
      p.beta = beta;
      TorusData d = torus_data(p);
      const auto orc = ode_oracle(d, 2, 0.2);
      if (o.corrupt.count("torus")) d.phi0 *= 1.01;
      const double ref = std::abs(d.phiN) * std::exp(0.2 * d.phi0.real() * std::pow(double(N), beta));
      worst = std::max(worst, std::abs(std::abs(orc.coeffs.back()[1]) - ref) / ref);
    }
  r.pass = worst <= 1e-9;
  r.detail = {{"max_relative_error", worst}};
  return r;
}

inline CheckResult check_torus_iterates(const CheckOptions&) {
  CheckResult r{"torus_iterates_vs_oracle", true, {}};
  ExperimentParams p;
  p.N = 8;
  TorusData d = torus_data(p);
  std::vector<cplx> init(5, cplx{});
  init[0] = d.phi0;
  init[1] = d.phiN;
  const auto orc = ode_oracle(d, init, 0.05, 8, 1e-10, 4);
  const auto v = cascade_iterates(d, 4, orc.times);
  double worst = 0.0;
  for (std::size_t j = 1; j < orc.times.size(); ++j)
    for (std::size_t m = 1; m <= 4; ++m)
      worst = std::max(worst, std::abs(v[m - 1][j] - orc.coeffs[j][m]) / std::abs(orc.coeffs[j][m]));
  r.pass = worst <= 1e-9;
  r.detail = {{"max_relative_error", worst}};
  return r;
}

inline CheckResult check_torus_thresholds(const CheckOptions&) {
  CheckResult r{"torus_thresholds", true, {}};
  for (double eps : {0.1, 0.05}) {
    const auto rep = torus_report(smallest_torus_N(eps, 0.0, 0.0, 1.0), eps, 0.0, 0.0, 1.0);
    const bool ok = rep.all() && rep.conclusion && rep.previous_fails;
    r.pass = r.pass && ok;
    r.detail[csv::field(eps)] = {{"N", rep.N}, {"T", rep.T}, {"growth", rep.growth}, {"ok", ok}};
  }
  return r;
}

inline CheckResult check_tail_sum(const CheckOptions& o) {
  CheckResult r{"tail_sum", true, {}};
  for (std::int64_t N : {8, 16, 32}) {
    const auto p = detail::line_check_params(o, N);
    const auto t = tail_sum_bound(p, p.sigma);
    r.pass = r.pass && t.value <= p.eps;
    r.detail[std::to_string(N)] = {{"tail", t.value}};
  }
  return r;
}

inline std::vector<CheckResult> run_checks(const CheckOptions& o) {
  for (const auto& c : o.corrupt)
    if (!corruption_names().count(c)) throw ConfigError("unknown --corrupt target: " + c);
  return {check_support(o),      check_low_band_bound(o), check_factorial(o),
          check_ak_oracle(o),    check_catalan(o),        check_embedding(o),
          check_multiplier(o),   check_atom_sentinel(o),  check_torus_growth(o),
          check_torus_iterates(o), check_torus_thresholds(o), check_tail_sum(o)};
}

inline nlohmann::ordered_json checks_report(const std::vector<CheckResult>& results) {
  nlohmann::ordered_json j;
  j["schema"] = "fnls-checks/1";
  bool all = true;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array(), failures = nlohmann::ordered_json::array();
  for (const auto& r : results) {
    all = all && r.pass;
    checks.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    if (!r.pass) failures.push_back(r.name);
  }
  j["all_pass"] = all;
  j["checks"] = checks;
  j["failures"] = failures;
  return j;
}

} // namespace fnls
