// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fnls/checks.hpp"
#include "fnls/iterates.hpp"
#include "fnls/recurrence.hpp"
#include "fnls/solver.hpp"
#include "fnls/torus.hpp"
#include "fnls/xspace.hpp"

using namespace fnls;

#ifndef FNLS_CLI_PATH
#define FNLS_CLI_PATH ""
#endif

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

ExperimentParams line_params(std::int64_t N, int k = 3) {
  ExperimentParams p;
  p.alpha = 2.0;
  p.beta = 1.0;
  p.eps = 0.1;
  p.N = N;
  p.theta = choose_theta(2.0, 1.0);
  p.k = k;
  p.T = 1.0 / std::log(static_cast<double>(N));
  p.tag = RegimeTag::inflation_line;
  return p;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(x.size());
  my /= double(y.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    den += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return num / den;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

Outcome crit_torus_growth() {
  Outcome o;
  double worst = 0.0;
  for (std::int64_t N : {8, 16, 32})
    for (double beta : {0.5, 1.0, 2.0})
      for (double t : {0.1, 0.2}) {
        ExperimentParams p;
        p.N = N;
        p.beta = beta;
        const TorusData d = torus_data(p);
        const auto orc = ode_oracle(d, 2, t);
        // data straight from the definition: phi0 = 1/log N, phiN = <N>^{-s}/log N with s = 0
        const double ref = (1.0 / std::log(double(N))) *
                           std::exp(t * (1.0 / std::log(double(N))) * std::pow(double(N), beta));
        worst = std::max(worst, std::abs(std::abs(orc.coeffs.back()[1]) - ref) / ref);
      }
  o.pass = worst <= 1e-9;
  o.detail = "max rel err " + fmt(worst);
  return o;
}

Outcome crit_torus_thresholds() {
  using big = boost::multiprecision::cpp_bin_float_50;
  Outcome o;
  for (double eps : {0.1, 0.05}) {
    ExperimentParams p;
    p.eps = eps;
    p.beta = 1.0;
    const auto rep = inflation_experiment_torus(p);
    const big N = big(rep.N), lg = log(N), e = big(eps);
    const bool data = 2 / lg < e;
    const bool time = lg * lg / N < e;
    const bool grow = N / lg > 1 / e;
    // |v(T,N)| = e^{T N / log N} / log N with T = (log N)^2/N, so <N>^0 |v| = N / log N
    const big amp = exp((lg * lg / N) * N / lg) / lg;
    const bool identity = abs(amp - N / lg) < big("1e-40") * (N / lg);
    const big Nm = N - 1, lm = log(Nm);
    const bool minimal = !(2 / lm < e && lm * lm / Nm < e && Nm / lm > 1 / e);
    o.pass = o.pass && data && time && grow && identity && minimal && rep.all();
    o.detail += "eps " + fmt(eps) + ": N=" + std::to_string(rep.N) + " ";
  }
  return o;
}

Outcome crit_support() {
  Outcome o;
  double worst = 0.0;
  for (std::int64_t N : {8, 16}) {
    const auto p = line_params(N);
    for (int K = 1; K <= 4; ++K) {
      worst = std::max(worst, support_check(iterate_full(p, K)).max_outside_relative);
      worst = std::max(worst, support_check(iterate_low(p, K)).max_outside_relative);
    }
  }
  o.pass = worst < 1e-14;
  o.detail = "max relative off-support " + fmt(worst);
  return o;
}

Outcome crit_low_band() {
  Outcome o;
  std::size_t violations = 0, nodes = 0;
  for (std::int64_t N : {8, 16}) {
    const auto rep = low_band_bound_check(iterate_low(line_params(N), 4));
    violations += rep.violations;
    nodes += rep.nodes_checked;
  }
  o.pass = violations == 0 && nodes > 0;
  o.detail = std::to_string(violations) + " violations over " + std::to_string(nodes) + " nodes";
  return o;
}

Outcome crit_leading_term() {
  Outcome o;
  const double theta = choose_theta(2.0, 1.0);
  const double bound = -std::min(theta + 1.0, (theta + 1.0) * 1.0) + 0.5;
  for (int k : {2, 3}) {
    std::vector<double> Ns, dev;
    for (std::int64_t N : {8, 16, 32}) {
      Ns.push_back(double(N));
      dev.push_back(leading_deviation(line_params(N), k, 1e-6).relative_l2);
    }
    const double sl = slope(Ns, dev);
    o.pass = o.pass && dev[0] > dev[1] && dev[1] > dev[2] && sl <= bound;
    o.detail += "k=" + std::to_string(k) + " slope " + fmt(sl) + " ";
  }
  o.detail += "(bound " + fmt(bound) + ")";
  return o;
}

// brute force: one product of internal-node weights per ordered full binary tree with k leaves
std::vector<double> tree_products(int k, double beta) {
  if (k == 1) return {1.0};
  std::vector<double> out;
  for (int k1 = 1; k1 < k; ++k1) {
    const double w = std::pow(2.0 * (k - k1), beta) / (k - 1);
    const auto left = tree_products(k1, beta), right = tree_products(k - k1, beta);
    for (double a : left)
      for (double b : right) out.push_back(w * a * b);
  }
  return out;
}

Outcome crit_recurrence() {
  Outcome o;
  double worst = 0.0;
  for (double beta : {0.25, 0.5, 1.0, 1.5, 2.0}) {
    o.pass = o.pass && check_factorial_bound(compute_ak(beta, 40)).pass();
    o.pass = o.pass && catalan_majorant_check(std::pow(2.0, beta), 1.0, 40).pass();
    const auto a = compute_ak(beta, 12);
    for (int k = 1; k <= 12; ++k) {
      double ref = 0.0;
      for (double v : tree_products(k, beta)) ref += v;
      worst = std::max(worst, std::abs(a.value(k) - ref) / ref);
    }
  }
  o.pass = o.pass && worst <= 1e-12;
  o.detail = "tree oracle max rel err " + fmt(worst);
  return o;
}

Outcome crit_xspace() {
  Outcome o;
  CheckOptions opt;
  const auto e = check_embedding(opt), m = check_multiplier(opt);
  const auto A = HalfLineMeasure::from_atoms({{0.0, {1.0, 0.0}}});
  const bool sentinel = rho_gauge_global(A, nu0(0.0)).infinite();
  o.pass = e.pass && m.pass && sentinel;
  o.detail = "embedding failures " + e.detail["failures"].dump() + ", multiplier " +
             m.detail["max_discrepancy"].dump() +
             ", atom sentinel " + (sentinel ? "inf" : "finite");
  return o;
}

Outcome crit_line_inflation() {
  Outcome o;
  std::vector<double> Ns, norm;
  const double theta = choose_theta(2.0, 1.0);
  const double sigma = 0.0, s = 0.0, beta = 1.0;
  const double predicted = sigma - s + (-theta / 2 + beta) * (3 - 1);
  for (std::int64_t N : {8, 16, 32}) {
    const auto p = line_params(N);
    const auto r = inflation_experiment_line(p);
    const double tail = tail_sum_bound(p, p.sigma).value;
    o.pass = o.pass && tail <= p.eps;
    Ns.push_back(double(N));
    norm.push_back(r.band_norm / (std::pow(p.eps, 3) * std::pow(std::log(double(N)), -2)));
  }
  const double sl = slope(Ns, norm);
  o.pass = o.pass && std::abs(sl - predicted) <= 0.4;
  o.detail = "slope " + fmt(sl) + " vs " + fmt(predicted);
  return o;
}

Outcome crit_sweep() {
  Outcome o;
  ExperimentParams tmpl;
  tmpl.eps = 0.5;
  tmpl.theta = 1.5;
  SweepOptions so;
  const auto rows = phase_diagram_sweep({{2.0, 1.0}, {4.0, 1.0}}, tmpl, so);
  const double e21 = rows.front().growth_exponent, e41 = rows.back().growth_exponent;
  o.pass = e21 > 0.0 && std::abs(e41) < 0.3;
  o.detail = "(2,1) " + fmt(e21) + ", (4,1) " + fmt(e41);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome crit_determinism() {
  Outcome o;
  const auto a = checks_report(run_checks({})).dump(2), b = checks_report(run_checks({})).dump(2);
  o.pass = a == b;
  const std::string cli = FNLS_CLI_PATH;
  if (!cli.empty()) {
    const auto dir = std::filesystem::temp_directory_path() / "fnls_acceptance";
    std::filesystem::create_directories(dir);
    std::string outs[2];
    for (int i = 0; i < 2; ++i) {
      const auto out = dir / ("checks" + std::to_string(i) + ".json");
      const std::string cmd = "\"" + cli + "\" checks --json --overwrite --out \"" + dir.string() + "\" > \"" +
                              out.string() + "\"";
      o.pass = o.pass && std::system(cmd.c_str()) == 0;
      outs[i] = slurp(out);
    }
    o.pass = o.pass && !outs[0].empty() && outs[0] == outs[1];
    std::filesystem::remove_all(dir);
    o.detail = "in-process and CLI reports byte-identical";
  } else {
    o.detail = "in-process reports byte-identical";
  }
  return o;
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {1, "torus exact growth", 10, crit_torus_growth},
      {2, "torus thresholds", 1, crit_torus_thresholds},
      {3, "support of the iterates", 120, crit_support},
      {4, "low band pointwise bound", 120, crit_low_band},
      {5, "leading term deviation decay", 600, crit_leading_term},
      {6, "recurrence bounds and tree oracle", 30, crit_recurrence},
      {7, "half-space audits", 30, crit_xspace},
      {8, "line inflation scaling", 900, crit_line_inflation},
      {9, "phase diagram direction", 600, crit_sweep},
      {10, "checks report determinism", 600, crit_determinism},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && secs < c.limit_s;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %d: %s [%s; %.2f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
