#pragma once

// Torus mode cascade for data on the modes {0, N}. Mode m N is fed only by
// lower modes, and the zero mode is conserved, so the first mode grows by an
// exact exponential factor.

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fnls/csv.hpp"
#include "fnls/errors.hpp"
#include "fnls/params.hpp"

namespace fnls {

using cplx = std::complex<double>;

/// Coefficients u(x) = sum_n u_hat(n) e^{inx}; only phi0 = u_hat(0) and
/// phiN = u_hat(N) are nonzero initially.
struct TorusData {
  double alpha = 2.0;
  double beta = 1.0;
  std::int64_t N = 16;
  cplx phi0{};
  cplx phiN{};
};

/// c_m(t) = u_hat(t, m N) for m = 0..K at each stored time.
struct ModeCascade {
  std::int64_t N = 0;
  int K = 0;
  cplx phi0{};
  std::vector<double> times;
  std::vector<std::vector<cplx>> coeffs;  // coeffs[time][m]
  std::size_t steps = 0;                  // RK4 steps used (oracle only)
  double achieved_change = 0.0;           // last halving change of c_1 (oracle only)
};

inline double japanese_bracket(double x) { return std::sqrt(1.0 + x * x); }

/// (1 + <N>^{-s} e^{iNx}) / log N.
inline TorusData torus_data(const ExperimentParams& p) {
  if (p.N < 3) throw DomainError("torus data needs N >= 3");
  const double N = static_cast<double>(p.N), L = std::log(N);
  return {p.alpha, p.beta, p.N, cplx(1.0 / L, 0.0),
          cplx(std::pow(japanese_bracket(N), -p.s) / L, 0.0)};
}

inline ModeCascade build_phi_torus(const ExperimentParams& p, int K = 8) {
  if (K < 1) throw DomainError("cascade needs K >= 1");
  const TorusData d = torus_data(p);
  ModeCascade c;
  c.N = p.N;
  c.K = K;
  c.phi0 = d.phi0;
  c.times = {0.0};
  std::vector<cplx> v(static_cast<std::size_t>(K) + 1, cplx{});
  v[0] = d.phi0;
  v[1] = d.phiN;
  c.coeffs.push_back(std::move(v));
  return c;
}

/// (sum <n>^{2s} |c_n|^2)^{1/2} over the populated modes.
inline double torus_hs_norm(const std::vector<cplx>& c, double N, double s) {
  double acc = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m)
    acc += std::pow(1.0 + std::pow(m * N, 2.0), s) * std::norm(c[m]);
  return std::sqrt(acc);
}

/// e^{-itN^alpha + t phi0 N^beta} phiN
inline cplx cascade_closed_form_first_mode(const TorusData& d, double t) {
  const double N = static_cast<double>(d.N);
  return std::exp(cplx(0.0, -t * std::pow(N, d.alpha)) + t * d.phi0 * std::pow(N, d.beta)) * d.phiN;
}

namespace detail {

inline std::vector<cplx> cascade_rhs(const TorusData& d, const std::vector<cplx>& c) {
  const std::size_t K = c.size() - 1;
  const double N = static_cast<double>(d.N);
  std::vector<cplx> r(K + 1, cplx{});
  // zero mode: |0|^beta kills every term
  for (std::size_t m = 1; m <= K; ++m)
    for (std::size_t m2 = 1; m2 <= m; ++m2)
      r[m] += c[m - m2] * std::pow(static_cast<double>(m2) * N, d.beta) * c[m2];
  return r;
}

/// RK4 in d_m = e^{i (mN)^alpha t} c_m over n steps; returns c at the
/// sample times t_end * j / samples.
inline std::vector<std::vector<cplx>> rk4_integrating_factor(const TorusData& d,
                                                             std::vector<cplx> c0, double t_end,
                                                             std::size_t n, std::size_t samples) {
  const std::size_t K = c0.size() - 1;
  const double N = static_cast<double>(d.N);
  std::vector<double> omega(K + 1);
  for (std::size_t m = 0; m <= K; ++m) omega[m] = std::pow(static_cast<double>(m) * N, d.alpha);
  auto to_c = [&](const std::vector<cplx>& dv, double t) {
    std::vector<cplx> c(K + 1);
    for (std::size_t m = 0; m <= K; ++m) c[m] = std::polar(1.0, -omega[m] * t) * dv[m];
    return c;
  };
  auto f = [&](double t, const std::vector<cplx>& dv) {
    auto r = cascade_rhs(d, to_c(dv, t));
    for (std::size_t m = 0; m <= K; ++m) r[m] *= std::polar(1.0, omega[m] * t);
    return r;
  };
  const double h = t_end / static_cast<double>(n);
  std::vector<cplx> y = c0;  // d_m(0) = c_m(0)
  std::vector<std::vector<cplx>> out{c0};
  const std::size_t every = n / samples;
  std::vector<cplx> tmp(K + 1);
  for (std::size_t step = 0; step < n; ++step) {
    const double t = h * static_cast<double>(step);
    const auto k1 = f(t, y);
    for (std::size_t m = 0; m <= K; ++m) tmp[m] = y[m] + 0.5 * h * k1[m];
    const auto k2 = f(t + 0.5 * h, tmp);
    for (std::size_t m = 0; m <= K; ++m) tmp[m] = y[m] + 0.5 * h * k2[m];
    const auto k3 = f(t + 0.5 * h, tmp);
    for (std::size_t m = 0; m <= K; ++m) tmp[m] = y[m] + h * k3[m];
    const auto k4 = f(t + h, tmp);
    for (std::size_t m = 0; m <= K; ++m) y[m] += h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]);
    if ((step + 1) % every == 0) out.push_back(to_c(y, h * static_cast<double>(step + 1)));
  }
  return out;
}

} // namespace detail

constexpr std::size_t max_rk4_steps = std::size_t{1} << 24;

/// Truncated system dc_m/dt = -i (mN)^alpha c_m + sum_{m1+m2=m} c_{m1} (m2 N)^beta c_{m2}
/// from arbitrary initial modes 0..K. The step count doubles until c_1(t_end)
/// moves by less than rel_tol; watch_modes > 1 extends that test to modes
/// 1..watch_modes (each relative to its own size).
inline ModeCascade ode_oracle(const TorusData& d, std::vector<cplx> initial, double t_end,
                              std::size_t samples = 64, double rel_tol = 1e-10,
                              std::size_t watch_modes = 1) {
  if (initial.size() < 3) throw DomainError("ode oracle needs at least modes 0..2");
  if (!(d.beta > 0.0)) throw DomainError("ode oracle needs beta > 0");
  if (!(t_end > 0.0)) throw DomainError("ode oracle needs t_end > 0");
  if (samples == 0) samples = 1;
  std::size_t n = samples;
  auto prev = detail::rk4_integrating_factor(d, initial, t_end, n, samples);
  double change = std::numeric_limits<double>::infinity();
  while (true) {
    if (2 * n > max_rk4_steps)
      throw ResourceError("ode oracle: step budget exhausted at relative change " +
                          std::to_string(change));
    n *= 2;
    auto next = detail::rk4_integrating_factor(d, initial, t_end, n, samples);
    change = 0.0;
    for (std::size_t m = 1; m <= std::min(watch_modes, initial.size() - 1); ++m) {
      const cplx a = prev.back()[m], b = next.back()[m];
      if (b != cplx{}) change = std::max(change, std::abs(a - b) / std::abs(b));
    }
    prev = std::move(next);
    for (const cplx& c : prev.back())
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) change = std::numeric_limits<double>::infinity();
    if (!std::isfinite(change)) throw ResourceError("ode oracle: trajectory left the double range");
    if (change < rel_tol) break;
  }
  ModeCascade out;
  out.N = d.N;
  out.K = static_cast<int>(initial.size()) - 1;
  out.phi0 = initial[0];
  for (std::size_t j = 0; j <= samples; ++j)
    out.times.push_back(t_end * static_cast<double>(j) / static_cast<double>(samples));
  out.coeffs = std::move(prev);
  out.steps = n;
  out.achieved_change = change;
  return out;
}

inline ModeCascade ode_oracle(const TorusData& d, int Kmodes, double t_end, std::size_t samples = 64) {
  if (Kmodes < 2) throw DomainError("ode oracle needs Kmodes >= 2");
  std::vector<cplx> init(static_cast<std::size_t>(Kmodes) + 1, cplx{});
  init[0] = d.phi0;
  init[1] = d.phiN;
  return ode_oracle(d, std::move(init), t_end, samples);
}

/// Sum of c t^p e^{r t}.
struct ExpPolyTerm {
  cplx c;
  int p = 0;
  cplx r;
};
using ExpPoly = std::vector<ExpPolyTerm>;

inline cplx evaluate(const ExpPoly& f, double t) {
  cplx acc{};
  for (const auto& term : f) acc += term.c * std::pow(t, term.p) * std::exp(term.r * t);
  return acc;
}

namespace detail {

/// e^{lam t} int_0^t s^p e^{(r - lam) s} ds as exponential polynomial terms.
/// Near resonance (|d| t_scale small) a Taylor series in d replaces the
/// closed form, which would cancel catastrophically.
inline void duhamel_term(ExpPoly& out, cplx c, int p, cplx r, cplx lam, double t_scale) {
  const cplx d = r - lam;
  if (std::abs(d) * t_scale < 0.5) {
    cplx dn{1.0, 0.0};
    double fact = 1.0;
    for (int n = 0; n < 40; ++n) {
      if (n > 0) {
        dn *= d;
        fact *= n;
      }
      out.push_back({c * dn / (fact * (p + n + 1)), p + n + 1, lam});
    }
    return;
  }
  // int_0^t s^p e^{ds} = e^{dt} sum_j (-1)^{p-j} p!/j! t^j / d^{p-j+1} - (-1)^p p!/d^{p+1}
  double pfact = 1.0;
  for (int i = 2; i <= p; ++i) pfact *= i;
  double jfact = 1.0;
  for (int j = 0; j <= p; ++j) {
    if (j > 0) jfact *= j;
    const double sign = ((p - j) % 2 == 0) ? 1.0 : -1.0;
    out.push_back({c * sign * pfact / jfact / std::pow(d, p - j + 1), j, r});
  }
  const double sign = (p % 2 == 0) ? 1.0 : -1.0;
  out.push_back({-c * sign * pfact / std::pow(d, p + 1), 0, lam});
}

} // namespace detail

/// v^(k)(t, kN) for k = 1..Kdepth as exponential polynomials, with v^(1) the
/// modified linear flow e^{-itN^alpha + t phi0 N^beta} phiN and
/// v^(k) = sum_{k1+k2=k} int_0^t e^{(t-t') lam_k} v^(k1) (k2 N)^beta v^(k2) dt',
/// lam_k = -i (kN)^alpha + phi0 (kN)^beta. t_scale is the largest time of
/// interest and selects the resonance fallback.
inline std::vector<ExpPoly> cascade_iterates(const TorusData& d, int Kdepth, double t_scale) {
  if (Kdepth < 1) throw DomainError("cascade iterates need Kdepth >= 1");
  if (Kdepth > 12) throw ResourceError("cascade iterates: Kdepth above 12 explodes the term count");
  const double N = static_cast<double>(d.N);
  auto lam = [&](int k) {
    return cplx(0.0, -std::pow(k * N, d.alpha)) + d.phi0 * std::pow(k * N, d.beta);
  };
  std::vector<ExpPoly> v{{{d.phiN, 0, lam(1)}}};
  for (int k = 2; k <= Kdepth; ++k) {
    ExpPoly next;
    for (int k1 = 1; k1 < k; ++k1) {
      const int k2 = k - k1;
      const double w = std::pow(k2 * N, d.beta);
      for (const auto& a : v[static_cast<std::size_t>(k1 - 1)])
        for (const auto& b : v[static_cast<std::size_t>(k2 - 1)])
          detail::duhamel_term(next, a.c * b.c * w, a.p + b.p, a.r + b.r, lam(k), t_scale);
    }
    v.push_back(std::move(next));
  }
  return v;
}

/// Values of v^(k)(t_j, kN) at the given times, [k-1][j].
inline std::vector<std::vector<cplx>> cascade_iterates(const TorusData& d, int Kdepth,
                                                       const std::vector<double>& times) {
  double t_scale = 0.0;
  for (double t : times) t_scale = std::max(t_scale, t);
  const auto polys = cascade_iterates(d, Kdepth, t_scale);
  std::vector<std::vector<cplx>> out;
  for (const auto& f : polys) {
    std::vector<cplx> row;
    for (double t : times) row.push_back(evaluate(f, t));
    out.push_back(std::move(row));
  }
  return out;
}

using big_float = boost::multiprecision::cpp_bin_float_50;

struct TorusInflationReport {
  std::int64_t N = 0;
  double eps = 0.0;
  double T = 0.0;
  double phi_norm = 0.0;       // sqrt(2)/log N
  double growth = 0.0;         // <N>^sigma |v(T, N)|, algebraic form
  double growth_exp_form = 0.0;  // same through the exponential factor
  double n_over_log = 0.0;     // N / log N
  bool data_small = false;     // 2/log N < eps (and ||phi|| <= 2/log N)
  bool time_small = false;     // T < eps
  bool growth_large = false;   // N/log N > 1/eps
  bool conclusion = false;     // ||phi|| < eps, T < eps, growth > 1/eps
  bool previous_fails = false; // N - 1 violates at least one threshold
  bool all() const { return data_small && time_small && growth_large; }
};

namespace detail {

struct Thresholds {
  bool data, time, growth;
};

inline Thresholds torus_thresholds(std::int64_t Ni, double eps, double s, double sigma, double beta) {
  const big_float N(Ni), L = log(N), e(eps);
  const big_float T = big_float(std::abs(sigma - s) + 1.0) * L * L / pow(N, big_float(beta));
  return {big_float(2) / L < e, T < e, N / L > big_float(1) / e};
}

} // namespace detail

/// Smallest N >= 3 meeting 2/log N < eps, T < eps and N/log N > 1/eps, with
/// T = (|sigma-s|+1)(log N)^2/N^beta. T is unimodal in log N (concave log), so
/// the feasible set past e^{2/eps} is an up-set after at most one gap.
inline std::int64_t smallest_torus_N(double eps, double s, double sigma, double beta) {
  if (!(eps > 0.0) || !(beta > 0.0)) throw DomainError("need eps > 0 and beta > 0");
  auto ok = [&](std::int64_t n) {
    const auto t = detail::torus_thresholds(n, eps, s, sigma, beta);
    return t.data && t.time && t.growth;
  };
  constexpr std::int64_t cap = std::int64_t{1} << 62;
  // first index where a monotone predicate holds, searching upward from a
  auto first_from = [&](std::int64_t a, auto pred) {
    if (pred(a)) return a;
    std::int64_t b = a;
    while (!pred(b)) {
      if (b >= cap) throw ResourceError("smallest N exceeds the 64-bit range");
      a = b;
      b = std::min(cap, 2 * b);
    }
    while (b - a > 1) {
      const std::int64_t mid = a + (b - a) / 2;
      (pred(mid) ? b : a) = mid;
    }
    return b;
  };
  const long double lo_real = std::exp(2.0L / eps);
  if (lo_real > static_cast<long double>(cap)) throw ResourceError("smallest N exceeds the 64-bit range");
  // 2/log N < eps and N/log N > 1/eps are both monotone in N >= 3
  const std::int64_t lo = first_from(
      std::max<std::int64_t>(3, static_cast<std::int64_t>(std::floor(lo_real)) - 1), [&](std::int64_t n) {
        const auto t = detail::torus_thresholds(n, eps, s, sigma, beta);
        return t.data && t.growth;
      });
  if (ok(lo)) return lo;
  // T rises up to e^{2/beta} and falls after; failing at lo means it fails up
  // to the turn, so search the falling branch
  const long double turn = std::floor(std::exp(2.0L / beta));
  if (turn > static_cast<long double>(cap)) throw ResourceError("smallest N exceeds the 64-bit range");
  return first_from(std::max(lo, static_cast<std::int64_t>(turn)), ok);
}

/// Closed-form report at a given N (T from the torus time choice).
inline TorusInflationReport torus_report(std::int64_t Ni, double eps, double s, double sigma,
                                         double beta) {
  if (Ni < 3) throw DomainError("torus experiment needs N >= 3");
  TorusInflationReport r;
  r.N = Ni;
  r.eps = eps;
  const big_float N(Ni), L = log(N), jb = sqrt(1 + N * N);
  const big_float gap(std::abs(sigma - s));
  const big_float T = (gap + 1) * L * L / pow(N, big_float(beta));
  const big_float phi0 = 1 / L;
  const big_float v_T = exp(T * phi0 * pow(N, big_float(beta))) * pow(jb, big_float(-s)) / L;
  const big_float growth_exp = pow(jb, big_float(sigma)) * v_T;
  const big_float growth_alg = pow(jb, big_float(sigma - s)) * pow(N, gap + 1) / L;
  const big_float phi_norm = sqrt(big_float(2)) / L;
  r.T = static_cast<double>(T);
  r.phi_norm = static_cast<double>(phi_norm);
  r.growth = static_cast<double>(growth_alg);
  r.growth_exp_form = static_cast<double>(growth_exp);
  r.n_over_log = static_cast<double>(N / L);
  const auto th = detail::torus_thresholds(Ni, eps, s, sigma, beta);
  r.data_small = th.data && phi_norm <= 2 / L;
  r.time_small = th.time;
  r.growth_large = th.growth;
  r.conclusion = phi_norm < big_float(eps) && T < big_float(eps) && growth_alg > 1 / big_float(eps);
  if (Ni > 3) {
    const auto prev = detail::torus_thresholds(Ni - 1, eps, s, sigma, beta);
    r.previous_fails = !(prev.data && prev.time && prev.growth);
  } else {
    r.previous_fails = true;
  }
  return r;
}

inline TorusInflationReport inflation_experiment_torus(const ExperimentParams& p) {
  const std::int64_t N = smallest_torus_N(p.eps, p.s, p.sigma, p.beta);
  return torus_report(N, p.eps, p.s, p.sigma, p.beta);
}

inline void write_torus_header(std::ostream& os) {
  os << "# torus inflation: closed forms in 50-digit arithmetic; T = (|sigma-s|+1)(log N)^2/N^beta\n";
  csv::row(os, std::string("eps"), std::string("N"), std::string("T"), std::string("phi_norm"),
           std::string("growth"), std::string("growth_exp_form"), std::string("N_over_logN"),
           std::string("data_small"), std::string("time_small"), std::string("growth_large"),
           std::string("conclusion"), std::string("previous_fails"));
}

inline void write_torus_row(std::ostream& os, const TorusInflationReport& r) {
  csv::row(os, r.eps, r.N, r.T, r.phi_norm, r.growth, r.growth_exp_form, r.n_over_log,
           r.data_small, r.time_small, r.growth_large, r.conclusion, r.previous_fails);
}

inline void write_trajectory(std::ostream& os, const ModeCascade& c) {
  csv::row(os, std::string("t"), std::string("m"), std::string("re"), std::string("im"));
  for (std::size_t j = 0; j < c.times.size(); ++j)
    for (std::size_t m = 0; m < c.coeffs[j].size(); ++m)
      csv::row(os, c.times[j], m, c.coeffs[j][m].real(), c.coeffs[j][m].imag());
}

} // namespace fnls
