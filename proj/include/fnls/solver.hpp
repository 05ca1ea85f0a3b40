#pragma once

// Spectral stepper for dc/dt = -i|xi|^alpha c + sum c(xi1) |xi2|^beta c(xi2)
// on a half-line frequency lattice, and the (alpha, beta) growth sweep.
//
// Lattice: frequencies (b * stride + j) * delta for bands b < bands and
// offsets j <= width. One band is the plain uniform lattice {0, delta, ..,
// width * delta}. Sums of lattice frequencies add band and offset separately,
// so the kept set is closed except for offsets past width, which are dropped
// after the tail monitor has checked them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "fnls/csv.hpp"
#include "fnls/errors.hpp"
#include "fnls/params.hpp"

namespace fnls {

struct SpectralLayout {
  double delta = 1.0;
  std::int64_t stride = 0;  // lattice steps between bands
  int bands = 1;
  int width = 0;            // highest kept offset per band

  std::size_t size() const { return static_cast<std::size_t>(bands) * (width + 1); }
  std::size_t slot(int b, int j) const { return static_cast<std::size_t>(b) * (width + 1) + j; }
  double frequency(std::size_t i) const {
    const auto b = static_cast<std::int64_t>(i / (width + 1)), j = static_cast<std::int64_t>(i % (width + 1));
    return static_cast<double>(b * stride + j) * delta;
  }
};

constexpr std::size_t max_spectral_modes = 2048;
constexpr double tail_threshold = 1e-8;

struct SpectralState {
  SpectralLayout layout;
  std::vector<std::complex<double>> c;
  double t = 0.0;
  ExperimentParams params;
  bool nonlinear = true;

  static SpectralState zeros(const SpectralLayout& l, const ExperimentParams& p) {
    if (l.size() > max_spectral_modes)
      throw ResourceError("spectral state needs " + std::to_string(l.size()) + " modes, cap is 2048");
    if (l.bands > 1 && l.stride <= 2 * l.width) throw DomainError("bands overlap: stride must exceed 2 width");
    if (!(l.delta > 0.0)) throw DomainError("lattice spacing must be positive");
    SpectralState s;
    s.layout = l;
    s.c.assign(l.size(), {});
    s.params = p;
    return s;
  }
};

/// (sum <xi>^{2s} |c|^2 / delta)^{1/2}; c = delta * u_hat makes this the
/// Riemann sum of the weighted L2 norm of u_hat.
inline double hs_norm(const SpectralState& s, double sigma) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.c.size(); ++i) {
    const double xi = s.layout.frequency(i);
    acc += std::pow(1.0 + xi * xi, sigma) * std::norm(s.c[i]);
  }
  return std::sqrt(acc / s.layout.delta);
}

namespace detail {

/// sum over kept pairs (b1, j1) + (b2, j2) = (b, j) of c1 |xi2|^beta c2
inline std::vector<std::complex<double>> quadratic_term(const SpectralLayout& l,
                                                        const std::vector<std::complex<double>>& c,
                                                        const std::vector<double>& dweight) {
  std::vector<std::complex<double>> D(c.size()), out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) D[i] = dweight[i] * c[i];
  // nonzero offset range per band; empty bands get lo > hi
  std::vector<int> lo(static_cast<std::size_t>(l.bands), l.width + 1), hi(static_cast<std::size_t>(l.bands), -1);
  for (int b = 0; b < l.bands; ++b)
    for (int j = 0; j <= l.width; ++j)
      if (c[l.slot(b, j)] != std::complex<double>{}) {
        lo[static_cast<std::size_t>(b)] = std::min(lo[static_cast<std::size_t>(b)], j);
        hi[static_cast<std::size_t>(b)] = j;
      }
  for (int b = 0; b < l.bands; ++b)
    for (int j = 0; j <= l.width; ++j) {
      std::complex<double> acc{};
      for (int b1 = 0; b1 <= b; ++b1) {
        const auto u = static_cast<std::size_t>(b1), v = static_cast<std::size_t>(b - b1);
        const int j1_lo = std::max(lo[u], j - hi[v]), j1_hi = std::min(hi[u], j - lo[v]);
        for (int j1 = j1_lo; j1 <= j1_hi; ++j1) acc += c[l.slot(b1, j1)] * D[l.slot(b - b1, j - j1)];
      }
      out[l.slot(b, j)] = acc;
    }
  return out;
}

struct StepPlan {
  std::vector<double> omega, dweight;
  explicit StepPlan(const SpectralState& s) {
    for (std::size_t i = 0; i < s.c.size(); ++i) {
      const double xi = s.layout.frequency(i);
      omega.push_back(std::pow(xi, s.params.alpha));
      dweight.push_back(std::pow(xi, s.params.beta));  // 0^0 = 1: D^0 is the identity
    }
  }
};

inline void check_tail(const SpectralState& s) {
  const auto& l = s.layout;
  double peak = 0.0, tail = 0.0;
  const int cut = (2 * l.width) / 3;
  for (int b = 0; b < l.bands; ++b)
    for (int j = 0; j <= l.width; ++j) {
      const double a = std::abs(s.c[l.slot(b, j)]);
      if (!std::isfinite(a)) throw TruncationError("non-finite mode amplitude", s.t);
      peak = std::max(peak, a);
      if (j > cut) tail = std::max(tail, a);
    }
  if (tail > tail_threshold * peak)
    throw TruncationError("energy reached the truncation edge: tail/max = " + std::to_string(tail / peak), s.t);
}

inline SpectralState step(const SpectralState& s, double dt, const StepPlan& plan) {
  if (!(dt > 0.0)) throw DomainError("step needs dt > 0");
  const std::size_t n = s.c.size();
  // interaction picture d = e^{i omega (t - t0)} c over the step
  auto f = [&](double tau, const std::vector<std::complex<double>>& d) {
    if (!s.nonlinear) return std::vector<std::complex<double>>(n);
    std::vector<std::complex<double>> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = std::polar(1.0, -plan.omega[i] * tau) * d[i];
    auto r = quadratic_term(s.layout, c, plan.dweight);
    for (std::size_t i = 0; i < n; ++i) r[i] *= std::polar(1.0, plan.omega[i] * tau);
    return r;
  };
  std::vector<std::complex<double>> tmp(n);
  const auto k1 = f(0.0, s.c);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = s.c[i] + 0.5 * dt * k1[i];
  const auto k2 = f(0.5 * dt, tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = s.c[i] + 0.5 * dt * k2[i];
  const auto k3 = f(0.5 * dt, tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = s.c[i] + dt * k3[i];
  const auto k4 = f(dt, tmp);
  SpectralState out = s;
  out.t = s.t + dt;
  for (std::size_t i = 0; i < n; ++i)
    out.c[i] = std::polar(1.0, -plan.omega[i] * dt) *
               (s.c[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
  // the monitor sees the fresh tail, then offsets above two thirds are zeroed
  check_tail(out);
  if (s.layout.width >= 3)
    for (int b = 0; b < s.layout.bands; ++b)
      for (int j = (2 * s.layout.width) / 3 + 1; j <= s.layout.width; ++j) out.c[s.layout.slot(b, j)] = {};
  return out;
}

} // namespace detail

/// One integrating-factor RK4 step.
inline SpectralState step(const SpectralState& s, double dt) {
  const detail::StepPlan plan(s);
  return detail::step(s, dt, plan);
}

inline SpectralState evolve(SpectralState s, double t_end, std::size_t steps) {
  if (steps == 0) return s;
  const detail::StepPlan plan(s);
  const double dt = (t_end - s.t) / static_cast<double>(steps);
  for (std::size_t n = 0; n < steps; ++n) s = detail::step(s, dt, plan);
  return s;
}

/// Lattice with cell width h = N^-theta split into q modes, bands at 0, N, 2N.
struct GrowthOptions {
  int modes_per_cell = 2;
  int width = 120;
  int bands = 3;
  double rel_tol = 1e-8;
  std::size_t max_steps = std::size_t{1} << 16;
};

/// Data of the inflation type on the lattice: eps N^{theta/2} on [h, 2h] and
/// eps N^{-s + theta/2} on [N, N + h], sampled at the lattice nodes inside.
inline SpectralState growth_data(const ExperimentParams& p, const GrowthOptions& o = {}) {
  if (p.N < 2) throw DomainError("growth data needs N >= 2");
  const double N = static_cast<double>(p.N), h = p.cell_width();
  const auto stride = static_cast<std::int64_t>(std::llround(o.modes_per_cell * N / h));
  SpectralLayout l{N / static_cast<double>(stride), stride, o.bands, o.width};
  SpectralState s = SpectralState::zeros(l, p);
  const double lo = p.eps * std::pow(N, p.theta / 2.0), hi = p.eps * std::pow(N, -p.s + p.theta / 2.0);
  for (int j = o.modes_per_cell; j <= 2 * o.modes_per_cell; ++j) s.c[l.slot(0, j)] = l.delta * lo;
  if (o.bands > 1)
    for (int j = 0; j <= o.modes_per_cell; ++j) s.c[l.slot(1, j)] = l.delta * hi;
  return s;
}

struct GrowthResult {
  double ratio = 1.0;
  std::size_t steps = 0;
  double change = 0.0;  // last step-doubling change of the ratio
  bool truncated = false;
  double truncation_time = 0.0;
  std::string message;
};

/// ||u(T_obs)||_{H^s} / ||phi||_{H^s}; steps double until the ratio moves by
/// less than rel_tol. Truncation is reported, not thrown.
inline GrowthResult growth_ratio(const ExperimentParams& p, double T_obs, const GrowthOptions& o = {}) {
  if (T_obs < 0.0) throw DomainError("T_obs must be nonnegative");
  const SpectralState s0 = growth_data(p, o);
  GrowthResult r;
  if (T_obs == 0.0) return r;
  const double n0 = hs_norm(s0, p.s);
  try {
    std::size_t n = 16;
    double prev = hs_norm(evolve(s0, T_obs, n), p.s) / n0;
    while (true) {
      if (2 * n > o.max_steps) throw ResourceError("growth ratio: step budget exhausted");
      n *= 2;
      const double next = hs_norm(evolve(s0, T_obs, n), p.s) / n0;
      r.change = std::abs(next - prev) / next;
      prev = next;
      if (r.change < o.rel_tol) break;
    }
    r.ratio = prev;
    r.steps = n;
  } catch (const TruncationError& e) {
    r.truncated = true;
    r.truncation_time = e.time();
    r.message = e.what();
    r.ratio = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

enum class CellRegime { inflation, wellposed, boundary };

inline std::string to_string(CellRegime r) {
  switch (r) {
  case CellRegime::inflation: return "inflation";
  case CellRegime::wellposed: return "wellposed";
  case CellRegime::boundary: return "boundary";
  }
  return "?";
}

/// Side of beta = max((alpha-1)/2, 0), with a relative tie band.
inline CellRegime classify_cell(double alpha, double beta) {
  const double edge = std::max((alpha - 1.0) / 2.0, 0.0);
  if (std::abs(beta - edge) <= 1e-12 * std::max(1.0, edge)) return CellRegime::boundary;
  return beta > edge ? CellRegime::inflation : CellRegime::wellposed;
}

struct SweepCell {
  double alpha = 2.0, beta = 1.0;
};

struct SweepRow {
  double alpha = 0.0, beta = 0.0;
  std::int64_t N = 0;
  double T_obs = 0.0;
  double ratio = 0.0;
  double growth_exponent = 0.0;
  std::string flags;
};

struct SweepOptions {
  std::vector<std::int64_t> Ns{8, 16, 32};
  double T_obs = 1.0;
  unsigned jobs = 1;
  GrowthOptions growth;
};

/// Least-squares slope of log ratio against log N.
inline double growth_exponent(const std::vector<std::int64_t>& Ns, const std::vector<double>& ratios) {
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(Ns.size());
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    mx += std::log(static_cast<double>(Ns[i])) / n;
    my += std::log(ratios[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    const double dx = std::log(static_cast<double>(Ns[i])) - mx;
    sxy += dx * (std::log(ratios[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// One row per (cell, N). Template theta, s, eps are shared by all cells so
/// the data shape is the same on both sides of the boundary.
inline std::vector<SweepRow> phase_diagram_sweep(const std::vector<SweepCell>& grid,
                                                 const ExperimentParams& tmpl, const SweepOptions& o = {}) {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  if (o.Ns.size() < 2) throw ConfigError("sweep needs at least two N values");
  std::vector<std::vector<SweepRow>> per_cell(grid.size());
  auto run = [&](std::size_t ci) {
    const SweepCell cell = grid[ci];
    const CellRegime regime = classify_cell(cell.alpha, cell.beta);
    std::vector<SweepRow> rows;
    std::vector<double> ratios;
    bool bad = false;
    for (std::int64_t N : o.Ns) {
      ExperimentParams p = tmpl;
      p.alpha = cell.alpha;
      p.beta = cell.beta;
      p.N = N;
      SweepRow row{cell.alpha, cell.beta, N, o.T_obs, 0.0, 0.0, to_string(regime)};
      if (regime == CellRegime::wellposed && !validate_regime(p, RegimeTag::wellposed_line).ok)
        row.flags += ";below_wellposed_regularity";
      try {
        const GrowthResult g = growth_ratio(p, o.T_obs, o.growth);
        row.ratio = g.ratio;
        if (g.truncated) {
          row.flags += ";truncated@" + csv::field(g.truncation_time);
          bad = true;
        }
      } catch (const ResourceError&) {
        row.ratio = std::numeric_limits<double>::quiet_NaN();
        row.flags += ";resource";
        bad = true;
      } catch (const DomainError&) {
        row.ratio = std::numeric_limits<double>::quiet_NaN();
        row.flags += ";domain";
        bad = true;
      }
      ratios.push_back(row.ratio);
      rows.push_back(row);
    }
    const double expo = bad ? std::numeric_limits<double>::quiet_NaN() : growth_exponent(o.Ns, ratios);
    for (auto& r : rows) r.growth_exponent = expo;
    per_cell[ci] = std::move(rows);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(grid.size())));
  if (jobs == 1) {
    for (std::size_t ci = 0; ci < grid.size(); ++ci) run(ci);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t ci = w; ci < grid.size(); ci += jobs) run(ci);
      });
  }
  std::vector<SweepRow> out;
  for (auto& rows : per_cell) out.insert(out.end(), rows.begin(), rows.end());
  return out;
}

inline bool cell_completed(const SweepRow& r) { return std::isfinite(r.growth_exponent); }

inline void write_sweep_header(std::ostream& os) {
  os << "# growth probe on a periodic frequency lattice: no local smoothing is reproduced, so\n"
        "# a flat exponent in well-posed cells is an absence of N-growth, not a proof\n";
  csv::row(os, std::string("alpha"), std::string("beta"), std::string("N"), std::string("T_obs"),
           std::string("ratio"), std::string("growth_exponent"), std::string("flags"));
}

inline void write_sweep_row(std::ostream& os, const SweepRow& r) {
  csv::row(os, r.alpha, r.beta, r.N, r.T_obs, r.ratio, r.growth_exponent, r.flags);
}

} // namespace fnls
