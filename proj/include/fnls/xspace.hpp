#pragma once

// Measures on the frequency half-line [0, inf) and the rho gauges that
// measure them against a growth function nu.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fnls/csv.hpp"
#include "fnls/errors.hpp"
#include "fnls/piecewise.hpp"
#include "fnls/quadrature.hpp"

namespace fnls {

using cplx = std::complex<double>;

struct Atom {
  double location = 0.0;
  cplx weight{};
};

/// Complex density known at sorted nodes; its modulus is interpolated
/// linearly between nodes and vanishes outside [front, back].
struct SampledDensity {
  std::vector<double> nodes;
  std::vector<cplx> values;
};

using Density = std::variant<std::monostate, PiecewisePoly, SampledDensity>;

/// Atoms plus a density, all supported in [0, inf).
class HalfLineMeasure {
public:
  HalfLineMeasure() = default;
  HalfLineMeasure(std::vector<Atom> atoms, Density density)
      : atoms_(std::move(atoms)), density_(std::move(density)) {
    for (const Atom& a : atoms_)
      if (!(a.location >= 0.0)) throw DomainError("atom below zero frequency");
    if (const auto* p = std::get_if<PiecewisePoly>(&density_)) {
      if (!p->is_zero() && p->support_lo() < 0.0)
        throw DomainError("density has support below zero frequency");
    } else if (const auto* s = std::get_if<SampledDensity>(&density_)) {
      if (s->nodes.size() != s->values.size()) throw DomainError("sample size mismatch");
      if (!std::is_sorted(s->nodes.begin(), s->nodes.end()))
        throw DomainError("sample nodes must be sorted");
      if (!s->nodes.empty() && s->nodes.front() < 0.0)
        throw DomainError("density has support below zero frequency");
    }
  }

  static HalfLineMeasure from_density(PiecewisePoly f) { return {{}, Density{std::move(f)}}; }
  static HalfLineMeasure from_atoms(std::vector<Atom> atoms) { return {std::move(atoms), {}}; }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const Density& density() const { return density_; }

  /// Right end of the support (0 for the zero measure).
  double support_end() const {
    double end = 0.0;
    for (const Atom& a : atoms_)
      if (a.weight != cplx{}) end = std::max(end, a.location);
    if (const auto* p = std::get_if<PiecewisePoly>(&density_)) {
      if (!p->is_zero()) end = std::max(end, p->support_hi());
    } else if (const auto* s = std::get_if<SampledDensity>(&density_)) {
      if (!s->nodes.empty()) end = std::max(end, s->nodes.back());
    }
    return end;
  }

  /// Points where the total-variation function t -> |F|([0, t)) may kink.
  std::vector<double> feature_points() const {
    std::vector<double> pts;
    for (const Atom& a : atoms_) pts.push_back(a.location);
    if (const auto* p = std::get_if<PiecewisePoly>(&density_)) {
      pts.insert(pts.end(), p->breaks().begin(), p->breaks().end());
    } else if (const auto* s = std::get_if<SampledDensity>(&density_)) {
      pts.insert(pts.end(), s->nodes.begin(), s->nodes.end());
    }
    return pts;
  }

  /// Total variation of the density part on [0, t).
  double density_mass_below(double t) const {
    if (const auto* p = std::get_if<PiecewisePoly>(&density_)) return integral_abs(*p, 0.0, t);
    if (const auto* s = std::get_if<SampledDensity>(&density_)) {
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < s->nodes.size(); ++i) {
        const double a = s->nodes[i], b = s->nodes[i + 1];
        if (a >= t) break;
        const double fa = std::abs(s->values[i]), fb = std::abs(s->values[i + 1]);
        if (b <= t) {
          acc += 0.5 * (b - a) * (fa + fb);
        } else {
          const double ft = fa + (fb - fa) * (t - a) / (b - a);
          acc += 0.5 * (t - a) * (fa + ft);
        }
      }
      return acc;
    }
    return 0.0;
  }

private:
  std::vector<Atom> atoms_;
  Density density_;
};

/// rho^0_t(F): total variation of F on the half-open window [0, t). Atoms
/// sitting exactly at t are excluded.
inline double rho0(const HalfLineMeasure& F, double t) {
  if (!(t > 0.0)) throw DomainError("rho0 needs t > 0");
  double acc = 0.0;
  for (const Atom& a : F.atoms())
    if (a.location < t) acc += std::abs(a.weight);
  return acc + F.density_mass_below(t);
}

/// Total variation on the closed window [0, t]; the limit of rho0 from the
/// right.
inline double rho0_closed(const HalfLineMeasure& F, double t) {
  double acc = 0.0;
  for (const Atom& a : F.atoms())
    if (a.location <= t) acc += std::abs(a.weight);
  return acc + F.density_mass_below(t);
}

enum class GaugeTag { nu0, nu0_tilde, kappa, custom };

/// Growth function [0, inf) -> [0, inf).
struct Gauge {
  std::function<double(double)> fn;
  GaugeTag tag = GaugeTag::custom;
  double parameter = 0.0;

  double operator()(double t) const { return fn(t); }
};

inline double japanese(double x) { return std::sqrt(1.0 + x * x); }

/// nu_0(t) = (int_0^t <xi>^{-2s} dxi)^{1/2}.
inline Gauge nu0(double s) {
  return {[s](double t) {
            if (t <= 0.0) return 0.0;
            if (s == 0.0) return std::sqrt(t);
            const double v =
                adaptive_gauss([s](double x) { return std::pow(1.0 + x * x, -s); }, 0.0, t, 1e-13);
            return std::sqrt(v);
          },
          GaugeTag::nu0, s};
}

/// Lattice version for data on the positive integers:
/// (<floor t + 1>^{2|s|} (t - floor t) + sum_{n=1}^{floor t} <n>^{2|s|})^{1/2}.
inline Gauge nu0_tilde(double s) {
  return {[s](double t) {
            if (t <= 0.0) return 0.0;
            const double fl = std::floor(t);
            const double e = 2.0 * std::abs(s);
            double acc = std::pow(japanese(fl + 1.0), e) * (t - fl);
            for (double n = 1.0; n <= fl; n += 1.0) acc += std::pow(japanese(n), e);
            return std::sqrt(acc);
          },
          GaugeTag::nu0_tilde, s};
}

/// kappa(l) = 1/(1 + l^beta); nonincreasing, used as a multiplier of gauges.
inline Gauge kappa(double beta) {
  return {[beta](double l) { return 1.0 / (1.0 + std::pow(l, beta)); }, GaugeTag::kappa, beta};
}

inline Gauge custom_gauge(std::function<double(double)> fn) {
  return {std::move(fn), GaugeTag::custom, 0.0};
}

inline Gauge product(const Gauge& a, const Gauge& b) {
  return {[a, b](double t) { return a(t) * b(t); }, GaugeTag::custom, 0.0};
}

/// l* = sup nu^{-1}([0, 1]) for a nondecreasing gauge. A gauge that never
/// exceeds 1 up to search_max gets the +inf sentinel and the flag.
struct LStar {
  double value = 0.0;
  bool never_reaches_one = false;
};

inline LStar l_star(const Gauge& nu, double search_max = 1e12) {
  double lo = 0.0, hi = 1.0;
  while (nu(hi) <= 1.0) {
    if (hi >= search_max) return {std::numeric_limits<double>::infinity(), true};
    lo = hi;
    hi = std::min(2.0 * hi, search_max);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (nu(mid) <= 1.0 ? lo : hi) = mid;
  }
  return {lo, false};
}

/// L(l) = <Re phi0> max(l*, l)^beta; +inf under the sentinel.
inline double zero_mode_gauge(double re_phi0, double beta, const LStar& ls, double l) {
  if (ls.never_reaches_one) return std::numeric_limits<double>::infinity();
  return japanese(re_phi0) * std::pow(std::max(ls.value, l), beta);
}

struct GaugeValue {
  double value = 0.0;   // +inf when the gauge cannot control the measure
  double argmax = 0.0;  // window end t realising the supremum
  bool infinite() const { return std::isinf(value); }
};

namespace detail {

inline std::vector<double> gauge_grid(const HalfLineMeasure& F, double l) {
  std::vector<double> grid;
  for (double x : F.feature_points())
    if (x > 0.0 && x <= l) grid.push_back(x);
  const double per_unit = 256.0;
  const double n_uniform = std::min(std::floor(per_unit * l), 65536.0);
  const double step = n_uniform > 0 ? std::max(1.0 / per_unit, l / 65536.0) : l;
  for (double j = 1.0; j <= n_uniform; j += 1.0) grid.push_back(j * step);
  for (int j = 0; j <= 60; ++j) grid.push_back(std::ldexp(l, -j));
  grid.push_back(l);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

} // namespace detail

/// sup_{0 < t <= l} rho0(F, t) / nu(t). The supremum is taken over atoms,
/// density breakpoints, a uniform 1/256 fill and dyadic points, then refined
/// by golden-section search around the best grid value.
inline GaugeValue rho_gauge(const HalfLineMeasure& F, const Gauge& nu, double l) {
  if (!(l > 0.0)) throw DomainError("rho_gauge needs l > 0");
  const double inf = std::numeric_limits<double>::infinity();
  // an atom at the origin is never controlled by a gauge vanishing there
  for (const Atom& a : F.atoms())
    if (a.location == 0.0 && a.weight != cplx{} && nu(0.0) <= 0.0) return {inf, 0.0};

  // ratio at t; atoms located at t count through the right limit t -> t+
  auto ratio = [&](double t, bool closed) {
    const double mass = closed ? rho0_closed(F, t) : rho0(F, t);
    const double g = nu(t);
    if (g <= 0.0) return mass > 0.0 ? inf : 0.0;
    return mass / g;
  };

  const std::vector<double> grid = detail::gauge_grid(F, l);
  GaugeValue best;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    double r = ratio(t, false);
    if (t < l) r = std::max(r, ratio(t, true));
    if (r > best.value) {
      best = {r, t};
      best_i = i;
    }
    if (std::isinf(r)) return best;
  }
  if (best.value == 0.0) return best;

  // golden-section refinement on each neighbouring cell
  constexpr double g = 0.6180339887498949;
  for (int side = 0; side < 2; ++side) {
    double a = side == 0 ? (best_i > 0 ? grid[best_i - 1] : 0.0) : grid[best_i];
    double b = side == 0 ? grid[best_i] : (best_i + 1 < grid.size() ? grid[best_i + 1] : grid[best_i]);
    if (!(b > a)) continue;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = ratio(c, false), fd = ratio(d, false);
    for (int it = 0; it < 80 && b - a > 1e-14 * std::max(1.0, b); ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = ratio(c, false);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = ratio(d, false);
      }
    }
    const double t = 0.5 * (a + b);
    const double r = ratio(t, false);
    if (r > best.value) best = {r, t};
  }
  return best;
}

/// sup over all windows; the ratio cannot grow once t passes the support.
inline GaugeValue rho_gauge_global(const HalfLineMeasure& F, const Gauge& nu) {
  const double end = F.support_end();
  if (end <= 0.0) {
    for (const Atom& a : F.atoms())
      if (a.weight != cplx{} && nu(0.0) <= 0.0)
        return {std::numeric_limits<double>::infinity(), 0.0};
    return {};
  }
  return rho_gauge(F, nu, end);
}

struct EmbeddingReport {
  double gauge = 0.0;     // rho^{0,nu_0} of the density
  double hs_norm = 0.0;   // weighted L2 norm with weight <xi>^{2s}
  double argmax = 0.0;
  bool pass = true;
};

/// Compares the nu_0(s) gauge of a half-line density with its H^s norm.
inline EmbeddingReport check_hs_embedding(const PiecewisePoly& density, double s,
                                          double tol = 1e-8) {
  EmbeddingReport r;
  if (density.is_zero()) return r;
  const auto g = rho_gauge_global(HalfLineMeasure::from_density(density), nu0(s));
  r.gauge = g.value;
  r.argmax = g.argmax;
  r.hs_norm = weighted_L2_norm(density, s);
  r.pass = r.gauge <= r.hs_norm + tol;
  return r;
}

/// Samples a measure's density so that complex multipliers can act on it.
inline HalfLineMeasure sampled(const HalfLineMeasure& F, std::size_t per_piece = 256) {
  const auto* p = std::get_if<PiecewisePoly>(&F.density());
  if (!p) return F;
  SampledDensity s;
  if (!p->is_zero()) {
    const auto& b = p->breaks();
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
      for (std::size_t j = 0; j < per_piece; ++j) {
        const double x = b[i] + (b[i + 1] - b[i]) * static_cast<double>(j) / per_piece;
        // left limit at a jump is dropped; the right value starts the piece
        s.nodes.push_back(x);
        s.values.emplace_back(poly::eval(p->pieces()[i], x - b[i]), 0.0);
      }
    }
    s.nodes.push_back(b.back());
    s.values.emplace_back(poly::eval(p->pieces().back(), b.back() - b[b.size() - 2]), 0.0);
  }
  return {F.atoms(), Density{std::move(s)}};
}

/// e^{i t |xi|^alpha} applied to atoms and (sampled) density.
inline HalfLineMeasure apply_multiplier(const HalfLineMeasure& F, double alpha, double t) {
  HalfLineMeasure S = sampled(F);
  auto phase = [&](double xi) { return std::polar(1.0, t * std::pow(std::abs(xi), alpha)); };
  std::vector<Atom> atoms = S.atoms();
  for (Atom& a : atoms) a.weight *= phase(a.location);
  Density d = S.density();
  if (auto* s = std::get_if<SampledDensity>(&d))
    for (std::size_t i = 0; i < s->nodes.size(); ++i) s->values[i] *= phase(s->nodes[i]);
  return {std::move(atoms), std::move(d)};
}

struct MultiplierReport {
  double max_discrepancy = 0.0;
  std::size_t points = 0;
};

/// Largest change of rho0(., t') over a test grid when the unimodular
/// multiplier acts on F.
inline MultiplierReport multiplier_invariance(const HalfLineMeasure& F, double alpha, double t) {
  const HalfLineMeasure S = sampled(F);
  const HalfLineMeasure M = apply_multiplier(F, alpha, t);
  const double end = std::max(F.support_end(), 1e-3) * 1.25;
  MultiplierReport r;
  for (double tp : detail::gauge_grid(S, end)) {
    r.max_discrepancy = std::max(r.max_discrepancy, std::abs(rho0(M, tp) - rho0(S, tp)));
    ++r.points;
  }
  return r;
}

struct ConvolutionGaugeRow {
  double l = 0.0;
  double lhs = 0.0;  // rho_l with gauge kappa * nu1 of F * G
  double rhs = 0.0;  // product of rho_l with gauge nu1 of F and of G
  double margin() const { return rhs - lhs; }
  bool holds() const { return lhs <= rhs * (1.0 + 1e-12); }
};

struct ConvolutionGaugeReport {
  std::vector<ConvolutionGaugeRow> rows;
  bool support_side_condition = true;
  bool all_hold() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.holds(); });
  }
};

/// Audits rho^{kappa nu1}_l(F*G) <= rho^{nu1}_l(F) rho^{nu1}_l(G) on a grid of
/// windows; nu1 is supplied by the caller.
inline ConvolutionGaugeReport convolution_gauge_check(const PiecewisePoly& F,
                                                      const PiecewisePoly& G, const Gauge& nu1,
                                                      double beta,
                                                      const std::vector<double>& l_grid) {
  ConvolutionGaugeReport rep;
  const PiecewisePoly FG = convolve(F, G);
  if (!F.is_zero() && !G.is_zero())
    rep.support_side_condition =
        std::abs(FG.support_lo() - (F.support_lo() + G.support_lo())) <=
        1e-12 * std::max(1.0, FG.support_lo());
  const auto mF = HalfLineMeasure::from_density(F);
  const auto mG = HalfLineMeasure::from_density(G);
  const auto mFG = HalfLineMeasure::from_density(FG);
  const Gauge weighted = product(kappa(beta), nu1);
  for (double l : l_grid) {
    ConvolutionGaugeRow row;
    row.l = l;
    row.lhs = rho_gauge(mFG, weighted, l).value;
    row.rhs = rho_gauge(mF, nu1, l).value * rho_gauge(mG, nu1, l).value;
    rep.rows.push_back(row);
  }
  return rep;
}

inline void write_csv(std::ostream& os, const ConvolutionGaugeReport& rep) {
  os << "# convolution gauge audit: lhs uses kappa*nu1 on F*G, rhs is the product of nu1 gauges\n";
  csv::row(os, std::string("l"), std::string("lhs"), std::string("rhs"), std::string("margin"));
  for (const auto& r : rep.rows) csv::row(os, r.l, r.lhs, r.rhs, r.margin());
}

inline nlohmann::json to_json(const HalfLineMeasure& F) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const Atom& a : F.atoms())
    atoms.push_back({{"x", a.location}, {"re", a.weight.real()}, {"im", a.weight.imag()}});
  nlohmann::json density = nullptr;
  if (const auto* p = std::get_if<PiecewisePoly>(&F.density())) {
    density = to_json(*p);
    density["kind"] = "piecewise";
  } else if (const auto* s = std::get_if<SampledDensity>(&F.density())) {
    std::vector<double> re, im;
    for (const cplx& v : s->values) {
      re.push_back(v.real());
      im.push_back(v.imag());
    }
    density = {{"kind", "samples"}, {"nodes", s->nodes}, {"re", re}, {"im", im}};
  }
  return {{"atoms", atoms}, {"density", density}};
}

inline HalfLineMeasure measure_from_json(const nlohmann::json& j) {
  try {
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms"))
      atoms.push_back({a.at("x").get<double>(), {a.at("re").get<double>(), a.at("im").get<double>()}});
    Density d;
    const auto& dj = j.at("density");
    if (!dj.is_null()) {
      const auto kind = dj.at("kind").get<std::string>();
      if (kind == "piecewise") {
        d = piecewise_from_json(dj);
      } else if (kind == "samples") {
        SampledDensity s;
        s.nodes = dj.at("nodes").get<std::vector<double>>();
        const auto re = dj.at("re").get<std::vector<double>>();
        const auto im = dj.at("im").get<std::vector<double>>();
        if (re.size() != s.nodes.size() || im.size() != s.nodes.size())
          throw ConfigError("measure JSON: sample arrays differ in length");
        for (std::size_t i = 0; i < re.size(); ++i) s.values.emplace_back(re[i], im[i]);
        d = std::move(s);
      } else {
        throw ConfigError("measure JSON: unknown density kind " + kind);
      }
    }
    return {std::move(atoms), std::move(d)};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("measure JSON: ") + e.what());
  }
}

} // namespace fnls
