#pragma once

// Picard iterates of the real-line problem
//   d_t u + i D^alpha u = u D^beta u
// for the two-bump datum, on the lattice cells [jN + ih, jN + (i+1)h], h = N^-theta.
// Every iterate is smooth inside each cell, so a cell carries values at
// 12 Gauss nodes and is interpolated barycentrically.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "fnls/csv.hpp"
#include "fnls/errors.hpp"
#include "fnls/params.hpp"
#include "fnls/piecewise.hpp"
#include "fnls/quadrature.hpp"
#include "fnls/recurrence.hpp"

namespace fnls {

using cplx = std::complex<double>;

constexpr std::size_t cell_points = 12;
constexpr int max_iterate_index = 5;
constexpr std::size_t max_grid_nodes = 4096;
constexpr std::size_t max_time_intervals = 4096;

struct Interval {
  double lo = 0.0, hi = 0.0;
};

/// Union over j1 + j2 = k of [j2 N + j1 h, j2 N + (k + j1) h], merged.
inline std::vector<Interval> support_uk(int k, double N, double theta) {
  if (k < 1) throw DomainError("support_uk needs k >= 1");
  const double h = std::pow(N, -theta);
  std::vector<Interval> out;
  for (int j1 = 0; j1 <= k; ++j1) {
    const int j2 = k - j1;
    out.push_back({j2 * N + j1 * h, j2 * N + (k + j1) * h});
  }
  std::sort(out.begin(), out.end(), [](auto a, auto b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& iv : out) {
    if (!merged.empty() && iv.lo <= merged.back().hi)
      merged.back().hi = std::max(merged.back().hi, iv.hi);
    else
      merged.push_back(iv);
  }
  return merged;
}

struct Cell {
  int j = 0;  // multiple of N
  int i = 0;  // multiple of h
};

class CellGrid {
public:
  CellGrid() = default;
  CellGrid(double N, double h, std::vector<Cell> cells) : N_(N), h_(h), cells_(std::move(cells)) {
    for (std::size_t c = 0; c < cells_.size(); ++c) index_[{cells_[c].j, cells_[c].i}] = c;
    const auto& r = gauss_rule<cell_points>();
    for (std::size_t a = 0; a < cell_points; ++a) {
      double w = 1.0;
      for (std::size_t b = 0; b < cell_points; ++b)
        if (b != a) w *= r.nodes[a] - r.nodes[b];
      bary_[a] = 1.0 / w;
    }
  }

  double N() const { return N_; }
  double h() const { return h_; }
  std::size_t size() const { return cells_.size(); }
  std::size_t num_nodes() const { return cells_.size() * cell_points; }
  const Cell& cell(std::size_t c) const { return cells_[c]; }
  double lo(std::size_t c) const { return cells_[c].j * N_ + cells_[c].i * h_; }
  double hi(std::size_t c) const { return cells_[c].j * N_ + (cells_[c].i + 1) * h_; }
  double node(std::size_t c, std::size_t a) const {
    return lo(c) + 0.5 * h_ * (gauss_rule<cell_points>().nodes[a] + 1.0);
  }
  double weight(std::size_t a) const { return 0.5 * h_ * gauss_rule<cell_points>().weights[a]; }

  std::optional<std::size_t> index(int j, int i) const {
    auto it = index_.find({j, i});
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Lagrange weights at x for the nodes of cell c.
  std::array<double, cell_points> interpolation_weights(std::size_t c, double x) const {
    const double t = 2.0 * (x - lo(c)) / h_ - 1.0;
    const auto& r = gauss_rule<cell_points>();
    std::array<double, cell_points> L{};
    double den = 0.0;
    for (std::size_t a = 0; a < cell_points; ++a) {
      const double d = t - r.nodes[a];
      if (d == 0.0) {
        L.fill(0.0);
        L[a] = 1.0;
        return L;
      }
      L[a] = bary_[a] / d;
      den += L[a];
    }
    for (double& v : L) v /= den;
    return L;
  }

private:
  double N_ = 0.0, h_ = 0.0;
  std::vector<Cell> cells_;
  std::map<std::pair<int, int>, std::size_t> index_;
  std::array<double, cell_points> bary_{};
};

enum class IterateKind { full, low_band };

struct IterateOptions {
  std::size_t time_intervals = 64;
  double t_end = 0.0;  // 0 selects params.T
  int margin = 1;      // extra cells around the supports, checked to stay empty
  unsigned jobs = 1;
};

/// Iterates 1..K at uniform times. Values are stored in the interaction
/// picture v = e^{i t |xi|^alpha} u_hat, which is slowly varying in t on the
/// bands j <= 1.
struct IterateFamily {
  IterateKind kind = IterateKind::full;
  ExperimentParams params;
  CellGrid grid;
  std::vector<double> times;
  std::vector<std::vector<cplx>> v;  // v[l-1][(m * cells + c) * P + a]

  int K() const { return static_cast<int>(v.size()); }
  std::size_t offset(std::size_t m, std::size_t c, std::size_t a = 0) const {
    return (m * grid.size() + c) * cell_points + a;
  }
  cplx interaction(int l, std::size_t m, std::size_t c, std::size_t a) const {
    return v[static_cast<std::size_t>(l - 1)][offset(m, c, a)];
  }
  /// u_hat^(l)(t_m, xi_{c,a})
  cplx value(int l, std::size_t m, std::size_t c, std::size_t a) const {
    const double xi = grid.node(c, a);
    return std::polar(1.0, -times[m] * std::pow(xi, params.alpha)) * interaction(l, m, c, a);
  }
};

namespace detail {

/// Weights W[m][n] with int_0^{t_m} f = sum_n W[m][n] f(t_n), exact for
/// cubics on a uniform grid.
inline std::vector<std::vector<double>> cumulative_weights(std::size_t M, double dt) {
  std::vector<std::vector<double>> W(M + 1, std::vector<double>(M + 1, 0.0));
  auto simpson = [&](std::vector<double>& w, std::size_t from, std::size_t to) {
    for (std::size_t n = from; n < to; n += 2) {
      w[n] += dt / 3.0;
      w[n + 1] += 4.0 * dt / 3.0;
      w[n + 2] += dt / 3.0;
    }
  };
  for (std::size_t m = 1; m <= M; ++m) {
    auto& w = W[m];
    if (m == 1) {
      w[0] = 9.0 * dt / 24.0;
      w[1] = 19.0 * dt / 24.0;
      w[2] = -5.0 * dt / 24.0;
      w[3] = dt / 24.0;
    } else if (m % 2 == 0) {
      simpson(w, 0, m);
    } else {
      simpson(w, 0, m - 3);
      for (std::size_t n = 0; n < 4; ++n) w[m - 3 + n] += 3.0 * dt / 8.0 * (n == 0 || n == 3 ? 1.0 : 3.0);
    }
  }
  return W;
}

inline CellGrid make_grid(const ExperimentParams& p, int K, IterateKind kind, int margin) {
  const double N = static_cast<double>(p.N);
  const double h = p.cell_width();
  std::vector<Cell> cells;
  const int jmax = kind == IterateKind::low_band ? 0 : K + (margin > 0 ? 1 : 0);
  for (int j = 0; j <= jmax; ++j) {
    int ilo, ihi;
    if (j > K) {
      ilo = 0;
      ihi = K;
    } else {
      ilo = std::max(j, 1) - j - margin;
      ihi = 2 * K - j - 1 + margin;
    }
    ilo = std::max(ilo, 0);
    if ((ihi + 1) * h >= N) throw DomainError("lattice cells of neighbouring bands overlap; N too small");
    for (int i = ilo; i <= ihi; ++i) cells.push_back({j, i});
  }
  if (cells.size() * cell_points > max_grid_nodes)
    throw ResourceError("iterate grid needs " + std::to_string(cells.size() * cell_points) +
                        " nodes (budget " + std::to_string(max_grid_nodes) +
                        "); lower K or the margin");
  return {N, h, std::move(cells)};
}

template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < jobs; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += jobs) fn(i);
    });
}

} // namespace detail

/// Exact datum: eps N^{theta/2} on [h, 2h] plus eps N^{-s+theta/2} on [N, N+h].
inline PiecewisePoly build_phi(const ExperimentParams& p) {
  validate_regime(p, RegimeTag::inflation_line).throw_if_violated();
  const double N = static_cast<double>(p.N), h = p.cell_width();
  return PiecewisePoly({h, 2 * h, N, N + h},
                       {{p.eps * std::pow(N, p.theta / 2)}, {0.0},
                        {p.eps * std::pow(N, -p.s + p.theta / 2)}});
}

inline IterateFamily compute_iterates(const ExperimentParams& p, int K, IterateKind kind,
                                      const IterateOptions& opt = {}) {
  if (K < 1) throw DomainError("need K >= 1");
  if (K > max_iterate_index)
    throw ResourceError("K = " + std::to_string(K) + " exceeds the desk-scale cap of " +
                        std::to_string(max_iterate_index));
  if (opt.time_intervals < 3 || opt.time_intervals > max_time_intervals)
    throw ResourceError("time interval count must lie in [3, 4096]");
  const double t_end = opt.t_end > 0.0 ? opt.t_end : p.T;
  if (!(t_end > 0.0)) throw DomainError("final time must be positive");

  IterateFamily fam;
  fam.kind = kind;
  fam.params = p;
  fam.grid = detail::make_grid(p, K, kind, opt.margin);
  const CellGrid& g = fam.grid;
  const std::size_t M = opt.time_intervals;
  const double dt = t_end / static_cast<double>(M);
  for (std::size_t m = 0; m <= M; ++m) fam.times.push_back(dt * static_cast<double>(m));
  const std::size_t slab = g.num_nodes();
  const std::size_t total = (M + 1) * slab;

  // first iterate: constant in the interaction picture
  std::vector<cplx> first(total, cplx{});
  const double N = static_cast<double>(p.N);
  const double low_amp = p.eps * std::pow(N, p.theta / 2);
  const double high_amp = p.eps * std::pow(N, -p.s + p.theta / 2);
  for (std::size_t m = 0; m <= M; ++m) {
    if (auto c = g.index(0, 1))
      for (std::size_t a = 0; a < cell_points; ++a) first[fam.offset(m, *c, a)] = low_amp;
    if (kind == IterateKind::full)
      if (auto c = g.index(1, 0))
        for (std::size_t a = 0; a < cell_points; ++a) first[fam.offset(m, *c, a)] = high_amp;
  }
  fam.v.push_back(std::move(first));

  const auto W = detail::cumulative_weights(M, dt);
  const auto& rule = gauss_rule<cell_points>();
  std::vector<std::vector<bool>> populated;
  auto mark = [&](const std::vector<cplx>& vals) {
    std::vector<bool> nz(g.size(), false);
    for (std::size_t c = 0; c < g.size(); ++c)
      for (std::size_t m = 0; m <= M && !nz[c]; ++m)
        for (std::size_t a = 0; a < cell_points; ++a)
          if (vals[fam.offset(m, c, a)] != cplx{}) {
            nz[c] = true;
            break;
          }
    populated.push_back(std::move(nz));
  };
  mark(fam.v[0]);

  for (int l = 2; l <= K; ++l) {
    std::vector<cplx> integrand(total, cplx{});
    for (int k1 = 1; k1 < l; ++k1) {
      const int k2 = l - k1;
      const auto& v1 = fam.v[static_cast<std::size_t>(k1 - 1)];
      const auto& v2 = fam.v[static_cast<std::size_t>(k2 - 1)];
      const auto& nz1 = populated[static_cast<std::size_t>(k1 - 1)];
      const auto& nz2 = populated[static_cast<std::size_t>(k2 - 1)];

      detail::parallel_for(g.size(), opt.jobs, [&](std::size_t co) {
        const Cell out = g.cell(co);
        std::vector<cplx> rot(M + 1);
        for (std::size_t a = 0; a < cell_points; ++a) {
          const double xi = g.node(co, a);
          const double xi_a = std::pow(xi, p.alpha);
          for (std::size_t c2 = 0; c2 < g.size(); ++c2) {
            if (!nz2[c2]) continue;
            const Cell in2 = g.cell(c2);
            const int j1 = out.j - in2.j;
            if (j1 < 0) continue;
            for (int di = -1; di <= 0; ++di) {
              const auto c1 = g.index(j1, out.i + di - in2.i);
              if (!c1 || !nz1[*c1]) continue;
              const double lo = std::max(g.lo(c2), xi - g.hi(*c1));
              const double hi = std::min(g.hi(c2), xi - g.lo(*c1));
              if (!(hi - lo > 1e-14 * g.h())) continue;
              for (std::size_t q = 0; q < cell_points; ++q) {
                const double eta = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[q];
                const double x1 = xi - eta;
                const double wq = 0.5 * (hi - lo) * rule.weights[q] * std::pow(eta, p.beta);
                const double omega = xi_a - std::pow(x1, p.alpha) - std::pow(eta, p.alpha);
                const auto L1 = g.interpolation_weights(*c1, x1);
                const auto L2 = g.interpolation_weights(c2, eta);
                const cplx step = std::polar(1.0, omega * dt);
                cplx z{1.0, 0.0};
                for (std::size_t m = 0; m <= M; ++m) {
                  const cplx* f = &v1[fam.offset(m, *c1)];
                  const cplx* gg = &v2[fam.offset(m, c2)];
                  cplx fv{}, gv{};
                  for (std::size_t b = 0; b < cell_points; ++b) {
                    fv += L1[b] * f[b];
                    gv += L2[b] * gg[b];
                  }
                  // exact phase every 16 steps limits drift of the rotation
                  if (m % 16 == 0) z = std::polar(1.0, omega * fam.times[m]);
                  integrand[fam.offset(m, co, a)] += wq * z * fv * gv;
                  z *= step;
                }
              }
            }
          }
        }
      });
    }
    std::vector<cplx> next(total, cplx{});
    for (std::size_t m = 1; m <= M; ++m) {
      cplx* dst = &next[m * slab];
      for (std::size_t n = 0; n < W[m].size(); ++n) {
        const double w = W[m][n];
        if (w == 0.0) continue;
        const cplx* src = &integrand[n * slab];
        for (std::size_t x = 0; x < slab; ++x) dst[x] += w * src[x];
      }
    }
    mark(next);
    fam.v.push_back(std::move(next));
  }
  return fam;
}

inline IterateFamily iterate_low(const ExperimentParams& p, int K, const IterateOptions& opt = {}) {
  return compute_iterates(p, K, IterateKind::low_band, opt);
}

inline IterateFamily iterate_full(const ExperimentParams& p, int K, const IterateOptions& opt = {}) {
  return compute_iterates(p, K, IterateKind::full, opt);
}

struct SupportReport {
  double max_outside_relative = 0.0;  // largest |u| off the support over max |u|
  int worst_l = 0;
  std::size_t cells_checked = 0;
};

/// Compares every stored iterate against its support: support_uk(l) for the
/// full family, [l h, 2 l h] for the low-band one.
inline SupportReport support_check(const IterateFamily& fam) {
  SupportReport rep;
  const auto& g = fam.grid;
  const double N = static_cast<double>(fam.params.N), h = g.h();
  for (int l = 1; l <= fam.K(); ++l) {
    std::vector<Interval> sup = fam.kind == IterateKind::full
                                    ? support_uk(l, N, fam.params.theta)
                                    : std::vector<Interval>{{l * h, 2 * l * h}};
    const auto& vals = fam.v[static_cast<std::size_t>(l - 1)];
    double peak = 0.0;
    for (const cplx& z : vals) peak = std::max(peak, std::abs(z));
    if (peak == 0.0) continue;
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double lo = g.lo(c), hi = g.hi(c), tol = 1e-9 * h;
      const bool inside = std::any_of(sup.begin(), sup.end(), [&](const Interval& iv) {
        return lo >= iv.lo - tol && hi <= iv.hi + tol;
      });
      if (inside) continue;
      ++rep.cells_checked;
      for (std::size_t m = 0; m < fam.times.size(); ++m)
        for (std::size_t a = 0; a < cell_points; ++a) {
          const double r = std::abs(vals[fam.offset(m, c, a)]) / peak;
          if (r > rep.max_outside_relative) {
            rep.max_outside_relative = r;
            rep.worst_l = l;
          }
        }
    }
  }
  return rep;
}

/// eps (pi^2 2^beta eps t)^{k-1} ((k-1)!)^{max(0,beta-1)} N^{theta beta + theta(-beta+1/2)k}
/// times 1_[h,2h]^{*k}(xi).
inline double low_band_bound(const ExperimentParams& p, int k, double t, const PiecewisePoly& spline,
                             double xi) {
  const double N = static_cast<double>(p.N);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double c = p.eps * std::pow(pi2 * std::pow(2.0, p.beta) * p.eps * t, k - 1) *
                   std::pow(std::tgamma(static_cast<double>(k)), std::max(0.0, p.beta - 1.0)) *
                   std::pow(N, p.theta * p.beta + p.theta * (-p.beta + 0.5) * k);
  return c * spline(xi);
}

struct BoundCheckReport {
  std::size_t violations = 0;
  std::size_t nodes_checked = 0;
  double max_ratio = 0.0;  // largest |u|/bound where the bound is positive
};

inline BoundCheckReport low_band_bound_check(const IterateFamily& fam) {
  if (fam.kind != IterateKind::low_band) throw DomainError("bound check needs the low-band family");
  BoundCheckReport rep;
  const auto& p = fam.params;
  const double h = fam.grid.h();
  for (int k = 1; k <= fam.K(); ++k) {
    const auto spline = std::get<PiecewisePoly>(conv_power(h, 2 * h, k));
    for (std::size_t m = 0; m < fam.times.size(); ++m)
      for (std::size_t c = 0; c < fam.grid.size(); ++c)
        for (std::size_t a = 0; a < cell_points; ++a) {
          const double xi = fam.grid.node(c, a);
          const double u = std::abs(fam.interaction(k, m, c, a));
          const double b = low_band_bound(p, k, fam.times[m], spline, xi);
          ++rep.nodes_checked;
          if (b > 0.0) rep.max_ratio = std::max(rep.max_ratio, u / b);
          if (u > b * (1.0 + 1e-12)) ++rep.violations;
        }
  }
  return rep;
}

/// Real profile of the leading term: 1_[h,2h]^{*(k-1)} * 1_[N,N+h].
inline PiecewisePoly leading_profile(int k, const ExperimentParams& p) {
  if (k < 1) throw DomainError("leading term needs k >= 1");
  const double N = static_cast<double>(p.N), h = p.cell_width();
  return convolve(conv_power(h, 2 * h, k - 1), indicator(N, N + h));
}

/// e^{-it xi^alpha} eps^k t^{k-1}/(k-1)! N^{-s+(theta/2+beta)k-beta} times the profile.
inline cplx leading_term(int k, double t, const ExperimentParams& p, const PiecewisePoly& profile,
                         double xi) {
  const double N = static_cast<double>(p.N);
  const double amp = std::pow(p.eps, k) * std::pow(t, k - 1) / std::tgamma(static_cast<double>(k)) *
                     std::pow(N, -p.s + (p.theta / 2 + p.beta) * k - p.beta);
  return std::polar(amp * profile(xi), -t * std::pow(std::abs(xi), p.alpha));
}

inline cplx leading_term(int k, double t, const ExperimentParams& p, double xi) {
  return leading_term(k, t, p, leading_profile(k, p), xi);
}

struct LeadingDeviation {
  std::int64_t N = 0;
  int k = 0;
  double t = 0.0;
  double relative_l2 = 0.0;   // on [N + (k-1)h, N + (2k-1)h]
  double relative_max = 0.0;  // max |u - lead| / max |lead| on the same band
};

/// Relative deviation of u^(k)(t) from the leading term on the top band.
inline LeadingDeviation leading_deviation(const ExperimentParams& p, int k, double t,
                                          IterateOptions opt = {}) {
  opt.t_end = t;
  const auto fam = iterate_full(p, k, opt);
  const auto prof = leading_profile(k, p);
  const std::size_t m = fam.times.size() - 1;
  double num = 0.0, den = 0.0, dmax = 0.0, lmax = 0.0;
  for (int i = k - 1; i <= 2 * k - 2; ++i) {
    const auto c = fam.grid.index(1, i);
    if (!c) throw DomainError("grid misses the leading band");
    for (std::size_t a = 0; a < cell_points; ++a) {
      const double xi = fam.grid.node(*c, a);
      const cplx lead = leading_term(k, t, p, prof, xi);
      const cplx d = fam.value(k, m, *c, a) - lead;
      num += fam.grid.weight(a) * std::norm(d);
      den += fam.grid.weight(a) * std::norm(lead);
      dmax = std::max(dmax, std::abs(d));
      lmax = std::max(lmax, std::abs(lead));
    }
  }
  return {p.N, k, t, std::sqrt(num / den), dmax / lmax};
}

struct IndexRanges {
  int full_lo = 1, full_hi = 1;
  std::int64_t low_lo = 0, low_hi = 0;
};

/// Iterate indices that can reach xi in [N + (k-1)h, N + kh): the full ones
/// floor(k/2)..k and the low-band ones floor((k-1+N^{theta+1})/2)..ceil(k+N^{theta+1}).
inline IndexRanges band_decomposition_indices(int k, const ExperimentParams& p, double xi) {
  const double N = static_cast<double>(p.N), h = p.cell_width();
  if (!(xi >= N + (k - 1) * h && xi < N + k * h)) throw DomainError("xi outside the measurement band");
  IndexRanges r;
  r.full_lo = std::max(1, k / 2);
  r.full_hi = k;
  const double M = std::pow(N, p.theta + 1.0);
  r.low_lo = static_cast<std::int64_t>(std::floor((k - 1 + M) / 2.0));
  r.low_hi = static_cast<std::int64_t>(std::ceil(k + M));
  return r;
}

struct LineInflationRow {
  std::int64_t N = 0;
  int k = 0;
  double T = 0.0;
  double phi_norm = 0.0;   // H^s norm of the datum
  double band_norm = 0.0;  // H^sigma norm of sum_{l=floor(k/2)}^k u^(l)(T) on the band
  double top_norm = 0.0;   // same for u^(k)(T) alone
  double prediction = 0.0; // eps^k (log N)^{-(k-1)} N^{sigma-s+(-theta/2+beta)(k-1)}
  double tail = 0.0;
  double eps = 0.0;
  double ratio() const { return band_norm / prediction; }
  bool inflation_declared() const { return band_norm - tail > 1.0 / eps; }
};

inline LineInflationRow inflation_experiment_line(const ExperimentParams& p,
                                                  IterateOptions opt = {}) {
  validate_regime(p, RegimeTag::inflation_line).throw_if_violated();
  const int k = p.k;
  opt.t_end = p.T;
  LineInflationRow row;
  row.N = p.N;
  row.k = k;
  row.T = p.T;
  row.eps = p.eps;
  row.phi_norm = weighted_L2_norm(build_phi(p), p.s);
  const auto fam = iterate_full(p, k, opt);
  const auto c = fam.grid.index(1, k - 1);
  if (!c) throw DomainError("grid misses the measurement band");
  const std::size_t m = fam.times.size() - 1;
  double band = 0.0, top = 0.0;
  for (std::size_t a = 0; a < cell_points; ++a) {
    const double xi = fam.grid.node(*c, a);
    const double w = fam.grid.weight(a) * std::pow(1.0 + xi * xi, p.sigma);
    cplx sum{};
    for (int l = std::max(1, k / 2); l <= k; ++l) sum += fam.value(l, m, *c, a);
    band += w * std::norm(sum);
    top += w * std::norm(fam.value(k, m, *c, a));
  }
  row.band_norm = std::sqrt(band);
  row.top_norm = std::sqrt(top);
  const double N = static_cast<double>(p.N);
  row.prediction = std::pow(p.eps, k) * std::pow(std::log(N), -(k - 1)) *
                   std::pow(N, p.sigma - p.s + (-p.theta / 2 + p.beta) * (k - 1));
  row.tail = tail_sum_bound(p, p.sigma).value;
  return row;
}

inline void write_line_inflation_header(std::ostream& os) {
  os << "# line inflation: band restricted H^sigma norms at T = 1/log N\n";
  csv::row(os, std::string("N"), std::string("k"), std::string("T"), std::string("phi_norm"),
           std::string("band_norm"), std::string("top_norm"), std::string("prediction"),
           std::string("tail"), std::string("ratio"));
}

inline void write_line_inflation_row(std::ostream& os, const LineInflationRow& r) {
  csv::row(os, r.N, r.k, r.T, r.phi_norm, r.band_norm, r.top_norm, r.prediction, r.tail, r.ratio());
}

/// Per-node dump (l, t, xi, Re, Im) of u_hat.
inline void write_iterate_dump(std::ostream& os, const IterateFamily& fam) {
  csv::row(os, std::string("l"), std::string("t"), std::string("xi"), std::string("re"),
           std::string("im"));
  for (int l = 1; l <= fam.K(); ++l)
    for (std::size_t m = 0; m < fam.times.size(); ++m)
      for (std::size_t c = 0; c < fam.grid.size(); ++c)
        for (std::size_t a = 0; a < cell_points; ++a) {
          const cplx z = fam.value(l, m, c, a);
          csv::row(os, l, fam.times[m], fam.grid.node(c, a), z.real(), z.imag());
        }
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace fnls
