#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fnls/errors.hpp"
#include "fnls/quadrature.hpp"

namespace fnls {

/// Ascending-degree polynomial coefficients.
using Poly = std::vector<double>;

namespace poly {

inline double eval(std::span<const double> p, double x) {
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

inline void add_to(Poly& acc, const Poly& p) {
  if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) acc[i] += p[i];
}

/// Coefficients of x -> p(x + d).
inline Poly shift(const Poly& p, double d) {
  Poly q = p;
  if (d == 0.0) return q;
  const std::size_t n = q.size();
  // repeated synthetic division (Taylor shift)
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = n - 1; j > i; --j) q[j - 1] += d * q[j];
  return q;
}

/// Coefficients of x -> p(c * x).
inline Poly scale_arg(const Poly& p, double c) {
  Poly q = p;
  double f = 1.0;
  for (double& v : q) {
    v *= f;
    f *= c;
  }
  return q;
}

/// Integral of p over [0, w].
inline double integral(const Poly& p, double w) {
  double acc = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * w + p[i] / static_cast<double>(i + 1);
  return acc * w;
}

inline double binom(int n, int r) {
  double b = 1.0;
  for (int i = 1; i <= r; ++i) b = b * (n - r + i) / i;
  return b;
}

} // namespace poly

/// Real piecewise-polynomial function, zero outside [front, back] of the
/// breakpoints. Each piece stores its coefficients in the local variable
/// x - breaks[i], which keeps narrow pieces far from the origin well
/// conditioned. Evaluation is right-continuous at interior breakpoints and
/// includes both outer endpoints.
class PiecewisePoly {
public:
  PiecewisePoly() = default;

  PiecewisePoly(std::vector<double> breaks, std::vector<Poly> pieces)
      : breaks_(std::move(breaks)), pieces_(std::move(pieces)) {
    if (breaks_.empty() && pieces_.empty()) return;
    if (breaks_.size() < 2 || pieces_.size() + 1 != breaks_.size())
      throw DomainError("PiecewisePoly needs n+1 breakpoints for n pieces");
    for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
      if (!(breaks_[i] < breaks_[i + 1]))
        throw DomainError("PiecewisePoly breakpoints must be strictly increasing");
  }

  static PiecewisePoly zero() { return {}; }

  bool is_zero() const { return breaks_.empty(); }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Poly>& pieces() const { return pieces_; }
  std::size_t size() const { return pieces_.size(); }
  double support_lo() const { return breaks_.empty() ? 0.0 : breaks_.front(); }
  double support_hi() const { return breaks_.empty() ? 0.0 : breaks_.back(); }

  double operator()(double x) const {
    if (breaks_.empty() || x < breaks_.front() || x > breaks_.back()) return 0.0;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - breaks_.begin());
    i = std::min(i == 0 ? 0 : i - 1, pieces_.size() - 1);
    return poly::eval(pieces_[i], x - breaks_[i]);
  }

  double integral() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i)
      acc += poly::integral(pieces_[i], breaks_[i + 1] - breaks_[i]);
    return acc;
  }

  PiecewisePoly scaled(double c) const {
    auto p = pieces_;
    for (auto& piece : p)
      for (double& v : piece) v *= c;
    return {breaks_, std::move(p)};
  }

private:
  std::vector<double> breaks_;
  std::vector<Poly> pieces_;
};

/// Unit of convolution: the zeroth convolution power of any function.
struct DeltaUnit {};

using ConvPower = std::variant<DeltaUnit, PiecewisePoly>;

inline PiecewisePoly indicator(double a, double b) {
  if (!(a < b)) throw DomainError("indicator needs a < b");
  return {{a, b}, {{1.0}}};
}

namespace detail {

/// Convolution of one piece pair, restricted to an output interval.
/// p lives on [0, wa], q on [0, wc] (local variables); the output is
/// expressed in the local variable of an interval starting at offset d
/// from the sum of the two left endpoints.
inline Poly pair_convolution(const Poly& p, double wa, const Poly& q, double wc, double d,
                             double w_mid) {
  // G(U, w) = int_0^U p(u) q(w - u) du as g[m][n] U^m w^n
  const std::size_t dp = p.size(), dq = q.size();
  const std::size_t mdeg = dp + dq;  // max power of U is dp-1 + dq-1 + 1
  std::vector<std::vector<double>> g(mdeg + 1, std::vector<double>(dq, 0.0));
  for (std::size_t i = 0; i < dp; ++i)
    for (std::size_t j = 0; j < dq; ++j)
      for (std::size_t r = 0; r <= j; ++r) {
        const double c = p[i] * q[j] * poly::binom(static_cast<int>(j), static_cast<int>(r)) *
                         ((r % 2) ? -1.0 : 1.0) / static_cast<double>(i + r + 1);
        g[i + r + 1][j - r] += c;
      }
  // substitute U = alpha + beta_w * w and collect powers of w
  auto substitute = [&](double alpha, double beta_w) {
    Poly out(mdeg + dq + 1, 0.0);
    for (std::size_t m = 0; m <= mdeg; ++m) {
      // (alpha + beta_w w)^m
      for (std::size_t e = 0; e <= m; ++e) {
        const double coef = poly::binom(static_cast<int>(m), static_cast<int>(e)) *
                            std::pow(alpha, static_cast<double>(m - e)) *
                            std::pow(beta_w, static_cast<double>(e));
        if (coef == 0.0) continue;
        for (std::size_t n = 0; n < dq; ++n) out[e + n] += coef * g[m][n];
      }
    }
    return out;
  };
  const Poly upper = (w_mid <= wa) ? substitute(0.0, 1.0) : substitute(wa, 0.0);
  Poly result = upper;
  if (w_mid > wc) {
    const Poly lower = substitute(-wc, 1.0);
    for (std::size_t i = 0; i < lower.size(); ++i) result[i] -= lower[i];
  }
  return poly::shift(result, d);
}

inline std::vector<double> merge_breaks(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double scale = 1.0;
  for (double x : xs) scale = std::max(scale, std::abs(x));
  const double tol = 1e-11 * scale;
  std::vector<double> out;
  for (double x : xs)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

} // namespace detail

/// Exact convolution of two piecewise polynomials.
inline PiecewisePoly convolve(const PiecewisePoly& f, const PiecewisePoly& g) {
  if (f.is_zero() || g.is_zero()) return PiecewisePoly::zero();
  const auto& fb = f.breaks();
  const auto& gb = g.breaks();
  std::vector<double> sums;
  sums.reserve(fb.size() * gb.size());
  for (double a : fb)
    for (double c : gb) sums.push_back(a + c);
  std::vector<double> out_breaks = detail::merge_breaks(std::move(sums));
  std::vector<Poly> out_pieces(out_breaks.size() - 1, Poly{0.0});

  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a0 = fb[i], wa = fb[i + 1] - fb[i];
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double c0 = gb[j], wc = gb[j + 1] - gb[j];
      const double lo = a0 + c0, hi = lo + wa + wc;
      auto first = std::lower_bound(out_breaks.begin(), out_breaks.end(),
                                    lo - 1e-9 * (wa + wc));
      for (auto it = first; it + 1 != out_breaks.end(); ++it) {
        const double L = *it, R = *(it + 1);
        const double mid = 0.5 * (L + R);
        if (mid >= hi) break;
        if (mid <= lo) continue;
        const std::size_t idx = static_cast<std::size_t>(it - out_breaks.begin());
        poly::add_to(out_pieces[idx],
                     detail::pair_convolution(f.pieces()[i], wa, g.pieces()[j], wc, L - lo,
                                              mid - lo));
      }
    }
  }
  return {std::move(out_breaks), std::move(out_pieces)};
}

inline PiecewisePoly convolve(const ConvPower& f, const PiecewisePoly& g) {
  if (std::holds_alternative<DeltaUnit>(f)) return g;
  return convolve(std::get<PiecewisePoly>(f), g);
}

/// k-fold self-convolution of the indicator of [a, b]; k = 0 is the unit.
/// The result is a scaled cardinal B-spline with breakpoints k a + j (b - a).
inline ConvPower conv_power(double a, double b, int k) {
  if (!(a < b)) throw DomainError("conv_power needs a < b");
  if (k < 0) throw DomainError("conv_power needs k >= 0");
  if (k == 0) return DeltaUnit{};
  // cardinal spline on the integer lattice first
  PiecewisePoly unit = indicator(0.0, 1.0);
  PiecewisePoly acc = unit;
  for (int i = 1; i < k; ++i) acc = convolve(acc, unit);
  const double h = b - a;
  std::vector<double> breaks(static_cast<std::size_t>(k) + 1);
  for (int j = 0; j <= k; ++j) breaks[static_cast<std::size_t>(j)] = k * a + j * h;
  std::vector<Poly> pieces;
  pieces.reserve(acc.size());
  const double amp = std::pow(h, k - 1);
  for (const Poly& p : acc.pieces()) {
    Poly q = poly::scale_arg(p, 1.0 / h);
    for (double& v : q) v *= amp;
    pieces.push_back(std::move(q));
  }
  return PiecewisePoly(std::move(breaks), std::move(pieces));
}

/// Pointwise product with the indicator of [lo, hi).
inline PiecewisePoly band_restrict(const PiecewisePoly& f, double lo, double hi) {
  if (!(lo < hi)) throw DomainError("band_restrict needs lo < hi");
  if (f.is_zero() || hi <= f.support_lo() || lo >= f.support_hi()) return PiecewisePoly::zero();
  const auto& b = f.breaks();
  std::vector<double> nb;
  std::vector<Poly> np;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double l = std::max(b[i], lo), r = std::min(b[i + 1], hi);
    if (!(l < r)) continue;
    if (nb.empty()) nb.push_back(l);
    np.push_back(poly::shift(f.pieces()[i], l - b[i]));
    nb.push_back(r);
  }
  if (np.empty()) return PiecewisePoly::zero();
  return {std::move(nb), std::move(np)};
}

/// (int <xi>^{2s} |f(xi)|^2 dxi)^{1/2}, <xi> = (1 + xi^2)^{1/2}.
inline double weighted_L2_norm(const PiecewisePoly& f, double s) {
  double acc = 0.0;
  const auto& b = f.breaks();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Poly& p = f.pieces()[i];
    const double b0 = b[i];
    auto integrand = [&](double x) {
      const double v = poly::eval(p, x);
      const double xi = b0 + x;
      return std::pow(1.0 + xi * xi, s) * v * v;
    };
    acc += adaptive_gauss(integrand, 0.0, b[i + 1] - b0);
  }
  return std::sqrt(acc);
}

/// int_lo^hi |f|. Pieces of one sign integrate exactly; the rest use
/// adaptive quadrature of |p|.
inline double integral_abs(const PiecewisePoly& f, double lo, double hi) {
  if (f.is_zero() || !(lo < hi)) return 0.0;
  const auto& b = f.breaks();
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double l = std::max(b[i], lo), r = std::min(b[i + 1], hi);
    if (!(l < r)) continue;
    const Poly& p = f.pieces()[i];
    const double x0 = l - b[i], x1 = r - b[i];
    bool pos = true, neg = true;
    const auto& rule = gauss_rule<32>();
    auto probe = [&](double x) {
      const double v = poly::eval(p, x);
      pos = pos && v >= 0.0;
      neg = neg && v <= 0.0;
    };
    probe(x0);
    probe(x1);
    for (double t : rule.nodes) probe(0.5 * (x0 + x1) + 0.5 * (x1 - x0) * t);
    if (pos || neg) {
      const double v = poly::integral(p, x1) - poly::integral(p, x0);
      acc += std::abs(v);
    } else {
      acc += adaptive_gauss([&](double x) { return std::abs(poly::eval(p, x)); }, x0, x1);
    }
  }
  return acc;
}

inline nlohmann::json to_json(const PiecewisePoly& f) {
  return nlohmann::json{{"breakpoints", f.breaks()}, {"pieces", f.pieces()}};
}

inline PiecewisePoly piecewise_from_json(const nlohmann::json& j) {
  try {
    return {j.at("breakpoints").get<std::vector<double>>(),
            j.at("pieces").get<std::vector<Poly>>()};
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("piecewise JSON: ") + e.what());
  }
}

} // namespace fnls
