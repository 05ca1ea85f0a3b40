#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include <boost/math/quadrature/gauss.hpp>

namespace fnls {

/// Gauss-Legendre rule on [-1, 1] with nodes in increasing order.
template <std::size_t Points>
struct GaussRule {
  std::array<double, Points> nodes{};
  std::array<double, Points> weights{};
};

template <std::size_t Points>
const GaussRule<Points>& gauss_rule() {
  static const GaussRule<Points> rule = [] {
    using boost_rule = boost::math::quadrature::gauss<double, Points>;
    const auto& x = boost_rule::abscissa();
    const auto& w = boost_rule::weights();
    GaussRule<Points> r;
    // boost stores the non-negative half, smallest abscissa first
    const std::size_t half = x.size();
    std::size_t pos = 0;
    for (std::size_t i = half; i-- > 0;) {
      if (x[i] == 0.0) continue;
      r.nodes[pos] = -x[i];
      r.weights[pos] = w[i];
      ++pos;
    }
    for (std::size_t i = 0; i < half; ++i) {
      r.nodes[pos] = x[i];
      r.weights[pos] = w[i];
      ++pos;
    }
    return r;
  }();
  return rule;
}

/// Integral of f over [a, b] with a fixed Gauss-Legendre rule.
template <std::size_t Points, class F>
double gauss_integrate(F&& f, double a, double b) {
  const auto& r = gauss_rule<Points>();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < Points; ++i) sum += r.weights[i] * f(mid + half * r.nodes[i]);
  return sum * half;
}

namespace detail {

template <class F>
double adaptive_gauss_step(F& f, double a, double b, double whole, double abs_tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_integrate<32>(f, a, mid);
  const double right = gauss_integrate<32>(f, mid, b);
  const double split = left + right;
  if (std::abs(split - whole) <= abs_tol || depth >= 18) return split;
  return adaptive_gauss_step(f, a, mid, left, 0.5 * abs_tol, depth + 1) +
         adaptive_gauss_step(f, mid, b, right, 0.5 * abs_tol, depth + 1);
}

} // namespace detail

/// 32-point rule, bisected until the two resolutions agree to rel_tol times
/// the integral of |f| over [a, b]; that floor keeps cancelling or vanishing
/// integrands from recursing forever.
template <class F>
double adaptive_gauss(F&& f, double a, double b, double rel_tol = 1e-10) {
  const double scale = gauss_integrate<32>([&](double x) { return std::abs(f(x)); }, a, b);
  const double abs_tol = std::max(rel_tol * scale, 1e-300);
  return detail::adaptive_gauss_step(f, a, b, gauss_integrate<32>(f, a, b), abs_tol, 0);
}

} // namespace fnls
