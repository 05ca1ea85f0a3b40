#pragma once

// Combinatorial majorants for the iterate bounds: the sequence a_k, its
// factorial bound, the Catalan comparison and the high-index tail sum.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "fnls/csv.hpp"
#include "fnls/errors.hpp"
#include "fnls/params.hpp"

namespace fnls {

enum class MajorantKind { iterate_recurrence, catalan_majorant, custom };

/// a_1..a_K stored as natural logs; index 0 holds a_1.
struct MajorantSeq {
  double beta = 0.0;
  std::vector<double> log_values;
  MajorantKind kind = MajorantKind::custom;

  int K() const { return static_cast<int>(log_values.size()); }
  double log_value(int k) const { return log_values.at(static_cast<std::size_t>(k - 1)); }
  /// a_k as a double; +inf once it leaves the double range.
  double value(int k) const { return std::exp(log_value(k)); }
};

namespace detail {

constexpr double linear_ceiling = 1e300;

inline double log_sum_exp(const std::vector<double>& xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(xs.begin(), xs.end());
  if (std::isinf(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

/// Fills seq for k >= 2 from c_k = sum_{k1+k2=k} w(k, k2) c_{k1} c_{k2}.
/// Plain doubles while every term stays below 1e300, log-sum-exp after.
template <class Weight>
std::vector<double> quadratic_recurrence(double first, int K, Weight w) {
  if (K < 1) throw DomainError("recurrence needs K >= 1");
  std::vector<double> lin(static_cast<std::size_t>(K), 0.0);
  std::vector<double> lg(static_cast<std::size_t>(K), 0.0);
  std::vector<bool> linear_ok(static_cast<std::size_t>(K), false);
  lin[0] = first;
  lg[0] = std::log(first);
  linear_ok[0] = true;
  for (int k = 2; k <= K; ++k) {
    const auto ki = static_cast<std::size_t>(k - 1);
    bool ok = true;
    double sum = 0.0;
    for (int k1 = 1; k1 < k && ok; ++k1) {
      const int k2 = k - k1;
      const auto i1 = static_cast<std::size_t>(k1 - 1), i2 = static_cast<std::size_t>(k2 - 1);
      if (!linear_ok[i1] || !linear_ok[i2]) {
        ok = false;
        break;
      }
      sum += w(k, k2) * lin[i1] * lin[i2];
    }
    if (ok && std::isfinite(sum) && sum < linear_ceiling) {
      lin[ki] = sum;
      lg[ki] = std::log(sum);
      linear_ok[ki] = true;
      continue;
    }
    std::vector<double> terms;
    for (int k1 = 1; k1 < k; ++k1) {
      const int k2 = k - k1;
      terms.push_back(std::log(w(k, k2)) + lg[static_cast<std::size_t>(k1 - 1)] +
                      lg[static_cast<std::size_t>(k2 - 1)]);
    }
    lg[ki] = log_sum_exp(terms);
  }
  return lg;
}

} // namespace detail

/// a_1 = 1, a_k = sum_{k1+k2=k} (2 k2)^beta / (k-1) a_{k1} a_{k2}.
inline MajorantSeq compute_ak(double beta, int K) {
  MajorantSeq seq;
  seq.beta = beta;
  seq.kind = MajorantKind::iterate_recurrence;
  seq.log_values = detail::quadratic_recurrence(1.0, K, [beta](int k, int k2) {
    return std::pow(2.0 * k2, beta) / (k - 1);
  });
  return seq;
}

struct BoundRow {
  int k = 0;
  double log_value = 0.0;
  double log_bound = 0.0;
  double ratio() const { return std::exp(log_value - log_bound); }
  bool holds() const { return log_value <= log_bound + 1e-12 * std::max(1.0, std::abs(log_bound)); }
};

struct BoundReport {
  std::vector<BoundRow> rows;
  int first_violation = 0;  // 0 when every row holds
  bool pass() const { return first_violation == 0; }
};

inline void write_csv(std::ostream& os, const BoundReport& rep, const std::string& value_name) {
  csv::row(os, std::string("k"), value_name, std::string("bound"), std::string("ratio"));
  for (const auto& r : rep.rows)
    csv::row(os, r.k, std::exp(r.log_value), std::exp(r.log_bound), r.ratio());
}

/// log((pi^2 2^beta)^{k-1} ((k-1)!)^{max(0, beta-1)})
inline double log_factorial_bound(double beta, int k) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return (k - 1) * (std::log(pi2) + beta * std::numbers::ln2) +
         std::max(0.0, beta - 1.0) * std::lgamma(static_cast<double>(k));
}

inline BoundReport check_factorial_bound(const MajorantSeq& seq) {
  if (seq.kind != MajorantKind::iterate_recurrence)
    throw DomainError("factorial bound applies to the iterate recurrence only");
  BoundReport rep;
  for (int k = 1; k <= seq.K(); ++k) {
    BoundRow r{k, seq.log_value(k), log_factorial_bound(seq.beta, k)};
    if (!r.holds() && rep.first_violation == 0) rep.first_violation = k;
    rep.rows.push_back(r);
  }
  return rep;
}

/// Extremal sequence c_1 = a1, c_k = C0 sum c_{k1} c_{k2}, compared with
/// (2 pi^2 C0 / 3)^{k-1} a1^k.
inline BoundReport catalan_majorant_check(double C0, double a1, int K) {
  if (!(C0 > 0.0) || !(a1 > 0.0)) throw DomainError("Catalan check needs C0 > 0 and a1 > 0");
  const auto lg = detail::quadratic_recurrence(a1, K, [C0](int, int) { return C0; });
  BoundReport rep;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (int k = 1; k <= K; ++k) {
    BoundRow r{k, lg[static_cast<std::size_t>(k - 1)],
               (k - 1) * std::log(2.0 * pi2 * C0 / 3.0) + k * std::log(a1)};
    if (!r.holds() && rep.first_violation == 0) rep.first_violation = k;
    rep.rows.push_back(r);
  }
  return rep;
}

struct TailSumResult {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
  std::int64_t l_lo = 0, l_hi = -1;
  bool empty_range = false;  // warning: nothing to sum
  std::vector<std::pair<std::int64_t, double>> log_summands;  // only when requested
};

/// log of the l-th summand of the tail majorant below.
inline double log_tail_summand(const ExperimentParams& p, double sigma, std::int64_t l) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double lnN = std::log(static_cast<double>(p.N));
  const double lnq = std::log(pi2) + p.beta * std::numbers::ln2 + std::log(p.eps) + std::log(p.T);
  const double gam = std::max(0.0, p.beta - 1.0);
  const double ld = static_cast<double>(l);
  double stirling = 0.0;
  if (gam > 0.0)
    stirling = l == 1 ? -std::numeric_limits<double>::infinity()
                      : gam * ((ld - 0.5) * std::log(ld - 1.0) - ld + 2.0);
  return std::log(p.eps) + (p.theta * p.beta + sigma - p.theta / 2.0) * lnN + (ld - 1.0) * lnq +
         stirling + (p.theta * (-p.beta + 0.5) * ld - (ld - 1.0) * p.theta) * lnN;
}

/// Majorant for the high-index iterates restricted to the measurement band:
/// sum_l eps (pi^2 2^beta eps T)^{l-1} ((l-1)^{l-1/2} e^{-l+2})^{max(0,beta-1)}
///       N^{theta beta + theta(-beta+1/2) l} N^{-(l-1) theta} N^{sigma - theta/2},
/// with l from floor((k-1+N^{theta+1})/2) to ceil(k+N^{theta+1}).
inline TailSumResult tail_sum_bound(const ExperimentParams& p, double sigma,
                                    bool keep_summands = false) {
  TailSumResult res;
  const double N = static_cast<double>(p.N);
  const double M = std::pow(N, p.theta + 1.0);
  res.l_lo = static_cast<std::int64_t>(std::floor((p.k - 1 + M) / 2.0));
  res.l_hi = static_cast<std::int64_t>(std::ceil(p.k + M));
  if (res.l_lo < 1) res.l_lo = 1;
  if (res.l_hi < res.l_lo) {
    res.empty_range = true;
    return res;
  }
  if (p.eps == 0.0) return res;
  if (res.l_hi - res.l_lo > 50'000'000) throw ResourceError("tail sum index range too long");

  // exact summation around the running max keeps the tail from underflowing
  double m = -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::int64_t l = res.l_lo; l <= res.l_hi; ++l) {
    const double term = log_tail_summand(p, sigma, l);
    if (keep_summands) res.log_summands.emplace_back(l, term);
    if (std::isinf(term) && term < 0) continue;
    if (term > m) {
      acc = acc * std::exp(m - term) + 1.0;
      m = term;
    } else {
      acc += std::exp(term - m);
    }
  }
  if (acc > 0.0) {
    res.log_value = m + std::log(acc);
    res.value = std::exp(res.log_value);
  }
  return res;
}

inline void write_csv(std::ostream& os, const TailSumResult& res) {
  csv::row(os, std::string("l"), std::string("summand"));
  for (const auto& [l, lg] : res.log_summands) csv::row(os, l, std::exp(lg));
}

} // namespace fnls
