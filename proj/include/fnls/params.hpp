#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnls/errors.hpp"

namespace fnls {

enum class RegimeTag { none, inflation_line, wellposed_line };

inline std::string to_string(RegimeTag tag) {
  switch (tag) {
  case RegimeTag::inflation_line: return "inflation-line";
  case RegimeTag::wellposed_line: return "wellposed-line";
  default: return "none";
  }
}

inline RegimeTag regime_tag_from_string(const std::string& s) {
  if (s == "inflation-line") return RegimeTag::inflation_line;
  if (s == "wellposed-line") return RegimeTag::wellposed_line;
  if (s == "none" || s.empty()) return RegimeTag::none;
  throw ConfigError("unknown regime_tag '" + s + "'");
}

/// Constants of one experiment. theta, k and T are always populated; use
/// resolve() to derive them from a ParamsSpec.
struct ExperimentParams {
  double alpha = 2.0;  // dispersion exponent
  double beta = 1.0;   // derivative exponent
  double s = 0.0;      // data regularity
  double sigma = 0.0;  // measurement regularity
  double eps = 0.1;
  std::int64_t N = 16;
  double theta = 1.5;  // support-width exponent, bands have width N^-theta
  int k = 3;           // iterate depth
  double T = 1.0;      // final time
  RegimeTag tag = RegimeTag::none;

  /// Width 1/N^theta of the elementary frequency cells.
  double cell_width() const { return std::pow(static_cast<double>(N), -theta); }
};

struct RegimeReport {
  bool ok = true;
  std::vector<std::string> violations;

  void require(bool cond, const char* name) {
    if (!cond) {
      ok = false;
      violations.emplace_back(name);
    }
  }

  /// Throws RegimeError naming every violated inequality.
  void throw_if_violated() const {
    if (ok) return;
    std::string msg = "regime violated:";
    for (const auto& v : violations) msg += " " + v;
    throw RegimeError(msg);
  }
};

/// Lower end of the admissible theta window on the inflation line.
inline double theta_window_lo(double alpha, double beta) {
  return std::max({0.0, alpha - 1.0, 2.0 * (beta - 1.0) / 3.0});
}

/// Checks the inequalities of the requested regime and names each one that
/// fails. Violation names:
///   derivative_above_smoothing_threshold  beta > max((alpha-1)/2, 0)
///   theta_window                          lo(alpha,beta) < theta < 2 beta
///   wellposed_dispersion                  alpha > 1
///   wellposed_beta_range                  0 <= beta <= (alpha-1)/2
///   wellposed_regularity                  s > max(beta + 1/2, alpha/4)
/// plus the basic invariants alpha_positive, eps_range, N_min, T_positive.
inline RegimeReport validate_regime(const ExperimentParams& p, RegimeTag tag) {
  RegimeReport r;
  r.require(p.alpha > 0.0, "alpha_positive");
  r.require(p.eps > 0.0 && p.eps < 1.0, "eps_range");
  r.require(p.N >= 2, "N_min");
  r.require(p.T > 0.0, "T_positive");
  switch (tag) {
  case RegimeTag::inflation_line:
    r.require(p.beta > std::max((p.alpha - 1.0) / 2.0, 0.0),
              "derivative_above_smoothing_threshold");
    r.require(p.theta > theta_window_lo(p.alpha, p.beta) && p.theta < 2.0 * p.beta,
              "theta_window");
    break;
  case RegimeTag::wellposed_line:
    r.require(p.alpha > 1.0, "wellposed_dispersion");
    r.require(p.beta >= 0.0 && p.beta <= (p.alpha - 1.0) / 2.0, "wellposed_beta_range");
    r.require(p.s > std::max(p.beta + 0.5, p.alpha / 4.0), "wellposed_regularity");
    break;
  case RegimeTag::none: break;
  }
  return r;
}

/// Midpoint of the open theta window.
inline double choose_theta(double alpha, double beta) {
  const double lo = theta_window_lo(alpha, beta);
  const double hi = 2.0 * beta;
  if (!(beta > std::max((alpha - 1.0) / 2.0, 0.0)) || !(lo < hi))
    throw RegimeError("empty theta window: beta must exceed max((alpha-1)/2, 0)");
  return 0.5 * (lo + hi);
}

/// Iterate depth k = ceil((|sigma-s|+1)/(beta-theta/2)) + 1.
inline int choose_k(double s, double sigma, double beta, double theta) {
  const double gap = beta - theta / 2.0;
  if (!(gap > 0.0)) throw RegimeError("choose_k needs beta - theta/2 > 0");
  double x = (std::abs(sigma - s) + 1.0) / gap;
  // quotients like 3/1.5 must not round up to the next integer
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) x = r;
  return static_cast<int>(std::ceil(x)) + 1;
}

inline double choose_time_line(double N) {
  if (!(N > 1.0)) throw DomainError("choose_time_line needs N > 1");
  return 1.0 / std::log(N);
}

inline double choose_time_torus(double N, double s, double sigma, double beta) {
  if (!(N > 1.0)) throw DomainError("choose_time_torus needs N > 1");
  const double L = std::log(N);
  return (std::abs(sigma - s) + 1.0) * L * L / std::pow(N, beta);
}

/// User-facing parameter set; theta, k and T may be left for derivation.
struct ParamsSpec {
  double alpha = 2.0;
  double beta = 1.0;
  double s = 0.0;
  double sigma = 0.0;
  double eps = 0.1;
  std::int64_t N = 16;
  std::optional<double> theta;
  std::optional<int> k;
  std::optional<double> T;
  RegimeTag tag = RegimeTag::inflation_line;
};

/// Fills omitted theta/k/T. T defaults to 1/log N for line regimes and to
/// the torus time otherwise.
inline ExperimentParams resolve(const ParamsSpec& in) {
  for (double v : {in.alpha, in.beta, in.s, in.sigma, in.eps})
    if (!std::isfinite(v)) throw ConfigError("non-finite parameter");
  ExperimentParams p;
  p.alpha = in.alpha;
  p.beta = in.beta;
  p.s = in.s;
  p.sigma = in.sigma;
  p.eps = in.eps;
  p.N = in.N;
  p.tag = in.tag;
  if (in.theta) {
    p.theta = *in.theta;
  } else if (in.tag == RegimeTag::inflation_line) {
    p.theta = choose_theta(in.alpha, in.beta);
  } else {
    p.theta = in.beta > 0.0 ? in.beta : 1.0;
  }
  if (in.k) {
    p.k = *in.k;
  } else if (in.beta - p.theta / 2.0 > 0.0) {
    p.k = choose_k(in.s, in.sigma, in.beta, p.theta);
  } else {
    p.k = 2;
  }
  if (in.T) {
    p.T = *in.T;
  } else if (in.tag == RegimeTag::none) {
    p.T = choose_time_torus(static_cast<double>(in.N), in.s, in.sigma, in.beta);
  } else {
    p.T = choose_time_line(static_cast<double>(in.N));
  }
  return p;
}

inline ParamsSpec params_spec_from_json(const nlohmann::json& j) {
  ParamsSpec p;
  try {
    p.alpha = j.at("alpha").get<double>();
    p.beta = j.at("beta").get<double>();
    p.s = j.value("s", 0.0);
    p.sigma = j.value("sigma", 0.0);
    p.eps = j.at("eps").get<double>();
    p.N = j.at("N").get<std::int64_t>();
    if (j.contains("theta") && !j["theta"].is_null()) p.theta = j["theta"].get<double>();
    if (j.contains("k") && !j["k"].is_null()) p.k = j["k"].get<int>();
    if (j.contains("T") && !j["T"].is_null()) p.T = j["T"].get<double>();
    p.tag = regime_tag_from_string(j.value("regime_tag", std::string("inflation-line")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("params JSON: ") + e.what());
  }
  return p;
}

/// Overlays the keys present in j onto p; unknown keys are left to the caller.
inline void merge_params_json(ParamsSpec& p, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("params JSON must be an object");
  try {
    if (j.contains("alpha")) p.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) p.beta = j["beta"].get<double>();
    if (j.contains("s")) p.s = j["s"].get<double>();
    if (j.contains("sigma")) p.sigma = j["sigma"].get<double>();
    if (j.contains("eps")) p.eps = j["eps"].get<double>();
    if (j.contains("N")) p.N = j["N"].get<std::int64_t>();
    if (j.contains("theta") && !j["theta"].is_null()) p.theta = j["theta"].get<double>();
    if (j.contains("k") && !j["k"].is_null()) p.k = j["k"].get<int>();
    if (j.contains("T") && !j["T"].is_null()) p.T = j["T"].get<double>();
    if (j.contains("regime_tag")) p.tag = regime_tag_from_string(j["regime_tag"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("params JSON: ") + e.what());
  }
}

inline nlohmann::json to_json(const ExperimentParams& p) {
  return nlohmann::json{{"alpha", p.alpha}, {"beta", p.beta}, {"s", p.s},
                        {"sigma", p.sigma}, {"eps", p.eps},   {"N", p.N},
                        {"theta", p.theta}, {"k", p.k},       {"T", p.T},
                        {"regime_tag", to_string(p.tag)}};
}

} // namespace fnls
