#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "fnls/iterates.hpp"

using namespace fnls;

namespace {

ExperimentParams line_params(std::int64_t N, double theta = 1.5) {
  ExperimentParams p;
  p.alpha = 2.0;
  p.beta = 1.0;
  p.s = 0.0;
  p.sigma = 0.0;
  p.eps = 0.1;
  p.N = N;
  p.theta = theta;
  p.k = 3;
  p.T = 1.0 / std::log(static_cast<double>(N));
  return p;
}

// Second iterate from its closed time integral:
// e^{-it xi^a} int phi(xi-eta) |eta|^b phi(eta) (e^{it w} - 1)/(i w) d eta,
// w = xi^a - (xi-eta)^a - eta^a, integrated adaptively piece by piece.
std::complex<double> second_iterate_oracle(const ExperimentParams& p, double t, double xi) {
  const PiecewisePoly phi = build_phi(p);
  std::vector<double> cuts = phi.breaks();
  for (double b : phi.breaks()) cuts.push_back(xi - b);
  std::sort(cuts.begin(), cuts.end());
  auto kernel = [&](double eta) {
    const double w = std::pow(xi, p.alpha) - std::pow(std::abs(xi - eta), p.alpha) - std::pow(eta, p.alpha);
    // (e^{iwt} - 1)/(iw) in cancellation-free form
    const double half = std::sin(0.5 * w * t);
    const std::complex<double> time_part =
        w == 0.0 ? std::complex<double>(t, 0.0)
                 : std::complex<double>(std::sin(w * t) / w, 2.0 * half * half / w);
    return phi(xi - eta) * std::pow(eta, p.beta) * phi(eta) * time_part;
  };
  std::complex<double> acc{};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = std::max(cuts[i], phi.support_lo()), hi = std::min(cuts[i + 1], phi.support_hi());
    if (!(lo < hi)) continue;
    const double mid = 0.5 * (lo + hi);
    if (phi(mid) == 0.0 || phi(xi - mid) == 0.0) continue;
    acc += std::complex<double>(adaptive_gauss([&](double e) { return kernel(e).real(); }, lo, hi, 1e-13),
            adaptive_gauss([&](double e) { return kernel(e).imag(); }, lo, hi, 1e-13));
  }
  return std::polar(1.0, -t * std::pow(xi, p.alpha)) * acc;
}

} // namespace

TEST(SupportUk, Examples) {
  auto s1 = support_uk(1, 8.0, 1.0);
  ASSERT_EQ(s1.size(), 2u);
  EXPECT_DOUBLE_EQ(s1[0].lo, 0.125);
  EXPECT_DOUBLE_EQ(s1[0].hi, 0.25);
  EXPECT_DOUBLE_EQ(s1[1].lo, 8.0);
  EXPECT_DOUBLE_EQ(s1[1].hi, 8.125);
  auto s2 = support_uk(2, 8.0, 1.0);
  ASSERT_EQ(s2.size(), 3u);
  EXPECT_DOUBLE_EQ(s2[0].lo, 0.25);
  EXPECT_DOUBLE_EQ(s2[0].hi, 0.5);
  EXPECT_DOUBLE_EQ(s2[1].lo, 8.125);
  EXPECT_DOUBLE_EQ(s2[1].hi, 8.375);
  EXPECT_DOUBLE_EQ(s2[2].lo, 16.0);
  EXPECT_DOUBLE_EQ(s2[2].hi, 16.25);
}

TEST(BuildPhi, Values) {
  auto p = line_params(8);
  auto phi = build_phi(p);
  const double h = p.cell_width();
  EXPECT_DOUBLE_EQ(phi(1.5 * h), p.eps * std::pow(8.0, p.theta / 2));
  EXPECT_EQ(phi(4.0), 0.0);
  EXPECT_LE(weighted_L2_norm(phi, p.s), 4.0 * p.eps);
  p.theta = 1.0;  // on the open boundary of the window
  EXPECT_THROW(build_phi(p), RegimeError);
}

TEST(CumulativeWeights, ExactForCubics) {
  const std::size_t M = 9;
  const double dt = 0.1;
  const auto W = detail::cumulative_weights(M, dt);
  for (std::size_t m = 1; m <= M; ++m) {
    double acc = 0.0;
    for (std::size_t n = 0; n < W[m].size(); ++n) {
      const double t = n * dt;
      acc += W[m][n] * (1.0 - 2.0 * t + 3.0 * t * t - 4.0 * t * t * t);
    }
    const double t = m * dt;
    EXPECT_NEAR(acc, t - t * t + t * t * t - t * t * t * t, 1e-14) << m;
  }
}

TEST(Iterates, FirstIterateModulusInvariant) {
  auto p = line_params(8);
  auto fam = iterate_full(p, 1);
  auto phi = build_phi(p);
  for (std::size_t m = 0; m < fam.times.size(); ++m)
    for (std::size_t c = 0; c < fam.grid.size(); ++c)
      for (std::size_t a = 0; a < cell_points; ++a)
        EXPECT_DOUBLE_EQ(std::abs(fam.value(1, m, c, a)), phi(fam.grid.node(c, a)));
}

TEST(Iterates, SecondIterateMatchesClosedForm) {
  for (std::int64_t N : {8, 16}) {
    auto p = line_params(N);
    auto fam = iterate_full(p, 2);
    const std::size_t m = fam.times.size() - 1;
    double peak = 0.0, err = 0.0;
    for (std::size_t c = 0; c < fam.grid.size(); ++c) {
      if (fam.grid.cell(c).j > 1) continue;  // the j = 2 band is not time resolved
      for (std::size_t a = 0; a < cell_points; a += 3) {
        const double xi = fam.grid.node(c, a);
        const auto ref = second_iterate_oracle(p, fam.times[m], xi);
        peak = std::max(peak, std::abs(ref));
        err = std::max(err, std::abs(fam.value(2, m, c, a) - ref));
      }
    }
    EXPECT_LT(err, 1e-9 * peak) << "N " << N;
  }
}

TEST(Iterates, SupportContainment) {
  for (std::int64_t N : {8, 16}) {
    auto p = line_params(N, choose_theta(2.0, 1.0));
    auto rep = support_check(iterate_full(p, 4));
    EXPECT_GT(rep.cells_checked, 0u);
    EXPECT_LT(rep.max_outside_relative, 1e-14) << "N " << N << " l " << rep.worst_l;
    auto low = support_check(iterate_low(p, 4));
    EXPECT_LT(low.max_outside_relative, 1e-14);
  }
}

TEST(Iterates, LowBandBound) {
  for (std::int64_t N : {8, 16}) {
    auto rep = low_band_bound_check(iterate_low(line_params(N), 4));
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_GT(rep.max_ratio, 0.0);
    EXPECT_LE(rep.max_ratio, 1.0);
  }
}

TEST(Iterates, ParallelMatchesSerial) {
  auto p = line_params(8);
  IterateOptions a, b;
  b.jobs = 4;
  auto x = iterate_full(p, 3, a), y = iterate_full(p, 3, b);
  for (int l = 1; l <= 3; ++l) EXPECT_EQ(x.v[l - 1], y.v[l - 1]);
}

TEST(Iterates, TimeQuadratureConverged) {
  auto p = line_params(16);
  IterateOptions coarse, fine;
  fine.time_intervals = 128;
  auto a = inflation_experiment_line(p, coarse), b = inflation_experiment_line(p, fine);
  EXPECT_LT(std::abs(a.band_norm - b.band_norm), 1e-6 * b.band_norm);
}

TEST(Iterates, Budgets) {
  auto p = line_params(8);
  EXPECT_THROW(iterate_full(p, 6), ResourceError);
  IterateOptions o;
  o.time_intervals = 10000;
  EXPECT_THROW(iterate_full(p, 2, o), ResourceError);
  EXPECT_THROW(iterate_full(p, 0), DomainError);
}

TEST(LeadingTerm, FirstOrderIsLinearEvolution) {
  auto p = line_params(8);
  const double N = 8.0, h = p.cell_width(), t = 0.2;
  const double xi = N + 0.5 * h;
  const auto lead = leading_term(1, t, p, xi);
  EXPECT_NEAR(std::abs(lead), p.eps * std::pow(N, p.theta / 2), 1e-14);
  EXPECT_NEAR(std::arg(lead * std::polar(1.0, t * xi * xi)), 0.0, 1e-9);
  EXPECT_EQ(leading_term(1, t, p, N + 2 * h), 0.0);
}

TEST(LeadingTerm, ModulusScalesWithTime) {
  auto p = line_params(16);
  const double xi = 16.0 + 2.5 * p.cell_width();
  const double a = std::abs(leading_term(3, 0.1, p, xi)), b = std::abs(leading_term(3, 0.2, p, xi));
  EXPECT_NEAR(b / a, 4.0, 1e-12);
}

TEST(LeadingTerm, DeviationDecaysWithN) {
  const double theta = choose_theta(2.0, 1.0);
  const double threshold = -std::min(theta + 1.0, (theta + 1.0) * 1.0) + 0.5;
  for (int k : {2, 3}) {
    std::vector<double> Ns, dev;
    for (std::int64_t N : {8, 16, 32}) {
      auto d = leading_deviation(line_params(N, theta), k, 1e-6);
      Ns.push_back(static_cast<double>(N));
      dev.push_back(d.relative_l2);
    }
    EXPECT_GT(dev[0], dev[1]);
    EXPECT_GT(dev[1], dev[2]);
    EXPECT_LE(loglog_slope(Ns, dev), threshold) << "k " << k;
  }
}

TEST(BandIndices, Examples) {
  auto p = line_params(8);
  const double h = p.cell_width();
  auto r3 = band_decomposition_indices(3, p, 8.0 + 2.5 * h);
  EXPECT_EQ(r3.full_lo, 1);
  EXPECT_EQ(r3.full_hi, 3);
  auto r2 = band_decomposition_indices(2, p, 8.0 + 1.5 * h);
  EXPECT_EQ(r2.full_lo, 1);
  EXPECT_EQ(r2.full_hi, 2);
  EXPECT_EQ(r3.low_lo, static_cast<std::int64_t>(std::floor((2 + std::pow(8.0, 2.5)) / 2)));
  EXPECT_GT(r3.low_lo, 80);
  EXPECT_THROW(band_decomposition_indices(3, p, 8.0), DomainError);
}

TEST(LineInflation, RatioStableAndExponent) {
  std::vector<double> Ns, norm, ratio;
  for (std::int64_t N : {8, 16, 32}) {
    auto p = line_params(N);
    auto r = inflation_experiment_line(p);
    EXPECT_LE(r.tail, p.eps);
    EXPECT_GE(r.ratio(), 1.0);
    Ns.push_back(static_cast<double>(N));
    norm.push_back(r.band_norm / (std::pow(p.eps, 3) * std::pow(std::log(double(N)), -2)));
    ratio.push_back(r.ratio());
  }
  EXPECT_LT(*std::max_element(ratio.begin(), ratio.end()) / *std::min_element(ratio.begin(), ratio.end()), 4.0);
  EXPECT_NEAR(loglog_slope(Ns, norm), 0.5, 0.4);
}
