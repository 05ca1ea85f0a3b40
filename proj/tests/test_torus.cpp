#include <chrono>
#include <cmath>
#include <complex>
#include <sstream>

#include <gtest/gtest.h>

#include "fnls/torus.hpp"

using namespace fnls;

namespace {

ExperimentParams torus_params(std::int64_t N, double beta = 1.0, double s = 0.0, double sigma = 0.0) {
  ExperimentParams p;
  p.alpha = 2.0;
  p.beta = beta;
  p.s = s;
  p.sigma = sigma;
  p.eps = 0.1;
  p.N = N;
  return p;
}

// independent growth law: |phiN| exp(t Re phi0 N^beta)
double growth_law(const TorusData& d, double t) {
  return std::abs(d.phiN) * std::exp(t * d.phi0.real() * std::pow(static_cast<double>(d.N), d.beta));
}

} // namespace

TEST(BuildPhiTorus, Examples) {
  auto c = build_phi_torus(torus_params(16));
  EXPECT_NEAR(c.coeffs[0][0].real(), 0.36067, 1e-5);
  EXPECT_NEAR(c.coeffs[0][1].real(), 0.36067, 1e-5);
  EXPECT_DOUBLE_EQ(c.coeffs[0][0].real(), 1.0 / std::log(16.0));
  for (int m = 2; m <= c.K; ++m) EXPECT_EQ(c.coeffs[0][static_cast<std::size_t>(m)], cplx{});
  EXPECT_THROW(build_phi_torus(torus_params(2)), DomainError);
}

TEST(BuildPhiTorus, NormBound) {
  for (std::int64_t N : {3, 8, 100, 4096})
    for (double s : {-1.0, 0.0, 0.5, 2.0}) {
      auto c = build_phi_torus(torus_params(N, 1.0, s));
      EXPECT_LE(torus_hs_norm(c.coeffs[0], static_cast<double>(N), s), 2.0 / std::log(double(N)));
    }
}

TEST(ClosedForm, Examples) {
  TorusData d{2.0, 1.0, 4, cplx(0.5, 0.0), cplx(0.1, 0.0)};
  EXPECT_NEAR(std::abs(cascade_closed_form_first_mode(d, 1.0)), 0.1 * std::exp(2.0), 1e-14);
  EXPECT_NEAR(std::abs(cascade_closed_form_first_mode(d, 1.0)), 0.73891, 1e-5);
  EXPECT_EQ(cascade_closed_form_first_mode(d, 0.0), d.phiN);
  TorusData e = d;
  e.alpha = 3.7;
  EXPECT_NEAR(std::abs(cascade_closed_form_first_mode(e, 1.0)), std::abs(cascade_closed_form_first_mode(d, 1.0)), 1e-15);
}

TEST(ClosedForm, ImaginaryZeroModeDoesNotChangeModulus) {
  TorusData d{2.0, 1.0, 8, cplx(0.3, 0.0), cplx(0.2, 0.0)};
  TorusData e = d;
  e.phi0 = cplx(0.3, 0.9);
  for (double t : {0.05, 0.1, 0.2})
    EXPECT_NEAR(std::abs(cascade_closed_form_first_mode(e, t)), std::abs(cascade_closed_form_first_mode(d, t)),
                1e-14 * std::abs(cascade_closed_form_first_mode(d, t)));
  auto o = ode_oracle(e, 2, 0.2);
  EXPECT_NEAR(std::abs(o.coeffs.back()[1]), growth_law(e, 0.2), 1e-9 * growth_law(e, 0.2));
}

TEST(Oracle, MatchesGrowthLaw) {
  TorusData d = torus_data(torus_params(8));
  auto o = ode_oracle(d, 2, 0.2);
  EXPECT_NEAR(std::abs(o.coeffs.back()[1]), growth_law(d, 0.2), 1e-9 * growth_law(d, 0.2));
  EXPECT_LT(o.achieved_change, 1e-10);
  // log form of the growth law
  const double lhs = std::log(std::abs(o.coeffs.back()[1])) - std::log(std::abs(d.phiN));
  EXPECT_NEAR(lhs, 0.2 * d.phi0.real() * 8.0, 1e-9);
}

TEST(Oracle, GridOfConfigurations) {
  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t N : {8, 16, 32})
    for (double beta : {0.5, 1.0, 2.0})
      for (double t : {0.1, 0.2}) {
        TorusData d = torus_data(torus_params(N, beta));
        auto o = ode_oracle(d, 2, t);
        const double ref = growth_law(d, t);
        EXPECT_NEAR(std::abs(o.coeffs.back()[1]), ref, 1e-9 * ref) << N << " " << beta << " " << t;
      }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 10.0);
}

TEST(Oracle, ZeroModeConserved) {
  TorusData d = torus_data(torus_params(16));
  auto o = ode_oracle(d, 6, 0.1);
  for (const auto& c : o.coeffs) EXPECT_NEAR(std::abs(c[0] - d.phi0), 0.0, 1e-13);
}

TEST(Oracle, Triangular) {
  TorusData d = torus_data(torus_params(8));
  std::vector<cplx> base(6, cplx{});
  base[0] = d.phi0;
  base[1] = d.phiN;
  base[2] = cplx(0.01, 0.02);
  for (std::size_t m = 1; m + 1 < base.size(); ++m) {
    auto bumped = base;
    bumped[m + 1] += cplx(0.05, -0.03);
    auto a = ode_oracle(d, base, 0.1), b = ode_oracle(d, bumped, 0.1);
    for (std::size_t j = 0; j <= m; ++j) EXPECT_EQ(a.coeffs.back()[j], b.coeffs.back()[j]) << m << " " << j;
    EXPECT_NE(a.coeffs.back()[m + 1], b.coeffs.back()[m + 1]);
  }
}

TEST(Oracle, TruncationDoesNotTouchFirstMode) {
  TorusData d = torus_data(torus_params(8));
  auto a = ode_oracle(d, 6, 0.1), b = ode_oracle(d, 8, 0.1);
  EXPECT_EQ(a.coeffs.back()[1], b.coeffs.back()[1]);
}

TEST(Oracle, Errors) {
  TorusData d = torus_data(torus_params(8));
  EXPECT_THROW(ode_oracle(d, 1, 0.1), DomainError);
  // mode 8N at beta = 2 blows up beyond the double range
  TorusData e = torus_data(torus_params(32, 2.0));
  EXPECT_THROW(ode_oracle(e, 8, 0.2), ResourceError);
}

TEST(CascadeIterates, FirstMatchesClosedForm) {
  TorusData d = torus_data(torus_params(16));
  const std::vector<double> times{0.0, 0.05, 0.1};
  auto v = cascade_iterates(d, 3, times);
  for (std::size_t j = 0; j < times.size(); ++j) {
    const cplx ref = cascade_closed_form_first_mode(d, times[j]);
    EXPECT_NEAR(std::abs(v[0][j] - ref), 0.0, 1e-12 * std::abs(ref));
  }
}

TEST(CascadeIterates, MatchOracleModes) {
  // v^(k) lives on mode kN only, so mode m of the solution is v^(m)
  for (double beta : {0.5, 1.0, 2.0}) {
    TorusData d = torus_data(torus_params(8, beta));
    d.phi0 = cplx(d.phi0.real(), 0.1);
    std::vector<cplx> init(6, cplx{});
    init[0] = d.phi0;
    init[1] = d.phiN;
    auto o = ode_oracle(d, init, 0.05, 8, 1e-10, 5);
    auto v = cascade_iterates(d, 5, o.times);
    for (std::size_t j = 0; j < o.times.size(); ++j)
      for (std::size_t m = 1; m <= 5; ++m) {
        const cplx ref = o.coeffs[j][m];
        EXPECT_NEAR(std::abs(v[m - 1][j] - ref), 0.0, 1e-9 * std::abs(ref))
            << "beta " << beta << " m " << m << " t " << o.times[j];
      }
  }
}

TEST(CascadeIterates, ResonanceFallback) {
  // a single exponent lam_2 = 2 lam_1 forces the series branch
  TorusData d{1.0, 1.0, 8, cplx(0.0, 0.0), cplx(0.3, 0.0)};
  auto o = ode_oracle(d, 2, 0.3, 4);
  auto v = cascade_iterates(d, 2, o.times);
  for (std::size_t j = 0; j < o.times.size(); ++j)
    EXPECT_NEAR(std::abs(v[1][j] - o.coeffs[j][2]), 0.0, 1e-10);
  // second mode from the explicit resonant formula 8 phiN^2 t e^{-16 i t}
  const double t = 0.3;
  EXPECT_NEAR(std::abs(evaluate(cascade_iterates(d, 2, t)[1], t) - 8.0 * 0.09 * t * std::polar(1.0, -16.0 * t)), 0.0, 1e-14);
}

TEST(TorusInflation, GrowthFactorIdentity) {
  auto r = torus_report(32, 0.1, 0.0, 0.0, 1.0);
  EXPECT_NEAR(r.T, std::pow(std::log(32.0), 2) / 32.0, 1e-15);
  EXPECT_NEAR(r.T, 0.37527, 1e-3);
  EXPECT_NEAR(r.growth, 32.0 / std::log(32.0), 1e-12);
  EXPECT_NEAR(r.growth_exp_form, r.growth, 1e-12 * r.growth);
  auto q = torus_report(1000, 0.1, 0.5, 1.5, 1.0);
  EXPECT_NEAR(q.growth_exp_form, q.growth, 1e-12 * q.growth);
  const double jb = std::sqrt(1.0 + 1e6);
  EXPECT_NEAR(q.growth, jb * 1e6 / std::log(1000.0), 1e-9 * q.growth);
}

TEST(TorusInflation, SmallestN) {
  for (double eps : {0.1, 0.05}) {
    ExperimentParams p = torus_params(3);
    p.eps = eps;
    auto r = inflation_experiment_torus(p);
    EXPECT_TRUE(r.all()) << eps;
    EXPECT_TRUE(r.conclusion);
    EXPECT_TRUE(r.previous_fails);
    EXPECT_GE(std::log(static_cast<double>(r.N)), 2.0 / eps - 1e-9);
    EXPECT_LT(r.phi_norm, eps);
    EXPECT_GT(r.growth, 1.0 / eps);
  }
}

TEST(TorusInflation, SmallestNWithSlowDerivative) {
  // T threshold binds here, not the data threshold
  const std::int64_t N = smallest_torus_N(0.1, 0.0, 0.0, 0.25);
  auto r = torus_report(N, 0.1, 0.0, 0.0, 0.25);
  EXPECT_TRUE(r.all());
  EXPECT_TRUE(r.previous_fails);
  EXPECT_GT(std::log(static_cast<double>(N)), 21.0);
}

TEST(TorusInflation, Csv) {
  std::ostringstream os;
  write_torus_header(os);
  write_torus_row(os, torus_report(32, 0.1, 0.0, 0.0, 1.0));
  EXPECT_NE(os.str().find("eps,N,T,phi_norm,growth"), std::string::npos);
  std::ostringstream tr;
  write_trajectory(tr, build_phi_torus(torus_params(8), 2));
  EXPECT_EQ(tr.str().substr(0, 9), "t,m,re,im");
}
