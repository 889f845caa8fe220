#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rfob/cubic.hpp"
#include "rfob/polynomial.hpp"

using namespace rfob;

namespace {

std::vector<oracle::cld> to_ld(const std::array<cdouble, 3>& r) {
  return {oracle::cld(r[0].real(), r[0].imag()), oracle::cld(r[1].real(), r[1].imag()),
          oracle::cld(r[2].real(), r[2].imag())};
}

double root_error(double a3, double a2, double a1, double a0) {
  const auto sol = solve_cubic(a3, a2, a1, a0);
  return oracle::max_root_distance(to_ld(sol.roots), oracle::clustered_roots({a3, a2, a1, a0}));
}

}  // namespace

TEST(Polynomial, StripsLeadingZeros) {
  const Polynomial p{0.0, 0.0, 2.0, 1.0};
  EXPECT_EQ(p.degree(), 1);
  EXPECT_EQ(p.leading(), 2.0);
  EXPECT_TRUE(Polynomial{}.is_zero());
}

TEST(Polynomial, Arithmetic) {
  const Polynomial a{1.0, 2.0}, b{1.0, -3.0, 4.0};
  EXPECT_EQ(a * b, (Polynomial{1.0, -1.0, -2.0, 8.0}));
  EXPECT_EQ(a + b, (Polynomial{1.0, -2.0, 6.0}));
  EXPECT_EQ((2.0 * a).coeffs(), (std::vector<double>{2.0, 4.0}));
  EXPECT_EQ(b(2.0), 2.0);
  EXPECT_EQ(b.derivative(), (Polynomial{2.0, -3.0}));
  EXPECT_EQ((Polynomial{2.0, 4.0}).monic(), (Polynomial{1.0, 2.0}));
}

TEST(Polynomial, RelativeCoefficientError) {
  EXPECT_EQ(max_relative_coeff_error(Polynomial{1.0, 2.0}, Polynomial{1.0, 2.0}), 0.0);
  EXPECT_NEAR(max_relative_coeff_error(Polynomial{1.0, 2.002}, Polynomial{1.0, 2.0}), 0.002 / 2.002, 1e-15);
}

TEST(Cubic, FactoredExample) {
  const auto sol = solve_cubic(1.0, -6.0, 11.0, -6.0);
  EXPECT_TRUE(sol.three_real);
  EXPECT_GT(sol.discriminant, 0.0);
  const auto r = real_roots(sol);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], 1.0, 1e-12);
  EXPECT_NEAR(r[1], 2.0, 1e-12);
  EXPECT_NEAR(r[2], 3.0, 1e-12);
}

TEST(Cubic, CubeRootOfTwo) {
  const auto sol = solve_cubic(1.0, 0.0, 0.0, -2.0);
  EXPECT_FALSE(sol.three_real);
  EXPECT_LT(sol.discriminant, 0.0);
  const auto r = real_roots(sol);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], std::cbrt(2.0), 1e-14);
  EXPECT_LT(root_error(1.0, 0.0, 0.0, -2.0), 1e-12);
  EXPECT_EQ(sol.roots[0], std::conj(sol.roots[1]));
}

TEST(Cubic, TripleRoot) {
  const auto sol = solve_cubic(2.0, -6.0, 6.0, -2.0);
  for (const auto& r : sol.roots) EXPECT_NEAR(std::abs(r - 1.0), 0.0, 1e-12);
}

TEST(Cubic, ConstructedDoubleRootIsExact) {
  // (x - 1.5)^2 (x + 2.25)
  const auto p = oracle::from_real_roots({1.5L, 1.5L, -2.25L});
  const auto sol = solve_cubic(1.0, static_cast<double>(p[1]), static_cast<double>(p[2]),
                               static_cast<double>(p[3]));
  EXPECT_EQ(sol.discriminant, 0.0);
  EXPECT_TRUE(sol.three_real);
  const auto r = real_roots(sol);
  EXPECT_EQ(r, (std::vector<double>{-2.25, 1.5, 1.5}));
}

TEST(Cubic, RejectsZeroLeadingCoefficient) {
  EXPECT_THROW(solve_cubic(0.0, 1.0, 2.0, 3.0), std::invalid_argument);
}

TEST(Cubic, LowerDegreeHelpers) {
  EXPECT_NEAR(solve_linear(2.0, -3.0)[0].real(), 1.5, 1e-15);
  const auto q = solve_quadratic(1.0, 0.0, 1.0);
  EXPECT_NEAR(std::abs(q[0] - cdouble(0.0, -1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(q[1] - cdouble(0.0, 1.0)), 0.0, 1e-15);
}

TEST(Cubic, VietaAndClassificationProperties) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-10.0, 10.0), lead(0.1, 5.0);
  for (int i = 0; i < 3000; ++i) {
    const double a3 = lead(rng) * (i % 2 ? 1.0 : -1.0), a2 = u(rng), a1 = u(rng), a0 = u(rng);
    const auto sol = solve_cubic(a3, a2, a1, a0);
    const cdouble sum = sol.roots[0] + sol.roots[1] + sol.roots[2];
    const cdouble prod = sol.roots[0] * sol.roots[1] * sol.roots[2];
    EXPECT_NEAR(sum.real(), -a2 / a3, 1e-9 * std::max(1.0, std::abs(a2 / a3)));
    EXPECT_NEAR(prod.real(), -a0 / a3, 1e-9 * std::max(1.0, std::abs(a0 / a3)));
    EXPECT_NEAR(sum.imag(), 0.0, 1e-12);
    const auto n_real = std::count_if(sol.roots.begin(), sol.roots.end(),
                                      [](cdouble r) { return r.imag() == 0.0; });
    EXPECT_EQ(n_real, sol.three_real ? 3 : 1);
  }
}

TEST(Cubic, EtaRootNearOne) {
  // 2 eta xi^2 psi k^3 - (1 + 2 eta xi^2) k^2 + 1 with eta = 0.1, xi = 0.9, psi = 0.007138.
  const double c = 2.0 * 0.1 * 0.81;
  const double a3 = c * 0.007138, a2 = -(1.0 + c);
  const auto r = real_roots(solve_cubic(a3, a2, 0.0, 1.0));
  std::vector<double> positive;
  for (double x : r)
    if (x > 0.0) positive.push_back(x);
  ASSERT_EQ(positive.size(), 2u);
  auto f = [&](double k) { return (a3 * k + a2) * k * k + 1.0; };
  EXPECT_NEAR(positive[0], oracle::bisect(f, 0.5, 1.0), 1e-12);
  EXPECT_NEAR(positive[1], oracle::bisect(f, 900.0, 1100.0), 1e-9);
  EXPECT_NEAR(positive[0], 0.928, 5e-4);
  EXPECT_NEAR(positive[1], 1004.8, 0.1);
}

TEST(Cubic, MatchesCompanionOracleOnRandomDraws) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_int_distribution<int> q(-40, 40);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    oracle::Poly p;
    if (i % 3 == 0) {
      p = oracle::from_real_roots({u(rng), u(rng), u(rng)});
    } else if (i % 3 == 1) {
      const oracle::ld r = q(rng) / 4.0L, s = q(rng) / 4.0L;
      p = oracle::from_real_roots({r, r, s});
    } else {
      const oracle::ld re = u(rng), im = std::abs(u(rng)) + 0.1L;
      p = oracle::multiply({1.0L, static_cast<oracle::ld>(-u(rng))},
                           {1.0L, -2.0L * re, re * re + im * im});
    }
    worst = std::max(worst, root_error(1.0, static_cast<double>(p[1]), static_cast<double>(p[2]),
                                       static_cast<double>(p[3])));
  }
  EXPECT_LT(worst, 1e-8);
}
