#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "placement.hpp"
#include "rfob/design.hpp"

using namespace rfob;

namespace {

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

bool all_constraints_pass(const DesignResult& r) {
  for (const auto& c : r.constraints)
    if (!c.pass) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Pure damping.

TEST(DesignDamping, Example) {
  const auto r = design_damping(0.81, 2.0, 1000.0, {0.7071, 1.0});
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.w_n, 355.30, 0.01);
  EXPECT_DOUBLE_EQ(r.alpha_g, 500.0);
  EXPECT_NEAR(r.C_f, 126.24, 0.01);
  // Oracle: s^2 + (alpha_g + D/M) s + C_f alpha_g D against s^2 + 2 xi w_n s + w_n^2.
  EXPECT_NEAR(r.alpha_g + 2.0 / 0.81, 2.0 * 0.7071 * r.w_n, 1e-9);
  EXPECT_NEAR(r.C_f * r.alpha_g * 2.0, r.w_n * r.w_n, 1e-6);
}

TEST(DesignDamping, GammaAtLowerBoundIsDegenerate) {
  const double gmin = gamma_lower_bound(0.81, 2.0, 1000.0);
  const auto r = design_damping(0.81, 2.0, 1000.0, {0.8, gmin});
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(r.degenerate);
  const auto near = design_damping(0.81, 2.0, 1000.0, {0.8, gmin * (1.0 + 1e-6)});
  EXPECT_TRUE(near.feasible);
  EXPECT_LT(near.alpha_g, 1e-3);
}

TEST(DesignDamping, MassAndDampingScaling) {
  const auto a = design_damping(0.81, 2.0, 1000.0, {0.9, 0.6});
  const auto b = design_damping(0.81 * 3.0, 2.0 * 3.0, 1000.0, {0.9, 0.6});
  EXPECT_NEAR(b.w_n, a.w_n, 1e-12 * a.w_n);
  EXPECT_NEAR(b.alpha_g, a.alpha_g, 1e-12 * a.alpha_g);
  EXPECT_NEAR(b.C_f, a.C_f / 3.0, 1e-12 * a.C_f);
}

TEST(DesignDamping, RejectsBadSpec) {
  EXPECT_THROW(design_damping(0.81, 2.0, 1000.0, {0.5, 1.0}), std::invalid_argument);
  EXPECT_THROW(design_damping(0.81, 2.0, 1000.0, {0.8, 1.5}), std::invalid_argument);
  EXPECT_THROW(design_damping(-1.0, 2.0, 1000.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Pure stiffness.

TEST(DesignStiffness, XiUnrestrictedForTablePlant) {
  const auto r = design_stiffness(3.02, 6500.0, 1000.0, {2.0, 1.0});
  EXPECT_NEAR(3.02 * 1000.0 * 1000.0 / 6500.0, 464.6, 0.05);
  EXPECT_TRUE(std::isinf(r.xi_star));
}

TEST(DesignStiffness, Example) {
  const auto r = design_stiffness(3.02, 6500.0, 1000.0, {2.0, 1.0});
  ASSERT_TRUE(r.feasible);
  EXPECT_NEAR(r.k, 0.4472, 1e-4);
  EXPECT_NEAR(r.w_n, 20.75, 0.01);
  EXPECT_NEAR(r.p, 41.49, 0.01);
  EXPECT_NEAR(r.alpha_g, 82.98, 0.02);  // quoted value is rounded from w_n and p
  EXPECT_NEAR(r.C_f, 0.0331, 1e-4);
  // Oracle: (s + p)(s + w_n)^2 against s^3 + alpha_g s^2 + (K/M) s + alpha_g C_f K.
  const auto t = oracle::from_real_roots({-r.p, -r.w_n, -r.w_n});
  EXPECT_NEAR(static_cast<double>(t[1]), r.alpha_g, 1e-9 * r.alpha_g);
  EXPECT_NEAR(static_cast<double>(t[2]), 6500.0 / 3.02, 1e-9 * 6500.0 / 3.02);
  EXPECT_NEAR(static_cast<double>(t[3]), r.alpha_g * r.C_f * 6500.0, 1e-9 * static_cast<double>(t[3]));
}

TEST(DesignStiffness, ZeroEtaIsDegenerate) {
  const auto r = design_stiffness(3.02, 6500.0, 1000.0, {0.0, 1.0});
  EXPECT_DOUBLE_EQ(r.k, 1.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(r.feasible);
}

TEST(DesignStiffness, XiLoweredOntoBound) {
  // Light mass, stiff spring: the bound caps xi.
  const auto r = design_stiffness(0.1, 1e5, 400.0, {1.0, 1.0});
  if (r.feasible) {
    EXPECT_LE(r.alpha_g, 200.0);
    EXPECT_LT(r.xi, 1.0);
  }
}

// ---------------------------------------------------------------------------
// Damping and stiffness.

TEST(DesignDampingStiffness, TableExampleWithFixedK) {
  DesignSpecC spec;
  spec.k = 0.5;
  const auto r = design_damping_stiffness(3.02, 2.0, 6500.0, 1000.0, spec);
  EXPECT_NEAR(r.xi_minus, 0.00714, 1e-5);
  EXPECT_NEAR(r.xi_plus, 5.40, 0.01);
  EXPECT_DOUBLE_EQ(r.xi, 1.0);
  EXPECT_NEAR(r.psi, 0.007138, 1e-6);
  EXPECT_NEAR(r.eta, 1.505, 1e-3);
  EXPECT_NEAR(r.w_n, 23.19, 0.01);
  EXPECT_NEAR(r.p, 34.91, 0.01);
  EXPECT_NEAR(r.alpha_g, 80.64, 0.02);  // quoted value is rounded from w_n and p
  EXPECT_NEAR(r.C_f, 0.0358, 1e-4);
  EXPECT_TRUE(r.feasible);
  EXPECT_LT(placement::error(r), 1e-9);
}

TEST(DesignDampingStiffness, DefaultDesignPutsPOnNaturalFrequency) {
  const auto r = design_damping_stiffness(3.02, 2.0, 6500.0, 1000.0);
  ASSERT_TRUE(r.feasible);
  EXPECT_DOUBLE_EQ(r.xi, 1.0);
  EXPECT_NEAR(r.eta, 1.0, 1e-12);
  EXPECT_NEAR(r.p, r.w_n, 1e-9 * r.w_n);
  EXPECT_LE(r.alpha_g, 500.0);
}

TEST(DesignDampingStiffness, VanishingDampingMatchesStiffnessDesign) {
  for (double eta : {0.5, 1.0, 2.0}) {
    DesignSpecC c;
    c.xi = 1.0;
    c.eta_free = eta;
    const auto a = design_damping_stiffness(3.02, 1e-9, 6500.0, 1000.0, c);
    const auto b = design_stiffness(3.02, 6500.0, 1000.0, {eta, 1.0});
    ASSERT_TRUE(a.feasible);
    ASSERT_TRUE(b.feasible);
    EXPECT_NEAR(a.w_n, b.w_n, 1e-6 * b.w_n);
    EXPECT_NEAR(a.p, b.p, 1e-6 * b.p);
    EXPECT_NEAR(a.alpha_g, b.alpha_g, 1e-6 * b.alpha_g);
    EXPECT_NEAR(a.C_f, b.C_f, 1e-6 * b.C_f);
  }
}

TEST(DesignDampingStiffness, UnitKGivesZeroEta) {
  DesignSpecC spec;
  spec.k = 1.0;
  const auto r = design_damping_stiffness(3.02, 2.0, 6500.0, 1000.0, spec);
  EXPECT_EQ(r.eta, 0.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(r.feasible);
}

TEST(DesignDampingStiffness, LowXiPlusBranchKeepsEtaBelowOne) {
  std::mt19937_64 rng(21);
  int taken = 0;
  for (int i = 0; i < 4000 && taken < 50; ++i) {
    const double M = log_uniform(rng, 0.1, 5.0), g_v = log_uniform(rng, 100.0, 1000.0);
    const double omega = log_uniform(rng, g_v / 4.0, g_v);
    const double K = M * omega * omega, D = M * log_uniform(rng, 0.01, 2.0) * omega;
    const auto r = design_damping_stiffness(M, D, K, g_v);
    if (r.xi_plus >= 1.0 || !r.feasible) continue;
    ++taken;
    EXPECT_LT(r.eta, 1.0);
    EXPECT_LE(r.xi, r.xi_plus);
    EXPECT_GT(r.xi, r.xi_minus);
    EXPECT_LT(placement::error(r), 1e-9);
  }
  EXPECT_GT(taken, 10);
}

TEST(EtaFeasibility, SmallPsiAdmitsAll) {
  const auto f = eta_feasibility(0.5, 1.0);
  ASSERT_EQ(f.intervals.size(), 1u);
  EXPECT_EQ(f.intervals[0].lo, 0.0);
  EXPECT_TRUE(std::isinf(f.intervals[0].hi));
}

TEST(EtaFeasibility, LargePsiSplitsInterval) {
  const double psi = 2.0, xi = 1.0;
  const auto f = eta_feasibility(psi, xi);
  ASSERT_EQ(f.lambdas.size(), 3u);
  ASSERT_EQ(f.intervals.size(), 2u);
  // 8 l^3 - 96 l^2 + 6 l + 1
  auto cubic = [](double l) { return ((8.0 * l - 96.0) * l + 6.0) * l + 1.0; };
  for (double l : f.lambdas) EXPECT_NEAR(cubic(l), 0.0, 1e-9);
  EXPECT_NEAR(f.lambdas[1], oracle::bisect(cubic, 1e-6, 1.0), 1e-12);
  EXPECT_NEAR(f.lambdas[2], oracle::bisect(cubic, 1.0, 20.0), 1e-10);
  const double hi = f.intervals[0].hi, lo = f.intervals[1].lo;
  EXPECT_NEAR(eta_star_condition(hi, psi, xi), 0.0, 1e-9);
  for (int i = 1; i < 200; ++i) {
    const double eta = 15.0 * i / 200.0;
    const bool inside = eta <= hi || eta >= lo;
    EXPECT_EQ(eta_star_condition(eta, psi, xi) >= 0.0, inside) << eta;
  }
}

TEST(KNearOne, PicksRootBelowOne) {
  const auto k = k_near_one(0.1, 0.9, 0.007138);
  ASSERT_TRUE(k.has_value());
  EXPECT_NEAR(*k, 0.928, 5e-4);
  EXPECT_TRUE(in_stable_k_region(*k, 0.007138));
}

TEST(SplitAlphaG, Examples) {
  DesignResult r;
  r.alpha_g = 500.0;
  auto s = split_alpha_g(r, 1.0, 1000.0);
  EXPECT_EQ(s.g_DOB, 500.0);
  EXPECT_TRUE(s.bound.pass);
  s = split_alpha_g(r, 2.0, 1000.0);
  EXPECT_EQ(s.g_DOB, 250.0);
  EXPECT_EQ(s.g_RFOB, 250.0);
  EXPECT_TRUE(s.bound.pass);
  r.alpha_g = 600.0;
  EXPECT_THROW(split_alpha_g(r, 1.0, 1000.0), std::domain_error);
}

TEST(DesignFor, DispatchesOnEnvironment) {
  EXPECT_EQ(design_for(3.02, 2.0, 0.0, 1000.0).env_class, EnvClass::PureDamping);
  EXPECT_EQ(design_for(3.02, 0.0, 6500.0, 1000.0).env_class, EnvClass::PureStiffness);
  EXPECT_EQ(design_for(3.02, 2.0, 6500.0, 1000.0).env_class, EnvClass::DampingStiffness);
  EXPECT_THROW(design_for(3.02, 0.0, 0.0, 1000.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Properties over random designs.

TEST(DesignProperties, PolePlacementAndConstraints) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int count[3] = {0, 0, 0};
  for (int i = 0; i < 6000; ++i) {
    const double M = log_uniform(rng, 0.1, 10.0), g_v = log_uniform(rng, 200.0, 5000.0);
    const double D = log_uniform(rng, 0.1, 100.0), K = log_uniform(rng, 10.0, 1e5);
    const double alpha = log_uniform(rng, 0.5, 2.0);
    DesignResult r;
    switch (i % 3) {
      case 0: {
        const double gmin = gamma_lower_bound(M, D, g_v);
        r = design_damping(M, D, g_v, {0.707 + 0.293 * u(rng), gmin + (1.0 - gmin) * (0.01 + 0.99 * u(rng))});
        EXPECT_LE(2.0 * r.xi * r.w_n, 0.5 * g_v + D / M);
        break;
      }
      case 1:
        r = design_stiffness(M, K, g_v, {0.05 + 5.0 * u(rng), 0.3 + 1.2 * u(rng)});
        if (r.feasible) {
          EXPECT_NEAR(r.p, r.eta * r.xi * r.w_n, 1e-12 * r.p);
        }
        break;
      default: {
        DesignSpecC c;
        c.eta_star = 0.01 + 0.89 * u(rng);
        c.eta_free = 0.2 + 2.8 * u(rng);
        r = design_damping_stiffness(M, D, K, g_v, c);
        if (r.feasible) {
          EXPECT_NEAR(r.p, r.eta * r.xi * r.w_n, 1e-12 * r.p);
          EXPECT_TRUE(in_stable_k_region(r.k, r.psi));
        }
      }
    }
    if (!r.feasible) continue;
    ++count[i % 3];
    EXPECT_TRUE(all_constraints_pass(r));
    EXPECT_LE(r.alpha_g, 0.5 * g_v);
    EXPECT_GT(r.alpha_g, 0.0);
    EXPECT_GT(r.C_f, 0.0);
    EXPECT_LT(placement::error(r, alpha), 1e-9);
    EXPECT_LT(max_relative_coeff_error(r.achieved, r.target), 1e-9);
  }
  EXPECT_GE(count[0], 1000);
  EXPECT_GE(count[1], 1000);
  EXPECT_GE(count[2], 1000);
}
