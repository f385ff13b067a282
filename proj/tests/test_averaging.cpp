#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace distform;
using namespace distform::testing;

namespace
{

/// Richardson-extrapolated nested differences, O(eps^4)
double chain_fd(const SystemDef &sys, const std::vector<int> &chain, const Vec &p)
{
  return (4 * lie_chain_fd(sys, chain, p, 5e-4) - lie_chain_fd(sys, chain, p, 1e-3)) / 3;
}

Vec near_target(const Scenario &sc, std::uint64_t seed, double scale)
{
  std::mt19937_64 rng(seed);
  return sc.realization + random_vec(rng, sc.realization.size(), scale);
}

} // namespace

TEST(FrameDerivatives, MatchGradientAndHessian)
{
  const Scenario sc = double_tetrahedron_preset();
  const Vec p = near_target(sc, 1, 0.3);
  const FrameDerivatives fd = frame_derivatives(sc.spec, sc.frames, p, true);
  const int n = 3;
  Vec dirs[15];
  for (int q = 0; q < 15; ++q) {
    dirs[q] = Vec::Zero(15);
    dirs[q].segment((q / n) * n, n) = sc.frames.direction(q / n, q % n);
    EXPECT_NEAR(fd.d1(q), grad_psi(sc.spec, p).dot(dirs[q]), 1e-12);
  }
  const double eps = 1e-5;
  for (int a = 0; a < 15; ++a) {
    const FrameDerivatives plus = frame_derivatives(sc.spec, sc.frames, p + eps * dirs[a], false);
    const FrameDerivatives minus = frame_derivatives(sc.spec, sc.frames, p - eps * dirs[a], false);
    for (int b = 0; b < 15; ++b) {
      EXPECT_NEAR(fd.d2(b, a), (plus.d1(b) - minus.d1(b)) / (2 * eps), 1e-6);
      for (int c = 0; c < 15; c += 4) {
        EXPECT_NEAR(fd.t3(c, b, a), (plus.d2(c, b) - minus.d2(c, b)) / (2 * eps), 1e-6);
      }
    }
  }
}

TEST(LieDerivatives, ClosedFormsMatchNestedDifferences)
{
  std::mt19937_64 rng(7);
  for (const Scenario &sc : {rectangle_preset(), double_tetrahedron_preset()}) {
    const SystemDef sys = sc.system();
    const Vec p = near_target(sc, 2, 0.25);
    const LieDerivatives lie(sys, p);
    const int channels = lie.num_channels();
    std::uniform_int_distribution<int> pick(0, channels - 1);
    for (int m = 0; m < channels; ++m) {
      const double fd = chain_fd(sys, {m}, p);
      EXPECT_NEAR(lie.x1(m), fd, 1e-8 * (1 + std::abs(fd)));
    }
    for (int trial = 0; trial < 60; ++trial) {
      const int m1 = pick(rng);
      const int m2 = trial % 3 == 0 ? m1 ^ 1 : pick(rng);
      const double fd = chain_fd(sys, {m1, m2}, p);
      EXPECT_NEAR(lie.x2(m2, m1), fd, 1e-6 * (1 + std::abs(fd)));
    }
    for (int trial = 0; trial < 60; ++trial) {
      const int m1 = pick(rng);
      const int m2 = trial % 2 == 0 ? m1 ^ 1 : pick(rng);
      const int m3 = pick(rng);
      const double fd = chain_fd(sys, {m1, m2, m3}, p);
      EXPECT_NEAR(lie.x3(m3, m2, m1), fd, 1e-5 * (1 + std::abs(fd)));
    }
  }
}

TEST(LieDerivatives, ResonantPairsSumToAveragedField)
{
  for (const Scenario &sc : {rectangle_preset(), double_tetrahedron_preset()}) {
    const SystemDef sys = sc.system();
    for (std::uint64_t seed : {3, 4, 5}) {
      const Vec p = near_target(sc, seed, 0.5);
      const LieDerivatives lie(sys, p, false);
      double acc = 0.0;
      for (int m2 = 0; m2 < lie.num_channels(); ++m2) {
        for (int m1 = 0; m1 < lie.num_channels(); ++m1) {
          acc += v_coeff(sys.schedule.channel(m2), sys.schedule.channel(m1)) * lie.x2(m2, m1);
        }
      }
      const double y = y_psi(sys, p);
      EXPECT_NEAR(acc, y, 1e-10 * (1 + std::abs(y)));
      EXPECT_LE(y, 0.0);
    }
  }
}

TEST(Remainders, VanishAtTargets)
{
  const Scenario sc = rectangle_preset();
  const SystemDef sys = sc.system();
  const RemainderTerms r = remainder_terms(sys, averaging_coefficients(sys.schedule, 0.4), sc.realization);
  EXPECT_EQ(r.d1, 0.0);
  EXPECT_EQ(r.d2, 0.0);
  EXPECT_EQ(y_psi(sys, sc.realization), 0.0);
}

TEST(Remainders, FirstTermShrinksLikeInverseRootOmega)
{
  // same state, faster sinusoids: sup_t |D1| should scale like omega^{-1/2}
  const Scenario base = rectangle_preset();
  const Vec p = near_target(base, 9, 0.2);
  std::vector<double> scaled;
  double previous = std::numeric_limits<double>::infinity();
  for (double omega : {7.0, 20.0, 50.0}) {
    const Scenario sc = base.with_omega(omega);
    const SystemDef sys = sc.system();
    double sup = 0.0;
    const double period = 2 * std::numbers::pi / omega;
    for (int k = 0; k < 400; ++k) {
      const double t = period * k / 400.0;
      sup = std::max(sup, std::abs(remainder_terms(sys, averaging_coefficients(sys.schedule, t), p, false).d1));
    }
    EXPECT_LT(sup, previous);
    previous = sup;
    scaled.push_back(sup * std::sqrt(omega));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  EXPECT_LT(*hi / *lo, 1.5);
}

TEST(AveragingResidual, ZeroAtRest)
{
  const Scenario sc = rectangle_preset();
  const SystemDef sys = sc.system();
  const Trajectory traj = simulate(sys, Law::dither, sc.realization, 0.0, 0.5, sc.step(), 4);
  const AveragingReport rep = averaging_residual(sys, traj, 0.0, 0.5);
  EXPECT_EQ(rep.max_residual, 0.0);
  EXPECT_EQ(rep.max_int_y, 0.0);
}

TEST(AveragingResidual, IntegralDecompositionHolds)
{
  const Scenario sc = rectangle_preset();
  const SystemDef sys = sc.system();
  const Trajectory traj = simulate(sys, Law::dither, sc.initial, 0.0, 2.0, sc.step(), 1);
  const AveragingReport rep = averaging_residual(sys, traj, 0.0, 2.0, 2);
  EXPECT_DOUBLE_EQ(rep.psi_start, 175.0);
  EXPECT_LT(rep.max_residual, 1e-3 * rep.psi_start);
  EXPECT_LT(rep.direct_residual, 1e-3 * rep.psi_start);
  // the terms themselves are not small, so the identity is a real cancellation
  EXPECT_GT(rep.max_int_y + rep.max_d1, 1.0);
  EXPECT_EQ(rep.times.size(), rep.residuals.size());
  EXPECT_EQ(rep.residuals.front(), 0.0);
}

TEST(AveragingResidual, InputValidation)
{
  const Scenario sc = rectangle_preset();
  const SystemDef sys = sc.system();
  const Trajectory coarse = simulate(sys, Law::lie_bracket, sc.initial, 0.0, 1.0, 0.05);
  EXPECT_THROW(averaging_residual(sys, coarse, 0.0, 1.0), InvalidInput);
  const Trajectory fine = simulate(sys, Law::dither, sc.initial, 0.0, 0.2, sc.step());
  EXPECT_THROW(averaging_residual(sys, fine, 0.0, 0.2, 3), InvalidInput);
  EXPECT_THROW(averaging_residual(sys, fine, 5.0, 6.0), InvalidInput);
}

TEST(RemainderShape, FiniteAlongConvergingRun)
{
  const Scenario sc = rectangle_preset();
  const SystemDef sys = sc.system();
  const Trajectory traj = simulate(sys, Law::dither, sc.initial, 0.0, 20.0, sc.step(), 50);
  const RemainderShape shape = remainder_shape(sys, traj, 10);
  EXPECT_TRUE(shape.finite);
  EXPECT_GT(shape.samples, 5);
  EXPECT_THROW(remainder_shape(sys, traj, 0), InvalidInput);
}
