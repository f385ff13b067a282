#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace distform;
using namespace distform::testing;

namespace
{

SinusoidSchedule phased(double omega, int agents, int dim, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 2 * std::numbers::pi);
  Mat phases(agents, dim);
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    phases.data()[k] = unit(rng);
  }
  return SinusoidSchedule::linear(omega, agents, dim, phases);
}

} // namespace

TEST(Schedule, LinearRule)
{
  const SinusoidSchedule s = SinusoidSchedule::linear(7.0, 4, 2);
  EXPECT_EQ(s.frequency(0, 0), 7.0);
  EXPECT_EQ(s.frequency(0, 1), 14.0);
  EXPECT_EQ(s.frequency(3, 1), 56.0);
  EXPECT_EQ(s.max_frequency(), 56.0);
  EXPECT_EQ(s.num_channels(), 16);
  EXPECT_EQ(s.phases(), Mat::Zero(4, 2));
  for (int idx = 0; idx < s.num_channels(); ++idx) {
    EXPECT_EQ(s.index(s.channel(idx)), idx);
  }
  EXPECT_EQ(s.channel(5), (Channel{1, 0, 2}));
}

TEST(Schedule, Validation)
{
  EXPECT_THROW(SinusoidSchedule::linear(0.0, 2, 2), InvalidInput);
  EXPECT_THROW(SinusoidSchedule::linear(-1.0, 2, 2), InvalidInput);
  Mat dup(2, 1);
  dup << 3.0, 3.0;
  EXPECT_THROW(SinusoidSchedule::explicit_table(dup), InvalidInput);
  Mat neg(2, 1);
  neg << 3.0, -4.0;
  EXPECT_THROW(SinusoidSchedule::explicit_table(neg), InvalidInput);
  Mat ok(2, 1);
  ok << 3.0, 5.0;
  EXPECT_THROW(SinusoidSchedule::explicit_table(ok, Mat::Zero(1, 2)), InvalidInput);
  Mat nan_phase(2, 1);
  nan_phase << 0.0, std::nan("");
  EXPECT_THROW(SinusoidSchedule::explicit_table(ok, nan_phase), InvalidInput);
  const SinusoidSchedule e = SinusoidSchedule::explicit_table(ok);
  EXPECT_EQ(e.omega(), 3.0);
  EXPECT_EQ(e.rule(), SinusoidSchedule::Rule::explicit_table);
}

TEST(Sinusoids, ValuesAndMeanSquare)
{
  const SinusoidSchedule s = SinusoidSchedule::linear(7.0, 4, 2);
  EXPECT_DOUBLE_EQ(u_eval(s, {0, 0, 1}, 0.0), std::sqrt(7.0));
  EXPECT_EQ(u_eval(s, {0, 0, 2}, 0.0), 0.0);
  const double period = 2 * std::numbers::pi / 7.0;
  const double mean_sq =
      integrate([&](double t) { return std::pow(u_eval(s, {0, 0, 1}, t), 2); }, 0.0, period, 4) / period;
  EXPECT_NEAR(mean_sq, 3.5, 1e-12);
}

TEST(Sinusoids, EtaCoefficientsReconstructSignal)
{
  const SinusoidSchedule s = phased(3.0, 3, 2, 1);
  for (int idx = 0; idx < s.num_channels(); ++idx) {
    const Channel m = s.channel(idx);
    for (double t : {0.0, 0.3, 1.7, 11.0}) {
      Complex acc(0, 0);
      for (const auto &[w, eta] : eta_terms(s, m)) {
        acc += eta * std::polar(1.0, w * t);
      }
      EXPECT_NEAR(acc.real(), u_eval(s, m, t), 1e-12);
      EXPECT_NEAR(acc.imag(), 0.0, 1e-12);
    }
  }
}

TEST(Antiderivatives, FirstOrderClosedForms)
{
  const SinusoidSchedule s = phased(7.0, 4, 2, 2);
  for (int idx = 0; idx < s.num_channels(); ++idx) {
    const Channel m = s.channel(idx);
    const double w = s.frequency(m.agent, m.axis);
    const double phi = s.phase(m.agent, m.axis);
    for (double t = 0.0; t < 3.0; t += 0.173) {
      const double th = w * t + phi;
      const double expected = m.nu == 1 ? -std::sin(th) / std::sqrt(w) : std::cos(th) / std::sqrt(w);
      EXPECT_NEAR(uv_tilde(s, m, t), expected, 1e-12);
      EXPECT_LE(std::abs(uv_tilde(s, m, t)), 1.0 / std::sqrt(w) + 1e-15);
      const double h = 1e-6;
      const double fd = (uv_tilde(s, m, t + h) - uv_tilde(s, m, t - h)) / (2 * h);
      EXPECT_NEAR(fd, -u_eval(s, m, t), 1e-6 * std::sqrt(w));
    }
  }
}

TEST(Antiderivatives, FirstOrderIntegralIdentity)
{
  const SinusoidSchedule s = phased(7.0, 4, 2, 3);
  for (int idx = 0; idx < s.num_channels(); ++idx) {
    const Channel m = s.channel(idx);
    const double t = 2.345;
    const double lhs = integrate([&](double x) { return u_eval(s, m, x); }, 0.0, t, 64);
    const double rhs = -(uv_tilde(s, m, t) - uv_tilde(s, m, 0.0));
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(Antiderivatives, SecondOrderIntegralIdentity)
{
  // int_0^t u_{m2} UV_{m1} = v_{m2,m1} t - (UV_{m2,m1}(t) - UV_{m2,m1}(0))
  const SinusoidSchedule s = phased(7.0, 4, 2, 4);
  const double t = 1.9;
  double worst = 0.0;
  for (int a = 0; a < s.num_channels(); ++a) {
    for (int b = 0; b < s.num_channels(); ++b) {
      const Channel m2 = s.channel(a);
      const Channel m1 = s.channel(b);
      const double lhs = integrate([&](double x) { return u_eval(s, m2, x) * uv_tilde(s, m1, x); }, 0.0, t, 128);
      const double rhs = v_pair(s, m2, m1) * t - (uv_tilde2(s, m2, m1, t) - uv_tilde2(s, m2, m1, 0.0));
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  EXPECT_LT(worst, 1e-8);
}

TEST(Antiderivatives, DiagonalSecondOrderOracle)
{
  const SinusoidSchedule s = phased(5.0, 2, 3, 5);
  for (int i = 0; i < 2; ++i) {
    for (int k = 0; k < 3; ++k) {
      const Channel m{i, k, 1};
      const double w = s.frequency(i, k);
      for (double t = 0.0; t < 2.0; t += 0.21) {
        const double th = w * t + s.phase(i, k);
        EXPECT_NEAR(uv_tilde2(s, m, m, t), -std::cos(2 * th) / (4 * w), 1e-13);
      }
    }
  }
}

TEST(Antiderivatives, FrequencyScaling)
{
  // scaling every frequency by lambda maps UV_m(t) -> UV_m(t / lambda) / sqrt(lambda) and
  // UV_{m2,m1}(t) -> UV_{m2,m1}(t / lambda) / lambda
  const SinusoidSchedule base = phased(1.0, 3, 2, 6);
  for (double omega : {7.0, 50.0}) {
    const SinusoidSchedule fast = SinusoidSchedule::linear(omega, 3, 2, base.phases());
    double sup1_base = 0.0;
    double sup1_fast = 0.0;
    double sup2_base = 0.0;
    double sup2_fast = 0.0;
    for (int a = 0; a < base.num_channels(); ++a) {
      for (double t = 0.0; t < 7.0; t += 0.05) {
        const Channel m2 = base.channel(a);
        EXPECT_NEAR(uv_tilde(fast, m2, t / omega) * std::sqrt(omega), uv_tilde(base, m2, t), 1e-12);
        sup1_base = std::max(sup1_base, std::abs(uv_tilde(base, m2, t)));
        sup1_fast = std::max(sup1_fast, std::abs(uv_tilde(fast, m2, t / omega)));
        for (int b = 0; b < base.num_channels(); ++b) {
          const Channel m1 = base.channel(b);
          const double lhs = uv_tilde2(fast, m2, m1, t / omega) * omega;
          const double rhs = uv_tilde2(base, m2, m1, t);
          EXPECT_NEAR(lhs, rhs, 1e-11);
          sup2_base = std::max(sup2_base, std::abs(rhs));
          sup2_fast = std::max(sup2_fast, std::abs(uv_tilde2(fast, m2, m1, t / omega)));
        }
      }
    }
    EXPECT_NEAR(sup1_fast * std::sqrt(omega), sup1_base, 1e-12);
    EXPECT_NEAR(sup2_fast * omega, sup2_base, 1e-11);
  }
}

TEST(Resonance, CoefficientTable)
{
  const SinusoidSchedule s = phased(2.0, 3, 2, 7);
  for (int a = 0; a < s.num_channels(); ++a) {
    for (int b = 0; b < s.num_channels(); ++b) {
      const Channel m2 = s.channel(a);
      const Channel m1 = s.channel(b);
      EXPECT_NEAR(v_pair(s, m2, m1), v_coeff(m2, m1), 1e-14);
    }
  }
  static_assert(v_coeff({0, 0, 1}, {0, 0, 2}) == 0.5);
  static_assert(v_coeff({0, 0, 2}, {0, 0, 1}) == -0.5);
  static_assert(v_coeff({0, 0, 1}, {0, 0, 1}) == 0.0);
  static_assert(v_coeff({0, 0, 1}, {0, 1, 2}) == 0.0);
  static_assert(v_coeff({0, 0, 1}, {1, 0, 2}) == 0.0);
}

TEST(Resonance, TimeAverageOfProducts)
{
  const SinusoidSchedule s = phased(1.0, 2, 2, 8);
  const double horizon = 400 * std::numbers::pi;
  for (int a = 0; a < s.num_channels(); ++a) {
    for (int b = 0; b < s.num_channels(); ++b) {
      const Channel m2 = s.channel(a);
      const Channel m1 = s.channel(b);
      const double mean =
          integrate([&](double x) { return u_eval(s, m2, x) * uv_tilde(s, m1, x); }, 0.0, horizon, 800) / horizon;
      EXPECT_NEAR(mean, v_coeff(m2, m1), 5e-3);
    }
  }
}
