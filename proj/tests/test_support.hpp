#ifndef DISTFORM_TEST_SUPPORT_HPP_
#define DISTFORM_TEST_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "distform.hpp"

namespace distform::testing
{

/// Composite 20-point Gauss-Legendre; enough panels to resolve oscillations of the integrand.
template <class F>
double integrate(F &&f, double a, double b, int panels)
{
  const double h = (b - a) / panels;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a + k * h;
    acc += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, lo + h);
  }
  return acc;
}

inline Vec random_vec(std::mt19937_64 &rng, Eigen::Index size, double scale = 1.0)
{
  std::normal_distribution<double> normal(0.0, scale);
  Vec v(size);
  for (Eigen::Index k = 0; k < size; ++k) {
    v(k) = normal(rng);
  }
  return v;
}

/// Haar-ish random orthogonal matrix with det +1.
inline Mat random_rotation(std::mt19937_64 &rng, int n)
{
  Mat g(n, n);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    g.data()[k] = random_vec(rng, 1)(0);
  }
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  if (q.determinant() < 0) {
    q.col(0) *= -1.0;
  }
  return q;
}

/// Apply x -> Q x + c to every agent.
inline Vec apply_isometry(const Mat &q, const Vec &c, const Vec &p)
{
  const auto n = q.rows();
  Vec out(p.size());
  for (Eigen::Index i = 0; i < p.size() / n; ++i) {
    out.segment(i * n, n) = q * p.segment(i * n, n) + c;
  }
  return out;
}

inline Vec flat(std::initializer_list<double> xs)
{
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) {
    v(k++) = x;
  }
  return v;
}

inline Vec rectangle_initial() { return flat({0, 0, -1, 4, 5, 3, 3, 0}); }
inline Vec rectangle_target() { return flat({0, 0, 3, 0, 3, 4, 0, 4}); }

} // namespace distform::testing

#endif // DISTFORM_TEST_SUPPORT_HPP_
