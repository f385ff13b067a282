#ifndef DISTFORM_DITHER_HPP_
#define DISTFORM_DITHER_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "distform/error.hpp"

namespace distform
{

using ScalarFn = std::function<double(double)>;

/**
 * Amplitude A: [0, inf) -> R of the log-oscillator dither pair.
 *
 * Derivatives are optional for custom amplitudes; when absent they are taken by
 * central differences with a step relative to y.
 */
struct Amplitude
{
  std::string name;
  ScalarFn value;
  ScalarFn d1;
  ScalarFn d2;

  static Amplitude tanh()
  {
    return {"tanh", [](double y) { return std::tanh(y); },
            [](double y) {
              const double t = std::tanh(y);
              return 1.0 - t * t;
            },
            [](double y) {
              const double t = std::tanh(y);
              return -2.0 * t * (1.0 - t * t);
            }};
  }

  /// A(y) = y / (1 + y)
  static Amplitude rational()
  {
    return {"rational", [](double y) { return y / (1.0 + y); },
            [](double y) { return 1.0 / ((1.0 + y) * (1.0 + y)); },
            [](double y) { return -2.0 / ((1.0 + y) * (1.0 + y) * (1.0 + y)); }};
  }

  static Amplitude custom(std::string name, ScalarFn value, ScalarFn d1 = {}, ScalarFn d2 = {})
  {
    return {std::move(name), std::move(value), std::move(d1), std::move(d2)};
  }

  /**
   * Natural cubic spline through (y_k, a_k), held constant at a_last beyond the last knot.
   * Knots must be strictly increasing and start at y = 0.
   */
  static Amplitude table(std::vector<double> ys, std::vector<double> as);

  [[nodiscard]] double operator()(double y) const { return value(y); }

  [[nodiscard]] double derivative(double y) const
  {
    if (d1) {
      return d1(y);
    }
    const double h = 1e-5 * std::max(std::abs(y), 1e-3);
    return (value(y + h) - value(y - h)) / (2.0 * h);
  }

  [[nodiscard]] double second_derivative(double y) const
  {
    if (d2) {
      return d2(y);
    }
    const double h = 1e-4 * std::max(std::abs(y), 1e-3);
    return (value(y + h) - 2.0 * value(y) + value(y - h)) / (h * h);
  }
};

inline Amplitude Amplitude::table(std::vector<double> ys, std::vector<double> as)
{
  const std::size_t n = ys.size();
  if (n < 2 || as.size() != n) {
    throw InvalidInput("amplitude table: need at least two (y, A) pairs of equal length");
  }
  if (ys.front() != 0.0) {
    throw InvalidInput("amplitude table: first knot must be y = 0");
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (!(ys[k] > ys[k - 1])) {
      throw InvalidInput("amplitude table: knots must be strictly increasing");
    }
  }
  // second derivatives of the natural spline (tridiagonal solve)
  std::vector<double> m(n, 0.0), c(n, 0.0), r(n, 0.0);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double h0 = ys[k] - ys[k - 1];
    const double h1 = ys[k + 1] - ys[k];
    const double diag = 2.0 * (h0 + h1) - h0 * c[k - 1];
    c[k] = h1 / diag;
    r[k] = (6.0 * ((as[k + 1] - as[k]) / h1 - (as[k] - as[k - 1]) / h0) - h0 * r[k - 1]) / diag;
  }
  for (std::size_t k = n - 1; k-- > 1;) {
    m[k] = r[k] - c[k] * m[k + 1];
  }
  struct Spline
  {
    std::vector<double> y, a, m;
    [[nodiscard]] std::size_t seg(double x) const
    {
      auto it = std::upper_bound(y.begin(), y.end(), x);
      auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - y.begin() - 1, 0));
      return std::min(k, y.size() - 2);
    }
    [[nodiscard]] double eval(double x, int order) const
    {
      if (x >= y.back()) {
        return order == 0 ? a.back() : 0.0;
      }
      const std::size_t k = seg(x);
      const double h = y[k + 1] - y[k];
      const double u = (y[k + 1] - x) / h;
      const double v = (x - y[k]) / h;
      switch (order) {
      case 0:
        return u * a[k] + v * a[k + 1] + ((u * u * u - u) * m[k] + (v * v * v - v) * m[k + 1]) * h * h / 6.0;
      case 1:
        return (a[k + 1] - a[k]) / h + ((1.0 - 3.0 * u * u) * m[k] + (3.0 * v * v - 1.0) * m[k + 1]) * h / 6.0;
      default:
        return u * m[k] + v * m[k + 1];
      }
    }
  };
  auto spline = std::make_shared<Spline>(Spline{std::move(ys), std::move(as), std::move(m)});
  return {"table", [spline](double y) { return spline->eval(y, 0); },
          [spline](double y) { return spline->eval(y, 1); }, [spline](double y) { return spline->eval(y, 2); }};
}

/**
 * The dither pair (h1, h2) and their Lie bracket h = h2' h1 - h1' h2.
 *
 * The default family is the log oscillator h1 = A sin(log y), h2 = A cos(log y) for y > 0
 * (both zero for y <= 0), whose bracket has the closed form -A(y)^2 / y. Arbitrary pairs
 * can be plugged in with custom(); their derivatives come from relative central differences.
 */
class DitherShape
{
 public:
  enum class Kind
  {
    log_oscillator,
    custom
  };

  DitherShape() : DitherShape(log_oscillator(Amplitude::tanh())) {}

  static DitherShape log_oscillator(Amplitude a)
  {
    DitherShape s(Kind::log_oscillator);
    s.amplitude_ = std::move(a);
    s.name_ = "log-oscillator/" + s.amplitude_.name;
    return s;
  }

  static DitherShape custom(std::string name, ScalarFn h1, ScalarFn h2)
  {
    DitherShape s(Kind::custom);
    s.name_ = std::move(name);
    s.h1_ = std::move(h1);
    s.h2_ = std::move(h2);
    return s;
  }

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const std::string &name() const { return name_; }
  [[nodiscard]] const Amplitude &amplitude() const { return amplitude_; }

  /// h_nu(y), nu in {1, 2}.
  [[nodiscard]] double h(int nu, double y) const
  {
    if (y <= 0.0) {
      return 0.0;
    }
    if (kind_ == Kind::log_oscillator) {
      const double l = std::log(y);
      return amplitude_(y) * (nu == 1 ? std::sin(l) : std::cos(l));
    }
    return nu == 1 ? h1_(y) : h2_(y);
  }

  /// Both components at once; one log and one amplitude evaluation.
  [[nodiscard]] std::pair<double, double> pair(double y) const
  {
    if (y <= 0.0) {
      return {0.0, 0.0};
    }
    if (kind_ == Kind::log_oscillator) {
      const double l = std::log(y);
      const double a = amplitude_(y);
      return {a * std::sin(l), a * std::cos(l)};
    }
    return {h1_(y), h2_(y)};
  }

  /// First derivative on (0, inf); 0 for y <= 0.
  [[nodiscard]] double dh(int nu, double y) const
  {
    if (y <= 0.0) {
      return 0.0;
    }
    if (kind_ == Kind::log_oscillator) {
      const double l = std::log(y);
      const double s = std::sin(l);
      const double c = std::cos(l);
      const double a = amplitude_(y);
      const double da = amplitude_.derivative(y);
      return nu == 1 ? da * s + a * c / y : da * c - a * s / y;
    }
    const double step = 1e-5 * y;
    return (h(nu, y + step) - h(nu, y - step)) / (2.0 * step);
  }

  /// Second derivative on (0, inf); 0 for y <= 0.
  [[nodiscard]] double d2h(int nu, double y) const
  {
    if (y <= 0.0) {
      return 0.0;
    }
    if (kind_ == Kind::log_oscillator) {
      const double l = std::log(y);
      const double s = std::sin(l);
      const double c = std::cos(l);
      const double a = amplitude_(y);
      const double da = amplitude_.derivative(y);
      const double dda = amplitude_.second_derivative(y);
      if (nu == 1) {
        return dda * s + 2.0 * da * c / y - a * (s + c) / (y * y);
      }
      return dda * c - 2.0 * da * s / y + a * (s - c) / (y * y);
    }
    const double step = 1e-4 * y;
    return (h(nu, y + step) - 2.0 * h(nu, y) + h(nu, y - step)) / (step * step);
  }

  /// h(y) = [h1, h2](y) for y > 0, 0 otherwise.
  [[nodiscard]] double bracket(double y) const
  {
    if (y <= 0.0) {
      return 0.0;
    }
    if (kind_ == Kind::log_oscillator) {
      const double a = amplitude_(y);
      return -a * a / y;
    }
    return dh(2, y) * h(1, y) - dh(1, y) * h(2, y);
  }

 private:
  explicit DitherShape(Kind k) : kind_(k) {}

  Kind kind_{Kind::log_oscillator};
  std::string name_;
  Amplitude amplitude_;
  ScalarFn h1_;
  ScalarFn h2_;
};

inline double h_eval(const DitherShape &shape, int nu, double y) { return shape.h(nu, y); }
inline double h_bracket(const DitherShape &shape, double y) { return shape.bracket(y); }

// ---------------------------------------------------------------------------------------
// property verification

struct PropertyGrid
{
  double y_min{1e-9};
  double y_max{10.0};
  int points{400};
  double r{1.0};              ///< right end of the interval (0, r] for the bracket property
  double growth_factor{2.0};  ///< allowed ratio of sup over the lowest window to the next one
  double c_floor{1e-6};       ///< minimal admissible bracket constant
  double window_decades{3.0}; ///< width of the comparison windows near 0
};

struct PropertyCheck
{
  std::string name;
  bool passed{false};
  double witness{0.0};
  std::string detail;
};

struct PropertyReport
{
  std::string shape;
  std::array<PropertyCheck, 6> checks;
  double r{0.0};
  double c_hat{0.0};

  [[nodiscard]] bool all_passed() const
  {
    return std::all_of(checks.begin(), checks.end(), [](const auto &c) { return c.passed; });
  }
};

namespace detail
{
inline std::vector<double> geometric_grid(double lo, double hi, int points)
{
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(points));
  const double step = std::log(hi / lo) / (points - 1);
  for (int k = 0; k < points; ++k) {
    g.push_back(lo * std::exp(step * k));
  }
  g.back() = hi;
  return g;
}

// sup of |f| over [lo, hi] restricted to grid points
template <class F>
double window_sup(const std::vector<double> &grid, double lo, double hi, F &&f)
{
  double s = 0.0;
  for (double y : grid) {
    if (y >= lo && y <= hi) {
      const double v = std::abs(f(y));
      if (!std::isfinite(v)) {
        return std::numeric_limits<double>::infinity();
      }
      s = std::max(s, v);
    }
  }
  return s;
}

// "f stays bounded as y -> 0": sup over the lowest window does not outgrow the next window
template <class F>
PropertyCheck bounded_near_zero(std::string name, const std::vector<double> &grid, const PropertyGrid &spec, F &&f)
{
  const double w = std::pow(10.0, spec.window_decades);
  const double low = window_sup(grid, spec.y_min, spec.y_min * w, f);
  const double next = window_sup(grid, spec.y_min * w, spec.y_min * w * w, f);
  PropertyCheck c{std::move(name), false, low, ""};
  c.passed = std::isfinite(low) && low <= spec.growth_factor * next + 1e-300;
  c.detail = "sup near 0 = " + std::to_string(low) + ", sup on next window = " + std::to_string(next);
  return c;
}
} // namespace detail

/**
 * Grid-based check of the six admissibility properties of a dither pair.
 *
 * The properties are limit statements, so they can only be sampled: vanishing for y <= 0,
 * boundedness, boundedness of h/y, h' and h'' y as y -> 0 (compared across geometric
 * windows), and a negative linear bound h(y) <= -c y on (0, r], reported as the largest
 * grid-consistent c.
 */
inline PropertyReport verify_properties(const DitherShape &shape, const PropertyGrid &spec = {})
{
  if (!(spec.y_min > 0.0) || !(spec.y_max > spec.y_min) || spec.points < 3) {
    throw InvalidInput("property grid: need 0 < y_min < y_max and at least 3 points");
  }
  auto grid = detail::geometric_grid(spec.y_min, spec.y_max, spec.points);
  if (spec.r > spec.y_min && spec.r <= spec.y_max) {
    grid.push_back(spec.r);
    std::sort(grid.begin(), grid.end());
  }

  PropertyReport rep;
  rep.shape = shape.name();
  rep.r = spec.r;

  // (i) vanishing on (-inf, 0]
  {
    double worst = 0.0;
    for (double y : grid) {
      for (int nu : {1, 2}) {
        worst = std::max({worst, std::abs(shape.h(nu, -y)), std::abs(shape.h(nu, 0.0))});
      }
    }
    rep.checks[0] = {"P(i) h_nu(y) = 0 for y <= 0", worst == 0.0, worst, ""};
  }
  // (ii) bounded: the sup does not keep growing beyond the grid
  {
    double on_grid = 0.0;
    for (int nu : {1, 2}) {
      on_grid = std::max(on_grid, detail::window_sup(grid, 0.0, spec.y_max, [&](double y) { return shape.h(nu, y); }));
    }
    const auto far = detail::geometric_grid(spec.y_max, spec.y_max * 1e4, 64);
    double beyond = 0.0;
    for (int nu : {1, 2}) {
      beyond = std::max(beyond, detail::window_sup(far, 0.0, far.back(), [&](double y) { return shape.h(nu, y); }));
    }
    const bool ok = std::isfinite(on_grid) && beyond <= spec.growth_factor * on_grid + 1e-300;
    rep.checks[1] = {"P(ii) h_nu bounded", ok, std::max(on_grid, beyond),
                     "sup on grid = " + std::to_string(on_grid) + ", sup beyond = " + std::to_string(beyond)};
  }
  auto both = [&](std::string name, auto &&f) {
    auto c1 = detail::bounded_near_zero(name, grid, spec, [&](double y) { return f(1, y); });
    auto c2 = detail::bounded_near_zero(name, grid, spec, [&](double y) { return f(2, y); });
    PropertyCheck c{std::move(name), c1.passed && c2.passed, std::max(c1.witness, c2.witness),
                    "nu=1: " + c1.detail + "; nu=2: " + c2.detail};
    return c;
  };
  rep.checks[2] = both("P(iii) h_nu(y)/y bounded as y -> 0", [&](int nu, double y) { return shape.h(nu, y) / y; });
  rep.checks[3] = both("P(iv) h_nu'(y) bounded as y -> 0", [&](int nu, double y) { return shape.dh(nu, y); });
  rep.checks[4] = both("P(v) h_nu''(y) y bounded as y -> 0", [&](int nu, double y) { return shape.d2h(nu, y) * y; });
  // (vi) h(y) <= -c y on (0, r]
  {
    double c = std::numeric_limits<double>::infinity();
    for (double y : grid) {
      if (y <= spec.r) {
        c = std::min(c, -shape.bracket(y) / y);
      }
    }
    rep.c_hat = std::max(c, 0.0);
    const bool ok = std::isfinite(c) && c >= spec.c_floor;
    rep.checks[5] = {"P(vi) [h1,h2](y) <= -c y on (0, r]", ok, rep.c_hat,
                     "largest grid-consistent c = " + std::to_string(rep.c_hat) + " on (0, " + std::to_string(spec.r) +
                         "]"};
  }
  return rep;
}

} // namespace distform

#endif // DISTFORM_DITHER_HPP_
