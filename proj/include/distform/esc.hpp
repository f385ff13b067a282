#ifndef DISTFORM_ESC_HPP_
#define DISTFORM_ESC_HPP_

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "distform/dynamics.hpp"

namespace distform
{

using VectorField = std::function<Vec(const Vec &)>;
using OutputFn = std::function<double(const Vec &)>;

/**
 * p' = sum_k u_k B_k(p) with a nonnegative output psi. The law only ever sees psi(p);
 * `gradient` is optional and exists for oracles (averaged field, tests), never for the law.
 * Callbacks must be deterministic and free of side effects other than counting.
 */
struct ControlAffineSystem
{
  int state_dim{0};
  std::vector<VectorField> fields;
  OutputFn output;
  VectorField gradient;

  void validate() const
  {
    if (state_dim <= 0) {
      throw InvalidInput("esc: state dimension must be positive");
    }
    if (fields.empty()) {
      throw InvalidInput("esc: at least one control field required");
    }
    if (!output) {
      throw InvalidInput("esc: output function required");
    }
  }

  [[nodiscard]] int num_fields() const { return static_cast<int>(fields.size()); }
};

/// One (omega_k, phi_k) per control field, pairwise distinct.
inline SinusoidSchedule esc_schedule(const std::vector<double> &omegas, const std::vector<double> &phases = {})
{
  Mat w(static_cast<Eigen::Index>(omegas.size()), 1);
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    w(static_cast<Eigen::Index>(k), 0) = omegas[k];
  }
  Mat ph;
  if (!phases.empty()) {
    if (phases.size() != omegas.size()) {
      throw InvalidInput("esc: one phase per frequency required");
    }
    ph.resize(w.rows(), 1);
    for (std::size_t k = 0; k < phases.size(); ++k) {
      ph(static_cast<Eigen::Index>(k), 0) = phases[k];
    }
  }
  return SinusoidSchedule::explicit_table(std::move(w), std::move(ph));
}

inline double checked_output(const ControlAffineSystem &sys, const Vec &p)
{
  const double y = sys.output(p);
  if (!(y >= 0.0)) {
    throw InvalidInput("esc: output must be nonnegative, got " + std::to_string(y));
  }
  return y;
}

/// u_k = sqrt(w_k) cos(w_k t + phi_k) h1(psi) + sqrt(w_k) sin(w_k t + phi_k) h2(psi)
inline Vec esc_rhs(const ControlAffineSystem &sys, const DitherShape &shape, const SinusoidSchedule &schedule,
                   double t, const Vec &p)
{
  if (schedule.num_agents() != sys.num_fields()) {
    throw InvalidInput("esc: schedule has " + std::to_string(schedule.num_agents()) + " frequencies for " +
                       std::to_string(sys.num_fields()) + " fields");
  }
  const auto [h1, h2] = shape.pair(checked_output(sys, p));
  Vec out = Vec::Zero(sys.state_dim);
  if (h1 == 0.0 && h2 == 0.0) {
    return out;
  }
  for (int k = 0; k < sys.num_fields(); ++k) {
    const double w = schedule.frequency(k, 0);
    const double arg = w * t + schedule.phase(k, 0);
    const double u = std::sqrt(w) * (std::cos(arg) * h1 + std::sin(arg) * h2);
    out += u * sys.fields[static_cast<std::size_t>(k)](p);
  }
  return out;
}

/// 1/2 h(psi) sum_k (B_k psi) B_k; needs the gradient callback.
inline Vec esc_averaged_rhs(const ControlAffineSystem &sys, const DitherShape &shape, const Vec &p)
{
  if (!sys.gradient) {
    throw InvalidInput("esc: averaged field needs a gradient oracle");
  }
  const double h = shape.bracket(checked_output(sys, p));
  Vec out = Vec::Zero(sys.state_dim);
  if (h == 0.0) {
    return out;
  }
  const Vec g = sys.gradient(p);
  for (const auto &b : sys.fields) {
    const Vec bk = b(p);
    out += 0.5 * h * g.dot(bk) * bk;
  }
  return out;
}

inline Trajectory esc_integrate(const ControlAffineSystem &sys, const DitherShape &shape,
                                const SinusoidSchedule &schedule, const Vec &p0, double t0, double tf, double dt,
                                int record_every = 1)
{
  sys.validate();
  if (p0.size() != sys.state_dim) {
    throw InvalidInput("esc: initial state has wrong length");
  }
  if (dt > max_dither_step(schedule)) {
    throw InvalidInput("esc: dt exceeds (2 pi/omega_max)/32");
  }
  RecordOptions opt;
  opt.record_every = record_every;
  opt.output = [&](const Vec &p) { return checked_output(sys, p); };
  Trajectory traj = integrate([&](double t, const Vec &p) { return esc_rhs(sys, shape, schedule, t, p); }, p0, t0,
                              tf, dt, opt);
  traj.metadata["law"] = "esc";
  return traj;
}

inline BoundFit esc_bound_check(const Trajectory &traj, double floor = 1e-6) { return bound_fit(traj, floor); }

// ---------------------------------------------------------------------------------------
// demo systems

/// Single integrator in R^dim, B_k = e_k.
inline std::vector<VectorField> coordinate_fields(int dim)
{
  std::vector<VectorField> out;
  for (int k = 0; k < dim; ++k) {
    out.emplace_back([dim, k](const Vec &) {
      Vec e = Vec::Zero(dim);
      e(k) = 1.0;
      return e;
    });
  }
  return out;
}

/// psi = 1/2 |p|^2 with B_k = e_k.
inline ControlAffineSystem quadratic_demo(int dim = 2)
{
  ControlAffineSystem s;
  s.state_dim = dim;
  s.fields = coordinate_fields(dim);
  s.output = [](const Vec &p) { return 0.5 * p.squaredNorm(); };
  s.gradient = [](const Vec &p) { return Vec(p); };
  return s;
}

/// psi = 1/4 sum p_k^4; degenerate minimum, slower than 1/t near the origin.
inline ControlAffineSystem quartic_demo(int dim = 2)
{
  ControlAffineSystem s;
  s.state_dim = dim;
  s.fields = coordinate_fields(dim);
  s.output = [](const Vec &p) { return 0.25 * p.array().pow(4).sum(); };
  s.gradient = [](const Vec &p) { return Vec(p.array().pow(3)); };
  return s;
}

/// psi = 1/2 |p|^2 in R^2 but only B_1 = e_1 is actuated; the fields do not span.
inline ControlAffineSystem unactuated_demo()
{
  ControlAffineSystem s = quadratic_demo(2);
  s.fields.resize(1);
  return s;
}

} // namespace distform

#endif // DISTFORM_ESC_HPP_
