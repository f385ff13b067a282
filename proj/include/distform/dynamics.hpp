#ifndef DISTFORM_DYNAMICS_HPP_
#define DISTFORM_DYNAMICS_HPP_

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "distform/dither.hpp"
#include "distform/potential.hpp"
#include "distform/sinusoids.hpp"

namespace distform
{

/// Everything the dithered closed loop needs: targets, body frames, dither pair, sinusoids.
struct SystemDef
{
  FormationSpec spec;
  BodyFrames frames;
  DitherShape shape;
  SinusoidSchedule schedule;

  SystemDef() = default;
  SystemDef(FormationSpec s, BodyFrames f, DitherShape h, SinusoidSchedule u)
      : spec(std::move(s)), frames(std::move(f)), shape(std::move(h)), schedule(std::move(u))
  {
    validate();
  }

  void validate() const
  {
    const int n = spec.dim();
    const int agents = spec.num_agents();
    if (frames.size() != static_cast<std::size_t>(agents)) {
      throw InvalidInput("system: " + std::to_string(frames.size()) + " body frames for " +
                         std::to_string(agents) + " agents");
    }
    for (int i = 0; i < agents; ++i) {
      if (frames.frame(i).rows() != n || frames.frame(i).cols() != n) {
        throw InvalidInput("system: frame of agent " + std::to_string(i + 1) + " is not n x n");
      }
    }
    if (schedule.num_agents() != agents || schedule.dim() != n) {
      throw InvalidInput("system: sinusoid schedule is not N x n");
    }
  }

  [[nodiscard]] int num_channels() const { return schedule.num_channels(); }
};

enum class Law
{
  dither,
  lie_bracket,
  gradient
};

inline std::string to_string(Law law)
{
  switch (law) {
  case Law::dither:
    return "dither";
  case Law::lie_bracket:
    return "lie-bracket";
  case Law::gradient:
    return "gradient";
  }
  return "?";
}

inline Law parse_law(const std::string &s)
{
  if (s == "dither") {
    return Law::dither;
  }
  if (s == "lie-bracket" || s == "lie_bracket") {
    return Law::lie_bracket;
  }
  if (s == "gradient") {
    return Law::gradient;
  }
  throw InvalidInput("unknown law '" + s + "' (expected dither, lie-bracket or gradient)");
}

/// Dithered closed loop; block i = sum_k [u_{ik1}(t) h1(psi_i) + u_{ik2}(t) h2(psi_i)] b_{ik}.
inline void closed_loop_rhs(const SystemDef &sys, double t, const Vec &p, Vec &out)
{
  const int n = sys.spec.dim();
  const int agents = sys.spec.num_agents();
  const Vec locals = psi_locals(sys.spec, p);
  out.setZero(p.size());
  for (int i = 0; i < agents; ++i) {
    const auto [h1, h2] = sys.shape.pair(locals(i));
    if (h1 == 0.0 && h2 == 0.0) {
      continue;
    }
    const Mat &b = sys.frames.frame(i);
    for (int k = 0; k < n; ++k) {
      const double w = sys.schedule.frequency(i, k);
      const double arg = w * t + sys.schedule.phase(i, k);
      const double coef = std::sqrt(w) * (std::cos(arg) * h1 + std::sin(arg) * h2);
      out.segment(i * n, n) += coef * b.col(k);
    }
  }
}

inline Vec closed_loop_rhs(const SystemDef &sys, double t, const Vec &p)
{
  Vec out;
  closed_loop_rhs(sys, t, p, out);
  return out;
}

/// Averaged system Y; block i = 1/2 h(psi_i) sum_k (B_{ik} psi) b_{ik}, which equals 1/2 h(psi_i) grad_i psi.
inline Vec lie_bracket_rhs(const SystemDef &sys, const Vec &p)
{
  const int n = sys.spec.dim();
  const Vec locals = psi_locals(sys.spec, p);
  Vec out = Vec::Zero(p.size());
  for (int i = 0; i < sys.spec.num_agents(); ++i) {
    const double h = sys.shape.bracket(locals(i));
    if (h == 0.0) {
      continue;
    }
    const Mat &b = sys.frames.frame(i);
    const Vec coords = b.transpose() * grad_psi_block(sys.spec, i, p);
    out.segment(i * n, n) = 0.5 * h * (b * coords);
  }
  return out;
}

inline Vec gradient_rhs(const FormationSpec &spec, const Vec &p) { return -grad_psi(spec, p); }

// ---------------------------------------------------------------------------------------
// fixed-step integration

/// Largest admissible closed-loop step, (2 pi / omega_max) / 32.
inline double max_dither_step(const SinusoidSchedule &s) { return 2.0 * std::numbers::pi / s.max_frequency() / 32.0; }

/// Default closed-loop step, (2 pi / omega_max) / 64.
inline double default_dither_step(const SinusoidSchedule &s)
{
  return 2.0 * std::numbers::pi / s.max_frequency() / 64.0;
}

template <class Rhs>
Vec rk4_step(Rhs &&f, double t, const Vec &y, double h)
{
  const Vec k1 = f(t, y);
  const Vec k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Vec k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Vec k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Number of uniform steps covering [t0, tf] with step at most dt.
inline long step_count(double t0, double tf, double dt)
{
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidInput("integrate: dt must be positive and finite");
  }
  if (!(tf >= t0)) {
    throw InvalidInput("integrate: t_final must not precede t0");
  }
  const double ratio = (tf - t0) / dt;
  return std::max(1L, static_cast<long>(std::ceil(ratio - 1e-9 * ratio)));
}

/**
 * Classical RK4 on the uniform grid t_k = t0 + k (tf - t0) / steps. The observer sees
 * (k, t_k, y_k) for every k including 0 and the final step. A non-finite state aborts
 * with the step index and the last finite state.
 */
template <class Rhs, class Observer>
Vec integrate_fixed(Rhs &&f, Vec y, double t0, double tf, double dt, Observer &&observe)
{
  const long steps = step_count(t0, tf, dt);
  const double h = (tf - t0) / static_cast<double>(steps);
  observe(0L, t0, static_cast<const Vec &>(y));
  for (long k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    Vec next = rk4_step(f, t, y, h);
    if (!next.allFinite()) {
      std::ostringstream msg;
      msg << "integrate: non-finite state at step " << k + 1 << " (t=" << t + h << "); last finite state ["
          << y.transpose() << "]";
      throw NumericalError(msg.str());
    }
    y = std::move(next);
    observe(k + 1, t0 + static_cast<double>(k + 1) * h, static_cast<const Vec &>(y));
  }
  return y;
}

/// Sampled solution. psi is the recorded scalar output; psi_locals has one column per sample (may be empty).
struct Trajectory
{
  double t0{0.0};
  double dt{0.0}; ///< integration step actually used
  int record_every{1};
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> psi;
  Mat psi_locals;
  double psi_min{std::numeric_limits<double>::infinity()}; ///< over every integration step
  double psi_min_time{0.0};
  std::map<std::string, std::string> metadata;
  std::vector<std::string> warnings;

  [[nodiscard]] std::size_t size() const { return states.size(); }
  [[nodiscard]] const Vec &final_state() const { return states.back(); }
  [[nodiscard]] double t_final() const { return times.back(); }
};

struct RecordOptions
{
  int record_every{1};
  std::function<double(const Vec &)> output;
  std::function<Vec(const Vec &)> locals;
};

template <class Rhs>
Trajectory integrate(Rhs &&f, const Vec &p0, double t0, double tf, double dt, const RecordOptions &opt)
{
  if (opt.record_every < 1) {
    throw InvalidInput("integrate: record_every must be >= 1");
  }
  Trajectory traj;
  traj.t0 = t0;
  traj.record_every = opt.record_every;
  const long steps = step_count(t0, tf, dt);
  traj.dt = (tf - t0) / static_cast<double>(steps);
  const std::size_t expected = static_cast<std::size_t>(steps / opt.record_every + 2);
  traj.times.reserve(expected);
  traj.states.reserve(expected);
  traj.psi.reserve(expected);
  std::vector<Vec> locals;

  integrate_fixed(std::forward<Rhs>(f), p0, t0, tf, dt, [&](long k, double t, const Vec &y) {
    const double v = opt.output ? opt.output(y) : 0.0;
    if (v < traj.psi_min) {
      traj.psi_min = v;
      traj.psi_min_time = t;
    }
    if (k % opt.record_every == 0 || k == steps) {
      traj.times.push_back(t);
      traj.states.push_back(y);
      traj.psi.push_back(v);
      if (opt.locals) {
        locals.push_back(opt.locals(y));
      }
    }
  });
  if (!locals.empty()) {
    traj.psi_locals.resize(locals.front().size(), static_cast<Eigen::Index>(locals.size()));
    for (std::size_t s = 0; s < locals.size(); ++s) {
      traj.psi_locals.col(static_cast<Eigen::Index>(s)) = locals[s];
    }
  }
  return traj;
}

/// Integrate the chosen law for a formation system; records psi and every psi_i.
inline Trajectory simulate(const SystemDef &sys, Law law, const Vec &p0, double t0, double tf, double dt,
                           int record_every = 1)
{
  if (p0.size() != sys.spec.state_dim()) {
    throw InvalidInput("simulate: initial state has length " + std::to_string(p0.size()) + ", expected " +
                       std::to_string(sys.spec.state_dim()));
  }
  std::vector<std::string> warnings;
  if (law == Law::dither) {
    const double limit = max_dither_step(sys.schedule);
    if (dt > limit) {
      throw InvalidInput("simulate: dt=" + std::to_string(dt) + " exceeds (2 pi/omega_max)/32 = " +
                         std::to_string(limit));
    }
    if (dt > default_dither_step(sys.schedule) * (1.0 + 1e-12)) {
      warnings.push_back("dt above the recommended (2 pi/omega_max)/64");
    }
  }
  RecordOptions opt;
  opt.record_every = record_every;
  opt.output = [&](const Vec &p) { return psi_global(sys.spec, p); };
  opt.locals = [&](const Vec &p) { return psi_locals(sys.spec, p); };

  Trajectory traj;
  switch (law) {
  case Law::dither:
    traj = integrate([&](double t, const Vec &p) { return closed_loop_rhs(sys, t, p); }, p0, t0, tf, dt, opt);
    break;
  case Law::lie_bracket:
    traj = integrate([&](double, const Vec &p) { return lie_bracket_rhs(sys, p); }, p0, t0, tf, dt, opt);
    break;
  case Law::gradient:
    traj = integrate([&](double, const Vec &p) { return gradient_rhs(sys.spec, p); }, p0, t0, tf, dt, opt);
    break;
  }
  traj.metadata["law"] = to_string(law);
  traj.warnings = std::move(warnings);
  return traj;
}

// ---------------------------------------------------------------------------------------
// decay envelope

struct BoundFit
{
  double c_hat{0.0};
  double psi0{0.0};
  double floor{1e-6};
  bool holds{false};
};

/**
 * Largest c >= 0 with psi(t) <= 2 psi0 / (1 + c psi0 (t - t0)) at every sample. A sample
 * with psi(t) > 2 psi0 admits no c at all, which is reported as c_hat = 0. A trajectory with
 * no binding sample (identically zero) gets c_hat = +inf.
 */
inline BoundFit bound_fit(const std::vector<double> &times, const std::vector<double> &psi, double floor = 1e-6)
{
  if (times.empty() || times.size() != psi.size()) {
    throw InvalidInput("bound_fit: need matching, nonempty time and psi series");
  }
  BoundFit fit;
  fit.floor = floor;
  fit.psi0 = psi.front();
  const double t0 = times.front();
  double c = std::numeric_limits<double>::infinity();
  for (std::size_t s = 1; s < psi.size(); ++s) {
    const double v = psi[s];
    if (v <= 0.0) {
      continue;
    }
    if (v > 2.0 * fit.psi0) {
      c = 0.0;
      break;
    }
    const double span = times[s] - t0;
    if (span <= 0.0) {
      continue;
    }
    c = std::min(c, (2.0 * fit.psi0 / v - 1.0) / (fit.psi0 * span));
  }
  fit.c_hat = std::max(0.0, c);
  fit.holds = fit.c_hat > floor;
  return fit;
}

inline BoundFit bound_fit(const Trajectory &traj, double floor = 1e-6) { return bound_fit(traj.times, traj.psi, floor); }

} // namespace distform

#endif // DISTFORM_DYNAMICS_HPP_
