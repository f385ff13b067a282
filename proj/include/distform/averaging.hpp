#ifndef DISTFORM_AVERAGING_HPP_
#define DISTFORM_AVERAGING_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "distform/dynamics.hpp"

namespace distform
{

/**
 * Directional derivatives of psi and of every psi_i along the body-frame fields at one
 * state, in frame coordinates: direction q = agent * n + axis is the constant field B_q
 * that moves agent q / n along b_{q/n, q%n}.
 *
 * Each edge term (1/4) s^2 with s = |r|^2 - d^2, r = p_i - p_j, contributes
 *   D psi_e[u]         = s w_u
 *   D^2 psi_e[u,v]     = 2 w_u w_v + s G_uv
 *   D^3 psi_e[u,v,x]   = 2 (G_uv w_x + G_ux w_v + G_vx w_u)
 * where w_u = <r, dr(u)> and G_uv = <dr(u), dr(v)>. Only the 2n directions of the edge's
 * endpoints are nonzero.
 */
struct FrameDerivatives
{
  int dim{0};  ///< nN
  Vec d1;      ///< D psi
  Mat d2;      ///< D^2 psi
  std::vector<double> d3; ///< D^3 psi, row-major dim^3
  Vec locals;             ///< psi_i
  std::vector<Vec> local_d1;
  std::vector<Mat> local_d2;

  [[nodiscard]] double t3(int a, int b, int c) const
  {
    return d3[(static_cast<std::size_t>(a) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(b)) *
                  static_cast<std::size_t>(dim) +
              static_cast<std::size_t>(c)];
  }
};

inline FrameDerivatives frame_derivatives(const FormationSpec &spec, const BodyFrames &frames, const Vec &p,
                                          bool third = true)
{
  const int n = spec.dim();
  const int agents = spec.num_agents();
  const int d = n * agents;
  FrameDerivatives out;
  out.dim = d;
  out.d1 = Vec::Zero(d);
  out.d2 = Mat::Zero(d, d);
  if (third) {
    out.d3.assign(static_cast<std::size_t>(d) * d * d, 0.0);
  }
  out.locals = Vec::Zero(agents);
  out.local_d1.assign(static_cast<std::size_t>(agents), Vec::Zero(d));
  out.local_d2.assign(static_cast<std::size_t>(agents), Mat::Zero(d, d));

  const auto &edges = spec.graph().edges();
  std::vector<int> idx(static_cast<std::size_t>(2 * n));
  Vec w(2 * n);
  Mat g(2 * n, 2 * n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    const Vec r = p.segment(i * n, n) - p.segment(j * n, n);
    const double s = r.squaredNorm() - spec.desired_sq()(static_cast<Eigen::Index>(e));
    // local directions: first n belong to agent i (dr = +b), last n to agent j (dr = -b)
    Mat dr(n, 2 * n);
    dr.leftCols(n) = frames.frame(i);
    dr.rightCols(n) = -frames.frame(j);
    for (int k = 0; k < n; ++k) {
      idx[static_cast<std::size_t>(k)] = i * n + k;
      idx[static_cast<std::size_t>(n + k)] = j * n + k;
    }
    w = dr.transpose() * r;
    g = dr.transpose() * dr;

    const double quarter = 0.25 * s * s;
    out.locals(i) += quarter;
    out.locals(j) += quarter;
    for (int a = 0; a < 2 * n; ++a) {
      const int qa = idx[static_cast<std::size_t>(a)];
      const double v1 = s * w(a);
      out.d1(qa) += v1;
      out.local_d1[static_cast<std::size_t>(i)](qa) += v1;
      out.local_d1[static_cast<std::size_t>(j)](qa) += v1;
      for (int b = 0; b < 2 * n; ++b) {
        const int qb = idx[static_cast<std::size_t>(b)];
        const double v2 = 2.0 * w(a) * w(b) + s * g(a, b);
        out.d2(qa, qb) += v2;
        out.local_d2[static_cast<std::size_t>(i)](qa, qb) += v2;
        out.local_d2[static_cast<std::size_t>(j)](qa, qb) += v2;
        if (!third) {
          continue;
        }
        for (int c = 0; c < 2 * n; ++c) {
          const int qc = idx[static_cast<std::size_t>(c)];
          out.d3[(static_cast<std::size_t>(qa) * d + qb) * d + qc] +=
              2.0 * (g(a, b) * w(c) + g(a, c) * w(b) + g(b, c) * w(a));
        }
      }
    }
  }
  return out;
}

/**
 * Iterated Lie derivatives of psi along the control fields X_m = h_nu(psi_i) B_q at one state,
 * channel index m = 2 q + (nu - 1). Closed-form expansions by the product and chain rules.
 */
class LieDerivatives
{
 public:
  LieDerivatives(const SystemDef &sys, const Vec &p, bool third = true)
      : n_(sys.spec.dim()), fd_(frame_derivatives(sys.spec, sys.frames, p, third))
  {
    const int channels = 2 * fd_.dim;
    g_.resize(channels);
    dg_.resize(channels);
    ddg_.resize(channels);
    for (int m = 0; m < channels; ++m) {
      const int nu = m % 2 + 1;
      const double y = fd_.locals(agent(m));
      g_(m) = sys.shape.h(nu, y);
      dg_(m) = sys.shape.dh(nu, y);
      ddg_(m) = sys.shape.d2h(nu, y);
    }
  }

  [[nodiscard]] int num_channels() const { return 2 * fd_.dim; }
  [[nodiscard]] const FrameDerivatives &derivatives() const { return fd_; }

  /// X_m psi = h_nu(psi_i) B_q psi
  [[nodiscard]] double x1(int m) const { return g_(m) * fd_.d1(dir(m)); }

  /// X_{m2} X_{m1} psi
  [[nodiscard]] double x2(int m2, int m1) const { return g_(m2) * inner2(m2, m1); }

  /// X_{m3} X_{m2} X_{m1} psi
  [[nodiscard]] double x3(int m3, int m2, int m1) const
  {
    const int q1 = dir(m1);
    const int q2 = dir(m2);
    const int q3 = dir(m3);
    const double a1 = fd_.d1(q1);
    const double b2g1 = bg(m1, q2);
    const double b3g1 = bg(m1, q3);
    const Vec &l1 = fd_.local_d1[static_cast<std::size_t>(agent(m1))];
    const double b3b2g1 = ddg_(m1) * l1(q2) * l1(q3) + dg_(m1) * fd_.local_d2[static_cast<std::size_t>(agent(m1))](q2, q3);
    const double inner = b2g1 * a1 + g_(m1) * fd_.d2(q1, q2);
    const double b3inner =
        b3b2g1 * a1 + b2g1 * fd_.d2(q1, q3) + b3g1 * fd_.d2(q1, q2) + g_(m1) * fd_.t3(q1, q2, q3);
    return g_(m3) * (bg(m2, q3) * inner + g_(m2) * b3inner);
  }

 private:
  [[nodiscard]] int dir(int m) const { return m / 2; }
  [[nodiscard]] int agent(int m) const { return (m / 2) / n_; }

  /// derivative of g_m = h_nu(psi_i) along direction q
  [[nodiscard]] double bg(int m, int q) const
  {
    return dg_(m) * fd_.local_d1[static_cast<std::size_t>(agent(m))](q);
  }

  [[nodiscard]] double inner2(int m2, int m1) const
  {
    const int q1 = dir(m1);
    return bg(m1, dir(m2)) * fd_.d1(q1) + g_(m1) * fd_.d2(q1, dir(m2));
  }

  int n_;
  FrameDerivatives fd_;
  Vec g_;
  Vec dg_;
  Vec ddg_;
};

/**
 * The same iterated derivatives by nested central differences along the frame directions.
 * chain = {m1, m2, ...} evaluates ... X_{m2} X_{m1} psi. Cost grows as 2^depth.
 */
inline double lie_chain_fd(const SystemDef &sys, const std::vector<int> &chain, const Vec &p, double eps = 1e-3)
{
  const int n = sys.spec.dim();
  std::function<double(std::size_t, const Vec &)> eval = [&](std::size_t depth, const Vec &x) -> double {
    if (depth == 0) {
      return psi_global(sys.spec, x);
    }
    const int m = chain[depth - 1];
    const int q = m / 2;
    const int i = q / n;
    const int nu = m % 2 + 1;
    Vec dir = Vec::Zero(x.size());
    dir.segment(i * n, n) = sys.frames.direction(i, q % n);
    const double g = sys.shape.h(nu, psi_local(sys.spec, i, x));
    const double deriv = (eval(depth - 1, x + eps * dir) - eval(depth - 1, x - eps * dir)) / (2.0 * eps);
    return g * deriv;
  };
  return eval(chain.size(), p);
}

/// Y psi = 1/2 sum_i h(psi_i) |grad_i psi|^2
inline double y_psi(const SystemDef &sys, const Vec &p)
{
  const Vec locals = psi_locals(sys.spec, p);
  double acc = 0.0;
  for (int i = 0; i < sys.spec.num_agents(); ++i) {
    acc += sys.shape.bracket(locals(i)) * grad_psi_block(sys.spec, i, p).squaredNorm();
  }
  return 0.5 * acc;
}

/// Averaging coefficients at one instant: u_m(t), UV_m(t), UV_{m2,m1}(t).
struct AveragingCoefficients
{
  Vec u;
  Vec uv;
  Mat uv2; ///< (m2, m1)
};

inline AveragingCoefficients averaging_coefficients(const SinusoidSchedule &s, double t)
{
  const int channels = s.num_channels();
  AveragingCoefficients c;
  c.u.resize(channels);
  c.uv.resize(channels);
  c.uv2.resize(channels, channels);
  for (int m = 0; m < channels; ++m) {
    const Channel ch = s.channel(m);
    c.u(m) = u_eval(s, ch, t);
    c.uv(m) = uv_tilde(s, ch, t);
  }
  for (int m2 = 0; m2 < channels; ++m2) {
    for (int m1 = 0; m1 < channels; ++m1) {
      c.uv2(m2, m1) = uv_tilde2(s, s.channel(m2), s.channel(m1), t);
    }
  }
  return c;
}

struct RemainderTerms
{
  double d1{0.0};
  double d2{0.0};
};

/**
 * D1 psi(t, p) = - sum UV_m X_m psi - sum UV_{m2,m1} X_{m2} X_{m1} psi
 * D2 psi(t, p) =   sum u_{m3} UV_{m2,m1} X_{m3} X_{m2} X_{m1} psi
 */
inline RemainderTerms remainder_terms(const SystemDef &sys, const AveragingCoefficients &c, const Vec &p,
                                      bool with_d2 = true)
{
  const LieDerivatives lie(sys, p, with_d2);
  const int channels = lie.num_channels();
  RemainderTerms r;
  for (int m1 = 0; m1 < channels; ++m1) {
    r.d1 -= c.uv(m1) * lie.x1(m1);
    for (int m2 = 0; m2 < channels; ++m2) {
      const double coef = c.uv2(m2, m1);
      r.d1 -= coef * lie.x2(m2, m1);
      if (!with_d2 || coef == 0.0) {
        continue;
      }
      for (int m3 = 0; m3 < channels; ++m3) {
        r.d2 += c.u(m3) * coef * lie.x3(m3, m2, m1);
      }
    }
  }
  return r;
}

struct AveragingReport
{
  double t_start{0.0};
  double t_end{0.0};
  double psi_start{0.0};
  int samples{0};
  int refinement{2};
  double max_residual{0.0};     ///< max |psi(t) - psi(t0) - int Y psi + D1(t0) - D1(t) - int D2|
  double direct_residual{0.0};  ///< max |psi(t) - psi(t0) - int dpsi/dt|, quadrature sanity
  double max_int_y{0.0};
  double max_d1{0.0};
  double max_int_d2{0.0};
  double max_abs_d2{0.0};
  double d1_ratio{0.0}; ///< max |D1| / psi^{3/2}
  double d2_ratio{0.0}; ///< max |D2| / psi^{5/2}
  std::vector<double> times;
  std::vector<double> residuals;

  [[nodiscard]] double relative_residual() const { return psi_start > 0.0 ? max_residual / psi_start : max_residual; }
};

/**
 * Evaluates every term of the integral decomposition
 *   psi(t) = psi(t0) + int Y psi - D1(t0) + D1(t) + int D2
 * along a closed-loop trajectory over [t_start, t_end]. Between consecutive recorded samples
 * the state is re-integrated with `refinement` (even) RK4 substeps and the integrands are
 * accumulated with composite Simpson.
 */
inline AveragingReport averaging_residual(const SystemDef &sys, const Trajectory &traj, double t_start,
                                          double t_end, int refinement = 2)
{
  if (refinement < 2 || refinement % 2 != 0) {
    throw InvalidInput("averaging_residual: refinement must be even and >= 2");
  }
  if (traj.size() < 2) {
    throw InvalidInput("averaging_residual: trajectory needs at least two samples");
  }
  if (traj.dt > max_dither_step(sys.schedule) * (1.0 + 1e-12)) {
    throw InvalidInput("averaging_residual: trajectory step " + std::to_string(traj.dt) +
                       " exceeds the closed-loop threshold (2 pi/omega_max)/32");
  }
  std::size_t first = 0;
  while (first < traj.size() && traj.times[first] < t_start - 1e-12) {
    ++first;
  }
  std::size_t last = first;
  while (last + 1 < traj.size() && traj.times[last + 1] <= t_end + 1e-12) {
    ++last;
  }
  if (first >= traj.size() || last == first) {
    throw InvalidInput("averaging_residual: window contains fewer than two samples");
  }

  AveragingReport rep;
  rep.t_start = traj.times[first];
  rep.t_end = traj.times[last];
  rep.refinement = refinement;
  rep.psi_start = psi_global(sys.spec, traj.states[first]);

  auto rhs = [&](double t, const Vec &p) { return closed_loop_rhs(sys, t, p); };
  struct Integrands
  {
    double y;
    double d2;
    double dpsi;
  };
  auto integrands = [&](double t, const Vec &p) {
    const AveragingCoefficients c = averaging_coefficients(sys.schedule, t);
    const RemainderTerms r = remainder_terms(sys, c, p, true);
    const double dpsi = grad_psi(sys.spec, p).dot(rhs(t, p));
    return std::pair<Integrands, double>{{y_psi(sys, p), r.d2, dpsi}, r.d1};
  };

  const auto [start_terms, d1_start] = integrands(rep.t_start, traj.states[first]);
  double int_y = 0.0;
  double int_d2 = 0.0;
  double int_dpsi = 0.0;
  auto note_shape = [&](double psi, double d1, double d2) {
    if (psi > 1e-300) {
      rep.d1_ratio = std::max(rep.d1_ratio, std::abs(d1) / std::pow(psi, 1.5));
      rep.d2_ratio = std::max(rep.d2_ratio, std::abs(d2) / std::pow(psi, 2.5));
    }
    rep.max_d1 = std::max(rep.max_d1, std::abs(d1));
    rep.max_abs_d2 = std::max(rep.max_abs_d2, std::abs(d2));
  };
  note_shape(rep.psi_start, d1_start, start_terms.d2);
  rep.times.push_back(rep.t_start);
  rep.residuals.push_back(0.0);

  Integrands left = start_terms;
  for (std::size_t s = first; s < last; ++s) {
    const double ta = traj.times[s];
    const double tb = traj.times[s + 1];
    const double h = (tb - ta) / static_cast<double>(refinement);
    Vec p = traj.states[s];
    double acc_y = left.y;
    double acc_d2 = left.d2;
    double acc_dpsi = left.dpsi;
    double d1_end = 0.0;
    for (int k = 1; k <= refinement; ++k) {
      const double t = ta + static_cast<double>(k - 1) * h;
      p = rk4_step(rhs, t, p, h);
      const double tk = ta + static_cast<double>(k) * h;
      const Vec &eval_p = k == refinement ? traj.states[s + 1] : p;
      auto [val, d1] = integrands(tk, eval_p);
      const double weight = k == refinement ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
      acc_y += weight * val.y;
      acc_d2 += weight * val.d2;
      acc_dpsi += weight * val.dpsi;
      if (k == refinement) {
        left = val;
        d1_end = d1;
      }
    }
    int_y += acc_y * h / 3.0;
    int_d2 += acc_d2 * h / 3.0;
    int_dpsi += acc_dpsi * h / 3.0;

    const double psi_t = psi_global(sys.spec, traj.states[s + 1]);
    const double predicted = rep.psi_start + int_y - d1_start + d1_end + int_d2;
    const double residual = psi_t - predicted;
    rep.max_residual = std::max(rep.max_residual, std::abs(residual));
    rep.direct_residual = std::max(rep.direct_residual, std::abs(psi_t - rep.psi_start - int_dpsi));
    rep.max_int_y = std::max(rep.max_int_y, std::abs(int_y));
    rep.max_int_d2 = std::max(rep.max_int_d2, std::abs(int_d2));
    note_shape(psi_t, d1_end, left.d2);
    rep.times.push_back(tb);
    rep.residuals.push_back(residual);
  }
  rep.samples = static_cast<int>(rep.times.size());
  return rep;
}

struct RemainderShape
{
  double c1_fit{0.0}; ///< max |D1| / psi^{3/2}
  double c2_fit{0.0}; ///< max |D2| / psi^{5/2}
  int samples{0};
  bool finite{false};
};

/// Fitted constants of |D1| <= c1 psi^{3/2} and |D2| <= c2 psi^{5/2} over every stride-th sample.
inline RemainderShape remainder_shape(const SystemDef &sys, const Trajectory &traj, int stride = 1,
                                      double psi_floor = 1e-12)
{
  if (stride < 1) {
    throw InvalidInput("remainder_shape: stride must be >= 1");
  }
  RemainderShape out;
  for (std::size_t s = 0; s < traj.size(); s += static_cast<std::size_t>(stride)) {
    const double v = psi_global(sys.spec, traj.states[s]);
    if (v <= psi_floor) {
      continue;
    }
    const RemainderTerms r = remainder_terms(sys, averaging_coefficients(sys.schedule, traj.times[s]),
                                             traj.states[s], true);
    out.c1_fit = std::max(out.c1_fit, std::abs(r.d1) / std::pow(v, 1.5));
    out.c2_fit = std::max(out.c2_fit, std::abs(r.d2) / std::pow(v, 2.5));
    ++out.samples;
  }
  out.finite = out.samples > 0 && std::isfinite(out.c1_fit) && std::isfinite(out.c2_fit);
  return out;
}

} // namespace distform

#endif // DISTFORM_AVERAGING_HPP_
