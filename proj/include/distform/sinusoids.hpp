#ifndef DISTFORM_SINUSOIDS_HPP_
#define DISTFORM_SINUSOIDS_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "distform/graph.hpp"

namespace distform
{

/// Input channel m = (agent, axis, nu); agent and axis are zero-based, nu is 1 (cos) or 2 (sin).
struct Channel
{
  int agent{0};
  int axis{0};
  int nu{1};

  friend bool operator==(const Channel &, const Channel &) = default;
};

/**
 * Frequencies and phases of the dither sinusoids, one (omega_{i,k}, phi_{i,k}) per agent
 * and body axis. The linear rule sets omega_{i,k} = omega ((i-1) n + k). All frequencies
 * must be positive and pairwise distinct.
 */
class SinusoidSchedule
{
 public:
  enum class Rule
  {
    linear,
    explicit_table
  };

  SinusoidSchedule() = default;

  static SinusoidSchedule linear(double omega, int num_agents, int dim, Mat phases = Mat())
  {
    if (!(omega > 0.0)) {
      throw InvalidInput("schedule: omega must be positive");
    }
    Mat freqs(num_agents, dim);
    for (int i = 0; i < num_agents; ++i) {
      for (int k = 0; k < dim; ++k) {
        freqs(i, k) = omega * static_cast<double>(i * dim + k + 1);
      }
    }
    SinusoidSchedule s = make(std::move(freqs), std::move(phases));
    s.rule_ = Rule::linear;
    s.omega_ = omega;
    return s;
  }

  static SinusoidSchedule explicit_table(Mat freqs, Mat phases = Mat())
  {
    SinusoidSchedule s = make(std::move(freqs), std::move(phases));
    s.rule_ = Rule::explicit_table;
    s.omega_ = s.freqs_.minCoeff();
    return s;
  }

  [[nodiscard]] Rule rule() const { return rule_; }
  [[nodiscard]] double omega() const { return omega_; }
  [[nodiscard]] int num_agents() const { return static_cast<int>(freqs_.rows()); }
  [[nodiscard]] int dim() const { return static_cast<int>(freqs_.cols()); }
  [[nodiscard]] int num_channels() const { return 2 * num_agents() * dim(); }
  [[nodiscard]] double frequency(int i, int k) const { return freqs_(i, k); }
  [[nodiscard]] double phase(int i, int k) const { return phases_(i, k); }
  [[nodiscard]] const Mat &frequencies() const { return freqs_; }
  [[nodiscard]] const Mat &phases() const { return phases_; }
  [[nodiscard]] double max_frequency() const { return freqs_.maxCoeff(); }
  [[nodiscard]] double min_frequency() const { return freqs_.minCoeff(); }

  /// Flat channel index 2 (agent n + axis) + (nu - 1), and back.
  [[nodiscard]] int index(const Channel &m) const { return 2 * (m.agent * dim() + m.axis) + (m.nu - 1); }
  [[nodiscard]] Channel channel(int idx) const
  {
    const int q = idx / 2;
    return {q / dim(), q % dim(), idx % 2 + 1};
  }

  friend bool operator==(const SinusoidSchedule &a, const SinusoidSchedule &b)
  {
    return a.rule_ == b.rule_ && a.omega_ == b.omega_ && a.freqs_ == b.freqs_ && a.phases_ == b.phases_;
  }

 private:
  static SinusoidSchedule make(Mat freqs, Mat phases)
  {
    if (freqs.size() == 0) {
      throw InvalidInput("schedule: empty frequency table");
    }
    if (phases.size() == 0) {
      phases = Mat::Zero(freqs.rows(), freqs.cols());
    }
    if (phases.rows() != freqs.rows() || phases.cols() != freqs.cols()) {
      throw InvalidInput("schedule: phase table must be N x n like the frequencies");
    }
    std::vector<double> all(freqs.data(), freqs.data() + freqs.size());
    for (double w : all) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw InvalidInput("schedule: frequencies must be positive and finite");
      }
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
      throw InvalidInput("schedule: frequencies must be pairwise distinct");
    }
    if (!phases.allFinite()) {
      throw InvalidInput("schedule: phases must be finite");
    }
    SinusoidSchedule s;
    s.freqs_ = std::move(freqs);
    s.phases_ = std::move(phases);
    return s;
  }

  Rule rule_{Rule::linear};
  double omega_{0.0};
  Mat freqs_;
  Mat phases_;
};

/// u_m(t) = sqrt(w) cos(w t + phi) for nu = 1, sqrt(w) sin(w t + phi) for nu = 2.
inline double u_eval(const SinusoidSchedule &s, const Channel &m, double t)
{
  const double w = s.frequency(m.agent, m.axis);
  const double arg = w * t + s.phase(m.agent, m.axis);
  return std::sqrt(w) * (m.nu == 1 ? std::cos(arg) : std::sin(arg));
}

// ---------------------------------------------------------------------------------------
// Fourier bookkeeping of the averaging analysis. Each u_m is written as
// sum over w in {+w_ik, -w_ik} of eta_{w,m} e^{i w t}; the antiderivative functions below
// are evaluated literally from those coefficients and must come out real.

using Complex = std::complex<double>;

struct EtaTerm
{
  double freq{0.0};
  Complex eta;
};

inline std::array<EtaTerm, 2> eta_terms(const SinusoidSchedule &s, const Channel &m)
{
  const double w = s.frequency(m.agent, m.axis);
  const double phi = s.phase(m.agent, m.axis);
  const double amp = std::sqrt(w);
  const Complex iu(0.0, 1.0);
  std::array<EtaTerm, 2> out;
  for (int sign : {+1, -1}) {
    const Complex rot = std::polar(1.0, sign * phi);
    Complex eta = m.nu == 1 ? amp * rot / 2.0 : static_cast<double>(sign) * amp * rot / (2.0 * iu);
    out[sign > 0 ? 0 : 1] = {sign * w, eta};
  }
  return out;
}

namespace detail
{
inline double real_part_checked(Complex z, double scale, const char *what)
{
  if (std::abs(z.imag()) > 1e-12 * std::max(1.0, scale)) {
    throw NumericalError(std::string(what) + ": imaginary residue " + std::to_string(z.imag()) +
                         " exceeds tolerance");
  }
  return z.real();
}
} // namespace detail

/// UV_m(t) = -sum_w eta_{w,m} / (i w) e^{i w t}
inline double uv_tilde(const SinusoidSchedule &s, const Channel &m, double t)
{
  const Complex iu(0.0, 1.0);
  Complex acc(0.0, 0.0);
  double scale = 0.0;
  for (const auto &[w, eta] : eta_terms(s, m)) {
    const Complex term = -eta / (iu * w) * std::polar(1.0, w * t);
    acc += term;
    scale += std::abs(term);
  }
  return detail::real_part_checked(acc, scale, "uv_tilde");
}

/// UV_{m2,m1}(t) = sum over (w2, w1) with w2 + w1 != 0 of eta2 eta1 / (i^2 w1 (w2 + w1)) e^{i (w2 + w1) t}
inline double uv_tilde2(const SinusoidSchedule &s, const Channel &m2, const Channel &m1, double t)
{
  Complex acc(0.0, 0.0);
  double scale = 0.0;
  const auto outer = eta_terms(s, m2);
  const auto inner = eta_terms(s, m1);
  for (const auto &[w2, eta2] : outer) {
    for (const auto &[w1, eta1] : inner) {
      const double sum = w2 + w1;
      if (sum == 0.0) {
        continue;
      }
      // i^2 = -1
      const Complex term = -(eta2 * eta1) / (w1 * sum) * std::polar(1.0, sum * t);
      acc += term;
      scale += std::abs(term);
    }
  }
  return detail::real_part_checked(acc, scale, "uv_tilde2");
}

/// v_{m2,m1} = -sum over (w2, w1) with w2 + w1 = 0 of eta2 eta1 / (i w1); constant in t.
inline double v_pair(const SinusoidSchedule &s, const Channel &m2, const Channel &m1)
{
  const Complex iu(0.0, 1.0);
  Complex acc(0.0, 0.0);
  double scale = 0.0;
  for (const auto &[w2, eta2] : eta_terms(s, m2)) {
    for (const auto &[w1, eta1] : eta_terms(s, m1)) {
      if (w2 + w1 != 0.0) {
        continue;
      }
      const Complex term = -(eta2 * eta1) / (iu * w1);
      acc += term;
      scale += std::abs(term);
    }
  }
  return detail::real_part_checked(acc, scale, "v_pair");
}

/// Closed-form table of v_{m2,m1}: +1/2 for (same axis, nu2=1, nu1=2), -1/2 for (same axis, nu2=2, nu1=1), else 0.
constexpr double v_coeff(const Channel &m2, const Channel &m1)
{
  if (m2.agent != m1.agent || m2.axis != m1.axis) {
    return 0.0;
  }
  if (m2.nu == 1 && m1.nu == 2) {
    return 0.5;
  }
  if (m2.nu == 2 && m1.nu == 1) {
    return -0.5;
  }
  return 0.0;
}

} // namespace distform

#endif // DISTFORM_SINUSOIDS_HPP_
