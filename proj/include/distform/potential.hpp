#ifndef DISTFORM_POTENTIAL_HPP_
#define DISTFORM_POTENTIAL_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "distform/graph.hpp"
#include "distform/rigidity.hpp"

namespace distform
{

/// Graph plus desired inter-agent distances, stored squared in canonical edge order.
class FormationSpec
{
 public:
  FormationSpec() = default;

  /// `distances` are d_ij (not squared) aligned with g.edges().
  FormationSpec(Graph g, int dim, const Vec &distances) : graph_(std::move(g)), dim_(dim)
  {
    if (dim <= 0) {
      throw InvalidInput("formation: dimension must be positive");
    }
    if (distances.size() != static_cast<Eigen::Index>(graph_.num_edges())) {
      throw InvalidInput("formation: one desired distance per edge required");
    }
    for (Eigen::Index e = 0; e < distances.size(); ++e) {
      if (!(distances(e) >= 0.0) || !std::isfinite(distances(e))) {
        throw InvalidInput("formation: desired distance for edge " +
                           to_string(graph_.edges()[static_cast<std::size_t>(e)]) +
                           " must be finite and nonnegative");
      }
    }
    desired_sq_ = distances.array().square();
  }

  /// Build from unordered (edge, distance) pairs; the pairs are re-sorted with the edges.
  static FormationSpec from_pairs(int num_agents, int dim, const std::vector<std::pair<Edge, double>> &pairs)
  {
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (const auto &[e, d] : pairs) {
      edges.push_back(e);
    }
    Graph g(num_agents, edges);
    Vec dist(static_cast<Eigen::Index>(g.num_edges()));
    for (const auto &[e, d] : pairs) {
      dist(g.edge_index(e.i, e.j)) = d;
    }
    return FormationSpec(std::move(g), dim, dist);
  }

  [[nodiscard]] const Graph &graph() const { return graph_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int num_agents() const { return graph_.num_vertices(); }
  [[nodiscard]] Eigen::Index state_dim() const { return static_cast<Eigen::Index>(dim_) * num_agents(); }
  [[nodiscard]] const Vec &desired_sq() const { return desired_sq_; }
  [[nodiscard]] Vec desired() const { return desired_sq_.array().sqrt(); }

  friend bool operator==(const FormationSpec &a, const FormationSpec &b)
  {
    return a.graph_ == b.graph_ && a.dim_ == b.dim_ && a.desired_sq_ == b.desired_sq_;
  }

 private:
  Graph graph_;
  int dim_{0};
  Vec desired_sq_;
};

/// Per-agent orthonormal velocity directions b_{i,1..n}, stored as the columns of an n x n matrix.
class BodyFrames
{
 public:
  BodyFrames() = default;

  static BodyFrames identity(int num_agents, int dim)
  {
    BodyFrames f;
    f.frames_.assign(static_cast<std::size_t>(num_agents), Mat::Identity(dim, dim));
    return f;
  }

  /// Modified Gram-Schmidt on each agent's columns, in order. Throws if a frame is rank deficient.
  static BodyFrames orthonormalized(const std::vector<Mat> &raw)
  {
    BodyFrames f;
    for (std::size_t a = 0; a < raw.size(); ++a) {
      const Mat &m = raw[a];
      if (m.rows() != m.cols() || m.rows() == 0) {
        throw InvalidInput("frames: agent " + std::to_string(a + 1) + " frame must be n x n");
      }
      Mat q = m;
      for (Eigen::Index k = 0; k < q.cols(); ++k) {
        const double original = m.col(k).norm();
        for (Eigen::Index l = 0; l < k; ++l) {
          q.col(k) -= q.col(l).dot(q.col(k)) * q.col(l);
        }
        const double rest = q.col(k).norm();
        if (!(original > 0.0) || rest <= 1e-10 * original) {
          throw InvalidInput("frames: agent " + std::to_string(a + 1) +
                             " directions are linearly dependent (rank < n)");
        }
        q.col(k) /= rest;
      }
      f.frames_.push_back(std::move(q));
    }
    return f;
  }

  [[nodiscard]] std::size_t size() const { return frames_.size(); }
  [[nodiscard]] const Mat &frame(int i) const { return frames_.at(static_cast<std::size_t>(i)); }
  [[nodiscard]] auto direction(int i, int k) const { return frame(i).col(k); }

  [[nodiscard]] double max_orthonormality_error() const
  {
    double worst = 0.0;
    for (const auto &m : frames_) {
      worst = std::max(worst, (m.transpose() * m - Mat::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff());
    }
    return worst;
  }

  friend bool operator==(const BodyFrames &, const BodyFrames &) = default;

 private:
  std::vector<Mat> frames_;
};

namespace detail
{
inline double edge_error(const FormationSpec &spec, std::size_t e, const Vec &p)
{
  const int n = spec.dim();
  const auto [i, j] = spec.graph().edges()[e];
  return (p.segment(j * n, n) - p.segment(i * n, n)).squaredNorm() - spec.desired_sq()(static_cast<Eigen::Index>(e));
}
} // namespace detail

/// Local potential of agent i: quarter-sum of squared distance errors over incident edges.
inline double psi_local(const FormationSpec &spec, int i, const Vec &p)
{
  double acc = 0.0;
  for (auto e : spec.graph().incident(i)) {
    const double s = detail::edge_error(spec, e, p);
    acc += s * s;
  }
  return 0.25 * acc;
}

/// All local potentials at once, one pass over the edges.
inline Vec psi_locals(const FormationSpec &spec, const Vec &p)
{
  Vec out = Vec::Zero(spec.num_agents());
  const auto &edges = spec.graph().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double s = detail::edge_error(spec, e, p);
    const double v = 0.25 * s * s;
    out(edges[e].i) += v;
    out(edges[e].j) += v;
  }
  return out;
}

inline double psi_global(const FormationSpec &spec, const Vec &p)
{
  double acc = 0.0;
  for (std::size_t e = 0; e < spec.graph().num_edges(); ++e) {
    const double s = detail::edge_error(spec, e, p);
    acc += s * s;
  }
  return 0.25 * acc;
}

/// Gradient of psi with respect to p_i: sum over neighbours of (|p_i-p_j|^2 - d_ij^2)(p_i - p_j).
inline Vec grad_psi_block(const FormationSpec &spec, int i, const Vec &p)
{
  const int n = spec.dim();
  Vec g = Vec::Zero(n);
  for (auto e : spec.graph().incident(i)) {
    const auto [a, b] = spec.graph().edges()[e];
    const int j = a == i ? b : a;
    const Vec diff = p.segment(i * n, n) - p.segment(j * n, n);
    g += (diff.squaredNorm() - spec.desired_sq()(static_cast<Eigen::Index>(e))) * diff;
  }
  return g;
}

inline Vec grad_psi(const FormationSpec &spec, const Vec &p)
{
  const int n = spec.dim();
  Vec g = Vec::Zero(p.size());
  const auto &edges = spec.graph().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j] = edges[e];
    const Vec diff = p.segment(i * n, n) - p.segment(j * n, n);
    const Vec term = (diff.squaredNorm() - spec.desired_sq()(static_cast<Eigen::Index>(e))) * diff;
    g.segment(i * n, n) += term;
    g.segment(j * n, n) -= term;
  }
  return g;
}

/// Lie derivative of psi along the constant field B_{i,k}. Equals B_{i,k} psi_i.
inline double lie_derivative_b(const FormationSpec &spec, const BodyFrames &frames, int i, int k, const Vec &p)
{
  return grad_psi_block(spec, i, p).dot(frames.direction(i, k));
}

struct GradientBoundReport
{
  double c1_hat{0.0}; ///< max |grad psi|^2 / psi over samples
  double c3_hat{0.0}; ///< min |grad psi|^2 / psi over samples
  int samples_used{0};
  double threshold{1e-6};
  bool passed{false};
};

/**
 * Sampled estimates of the constants in c3 psi <= |grad psi|^2 <= c1 psi near a target
 * formation. Points are drawn uniformly from the ball of the given radius around the
 * realization; samples with psi <= 1e-12 are skipped since both sides vanish there.
 */
inline GradientBoundReport verify_gradient_bounds(const FormationSpec &spec, const Vec &realization, int samples,
                                                  double radius, std::uint64_t seed, double threshold = 1e-6)
{
  if (realization.size() != spec.state_dim()) {
    throw InvalidInput("gradient bounds: realization has wrong length");
  }
  if (psi_global(spec, realization) > 1e-9) {
    throw InvalidInput("gradient bounds: realization is not a target formation (psi > 1e-9)");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  GradientBoundReport rep;
  rep.threshold = threshold;
  rep.c1_hat = 0.0;
  rep.c3_hat = std::numeric_limits<double>::infinity();
  const auto dim = realization.size();
  for (int s = 0; s < samples; ++s) {
    Vec dir(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      dir(k) = normal(rng);
    }
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(dim));
    const Vec p = realization + r * dir.normalized();
    const double v = psi_global(spec, p);
    if (v <= 1e-12) {
      continue;
    }
    const double ratio = grad_psi(spec, p).squaredNorm() / v;
    rep.c1_hat = std::max(rep.c1_hat, ratio);
    rep.c3_hat = std::min(rep.c3_hat, ratio);
    ++rep.samples_used;
  }
  if (rep.samples_used == 0) {
    rep.c3_hat = 0.0;
  }
  rep.passed = rep.samples_used > 0 && rep.c3_hat > threshold && std::isfinite(rep.c1_hat);
  return rep;
}

} // namespace distform

#endif // DISTFORM_POTENTIAL_HPP_
