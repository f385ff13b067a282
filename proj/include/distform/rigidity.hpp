#ifndef DISTFORM_RIGIDITY_HPP_
#define DISTFORM_RIGIDITY_HPP_

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "distform/graph.hpp"

namespace distform
{

inline constexpr double kDefaultRankTol = 1e-9;

/// Squared edge lengths |p_j - p_i|^2 in canonical edge order.
inline Vec edge_map(const Graph &g, int dim, const Vec &p)
{
  Vec f(static_cast<Eigen::Index>(g.num_edges()));
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edges()[e];
    f(static_cast<Eigen::Index>(e)) = (p.segment(j * dim, dim) - p.segment(i * dim, dim)).squaredNorm();
  }
  return f;
}

inline Vec edge_map(const Framework &fw) { return edge_map(fw.graph, fw.dim, fw.positions); }

/// Derivative of the edge map: M x nN, row {i,j} holds 2(p_i-p_j) in block i and 2(p_j-p_i) in block j.
inline Mat rigidity_matrix(const Graph &g, int dim, const Vec &p)
{
  Mat r = Mat::Zero(static_cast<Eigen::Index>(g.num_edges()), p.size());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edges()[e];
    const Vec diff = p.segment(i * dim, dim) - p.segment(j * dim, dim);
    const auto row = static_cast<Eigen::Index>(e);
    r.row(row).segment(i * dim, dim) = 2.0 * diff.transpose();
    r.row(row).segment(j * dim, dim) = -2.0 * diff.transpose();
  }
  return r;
}

inline Mat rigidity_matrix(const Framework &fw) { return rigidity_matrix(fw.graph, fw.dim, fw.positions); }

/// Singular values via Jacobi SVD; throws NumericalError if the decomposition fails.
inline Vec singular_values(const Mat &m)
{
  if (m.size() == 0) {
    return Vec();
  }
  Eigen::JacobiSVD<Mat> svd(m);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("singular value decomposition failed");
  }
  return svd.singularValues();
}

/// Count of singular values above rel_tol * sigma_max. A zero matrix has rank 0.
inline int numerical_rank(const Mat &m, double rel_tol = kDefaultRankTol)
{
  if (!(rel_tol > 0.0)) {
    throw InvalidInput("numerical_rank: rel_tol must be positive");
  }
  const Vec s = singular_values(m);
  if (s.size() == 0 || s(0) == 0.0) {
    return 0;
  }
  const double cut = rel_tol * s(0);
  return static_cast<int>((s.array() > cut).count());
}

/// Dimension of the affine span of the N points (rank of the centred N x n position matrix).
inline int affine_span_dim(int dim, const Vec &p, double rel_tol = kDefaultRankTol)
{
  const auto n_agents = p.size() / dim;
  Mat pts(n_agents, dim);
  for (Eigen::Index i = 0; i < n_agents; ++i) {
    pts.row(i) = p.segment(i * dim, dim).transpose();
  }
  const Eigen::RowVectorXd centroid = pts.colwise().mean();
  pts.rowwise() -= centroid;
  return numerical_rank(pts, rel_tol);
}

struct RankReport
{
  int rank_g{0};
  int affine_span_dim{0};
  int required_rank{0};
  double tolerance{kDefaultRankTol};
  bool is_inf_rigid{false};
};

/// Dimension of the congruence orbit of a configuration whose affine span has dimension k.
constexpr int congruence_orbit_dim(int n, int k)
{
  return n * (n + 1) / 2 - (n - k) * (n - k - 1) / 2;
}

/**
 * Rank test for infinitesimal rigidity.
 *
 * The framework is infinitesimally rigid iff the rigidity matrix has rank nN minus the
 * dimension of the congruence orbit through p. The orbit dimension depends on the affine
 * span k of the points, so degenerate (e.g. collinear in the plane) configurations get the
 * smaller orbit they actually have.
 */
inline RankReport is_infinitesimally_rigid(const Framework &fw, double rel_tol = kDefaultRankTol)
{
  RankReport rep;
  rep.tolerance = rel_tol;
  rep.rank_g = numerical_rank(rigidity_matrix(fw), rel_tol);
  rep.affine_span_dim = affine_span_dim(fw.dim, fw.positions, rel_tol);
  rep.required_rank = fw.dim * fw.num_agents() - congruence_orbit_dim(fw.dim, rep.affine_span_dim);
  rep.is_inf_rigid = rep.rank_g == rep.required_rank;
  return rep;
}

} // namespace distform

#endif // DISTFORM_RIGIDITY_HPP_
