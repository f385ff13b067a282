#ifndef DISTFORM_GRAPH_HPP_
#define DISTFORM_GRAPH_HPP_

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "distform/error.hpp"

namespace distform
{

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Undirected edge between two agents. Indices are zero-based and i < j after canonicalisation.
struct Edge
{
  int i{0};
  int j{0};

  friend bool operator==(const Edge &, const Edge &) = default;
  friend auto operator<=>(const Edge &, const Edge &) = default;
};

inline std::string to_string(const Edge &e)
{
  // one-based, matching the scenario files
  return "{" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) + "}";
}

/**
 * Undirected simple graph on vertices 0..N-1.
 *
 * The edge list is stored sorted lexicographically so that every quantity indexed by
 * edge (edge map components, desired distances, rigidity matrix rows) has a
 * reproducible order. Construction rejects self-loops, out-of-range vertices,
 * duplicates and empty edge sets.
 */
class Graph
{
 public:
  Graph() = default;

  Graph(int num_vertices, std::vector<Edge> edges) : num_vertices_(num_vertices)
  {
    if (num_vertices <= 0) {
      throw InvalidInput("graph: vertex count must be positive");
    }
    if (edges.empty()) {
      throw InvalidInput("graph: edge list must be nonempty");
    }
    for (auto &e : edges) {
      if (e.i == e.j) {
        throw InvalidInput("graph: self-loop at vertex " + std::to_string(e.i + 1));
      }
      if (e.i < 0 || e.j < 0 || e.i >= num_vertices || e.j >= num_vertices) {
        throw InvalidInput("graph: edge " + to_string(e) + " references a vertex outside 1.." +
                           std::to_string(num_vertices));
      }
      if (e.i > e.j) {
        std::swap(e.i, e.j);
      }
    }
    std::sort(edges.begin(), edges.end());
    auto dup = std::adjacent_find(edges.begin(), edges.end());
    if (dup != edges.end()) {
      throw InvalidInput("graph: duplicate edge " + to_string(*dup));
    }
    edges_ = std::move(edges);

    incident_.assign(static_cast<std::size_t>(num_vertices), {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      incident_[static_cast<std::size_t>(edges_[e].i)].push_back(e);
      incident_[static_cast<std::size_t>(edges_[e].j)].push_back(e);
    }
  }

  static Graph complete(int num_vertices)
  {
    std::vector<Edge> edges;
    for (int i = 0; i < num_vertices; ++i) {
      for (int j = i + 1; j < num_vertices; ++j) {
        edges.push_back({i, j});
      }
    }
    return Graph(num_vertices, std::move(edges));
  }

  [[nodiscard]] Graph without_edge(Edge removed) const
  {
    if (removed.i > removed.j) {
      std::swap(removed.i, removed.j);
    }
    std::vector<Edge> kept;
    for (const auto &e : edges_) {
      if (e != removed) {
        kept.push_back(e);
      }
    }
    return Graph(num_vertices_, std::move(kept));
  }

  [[nodiscard]] Graph with_edge(Edge added) const
  {
    auto edges = edges_;
    edges.push_back(added);
    return Graph(num_vertices_, std::move(edges));
  }

  [[nodiscard]] int num_vertices() const { return num_vertices_; }
  [[nodiscard]] std::size_t num_edges() const { return edges_.size(); }
  [[nodiscard]] const std::vector<Edge> &edges() const { return edges_; }

  /// Indices (into edges()) of the edges incident to vertex v.
  [[nodiscard]] const std::vector<std::size_t> &incident(int v) const
  {
    return incident_.at(static_cast<std::size_t>(v));
  }

  [[nodiscard]] bool adjacent(int a, int b) const
  {
    if (a > b) {
      std::swap(a, b);
    }
    return std::binary_search(edges_.begin(), edges_.end(), Edge{a, b});
  }

  /// Position of edge {a,b} in the canonical order, or -1.
  [[nodiscard]] long edge_index(int a, int b) const
  {
    if (a > b) {
      std::swap(a, b);
    }
    auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{a, b});
    if (it == edges_.end() || *it != Edge{a, b}) {
      return -1;
    }
    return it - edges_.begin();
  }

  friend bool operator==(const Graph &a, const Graph &b)
  {
    return a.num_vertices_ == b.num_vertices_ && a.edges_ == b.edges_;
  }

 private:
  int num_vertices_{0};
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incident_;
};

/// A graph with agent positions in R^dim, concatenated as p = (p_1, ..., p_N).
struct Framework
{
  Graph graph;
  int dim{0};
  Vec positions;

  Framework() = default;
  Framework(Graph g, int n, Vec p) : graph(std::move(g)), dim(n), positions(std::move(p))
  {
    if (dim <= 0) {
      throw InvalidInput("framework: dimension must be positive");
    }
    if (positions.size() != static_cast<Eigen::Index>(dim) * graph.num_vertices()) {
      throw InvalidInput("framework: positions length " + std::to_string(positions.size()) +
                         " does not equal n*N = " +
                         std::to_string(dim * graph.num_vertices()));
    }
  }

  [[nodiscard]] int num_agents() const { return graph.num_vertices(); }
  [[nodiscard]] auto point(int i) const { return positions.segment(i * dim, dim); }
};

} // namespace distform

#endif // DISTFORM_GRAPH_HPP_
