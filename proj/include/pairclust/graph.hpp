#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pairclust {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
//! Directed edge id: undirected edge e gives 2e (i->j) and 2e+1 (j->i).
using DirectedId = std::uint32_t;

struct Edge
{
  NodeId i;
  NodeId j;
  double s;
};

struct Incidence
{
  NodeId neighbor;
  EdgeId edge;
};

//! Immutable sparse undirected graph with one scalar measurement per edge.
//!
//! Edges are stored with i < j. Adjacency is kept in compressed form; within a
//! node's list, entries appear in increasing edge-id order.
class MeasurementGraph
{
public:
  MeasurementGraph() = default;

  //! Throws Error(invalid_argument) on self-loops, duplicate pairs or ids >= n.
  //! Pairs given with i > j are reoriented.
  MeasurementGraph(std::size_t n, std::vector<Edge> edges);

  std::size_t num_nodes() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t num_directed() const noexcept { return 2 * edges_.size(); }

  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  std::span<const Incidence> neighbors(NodeId i) const
  {
    return { incidence_.data() + offsets_[i], offsets_[i + 1] - offsets_[i] };
  }
  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }
  std::size_t max_degree() const noexcept { return max_degree_; }

  static constexpr DirectedId forward(EdgeId e) { return 2 * e; }
  static constexpr DirectedId backward(EdgeId e) { return 2 * e + 1; }
  static constexpr EdgeId undirected(DirectedId d) { return d / 2; }
  static constexpr DirectedId reverse(DirectedId d) { return d ^ 1U; }

  NodeId source(DirectedId d) const
  {
    const Edge& e = edges_[d / 2];
    return (d & 1U) ? e.j : e.i;
  }
  NodeId target(DirectedId d) const
  {
    const Edge& e = edges_[d / 2];
    return (d & 1U) ? e.i : e.j;
  }
  //! Directed id of from -> (other endpoint of e).
  DirectedId directed_from(EdgeId e, NodeId from) const
  {
    return edges_[e].i == from ? forward(e) : backward(e);
  }

  bool operator==(const MeasurementGraph& other) const;

private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{ 0 };
  std::vector<Incidence> incidence_;
  std::size_t max_degree_ = 0;
};

} // namespace pairclust
