#include "pairclust/graph.hpp"

#include "pairclust/error.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace pairclust {

MeasurementGraph::MeasurementGraph(std::size_t n, std::vector<Edge> edges)
  : n_(n)
  , edges_(std::move(edges))
{
  if (edges_.size() > (std::size_t{ 1 } << 31))
    throw Error(ErrorCode::size_limit, "too many edges for 32-bit directed ids");

  std::vector<std::size_t> degree(n_, 0);
  for (auto& e : edges_) {
    if (e.i >= n_ || e.j >= n_)
      throw Error(ErrorCode::invalid_argument,
                  "edge endpoint out of range: (" + std::to_string(e.i) + ", " +
                    std::to_string(e.j) + ")");
    if (e.i == e.j)
      throw Error(ErrorCode::invalid_argument,
                  "self-loop at node " + std::to_string(e.i));
    if (e.i > e.j)
      std::swap(e.i, e.j);
    ++degree[e.i];
    ++degree[e.j];
  }

  offsets_.assign(n_ + 1, 0);
  for (std::size_t v = 0; v < n_; ++v) {
    offsets_[v + 1] = offsets_[v] + degree[v];
    max_degree_ = std::max(max_degree_, degree[v]);
  }
  incidence_.resize(offsets_[n_]);
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (EdgeId e = 0; e < edges_.size(); ++e) {
    const Edge& ed = edges_[e];
    incidence_[cursor[ed.i]++] = { ed.j, e };
    incidence_[cursor[ed.j]++] = { ed.i, e };
  }

  // duplicate pairs show up as repeated neighbors
  std::vector<NodeId> seen;
  for (NodeId v = 0; v < n_; ++v) {
    seen.clear();
    for (const auto& inc : neighbors(v))
      seen.push_back(inc.neighbor);
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw Error(ErrorCode::invalid_argument,
                  "duplicate pair at node " + std::to_string(v));
  }
}

bool MeasurementGraph::operator==(const MeasurementGraph& other) const
{
  if (n_ != other.n_ || edges_.size() != other.edges_.size())
    return false;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Edge& a = edges_[e];
    const Edge& b = other.edges_[e];
    if (a.i != b.i || a.j != b.j ||
        std::bit_cast<std::uint64_t>(a.s) != std::bit_cast<std::uint64_t>(b.s))
      return false;
  }
  return true;
}

} // namespace pairclust
