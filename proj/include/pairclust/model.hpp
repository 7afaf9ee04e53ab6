#pragma once

#include "pairclust/density.hpp"
#include "pairclust/graph.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace pairclust {

//! Cluster labels, 0-based internally; label files store them 1-based.
using Labels = std::vector<int>;

struct PlantedInstance
{
  MeasurementGraph graph;
  Labels truth;
  ModelParams params;
  std::uint64_t seed;
};

//! Unordered pairs (i < j) of an Erdos-Renyi graph G(n, rate), generated by
//! geometric skipping in O(n + m).
std::vector<std::pair<NodeId, NodeId>> sample_pairs(std::size_t n, double rate, Rng& rng);

//! Planted instance: uniform labels, G(n, alpha/n) pairs, s ~ p_{c_i,c_j}.
PlantedInstance sample_instance(const ModelParams& params, std::size_t n, std::uint64_t seed);

//! w(s) = (p_in(s) - p_out(s)) / (p_in(s) + (k-1) p_out(s)).
//! Density values below `floor` are raised to it. Throws out_of_support when
//! the denominator is below 1e-300.
double weight(const MeasurementDensity& p_in,
              const MeasurementDensity& p_out,
              int k,
              double s,
              double floor = 0.0);

//! w(s_e) for every undirected edge; params must be symmetric.
std::vector<double> edge_weights(const MeasurementGraph& graph, const ModelParams& params);

//! Critical average degree alpha_c of the symmetric model, or +infinity when
//! p_in and p_out are indistinguishable.
double critical_degree(const ModelParams& params);

} // namespace pairclust
