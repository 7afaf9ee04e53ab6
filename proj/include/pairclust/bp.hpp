#pragma once

#include "pairclust/model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace pairclust {

//! Row-major table of probability vectors, one row of length k per item.
class ProbabilityTable
{
public:
  ProbabilityTable() = default;
  ProbabilityTable(std::size_t rows, int k, double fill = 0.0)
    : rows_(rows)
    , k_(k)
    , values_(rows * static_cast<std::size_t>(k), fill)
  {}

  std::size_t rows() const noexcept { return rows_; }
  int k() const noexcept { return k_; }

  std::span<double> row(std::size_t r)
  {
    return { values_.data() + r * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_) };
  }
  std::span<const double> row(std::size_t r) const
  {
    return { values_.data() + r * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_) };
  }
  double operator()(std::size_t r, int c) const { return values_[r * k_ + c]; }

  const std::vector<double>& values() const noexcept { return values_; }

  //! Largest |sum - 1| or negative entry magnitude over rows.
  double max_normalization_error() const;

  bool operator==(const ProbabilityTable&) const = default;

private:
  std::size_t rows_ = 0;
  int k_ = 0;
  std::vector<double> values_;
};

//! Row d is the message P_{i->j} on directed edge d.
using MessageSet = ProbabilityTable;
//! Row i is the marginal P_i.
using MarginalSet = ProbabilityTable;

struct BpReport
{
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;

  bool operator==(const BpReport&) const = default;
};

struct BpSettings
{
  int max_iter = 200;
  double tol = 1e-6;
  double damping = 0.0;
  double noise = 0.01;
};

//! Per-edge pairwise factor p_{c,c'}(s_e), evaluated once per graph.
class EdgeFactors
{
public:
  EdgeFactors(const MeasurementGraph& graph, const ModelParams& params);

  int k() const noexcept { return k_; }
  //! k x k row-major block for undirected edge e.
  std::span<const double> factor(EdgeId e) const
  {
    std::size_t kk = static_cast<std::size_t>(k_) * k_;
    return { values_.data() + e * kk, kk };
  }

private:
  int k_;
  std::vector<double> values_;
};

MessageSet bp_init(const MeasurementGraph& graph, int k, std::uint64_t seed, double noise);

struct SweepResult
{
  MessageSet messages;
  double delta;
};

//! One synchronous update of every message. Throws numerical_underflow when a
//! normalizer collapses below 1e-300.
SweepResult bp_sweep(const MeasurementGraph& graph,
                     const ModelParams& params,
                     const MessageSet& messages);

//! Same as above with precomputed factors, writing into `next`; `damping`
//! mixes in the previous messages. Returns the max absolute entry change.
double bp_sweep(const MeasurementGraph& graph,
                const EdgeFactors& factors,
                const MessageSet& messages,
                MessageSet& next,
                double damping = 0.0);

MarginalSet bp_marginals(const MeasurementGraph& graph,
                         const EdgeFactors& factors,
                         const MessageSet& messages);

struct BpResult
{
  MarginalSet marginals;
  MessageSet messages;
  BpReport report;
};

//! Iterates damped sweeps until the max message change drops below tol or
//! max_iter sweeps ran; non-convergence is reported, not thrown.
BpResult bp_run(const MeasurementGraph& graph,
                const ModelParams& params,
                std::uint64_t seed,
                const BpSettings& settings = {});

//! Per-row argmax, ties going to the smallest label.
Labels decode_marginals(const MarginalSet& marginals);

} // namespace pairclust
