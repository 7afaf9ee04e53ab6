#include "pairclust/bp.hpp"

#include "pairclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pairclust {

namespace {

constexpr double kNormalizerFloor = 1e-300;

// Scratch buffers reused across nodes within one sweep.
struct NodeWorkspace
{
  explicit NodeWorkspace(std::size_t max_degree, int k)
    : k(static_cast<std::size_t>(k))
    , factors(max_degree * this->k)
    , prefix((max_degree + 1) * this->k)
    , suffix((max_degree + 1) * this->k)
  {}

  std::size_t k;
  std::vector<double> factors;
  std::vector<double> prefix;
  std::vector<double> suffix;
};

void scale_to_unit_max(double* v, std::size_t k)
{
  double mx = *std::max_element(v, v + k);
  for (std::size_t c = 0; c < k; ++c)
    v[c] /= mx;
}

// Fills ws.factors with the rescaled incoming factors of node i:
// f_t(c) = sum_c' p_{c,c'}(s_{i l_t}) P_{l_t -> i}(c'), max entry 1.
void incoming_factors(const MeasurementGraph& graph,
                      const EdgeFactors& factors,
                      const MessageSet& messages,
                      NodeId i,
                      NodeWorkspace& ws)
{
  const std::size_t k = ws.k;
  auto nbrs = graph.neighbors(i);
  for (std::size_t t = 0; t < nbrs.size(); ++t) {
    EdgeId e = nbrs[t].edge;
    auto in = messages.row(graph.directed_from(e, nbrs[t].neighbor));
    auto F = factors.factor(e);
    double* f = ws.factors.data() + t * k;
    double mx = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double acc = 0.0;
      for (std::size_t cp = 0; cp < k; ++cp)
        acc += F[c * k + cp] * in[cp];
      f[c] = acc;
      mx = std::max(mx, acc);
    }
    if (!(mx > kNormalizerFloor))
      throw Error(ErrorCode::numerical_underflow,
                  "factor on edge " + std::to_string(e) + " vanished (measurement " +
                    std::to_string(graph.edge(e).s) + " outside the support?)");
    for (std::size_t c = 0; c < k; ++c)
      f[c] /= mx;
  }
}

} // namespace

double ProbabilityTable::max_normalization_error() const
{
  double worst = 0.0;
  for (std::size_t r = 0; r < rows_; ++r) {
    double sum = 0.0;
    for (double x : row(r)) {
      if (x < 0.0)
        worst = std::max(worst, -x);
      sum += x;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

EdgeFactors::EdgeFactors(const MeasurementGraph& graph, const ModelParams& params)
  : k_(params.k())
{
  const std::size_t kk = static_cast<std::size_t>(k_) * k_;
  const double floor = params.density_floor();
  values_.resize(graph.num_edges() * kk);
  for (EdgeId e = 0; e < graph.num_edges(); ++e) {
    double s = graph.edge(e).s;
    double* block = values_.data() + e * kk;
    for (int a = 0; a < k_; ++a)
      for (int b = a; b < k_; ++b) {
        double v = std::max(params.density(a, b).eval(s), floor);
        block[a * k_ + b] = v;
        block[b * k_ + a] = v;
      }
    if (*std::max_element(block, block + kk) <= 0.0)
      throw Error(ErrorCode::out_of_support,
                  "measurement " + std::to_string(s) + " on edge " + std::to_string(e) +
                    " has zero density under every cluster pair");
  }
}

MessageSet bp_init(const MeasurementGraph& graph, int k, std::uint64_t seed, double noise)
{
  if (k < 1)
    throw Error(ErrorCode::invalid_argument, "k must be positive");
  if (!(noise >= 0.0) || !(noise < 1.0 / k))
    throw Error(ErrorCode::invalid_argument, "initial noise must lie in [0, 1/k)");

  MessageSet messages(graph.num_directed(), k, 1.0 / k);
  if (noise == 0.0)
    return messages;

  Rng rng = make_rng(seed, stream::bp_init);
  std::uniform_real_distribution<double> u(-noise, noise);
  for (std::size_t d = 0; d < messages.rows(); ++d) {
    auto r = messages.row(d);
    double sum = 0.0;
    for (auto& x : r) {
      x = 1.0 / k + u(rng);
      sum += x;
    }
    for (auto& x : r)
      x /= sum;
  }
  return messages;
}

double bp_sweep(const MeasurementGraph& graph,
                const EdgeFactors& factors,
                const MessageSet& messages,
                MessageSet& next,
                double damping)
{
  const int k = factors.k();
  const std::size_t ku = static_cast<std::size_t>(k);
  if (messages.rows() != graph.num_directed() || messages.k() != k)
    throw Error(ErrorCode::dimension_mismatch, "message table does not match the graph");
  if (next.rows() != messages.rows() || next.k() != k)
    next = MessageSet(messages.rows(), k);

  NodeWorkspace ws(graph.max_degree(), k);
  double delta = 0.0;
  std::vector<double> update(ku);

  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    auto nbrs = graph.neighbors(i);
    const std::size_t d = nbrs.size();
    if (d == 0)
      continue;

    incoming_factors(graph, factors, messages, i, ws);

    // prefix[t] = prod_{u<t} f_u, suffix[t] = prod_{u>=t} f_u, each rescaled
    double* prefix = ws.prefix.data();
    double* suffix = ws.suffix.data();
    std::fill(prefix, prefix + ku, 1.0);
    std::fill(suffix + d * ku, suffix + (d + 1) * ku, 1.0);
    for (std::size_t t = 0; t < d; ++t) {
      const double* f = ws.factors.data() + t * ku;
      double* out = prefix + (t + 1) * ku;
      for (std::size_t c = 0; c < ku; ++c)
        out[c] = prefix[t * ku + c] * f[c];
      scale_to_unit_max(out, ku);
    }
    for (std::size_t t = d; t-- > 0;) {
      const double* f = ws.factors.data() + t * ku;
      double* out = suffix + t * ku;
      for (std::size_t c = 0; c < ku; ++c)
        out[c] = suffix[(t + 1) * ku + c] * f[c];
      scale_to_unit_max(out, ku);
    }

    for (std::size_t t = 0; t < d; ++t) {
      DirectedId outgoing = graph.directed_from(nbrs[t].edge, i);
      double sum = 0.0;
      for (std::size_t c = 0; c < ku; ++c) {
        update[c] = prefix[t * ku + c] * suffix[(t + 1) * ku + c];
        sum += update[c];
      }
      if (!(sum > kNormalizerFloor))
        throw Error(ErrorCode::numerical_underflow,
                    "message normalizer underflow on directed edge " +
                      std::to_string(outgoing));
      auto old_row = messages.row(outgoing);
      auto new_row = next.row(outgoing);
      for (std::size_t c = 0; c < ku; ++c) {
        double v = update[c] / sum;
        if (damping > 0.0)
          v = (1.0 - damping) * v + damping * old_row[c];
        new_row[c] = v;
        delta = std::max(delta, std::abs(v - old_row[c]));
      }
    }
  }
  return delta;
}

SweepResult bp_sweep(const MeasurementGraph& graph,
                     const ModelParams& params,
                     const MessageSet& messages)
{
  EdgeFactors factors(graph, params);
  MessageSet next(messages.rows(), messages.k());
  double delta = bp_sweep(graph, factors, messages, next);
  return { std::move(next), delta };
}

MarginalSet bp_marginals(const MeasurementGraph& graph,
                         const EdgeFactors& factors,
                         const MessageSet& messages)
{
  const int k = factors.k();
  const std::size_t ku = static_cast<std::size_t>(k);
  MarginalSet marginals(graph.num_nodes(), k, 1.0 / k);
  NodeWorkspace ws(graph.max_degree(), k);
  std::vector<double> acc(ku);

  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    const std::size_t d = graph.degree(i);
    if (d == 0)
      continue;
    incoming_factors(graph, factors, messages, i, ws);
    std::fill(acc.begin(), acc.end(), 1.0);
    for (std::size_t t = 0; t < d; ++t) {
      const double* f = ws.factors.data() + t * ku;
      for (std::size_t c = 0; c < ku; ++c)
        acc[c] *= f[c];
      scale_to_unit_max(acc.data(), ku);
    }
    double sum = 0.0;
    for (double x : acc)
      sum += x;
    if (!(sum > kNormalizerFloor))
      throw Error(ErrorCode::numerical_underflow,
                  "marginal normalizer underflow at node " + std::to_string(i));
    auto row = marginals.row(i);
    for (std::size_t c = 0; c < ku; ++c)
      row[c] = acc[c] / sum;
  }
  return marginals;
}

BpResult bp_run(const MeasurementGraph& graph,
                const ModelParams& params,
                std::uint64_t seed,
                const BpSettings& settings)
{
  if (settings.max_iter < 1)
    throw Error(ErrorCode::invalid_argument, "max_iter must be at least 1");
  if (!(settings.tol > 0.0))
    throw Error(ErrorCode::invalid_argument, "tol must be positive");
  if (!(settings.damping >= 0.0 && settings.damping < 1.0))
    throw Error(ErrorCode::invalid_argument, "damping must lie in [0, 1)");

  EdgeFactors factors(graph, params);
  MessageSet current = bp_init(graph, params.k(), seed, settings.noise);
  MessageSet next(current.rows(), current.k());

  BpReport report;
  for (int it = 1; it <= settings.max_iter; ++it) {
    double delta = bp_sweep(graph, factors, current, next, settings.damping);
    std::swap(current, next);
    report.iterations = it;
    report.final_delta = delta;
    if (delta < settings.tol) {
      report.converged = true;
      break;
    }
  }

  MarginalSet marginals = bp_marginals(graph, factors, current);
  return { std::move(marginals), std::move(current), report };
}

Labels decode_marginals(const MarginalSet& marginals)
{
  Labels labels(marginals.rows(), 0);
  for (std::size_t i = 0; i < marginals.rows(); ++i) {
    auto row = marginals.row(i);
    int best = 0;
    for (int c = 1; c < marginals.k(); ++c)
      if (row[c] > row[best])
        best = c;
    labels[i] = best;
  }
  return labels;
}

} // namespace pairclust
