#include "pairclust/nb_operator.hpp"

#include "pairclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pairclust {

NbOperator::NbOperator(const MeasurementGraph& graph, std::vector<double> edge_weights)
  : graph_(&graph)
  , weights_(std::move(edge_weights))
  , node_sums_(static_cast<Eigen::Index>(graph.num_nodes()))
{
  if (weights_.size() != graph.num_edges())
    throw Error(ErrorCode::dimension_mismatch, "need one weight per undirected edge");
}

void NbOperator::apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const
{
  if (x.size() != dimension() || y.size() != dimension())
    throw Error(ErrorCode::dimension_mismatch,
                "non-backtracking operator of dimension " + std::to_string(dimension()) +
                  " applied to vector of size " + std::to_string(x.size()));
  const auto edges = graph_->edges();
  node_sums_.setZero();
  for (EdgeId e = 0; e < edges.size(); ++e) {
    double w = weights_[e];
    node_sums_(edges[e].j) += w * x(2 * e);     // i -> j arrives at j
    node_sums_(edges[e].i) += w * x(2 * e + 1); // j -> i arrives at i
  }
  for (EdgeId e = 0; e < edges.size(); ++e) {
    double w = weights_[e];
    // (B x)_{i->j} = S_i - w x_{j->i}
    y(2 * e) = node_sums_(edges[e].i) - w * x(2 * e + 1);
    y(2 * e + 1) = node_sums_(edges[e].j) - w * x(2 * e);
  }
}

LinearMap NbOperator::as_linear_map() const
{
  return LinearMap(dimension(),
                   [this](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) {
                     apply(x, y);
                   });
}

Eigen::MatrixXd NbOperator::dense() const
{
  const Eigen::Index dim = dimension();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(dim, dim);
  for (DirectedId out = 0; out < static_cast<DirectedId>(dim); ++out) {
    NodeId a = graph_->source(out);
    NodeId b = graph_->target(out);
    for (const auto& inc : graph_->neighbors(a)) {
      if (inc.neighbor == b)
        continue;
      DirectedId in = graph_->directed_from(inc.edge, inc.neighbor); // c -> a
      B(out, in) = weights_[inc.edge];
    }
  }
  return B;
}

Eigen::VectorXd nb_matvec(const NbOperator& op, const Eigen::Ref<const Eigen::VectorXd>& x)
{
  Eigen::VectorXd y(op.dimension());
  op.apply(x, y);
  return y;
}

Eigen::VectorXd c_matvec(const MeasurementGraph& graph,
                         std::span<const double> edge_weights,
                         const Eigen::Ref<const Eigen::VectorXd>& y)
{
  if (y.size() != static_cast<Eigen::Index>(graph.num_directed()))
    throw Error(ErrorCode::dimension_mismatch, "edge-space vector has the wrong length");
  if (edge_weights.size() != graph.num_edges())
    throw Error(ErrorCode::dimension_mismatch, "need one weight per undirected edge");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(graph.num_nodes()));
  const auto edges = graph.edges();
  for (EdgeId e = 0; e < edges.size(); ++e) {
    x(edges[e].j) += edge_weights[e] * y(2 * e);
    x(edges[e].i) += edge_weights[e] * y(2 * e + 1);
  }
  return x;
}

void normalize_gauge(Eigen::Ref<Eigen::VectorXd> v)
{
  double norm = v.norm();
  if (norm == 0.0)
    return;
  v /= norm;
  double cutoff = 1e-8 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > cutoff) {
      if (v(i) < 0.0)
        v = -v;
      return;
    }
  }
}

std::vector<RealEigenpair> nb_leading_spectrum(const NbOperator& op,
                                               const NbSpectrumSettings& settings,
                                               std::uint64_t seed,
                                               EigenReport* raw)
{
  if (!(settings.radius_floor >= 0.0))
    throw Error(ErrorCode::invalid_argument, "radius floor must be >= 0");
  if (settings.max_pairs < 1)
    throw Error(ErrorCode::invalid_argument, "max_pairs must be >= 1");

  std::vector<RealEigenpair> out;
  if (op.dimension() == 0) {
    if (raw)
      *raw = EigenReport{ {}, 0, 0, true };
    return out;
  }

  int width = settings.search_width > 0 ? settings.search_width : settings.max_pairs;
  EigenReport report =
    krylov_nonsymmetric(op.as_linear_map(), width, settings.tol, settings.max_iter, seed);

  for (const auto& pair : report.pairs) {
    if (!pair.converged || !pair.is_real(1e-6))
      continue;
    double value = pair.value.real();
    if (!(std::abs(value) > settings.radius_floor))
      continue;
    Eigen::VectorXd v = pair.vector.size() ? pair.real_vector() : Eigen::VectorXd();
    normalize_gauge(v);
    out.push_back({ value, std::move(v), pair.residual });
  }
  std::stable_sort(out.begin(), out.end(), [](const RealEigenpair& a, const RealEigenpair& b) {
    return a.value > b.value;
  });
  if (out.size() > static_cast<std::size_t>(settings.max_pairs))
    out.resize(static_cast<std::size_t>(settings.max_pairs));
  if (raw)
    *raw = std::move(report);
  return out;
}

SpectralEmbedding nb_embedding(const MeasurementGraph& graph,
                               std::span<const double> edge_weights,
                               const std::vector<RealEigenpair>& spectrum)
{
  if (spectrum.empty())
    throw Error(ErrorCode::no_informative_eigenvalue,
                "no real eigenvalue of the non-backtracking operator above the floor");
  SpectralEmbedding emb;
  emb.matrix.resize(static_cast<Eigen::Index>(graph.num_nodes()),
                    static_cast<Eigen::Index>(spectrum.size()));
  for (std::size_t j = 0; j < spectrum.size(); ++j) {
    emb.matrix.col(static_cast<Eigen::Index>(j)) = c_matvec(graph, edge_weights, spectrum[j].vector);
    emb.eigenvalues.push_back(spectrum[j].value);
  }
  return emb;
}

ClusterResult nb_cluster(const MeasurementGraph& graph,
                         const ModelParams& params,
                         const SpectralSettings& settings,
                         std::uint64_t seed,
                         const Labels* truth)
{
  std::vector<double> weights = edge_weights(graph, params);
  NbOperator op(graph, weights);

  NbSpectrumSettings spec;
  spec.max_pairs = settings.max_pairs > 0 ? settings.max_pairs : params.k() + 2;
  spec.tol = settings.tol;
  spec.max_iter = settings.max_iter;
  EigenReport raw;
  auto spectrum = nb_leading_spectrum(op, spec, seed, &raw);
  SpectralEmbedding emb = nb_embedding(graph, weights, spectrum);

  ClusterResult result;
  result.method = Method::nb;
  int k = std::min<int>(params.k(), static_cast<int>(graph.num_nodes()));
  result.labels = cluster_embedding(emb.matrix, k, settings.kmeans, seed);
  if (truth)
    result.overlap = overlap(result.labels, *truth, params.k());
  result.diagnostics = SpectralReport{ emb.eigenvalues, raw.iterations, raw.converged };
  return result;
}

} // namespace pairclust
