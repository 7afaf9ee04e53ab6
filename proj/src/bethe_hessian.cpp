#include "pairclust/bethe_hessian.hpp"

#include "pairclust/error.hpp"
#include "pairclust/graph_io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace pairclust {

double BetheHessian::inf_norm() const
{
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(matrix.rows());
  for (int col = 0; col < matrix.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, col); it; ++it)
      sums(it.row()) += std::abs(it.value());
  return sums.size() ? sums.maxCoeff() : 0.0;
}

LinearMap BetheHessian::as_linear_map() const
{
  const Eigen::SparseMatrix<double>* m = &matrix;
  return LinearMap(matrix.rows(),
                   [m](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) {
                     y.noalias() = (*m) * x;
                   });
}

BetheHessian build_H(const MeasurementGraph& graph,
                     std::span<const double> edge_weights,
                     double x,
                     const BetheSettings& settings)
{
  if (!(x >= 1.0) || !std::isfinite(x))
    throw Error(ErrorCode::invalid_argument, "Bethe Hessian parameter must be >= 1");
  if (edge_weights.size() != graph.num_edges())
    throw Error(ErrorCode::dimension_mismatch, "need one weight per undirected edge");

  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  const double x2 = x * x;
  std::vector<double> diag(graph.num_nodes(), 1.0);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.num_nodes() + 2 * graph.num_edges());

  const auto edges = graph.edges();
  for (EdgeId e = 0; e < edges.size(); ++e) {
    double w = edge_weights[e];
    if (settings.weight_clamp > 0.0)
      w = std::clamp(w, -settings.weight_clamp, settings.weight_clamp);
    if (!(std::abs(w) < x - kSaturationMargin))
      throw Error(ErrorCode::weight_saturation,
                  "edge " + std::to_string(e) + " (" + std::to_string(edges[e].i) + "," +
                    std::to_string(edges[e].j) + ") has weight " + format_double(w) +
                    " too close to x = " + format_double(x));
    double denom = x2 - w * w;
    diag[edges[e].i] += w * w / denom;
    diag[edges[e].j] += w * w / denom;
    double off = -x * w / denom;
    triplets.emplace_back(edges[e].i, edges[e].j, off);
    triplets.emplace_back(edges[e].j, edges[e].i, off);
  }
  for (Eigen::Index i = 0; i < n; ++i)
    triplets.emplace_back(i, i, diag[static_cast<std::size_t>(i)]);

  BetheHessian H;
  H.x = x;
  H.matrix.resize(n, n);
  H.matrix.setFromTriplets(triplets.begin(), triplets.end());
  H.matrix.makeCompressed();
  return H;
}

BetheHessian build_H(const MeasurementGraph& graph,
                     const ModelParams& params,
                     double x,
                     const BetheSettings& settings)
{
  return build_H(graph, edge_weights(graph, params), x, settings);
}

std::vector<RealEigenpair> negative_eigenpairs(const BetheHessian& H,
                                               const NegativeSettings& settings,
                                               std::uint64_t seed,
                                               EigenReport* raw)
{
  if (settings.max_pairs < 1)
    throw Error(ErrorCode::invalid_argument, "max_pairs must be >= 1");
  std::vector<RealEigenpair> out;
  const Eigen::Index n = H.size();
  if (n == 0) {
    if (raw)
      *raw = EigenReport{ {}, 0, 0, true };
    return out;
  }
  const double cutoff = -1e-8 * H.inf_norm();

  EigenReport report;
  if (n < settings.dense_below && !settings.force_iterative) {
    report = dense_eig_oracle(Eigen::MatrixXd(H.matrix), true);
  } else {
    int want = std::min<int>(settings.max_pairs, static_cast<int>(n));
    report = lanczos_symmetric_extremal(
      H.as_linear_map(), Side::smallest, want, settings.tol, settings.max_iter, seed);
  }

  // Pairs come in increasing order; a converged non-negative one ends the search,
  // an unconverged one before that leaves the count unknown.
  for (const auto& pair : report.pairs) {
    double value = pair.value.real();
    if (!pair.converged)
      throw Error(ErrorCode::solver_failure,
                  "Lanczos did not converge on the Bethe Hessian after " +
                    std::to_string(report.iterations) + " restarts");
    if (!(value < cutoff))
      break;
    Eigen::VectorXd v = pair.real_vector();
    normalize_gauge(v);
    out.push_back({ value, std::move(v), pair.residual });
  }
  std::stable_sort(out.begin(), out.end(), [](const RealEigenpair& a, const RealEigenpair& b) {
    return a.value < b.value;
  });
  if (out.size() > static_cast<std::size_t>(settings.max_pairs))
    out.resize(static_cast<std::size_t>(settings.max_pairs));
  if (raw)
    *raw = std::move(report);
  return out;
}

ClusterResult bh_cluster(const MeasurementGraph& graph,
                         const ModelParams& params,
                         const SpectralSettings& settings,
                         std::uint64_t seed,
                         const Labels* truth)
{
  BetheHessian H = build_H(graph, params, 1.0, BetheSettings{ settings.weight_clamp });
  NegativeSettings neg;
  neg.tol = settings.tol;
  neg.max_iter = settings.max_iter;
  neg.max_pairs = settings.max_pairs > 0 ? settings.max_pairs : params.k() + 2;
  EigenReport raw;
  auto pairs = negative_eigenpairs(H, neg, seed, &raw);
  if (pairs.empty())
    throw Error(ErrorCode::no_informative_eigenvalue, "Bethe Hessian H(1) has no negative eigenvalue");

  Eigen::MatrixXd embedding(H.size(), static_cast<Eigen::Index>(pairs.size()));
  std::vector<double> values;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    embedding.col(static_cast<Eigen::Index>(j)) = pairs[j].vector;
    values.push_back(pairs[j].value);
  }

  ClusterResult result;
  result.method = Method::bh;
  int k = std::min<int>(params.k(), static_cast<int>(graph.num_nodes()));
  result.labels = cluster_embedding(embedding, k, settings.kmeans, seed);
  if (truth)
    result.overlap = overlap(result.labels, *truth, params.k());
  result.diagnostics = SpectralReport{ values, raw.iterations, raw.converged };
  return result;
}

double correspondence_check(const MeasurementGraph& graph,
                            std::span<const double> edge_weights,
                            double lambda1,
                            std::uint64_t seed)
{
  if (!(lambda1 >= 1.0 + 1e-6))
    throw Error(ErrorCode::invalid_argument, "correspondence check needs lambda >= 1 + 1e-6");
  BetheHessian H = build_H(graph, edge_weights, lambda1);
  if (H.size() == 0)
    return 0.0;
  if (H.size() <= kDenseOracleLimit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(H.matrix),
                                                          Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().minCoeff();
  }
  // Large case: the eigenvalue nearest zero is the smallest one when H(lambda1) is
  // positive semidefinite up to the crossing, which holds for lambda1 the leading value.
  auto report = lanczos_symmetric_extremal(H.as_linear_map(), Side::smallest, 1, 1e-10, 500, seed);
  if (report.pairs.empty())
    throw Error(ErrorCode::solver_failure, "Lanczos returned no pair for H(lambda)");
  return std::abs(report.pairs.front().value.real());
}

double correspondence_check(const MeasurementGraph& graph,
                            const ModelParams& params,
                            double lambda1,
                            std::uint64_t seed)
{
  return correspondence_check(graph, edge_weights(graph, params), lambda1, seed);
}

void write_coordinates(std::ostream& out, const BetheHessian& H)
{
  for (int col = 0; col < H.matrix.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(H.matrix, col); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

} // namespace pairclust
