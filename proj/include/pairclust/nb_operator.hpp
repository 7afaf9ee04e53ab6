#pragma once

#include "pairclust/cluster.hpp"
#include "pairclust/sparse_eig.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace pairclust {

//! Weighted non-backtracking operator on directed edges:
//!   (B x)_{a->b} = sum_{c->a, c != b} w(s_ca) x_{c->a}.
//! Applied implicitly in O(m) per product via
//!   (B x)_{a->b} = S_a - w(s_ab) x_{b->a},  S_a = sum_{c->a} w(s_ca) x_{c->a}.
//! Holds a pointer to the graph, which must outlive the operator.
class NbOperator
{
public:
  NbOperator(const MeasurementGraph& graph, std::vector<double> edge_weights);

  const MeasurementGraph& graph() const noexcept { return *graph_; }
  Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(graph_->num_directed()); }
  //! Weight shared by both orientations of the undirected edge under d.
  double weight(DirectedId d) const { return weights_[d / 2]; }
  std::span<const double> edge_weights() const noexcept { return weights_; }

  void apply(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Ref<Eigen::VectorXd> y) const;
  LinearMap as_linear_map() const;
  //! Explicit 2m x 2m matrix, for small-instance checks.
  Eigen::MatrixXd dense() const;

private:
  const MeasurementGraph* graph_;
  std::vector<double> weights_;
  mutable Eigen::VectorXd node_sums_;
};

Eigen::VectorXd nb_matvec(const NbOperator& op, const Eigen::Ref<const Eigen::VectorXd>& x);

//! (C y)_i = sum_{j->i} w(s_ji) y_{j->i}: edge space to node space.
Eigen::VectorXd c_matvec(const MeasurementGraph& graph,
                         std::span<const double> edge_weights,
                         const Eigen::Ref<const Eigen::VectorXd>& y);

struct RealEigenpair
{
  double value;
  Eigen::VectorXd vector; // unit norm, first significant entry positive
  double residual;
};

struct NbSpectrumSettings
{
  double radius_floor = 1.0;
  int max_pairs = 4;
  double tol = 1e-8;
  int max_iter = 300;
  //! How many largest-modulus eigenvalues the Krylov solver resolves; real
  //! ones above the floor are kept from among these. 0 means max_pairs.
  int search_width = 0;
};

//! Converged real eigenpairs with |lambda| > radius_floor among the leading
//! eigenvalues of B, sorted by decreasing value, at most max_pairs.
std::vector<RealEigenpair> nb_leading_spectrum(const NbOperator& op,
                                               const NbSpectrumSettings& settings,
                                               std::uint64_t seed,
                                               EigenReport* raw = nullptr);

struct SpectralEmbedding
{
  Eigen::MatrixXd matrix; // n x r
  std::vector<double> eigenvalues;
};

//! Column j is C v_j. Throws no_informative_eigenvalue on an empty spectrum.
SpectralEmbedding nb_embedding(const MeasurementGraph& graph,
                               std::span<const double> edge_weights,
                               const std::vector<RealEigenpair>& spectrum);

struct SpectralSettings
{
  KmeansSettings kmeans;
  //! 0 means k + 2.
  int max_pairs = 0;
  double tol = 1e-8;
  int max_iter = 300;
  //! Bethe Hessian only: clamp |w| to this value; 0 disables.
  double weight_clamp = 0.0;
};

//! Weights, spectrum, embedding, then row-wise k-means. `truth` is optional.
ClusterResult nb_cluster(const MeasurementGraph& graph,
                         const ModelParams& params,
                         const SpectralSettings& settings,
                         std::uint64_t seed,
                         const Labels* truth = nullptr);

//! Unit norm, first entry above 1e-8 of the max magnitude made positive.
void normalize_gauge(Eigen::Ref<Eigen::VectorXd> v);

} // namespace pairclust
