#pragma once

#include "pairclust/cluster.hpp"
#include "pairclust/nb_operator.hpp"
#include "pairclust/sparse_eig.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace pairclust {

//! H(x): diagonal 1 + sum_l w_il^2/(x^2 - w_il^2), off-diagonal -x w_ij/(x^2 - w_ij^2).
struct BetheHessian
{
  Eigen::SparseMatrix<double> matrix;
  double x = 1.0;

  Eigen::Index size() const noexcept { return matrix.rows(); }
  //! Max absolute row sum.
  double inf_norm() const;
  LinearMap as_linear_map() const;
};

struct BetheSettings
{
  //! Clamp |w| to this value instead of failing at saturation; 0 disables.
  double weight_clamp = 0.0;
};

inline constexpr double kSaturationMargin = 1e-6;

BetheHessian build_H(const MeasurementGraph& graph,
                     std::span<const double> edge_weights,
                     double x,
                     const BetheSettings& settings = {});

BetheHessian build_H(const MeasurementGraph& graph,
                     const ModelParams& params,
                     double x,
                     const BetheSettings& settings = {});

struct NegativeSettings
{
  double tol = 1e-8;
  int max_pairs = 4;
  int max_iter = 300;
  //! Below this size the dense solver is used unless force_iterative is set.
  Eigen::Index dense_below = 500;
  bool force_iterative = false;
};

//! Eigenpairs of H with value below -1e-8 ||H||_inf, sorted increasing, at most max_pairs.
std::vector<RealEigenpair> negative_eigenpairs(const BetheHessian& H,
                                               const NegativeSettings& settings,
                                               std::uint64_t seed,
                                               EigenReport* raw = nullptr);

ClusterResult bh_cluster(const MeasurementGraph& graph,
                         const ModelParams& params,
                         const SpectralSettings& settings,
                         std::uint64_t seed,
                         const Labels* truth = nullptr);

//! Smallest |eigenvalue| of H(lambda1).
double correspondence_check(const MeasurementGraph& graph,
                            const ModelParams& params,
                            double lambda1,
                            std::uint64_t seed = 0);

double correspondence_check(const MeasurementGraph& graph,
                            std::span<const double> edge_weights,
                            double lambda1,
                            std::uint64_t seed = 0);

//! Coordinate text, one `i j value` line per stored entry, 0-based.
void write_coordinates(std::ostream& out, const BetheHessian& H);

} // namespace pairclust
