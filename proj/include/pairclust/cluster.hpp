#pragma once

#include "pairclust/bp.hpp"
#include "pairclust/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace pairclust {

enum class Method
{
  bp,
  nb,
  bh
};

std::string_view to_string(Method method);
//! Parses "bp", "nb" or "bh"; throws configuration otherwise.
Method parse_method(std::string_view text);

struct SpectralReport
{
  //! Retained eigenvalues (decreasing for nb, increasing for bh).
  std::vector<double> eigenvalues;
  int iterations = 0;
  bool solver_converged = true;
};

struct ClusterResult
{
  Labels labels;
  std::optional<double> overlap; // absent when no truth was supplied
  Method method = Method::bp;
  std::variant<BpReport, SpectralReport> diagnostics;
};

struct KmeansSettings
{
  int restarts = 10;
  int max_iter = 100;
  //! Scale every embedding row to unit length before clustering.
  bool normalize_rows = false;
};

struct KmeansResult
{
  Labels labels;
  double inertia = 0.0;
  //! Inertia after each assignment step of the winning restart.
  std::vector<double> trace;
};

//! Best-inertia k-means over `restarts` k-means++ seeded runs. Rows of
//! `points` are the items. Empty clusters are reseeded from the point
//! farthest from its centroid.
KmeansResult kmeans_run(const Eigen::MatrixXd& points,
                        int k,
                        const KmeansSettings& settings,
                        std::uint64_t seed);

Labels kmeans(const Eigen::MatrixXd& points,
              int k,
              int restarts,
              int max_iter,
              std::uint64_t seed);

//! Permutation-maximized agreement rescaled so chance is 0 and perfect is 1.
//! Throws enumeration_bound for k > 10.
double overlap(std::span<const int> predicted, std::span<const int> truth, int k);

//! Fraction of agreeing labels under the best permutation.
double best_permutation_accuracy(std::span<const int> predicted,
                                 std::span<const int> truth,
                                 int k);

//! Label 0 where the entry is >= 0, label 1 otherwise (two clusters).
Labels sign_decode(const Eigen::Ref<const Eigen::VectorXd>& column);

//! Row-wise k-means of an n x r embedding, honoring normalize_rows.
Labels cluster_embedding(const Eigen::MatrixXd& embedding,
                         int k,
                         const KmeansSettings& settings,
                         std::uint64_t seed);

} // namespace pairclust
