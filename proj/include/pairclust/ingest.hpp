#pragma once

#include "pairclust/bp.hpp"
#include "pairclust/cluster.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace pairclust {

inline constexpr int kUnlabeled = -1;

//! Point cloud with labels on the training subset only (kUnlabeled elsewhere).
struct PointDataset
{
  Eigen::MatrixXd points; // n x d
  Labels labels;
  std::vector<std::size_t> training_ids;

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
  //! Throws invalid_argument on inconsistent labels or ids.
  void validate(int k) const;
};

//! Fully labeled point cloud, for fixtures and evaluation.
struct LabeledPoints
{
  Eigen::MatrixXd points;
  Labels truth;
};

struct PointCsvOptions
{
  bool header = false;
  bool label_column = true;
};

PointDataset read_points_csv(std::istream& in, const PointCsvOptions& options = {});
void write_points_csv(std::ostream& out, const PointDataset& data, bool header = false);

enum class Metric
{
  euclidean
};

MeasurementGraph build_graph_from_points(const PointDataset& data,
                                         double alpha,
                                         std::uint64_t seed,
                                         Metric metric = Metric::euclidean);

class GaussianKde
{
public:
  //! bandwidth <= 0 selects 1.06 sigma m^(-1/5); `fallback` is used when that is 0.
  GaussianKde(std::vector<double> samples, double bandwidth, double fallback = 1.0);

  double bandwidth() const noexcept { return h_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double pdf(double s) const;
  //! Kernel mass in each bin [edges[t], edges[t+1]).
  std::vector<double> bin_masses(const std::vector<double>& edges) const;

private:
  std::vector<double> samples_;
  double h_;
};

struct KdeSettings
{
  double bandwidth = 0.0; // 0 means automatic
  int bins = 256;
  bool all_labeled_pairs = true;
  bool pooled_fallback = false;
};

inline constexpr double kBinMassFloor = 1e-12;

//! Row-major k x k table of binned densities, symmetric by construction.
std::vector<MeasurementDensity> kde_estimate(const MeasurementGraph& graph,
                                             const PointDataset& data,
                                             int k,
                                             const KdeSettings& settings = {});

struct PointsReport
{
  ClusterResult result;
  //! Fraction correct on non-training points, when truth was supplied.
  std::optional<double> accuracy;
  std::size_t num_edges = 0;
};

//! Graph, KDE table, BP with the general table, decode, then relabel so the
//! training points agree with their given labels as far as possible.
PointsReport cluster_points(const PointDataset& data,
                            double alpha,
                            int k,
                            const KdeSettings& kde,
                            const BpSettings& bp,
                            std::uint64_t seed,
                            const Labels* truth = nullptr);

//! Two-dimensional isotropic blobs with centers `separation` apart along a circle.
LabeledPoints make_blobs(std::size_t n, int k, double separation, double spread, std::uint64_t seed);
//! Concentric rings of radii 1..k with radial noise.
LabeledPoints make_rings(std::size_t n, int k, double noise, std::uint64_t seed);

//! Keeps labels on round(fraction * n) random points (at least one).
PointDataset with_training_subset(const LabeledPoints& points, double fraction, std::uint64_t seed);

} // namespace pairclust
