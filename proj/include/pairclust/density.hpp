#pragma once

#include "pairclust/rng.hpp"

#include <optional>
#include <vector>

namespace pairclust {

//! Distribution of a pairwise measurement between two clusters.
//!
//! Three representations: a finite alphabet with a probability table, a
//! Gaussian, and a piecewise-constant table over bins. For the discrete and
//! binned kinds, eval() returns a probability mass; for the Gaussian it
//! returns the density value.
class MeasurementDensity
{
public:
  enum class Kind
  {
    discrete,
    gaussian,
    binned
  };

  static MeasurementDensity discrete(std::vector<double> symbols,
                                     std::vector<double> probabilities);
  static MeasurementDensity gaussian(double mean, double variance);
  //! edges has one more entry than masses and is strictly increasing.
  static MeasurementDensity binned(std::vector<double> edges,
                                   std::vector<double> masses);

  Kind kind() const noexcept { return kind_; }

  double eval(double s) const;
  double sample(Rng& rng) const;

  const std::vector<double>& symbols() const noexcept { return points_; }
  const std::vector<double>& probabilities() const noexcept { return weights_; }
  const std::vector<double>& bin_edges() const noexcept { return points_; }
  const std::vector<double>& bin_masses() const noexcept { return weights_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }

  bool operator==(const MeasurementDensity&) const = default;

private:
  MeasurementDensity() = default;

  Kind kind_ = Kind::gaussian;
  std::vector<double> points_;
  std::vector<double> weights_;
  double mean_ = 0.0;
  double variance_ = 1.0;
};

double density_eval(const MeasurementDensity& d, double s);

//! Model parameters: k clusters, average degree alpha, and p_{a,b}.
//!
//! In symmetric mode the table is generated from (p_in, p_out); otherwise a
//! full symmetric k x k table is stored.
class ModelParams
{
public:
  static ModelParams symmetric(int k,
                               double alpha,
                               MeasurementDensity p_in,
                               MeasurementDensity p_out);
  //! table is row-major k x k and must satisfy p_{a,b} == p_{b,a}.
  static ModelParams general(int k,
                             double alpha,
                             std::vector<MeasurementDensity> table);

  //! p_in(+1) = p_out(-1) = 1 - eps on the alphabet {-1, +1}.
  static ModelParams censored(int k, double alpha, double eps);
  static ModelParams gaussian(int k,
                              double alpha,
                              double mean_in,
                              double mean_out,
                              double var_in = 1.0,
                              double var_out = 1.0);

  int k() const noexcept { return k_; }
  double alpha() const noexcept { return alpha_; }
  bool is_symmetric() const noexcept { return symmetric_; }

  const MeasurementDensity& density(int a, int b) const
  {
    return table_[static_cast<std::size_t>(a) * k_ + b];
  }
  //! Only meaningful in symmetric mode.
  const MeasurementDensity& p_in() const { return density(0, 0); }
  const MeasurementDensity& p_out() const { return density(0, 1); }

  //! Floor applied to density values by consumers; 0 disables it.
  double density_floor() const noexcept { return density_floor_; }

  ModelParams with_alpha(double alpha) const;
  ModelParams with_density_floor(double floor) const;

private:
  ModelParams() = default;

  int k_ = 2;
  double alpha_ = 0.0;
  bool symmetric_ = false;
  double density_floor_ = 0.0;
  std::vector<MeasurementDensity> table_;
};

//! The floor value enabled by configuration when out-of-support atoms must
//! be tolerated.
inline constexpr double kDefaultDensityFloor = 1e-12;

} // namespace pairclust
