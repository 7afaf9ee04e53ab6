#include "pairclust/density.hpp"

#include "pairclust/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace pairclust {

namespace {

constexpr double kSumTolerance = 1e-9;

void check_probabilities(const std::vector<double>& p, const char* what)
{
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw Error(ErrorCode::invalid_argument,
                  std::string(what) + ": negative or non-finite entry");
    total += x;
  }
  if (std::abs(total - 1.0) > kSumTolerance)
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + ": entries do not sum to 1");
}

std::size_t pick_index(const std::vector<double>& weights, Rng& rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (r < acc)
      return i;
  }
  // r fell in the rounding slack; take the last positive entry
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0)
      return i;
  return 0;
}

} // namespace

MeasurementDensity MeasurementDensity::discrete(std::vector<double> symbols,
                                                std::vector<double> probabilities)
{
  if (symbols.empty() || symbols.size() != probabilities.size())
    throw Error(ErrorCode::invalid_argument,
                "discrete density: symbol and probability lists differ in size");
  check_probabilities(probabilities, "discrete density");
  auto sorted = symbols;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorCode::invalid_argument, "discrete density: repeated symbol");

  MeasurementDensity d;
  d.kind_ = Kind::discrete;
  d.points_ = std::move(symbols);
  d.weights_ = std::move(probabilities);
  return d;
}

MeasurementDensity MeasurementDensity::gaussian(double mean, double variance)
{
  if (!std::isfinite(mean) || !(variance > 0.0) || !std::isfinite(variance))
    throw Error(ErrorCode::invalid_argument,
                "gaussian density: variance must be positive and finite");
  MeasurementDensity d;
  d.kind_ = Kind::gaussian;
  d.mean_ = mean;
  d.variance_ = variance;
  return d;
}

MeasurementDensity MeasurementDensity::binned(std::vector<double> edges,
                                              std::vector<double> masses)
{
  if (masses.empty() || edges.size() != masses.size() + 1)
    throw Error(ErrorCode::invalid_argument,
                "binned density: need one more edge than masses");
  for (std::size_t b = 0; b + 1 < edges.size(); ++b)
    if (!(edges[b] < edges[b + 1]))
      throw Error(ErrorCode::invalid_argument,
                  "binned density: edges must be strictly increasing");
  check_probabilities(masses, "binned density");

  MeasurementDensity d;
  d.kind_ = Kind::binned;
  d.points_ = std::move(edges);
  d.weights_ = std::move(masses);
  return d;
}

double MeasurementDensity::eval(double s) const
{
  switch (kind_) {
    case Kind::discrete:
      for (std::size_t i = 0; i < points_.size(); ++i)
        if (points_[i] == s)
          return weights_[i];
      return 0.0;
    case Kind::gaussian: {
      double z = (s - mean_);
      return std::exp(-0.5 * z * z / variance_) /
             std::sqrt(2.0 * std::numbers::pi * variance_);
    }
    case Kind::binned: {
      if (!(s >= points_.front()) || !(s <= points_.back()))
        return 0.0;
      auto it = std::upper_bound(points_.begin(), points_.end(), s);
      std::size_t b = static_cast<std::size_t>(it - points_.begin());
      // right end of the last bin is closed
      b = std::min(b == 0 ? 0 : b - 1, weights_.size() - 1);
      return weights_[b];
    }
  }
  return 0.0;
}

double MeasurementDensity::sample(Rng& rng) const
{
  switch (kind_) {
    case Kind::discrete:
      return points_[pick_index(weights_, rng)];
    case Kind::gaussian: {
      std::normal_distribution<double> g(mean_, std::sqrt(variance_));
      return g(rng);
    }
    case Kind::binned: {
      std::size_t b = pick_index(weights_, rng);
      std::uniform_real_distribution<double> u(points_[b], points_[b + 1]);
      return u(rng);
    }
  }
  return 0.0;
}

double density_eval(const MeasurementDensity& d, double s)
{
  return d.eval(s);
}

ModelParams ModelParams::symmetric(int k,
                                   double alpha,
                                   MeasurementDensity p_in,
                                   MeasurementDensity p_out)
{
  if (k < 2)
    throw Error(ErrorCode::invalid_argument, "k must be at least 2");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::invalid_argument, "alpha must be finite and >= 0");
  if (p_in == p_out)
    throw Error(ErrorCode::invalid_argument,
                "symmetric model with p_in == p_out carries no information");

  ModelParams p;
  p.k_ = k;
  p.alpha_ = alpha;
  p.symmetric_ = true;
  p.table_.reserve(static_cast<std::size_t>(k) * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      p.table_.push_back(a == b ? p_in : p_out);
  return p;
}

ModelParams ModelParams::general(int k,
                                 double alpha,
                                 std::vector<MeasurementDensity> table)
{
  if (k < 2)
    throw Error(ErrorCode::invalid_argument, "k must be at least 2");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::invalid_argument, "alpha must be finite and >= 0");
  if (table.size() != static_cast<std::size_t>(k) * k)
    throw Error(ErrorCode::invalid_argument, "density table must be k x k");
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b)
      if (!(table[a * k + b] == table[b * k + a]))
        throw Error(ErrorCode::invalid_argument, "density table is not symmetric");

  ModelParams p;
  p.k_ = k;
  p.alpha_ = alpha;
  p.symmetric_ = false;
  p.table_ = std::move(table);
  return p;
}

ModelParams ModelParams::censored(int k, double alpha, double eps)
{
  if (!(eps >= 0.0 && eps <= 1.0))
    throw Error(ErrorCode::invalid_argument, "censored model: eps must be in [0,1]");
  return symmetric(k,
                   alpha,
                   MeasurementDensity::discrete({ 1.0, -1.0 }, { 1.0 - eps, eps }),
                   MeasurementDensity::discrete({ 1.0, -1.0 }, { eps, 1.0 - eps }));
}

ModelParams ModelParams::gaussian(int k,
                                  double alpha,
                                  double mean_in,
                                  double mean_out,
                                  double var_in,
                                  double var_out)
{
  return symmetric(k,
                   alpha,
                   MeasurementDensity::gaussian(mean_in, var_in),
                   MeasurementDensity::gaussian(mean_out, var_out));
}

ModelParams ModelParams::with_alpha(double alpha) const
{
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::invalid_argument, "alpha must be finite and >= 0");
  ModelParams p = *this;
  p.alpha_ = alpha;
  return p;
}

ModelParams ModelParams::with_density_floor(double floor) const
{
  if (!(floor >= 0.0))
    throw Error(ErrorCode::invalid_argument, "density floor must be >= 0");
  ModelParams p = *this;
  p.density_floor_ = floor;
  return p;
}

} // namespace pairclust
