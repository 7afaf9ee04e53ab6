#include "pairclust/model.hpp"

#include "pairclust/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pairclust {

namespace {

constexpr double kDenominatorFloor = 1e-300;

double contrast_term(double in, double out, int k)
{
  double denom = in + (k - 1) * out;
  if (denom <= kDenominatorFloor)
    return 0.0;
  double diff = in - out;
  return diff * diff / denom;
}

double integrate_discrete(const MeasurementDensity& in, const MeasurementDensity& out, int k)
{
  std::vector<double> atoms = in.symbols();
  atoms.insert(atoms.end(), out.symbols().begin(), out.symbols().end());
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  double total = 0.0;
  for (double s : atoms)
    total += contrast_term(in.eval(s), out.eval(s), k);
  return total;
}

// Piecewise-constant densities on the union of both bin grids.
double integrate_binned(const MeasurementDensity& in, const MeasurementDensity& out, int k)
{
  const auto& ein = in.bin_edges();
  const auto& eout = out.bin_edges();
  if (ein == eout) {
    double total = 0.0;
    for (std::size_t b = 0; b < in.bin_masses().size(); ++b)
      total += contrast_term(in.bin_masses()[b], out.bin_masses()[b], k);
    return total;
  }

  std::vector<double> cuts = ein;
  cuts.insert(cuts.end(), eout.begin(), eout.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto height = [](const MeasurementDensity& d, double lo, double hi) {
    const auto& e = d.bin_edges();
    double mid = 0.5 * (lo + hi);
    if (mid < e.front() || mid > e.back())
      return 0.0;
    auto it = std::upper_bound(e.begin(), e.end(), mid);
    std::size_t b = std::min<std::size_t>(it - e.begin() - 1, d.bin_masses().size() - 1);
    return d.bin_masses()[b] / (e[b + 1] - e[b]);
  };

  double total = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    double lo = cuts[c], hi = cuts[c + 1];
    total += (hi - lo) * contrast_term(height(in, lo, hi), height(out, lo, hi), k);
  }
  return total;
}

double integrate_gaussian(const MeasurementDensity& in, const MeasurementDensity& out, int k)
{
  double sd_in = std::sqrt(in.variance());
  double sd_out = std::sqrt(out.variance());
  double lo = std::min(in.mean() - 10.0 * sd_in, out.mean() - 10.0 * sd_out);
  double hi = std::max(in.mean() + 10.0 * sd_in, out.mean() + 10.0 * sd_out);

  auto integrand = [&](double s) {
    return contrast_term(in.eval(s), out.eval(s), k);
  };
  double error = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
    integrand, lo, hi, 20, 1e-12, &error);
  if (error > 1e-8)
    throw Error(ErrorCode::solver_failure,
                "threshold quadrature did not reach absolute tolerance 1e-8 (estimate " +
                  std::to_string(error) + ")");
  return value;
}

} // namespace

std::vector<std::pair<NodeId, NodeId>> sample_pairs(std::size_t n, double rate, Rng& rng)
{
  if (!(rate >= 0.0) || rate > 1.0)
    throw Error(ErrorCode::invalid_rate,
                "pair inclusion rate must lie in [0, 1], got " + std::to_string(rate));

  std::vector<std::pair<NodeId, NodeId>> pairs;
  if (n < 2 || rate == 0.0)
    return pairs;

  if (rate == 1.0) {
    for (std::size_t j = 1; j < n; ++j)
      for (std::size_t i = 0; i < j; ++i)
        pairs.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
    return pairs;
  }

  // Batagelj-Brandes skipping over pairs ordered by (v, w), w < v
  double expected = rate * 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  pairs.reserve(static_cast<std::size_t>(expected + 4.0 * std::sqrt(expected + 1.0)));
  const double log_q = std::log1p(-rate);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto nn = static_cast<std::int64_t>(n);
  std::int64_t v = 1;
  std::int64_t w = -1;
  while (v < nn) {
    double skip = std::floor(std::log1p(-u(rng)) / log_q);
    if (skip > expected * 64.0 + 1e12)
      break;
    w += 1 + static_cast<std::int64_t>(skip);
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn)
      pairs.emplace_back(static_cast<NodeId>(w), static_cast<NodeId>(v));
  }
  return pairs;
}

PlantedInstance sample_instance(const ModelParams& params, std::size_t n, std::uint64_t seed)
{
  if (n < 1)
    throw Error(ErrorCode::invalid_argument, "instance needs at least one node");
  double rate = params.alpha() / static_cast<double>(n);
  if (rate > 1.0)
    throw Error(ErrorCode::invalid_rate,
                "alpha/n = " + std::to_string(rate) + " exceeds 1");

  Labels truth(n);
  {
    Rng rng = make_rng(seed, stream::labels);
    std::uniform_int_distribution<int> pick(0, params.k() - 1);
    for (auto& c : truth)
      c = pick(rng);
  }

  Rng pair_rng = make_rng(seed, stream::pairs);
  auto pairs = sample_pairs(n, rate, pair_rng);

  Rng meas_rng = make_rng(seed, stream::measurements);
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [i, j] : pairs)
    edges.push_back({ i, j, params.density(truth[i], truth[j]).sample(meas_rng) });

  return { MeasurementGraph(n, std::move(edges)), std::move(truth), params, seed };
}

double weight(const MeasurementDensity& p_in,
              const MeasurementDensity& p_out,
              int k,
              double s,
              double floor)
{
  double in = std::max(p_in.eval(s), floor);
  double out = std::max(p_out.eval(s), floor);
  double denom = in + (k - 1) * out;
  if (!(denom >= kDenominatorFloor))
    throw Error(ErrorCode::out_of_support,
                "measurement " + std::to_string(s) + " lies outside the support");
  return (in - out) / denom;
}

std::vector<double> edge_weights(const MeasurementGraph& graph, const ModelParams& params)
{
  if (!params.is_symmetric())
    throw Error(ErrorCode::invalid_argument,
                "edge weights need a symmetric (p_in, p_out) model");
  std::vector<double> w;
  w.reserve(graph.num_edges());
  for (const auto& e : graph.edges())
    w.push_back(weight(params.p_in(), params.p_out(), params.k(), e.s, params.density_floor()));
  return w;
}

double critical_degree(const ModelParams& params)
{
  if (!params.is_symmetric())
    throw Error(ErrorCode::invalid_argument, "critical degree needs a symmetric model");
  const auto& in = params.p_in();
  const auto& out = params.p_out();
  if (in.kind() != out.kind())
    throw Error(ErrorCode::invalid_argument,
                "critical degree: p_in and p_out must share a representation");

  double integral = 0.0;
  switch (in.kind()) {
    case MeasurementDensity::Kind::discrete:
      integral = integrate_discrete(in, out, params.k());
      break;
    case MeasurementDensity::Kind::binned:
      integral = integrate_binned(in, out, params.k());
      break;
    case MeasurementDensity::Kind::gaussian:
      integral = integrate_gaussian(in, out, params.k());
      break;
  }
  if (!(integral > 0.0))
    return std::numeric_limits<double>::infinity();
  return static_cast<double>(params.k()) / integral;
}

} // namespace pairclust
