#include "pairclust/error.hpp"
#include "pairclust/ingest.hpp"

#include <doctest.h>

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

using namespace pairclust;

namespace {

double phi(double x, double h)
{
  return std::exp(-x * x / (2.0 * h * h)) / (h * std::sqrt(2.0 * std::numbers::pi));
}

std::optional<ErrorCode> code_of(auto&& f)
{
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

PointDataset two_by_two()
{
  // two labeled points per class on a line, one unlabeled point
  PointDataset d;
  d.points.resize(5, 1);
  d.points << 0.0, 1.0, 10.0, 12.0, 5.0;
  d.labels = { 0, 0, 1, 1, kUnlabeled };
  d.training_ids = { 0, 1, 2, 3 };
  return d;
}

} // namespace

TEST_CASE("graph from points uses Euclidean distances")
{
  PointDataset d;
  d.points.resize(2, 2);
  d.points << 0.0, 0.0, 3.0, 4.0;
  d.labels = { kUnlabeled, kUnlabeled };
  // alpha = n forces the single pair to be sampled
  auto g = build_graph_from_points(d, 2.0, 1);
  REQUIRE(g.num_edges() == 1);
  CHECK(g.edge(0).s == doctest::Approx(5.0).epsilon(1e-15));

  CHECK(build_graph_from_points(d, 0.0, 1).num_edges() == 0);
  CHECK(code_of([&] { build_graph_from_points(d, 3.0, 1); }) == ErrorCode::invalid_rate);
}

TEST_CASE("edge count of the point graph is binomial")
{
  auto pts = make_blobs(20000, 2, 4.0, 1.0, 3);
  PointDataset d{ pts.points, Labels(20000, kUnlabeled), {} };
  auto g = build_graph_from_points(d, 10.0, 9);
  double pairs = 20000.0 * 19999.0 / 2.0;
  double p = 10.0 / 20000.0;
  double mean = pairs * p, sd = std::sqrt(pairs * p * (1.0 - p));
  CHECK(std::abs(static_cast<double>(g.num_edges()) - mean) < 3.0 * sd);
  for (EdgeId e = 0; e < 50; ++e) {
    auto [i, j, s] = g.edge(e);
    CHECK(s == doctest::Approx((pts.points.row(i) - pts.points.row(j)).norm()).epsilon(1e-14));
  }
}

TEST_CASE("kernel density by hand")
{
  GaussianKde kde({ 1.0, 2.0, 3.0 }, 0.5);
  CHECK(kde.bandwidth() == 0.5);
  double hand = (phi(1.0, 0.5) + phi(0.0, 0.5) + phi(-1.0, 0.5)) / 3.0;
  CHECK(kde.pdf(2.0) == doctest::Approx(hand).epsilon(1e-14));

  GaussianKde dup({ 1.0, 1.0, 2.0 }, 0.3);
  for (double s : { -1.0, 0.5, 1.0, 1.7, 4.0 })
    CHECK(dup.pdf(s) == doctest::Approx((2.0 * phi(s - 1.0, 0.3) + phi(s - 2.0, 0.3)) / 3.0).epsilon(1e-14));
}

TEST_CASE("single-sample bins form one discretized bump")
{
  const double s0 = 3.0, h = 0.4;
  GaussianKde kde({ s0 }, h);
  std::vector<double> edges;
  for (int i = 0; i <= 200; ++i)
    edges.push_back(i * 0.05);
  auto mass = kde.bin_masses(edges);
  boost::math::normal_distribution<double> nd(s0, h);
  double total = 0.0;
  for (std::size_t b = 0; b < mass.size(); ++b) {
    double expect = boost::math::cdf(nd, edges[b + 1]) - boost::math::cdf(nd, edges[b]);
    CHECK(mass[b] == doctest::Approx(expect).epsilon(1e-9));
    total += mass[b];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("automatic bandwidth follows the normal reference rule")
{
  std::vector<double> xs{ 1.0, 2.0, 4.0, 7.0 };
  double mean = 3.5, var = 0.0;
  for (double x : xs)
    var += (x - mean) * (x - mean);
  var /= 3.0;
  GaussianKde kde(xs, 0.0);
  CHECK(kde.bandwidth() == doctest::Approx(1.06 * std::sqrt(var) * std::pow(4.0, -0.2)));
  GaussianKde flat({ 2.0, 2.0 }, 0.0, 0.25);
  CHECK(flat.bandwidth() == 0.25);
}

TEST_CASE("kde_estimate gives symmetric valid tables")
{
  auto d = two_by_two();
  KdeSettings s;
  s.bins = 64;
  s.bandwidth = 0.5;
  MeasurementGraph g(5, {});
  auto table = kde_estimate(g, d, 2, s);
  REQUIRE(table.size() == 4);
  CHECK(table[1] == table[2]);
  for (const auto& cell : table) {
    CHECK(cell.kind() == MeasurementDensity::Kind::binned);
    double total = 0.0;
    for (double m : cell.bin_masses()) {
      CHECK(m >= 0.0);
      total += m;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cell.bin_edges().size() == 65);
    CHECK(cell.bin_edges().front() == 0.0);
    CHECK(cell.bin_edges().back() == doctest::Approx(12.0 * 1.05));
  }
  // class 0 has a single within-class distance of 1: its cell is one bump there
  const auto& c00 = table[0];
  auto edges = c00.bin_edges();
  GaussianKde bump({ 1.0 }, 0.5);
  auto expect = bump.bin_masses(edges);
  double z = 0.0;
  for (double& m : expect)
    z += (m = std::max(m, kBinMassFloor));
  for (std::size_t b = 0; b < expect.size(); ++b)
    CHECK(c00.bin_masses()[b] == doctest::Approx(expect[b] / z).epsilon(1e-9));
}

TEST_CASE("missing class pairs")
{
  auto d = two_by_two();
  d.labels = { 0, 0, kUnlabeled, kUnlabeled, kUnlabeled };
  d.training_ids = { 0, 1 };
  MeasurementGraph g(5, {});
  CHECK(code_of([&] { kde_estimate(g, d, 2); }) == ErrorCode::insufficient_training_data);
  KdeSettings s;
  s.pooled_fallback = true;
  auto table = kde_estimate(g, d, 2, s);
  CHECK(table[1] == table[3]);

  // edge-only mode sees nothing on an edgeless graph
  KdeSettings edges_only;
  edges_only.all_labeled_pairs = false;
  CHECK(code_of([&] { kde_estimate(g, two_by_two(), 2, edges_only); }) ==
        ErrorCode::insufficient_training_data);
}

TEST_CASE("blob pipeline")
{
  auto blobs = make_blobs(2000, 2, 20.0, 1.0, 4);
  auto data = with_training_subset(blobs, 0.02, 5);
  CHECK(data.training_ids.size() == 40);
  auto rep = cluster_points(data, 10.0, 2, {}, {}, 6, &blobs.truth);
  REQUIRE(rep.result.overlap);
  REQUIRE(rep.accuracy);
  CHECK(*rep.result.overlap > 0.9);
  CHECK(*rep.accuracy > 0.9);
  CHECK(rep.result.labels.size() == 2000);

  auto again = cluster_points(data, 10.0, 2, {}, {}, 6, &blobs.truth);
  CHECK(again.result.labels == rep.result.labels);

  auto sparse = cluster_points(data, 0.5, 2, {}, {}, 6, &blobs.truth);
  CHECK(std::abs(*sparse.result.overlap) < 0.2);
}

TEST_CASE("one-class training set")
{
  auto blobs = make_blobs(500, 2, 20.0, 1.0, 4);
  auto data = with_training_subset(blobs, 0.1, 5);
  for (std::size_t i : data.training_ids)
    if (data.labels[i] == 1)
      data.labels[i] = kUnlabeled;
  data.training_ids.erase(std::remove_if(data.training_ids.begin(), data.training_ids.end(),
                                         [&](std::size_t i) { return data.labels[i] == kUnlabeled; }),
                          data.training_ids.end());
  CHECK(code_of([&] { cluster_points(data, 10.0, 2, {}, {}, 1); }) ==
        ErrorCode::insufficient_training_data);
}

TEST_CASE("ring fixture")
{
  auto rings = make_rings(600, 3, 0.05, 2);
  CHECK(rings.points.rows() == 600);
  CHECK(rings.points.cols() == 2);
  for (int c = 0; c < 3; ++c)
    CHECK(std::count(rings.truth.begin(), rings.truth.end(), c) == 200);
}

TEST_CASE("point CSV")
{
  std::istringstream in("0.5,1.5,1\n2,3,\n-1,4e-1,2\n");
  auto d = read_points_csv(in);
  CHECK(d.size() == 3);
  CHECK(d.points(2, 1) == 0.4);
  CHECK(d.labels == Labels{ 0, kUnlabeled, 1 });
  CHECK(d.training_ids == std::vector<std::size_t>{ 0, 2 });

  std::ostringstream out;
  write_points_csv(out, d, true);
  std::istringstream back(out.str());
  auto d2 = read_points_csv(back, PointCsvOptions{ true, true });
  CHECK(d2.points == d.points);
  CHECK(d2.labels == d.labels);

  std::istringstream nolabel("1,2\n3,4\n");
  auto d3 = read_points_csv(nolabel, PointCsvOptions{ false, false });
  CHECK(d3.points.cols() == 2);
  CHECK(d3.training_ids.empty());

  for (const char* bad : { "1,2,x\n", "1,2,1\n3,1\n", "1,abc,1\n", "1,2,0\n" }) {
    std::istringstream b(bad);
    CHECK(code_of([&] { read_points_csv(b); }) == ErrorCode::parse_error);
  }
}
