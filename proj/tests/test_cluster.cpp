#include "pairclust/cluster.hpp"
#include "pairclust/error.hpp"
#include "pairclust/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace pairclust;

namespace {

Labels permuted(const Labels& labels, const std::vector<int>& sigma)
{
  Labels out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = sigma[static_cast<std::size_t>(labels[i])];
  return out;
}

bool same_partition(const Labels& a, const Labels& b)
{
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a[i] == a[j]) != (b[i] == b[j]))
        return false;
  return true;
}

} // namespace

TEST_CASE("kmeans on k distinct locations")
{
  Eigen::MatrixXd centers(3, 2);
  centers << 0, 0, 5, 1, -2, 7;
  Eigen::MatrixXd pts(30, 2);
  Labels truth(30);
  for (int i = 0; i < 30; ++i) {
    truth[static_cast<std::size_t>(i)] = i % 3;
    pts.row(i) = centers.row(i % 3);
  }
  auto r = kmeans_run(pts, 3, {}, 7);
  CHECK(r.inertia == doctest::Approx(0.0));
  CHECK(same_partition(r.labels, truth));
  CHECK(overlap(r.labels, truth, 3) == doctest::Approx(1.0));
}

TEST_CASE("kmeans with k = 1")
{
  Eigen::MatrixXd pts = Eigen::MatrixXd::Random(12, 3);
  auto labels = kmeans(pts, 1, 10, 100, 1);
  CHECK(std::all_of(labels.begin(), labels.end(), [](int l) { return l == 0; }));
}

TEST_CASE("two 1-D blobs match the best threshold split")
{
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(seed, 0);
    std::normal_distribution<double> noise(0.0, 0.1);
    Eigen::MatrixXd pts(40, 1);
    for (int i = 0; i < 40; ++i)
      pts(i, 0) = (i < 20 ? 0.0 : 10.0) + noise(rng);

    // oracle: the optimal 2-partition of points on a line is a threshold split
    std::vector<int> order(40);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return pts(a, 0) < pts(b, 0); });
    double best = std::numeric_limits<double>::infinity();
    Labels oracle;
    for (int cut = 1; cut < 40; ++cut) {
      double cost = 0.0;
      for (auto [lo, hi] : { std::pair{ 0, cut }, std::pair{ cut, 40 } }) {
        double mean = 0.0;
        for (int t = lo; t < hi; ++t)
          mean += pts(order[t], 0);
        mean /= hi - lo;
        for (int t = lo; t < hi; ++t)
          cost += std::pow(pts(order[t], 0) - mean, 2);
      }
      if (cost < best) {
        best = cost;
        oracle.assign(40, 0);
        for (int t = cut; t < 40; ++t)
          oracle[static_cast<std::size_t>(order[t])] = 1;
      }
    }
    auto r = kmeans_run(pts, 2, {}, seed);
    CHECK(same_partition(r.labels, oracle));
    CHECK(r.inertia == doctest::Approx(best).epsilon(1e-10));
    for (int i = 0; i < 40; ++i)
      CHECK((r.labels[static_cast<std::size_t>(i)] == r.labels[0]) == (i < 20));
  }
}

TEST_CASE("kmeans inertia is non-increasing within a run")
{
  Eigen::MatrixXd pts = Eigen::MatrixXd::Random(300, 4);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    KmeansSettings s;
    s.restarts = 1;
    auto r = kmeans_run(pts, 5, s, seed);
    REQUIRE(r.trace.size() >= 1);
    for (std::size_t t = 1; t < r.trace.size(); ++t)
      CHECK(r.trace[t] <= r.trace[t - 1] + 1e-12 * std::abs(r.trace[t - 1]));
  }
}

TEST_CASE("kmeans is deterministic and validates input")
{
  Eigen::MatrixXd pts = Eigen::MatrixXd::Random(100, 2);
  CHECK(kmeans(pts, 3, 10, 100, 5) == kmeans(pts, 3, 10, 100, 5));
  Eigen::MatrixXd bad = pts;
  bad(3, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(kmeans(bad, 3, 10, 100, 5), Error);
  CHECK_THROWS_AS(kmeans(pts.topRows(2), 3, 10, 100, 5), Error);
}

TEST_CASE("overlap examples")
{
  Labels truth{ 0, 0, 1, 1 };
  CHECK(overlap(truth, truth, 2) == 1.0);
  CHECK(overlap(Labels{ 1, 1, 0, 0 }, truth, 2) == 1.0);
  CHECK(overlap(Labels{ 0, 1, 0, 1 }, truth, 2) == 0.0);
  CHECK(best_permutation_accuracy(Labels{ 0, 1, 0, 1 }, truth, 2) == 0.5);
  CHECK_THROWS_AS(overlap(Labels(11, 0), Labels(11, 0), 11), Error);
  CHECK_THROWS_AS(overlap(Labels{ 0, 1 }, Labels{ 0 }, 2), Error);
}

TEST_CASE("overlap is permutation invariant and bounded")
{
  Rng rng = make_rng(11, 0);
  for (int k : { 2, 3, 4, 5 }) {
    std::uniform_int_distribution<int> lab(0, k - 1);
    for (int t = 0; t < 50; ++t) {
      std::size_t n = 5 + static_cast<std::size_t>(t);
      Labels truth(n), pred(n);
      for (std::size_t i = 0; i < n; ++i) {
        truth[i] = lab(rng);
        pred[i] = lab(rng);
      }
      double q = overlap(pred, truth, k);
      CHECK(q >= -1.0 / (k - 1) - 1e-12);
      CHECK(q <= 1.0 + 1e-12);
      std::vector<int> sigma(static_cast<std::size_t>(k));
      std::iota(sigma.begin(), sigma.end(), 0);
      std::shuffle(sigma.begin(), sigma.end(), rng);
      CHECK(overlap(permuted(pred, sigma), truth, k) == q);
    }
  }
}

TEST_CASE("overlap of random predictions is near zero")
{
  const std::size_t n = 100000;
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed, 0);
    std::bernoulli_distribution coin(0.5);
    Labels truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = coin(rng);
      pred[i] = coin(rng);
    }
    total += overlap(pred, truth, 2);
  }
  CHECK(std::abs(total / 20.0) < 0.02);
}

TEST_CASE("sign decoding")
{
  Eigen::VectorXd pos = Eigen::VectorXd::Constant(5, 0.3);
  auto a = sign_decode(pos);
  CHECK(std::all_of(a.begin(), a.end(), [](int l) { return l == 0; }));
  Eigen::Vector4d alt(1.0, -1.0, 2.0, -0.5);
  CHECK(sign_decode(alt) == Labels{ 0, 1, 0, 1 });
  Eigen::Vector2d zero(0.0, -0.0);
  CHECK(sign_decode(zero) == Labels{ 0, 0 });
}

TEST_CASE("method names")
{
  for (Method m : { Method::bp, Method::nb, Method::bh })
    CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("spectral"), Error);
}
