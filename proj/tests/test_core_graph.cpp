#include "oracles.hpp"

#include "pairclust/error.hpp"
#include "pairclust/graph_io.hpp"
#include "pairclust/model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace pairclust;

TEST_CASE("graph construction validates and builds adjacency")
{
  MeasurementGraph g(4, { { 0, 1, 1.0 }, { 2, 1, -1.0 }, { 3, 0, 0.5 } });
  CHECK(g.num_nodes() == 4);
  CHECK(g.num_edges() == 3);
  CHECK(g.num_directed() == 6);
  CHECK(g.edge(1).i == 1);
  CHECK(g.edge(1).j == 2);
  CHECK(g.degree(0) == 2);
  CHECK(g.degree(3) == 1);
  CHECK(g.max_degree() == 2);

  // every edge appears once in each endpoint's list under the same id
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    int seen_i = 0, seen_j = 0;
    for (auto inc : g.neighbors(g.edge(e).i))
      seen_i += inc.edge == e && inc.neighbor == g.edge(e).j;
    for (auto inc : g.neighbors(g.edge(e).j))
      seen_j += inc.edge == e && inc.neighbor == g.edge(e).i;
    CHECK(seen_i == 1);
    CHECK(seen_j == 1);
  }

  CHECK(g.source(MeasurementGraph::forward(0)) == 0);
  CHECK(g.target(MeasurementGraph::forward(0)) == 1);
  CHECK(g.source(MeasurementGraph::backward(0)) == 1);
  CHECK(MeasurementGraph::reverse(4) == 5);
  CHECK(g.directed_from(2, 3) == 5);

  CHECK_THROWS_AS(MeasurementGraph(3, { { 1, 1, 0.0 } }), Error);
  CHECK_THROWS_AS(MeasurementGraph(3, { { 0, 1, 0.0 }, { 1, 0, 1.0 } }), Error);
  CHECK_THROWS_AS(MeasurementGraph(3, { { 0, 3, 0.0 } }), Error);
}

TEST_CASE("sample_instance: zero rate, invalid rate, determinism")
{
  auto p = ModelParams::censored(2, 0.0, 0.1);
  CHECK(sample_instance(p, 500, 1).graph.num_edges() == 0);
  CHECK_THROWS_WITH_AS(sample_instance(p.with_alpha(11.0), 10, 1), doctest::Contains("exceeds"), Error);
  try {
    sample_instance(p.with_alpha(11.0), 10, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_rate);
  }

  auto a = sample_instance(p.with_alpha(3.0), 2000, 9);
  auto b = sample_instance(p.with_alpha(3.0), 2000, 9);
  auto c = sample_instance(p.with_alpha(3.0), 2000, 10);
  CHECK(a.graph == b.graph);
  CHECK(a.truth == b.truth);
  CHECK_FALSE(a.graph == c.graph);
  for (int t : a.truth)
    CHECK((t >= 0 && t < 2));
}

TEST_CASE("full rate gives the complete graph")
{
  Rng rng = make_rng(3, 0);
  CHECK(sample_pairs(7, 1.0, rng).size() == 21);
  CHECK_THROWS_AS(sample_pairs(7, 1.5, rng), Error);
  CHECK_THROWS_AS(sample_pairs(7, -0.1, rng), Error);
}

TEST_CASE("edge count follows the binomial law")
{
  // n = 10^4, alpha = 3: mean alpha (n-1)/2, var C(n,2) r (1-r)
  const double n = 1e4, alpha = 3.0, r = alpha / n;
  const double pairs = n * (n - 1) / 2;
  const double mean = pairs * r;
  const double sd = std::sqrt(pairs * r * (1 - r));
  CHECK(mean == doctest::Approx(14998.5));
  auto p = ModelParams::censored(2, alpha, 0.1);
  double sum = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    double m = static_cast<double>(sample_instance(p, 10000, 100 + s).graph.num_edges());
    CHECK(std::abs(m - mean) < 4 * sd);
    sum += m;
  }
  CHECK(std::abs(sum / seeds - mean) < 3 * sd / std::sqrt(double(seeds)));
}

TEST_CASE("pair sampling is uniform over pairs")
{
  // each of the C(6,2) pairs is hit with probability r; chi-square style bound per pair
  const int n = 6, reps = 20000;
  const double r = 0.3;
  std::vector<int> hits(n * n, 0);
  Rng rng = make_rng(77, 0);
  for (int t = 0; t < reps; ++t)
    for (auto [i, j] : sample_pairs(n, r, rng))
      ++hits[i * n + j];
  const double sd = std::sqrt(reps * r * (1 - r));
  for (int j = 1; j < n; ++j)
    for (int i = 0; i < j; ++i)
      CHECK(std::abs(hits[i * n + j] - reps * r) < 4.5 * sd);
}

TEST_CASE("censored measurements agree with labels at rate 1 - eps")
{
  auto inst = sample_instance(ModelParams::censored(2, 3.0, 0.1), 10000, 5);
  double same = 0, agree = 0;
  for (const Edge& e : inst.graph.edges()) {
    if (inst.truth[e.i] == inst.truth[e.j]) {
      ++same;
      agree += e.s == 1.0;
    }
    CHECK((e.s == 1.0 || e.s == -1.0));
  }
  double sd = std::sqrt(same * 0.9 * 0.1);
  CHECK(std::abs(agree - 0.9 * same) < 3 * sd);
}

TEST_CASE("label histogram stays within 4 sd of n/k")
{
  const int n = 3000, k = 3;
  const double bound = 4 * std::sqrt(n * (1.0 / k) * (1 - 1.0 / k));
  auto p = ModelParams::censored(k, 0.0, 0.1);
  int violations = 0;
  for (int s = 0; s < 1000; ++s) {
    auto inst = sample_instance(p, n, 5000 + s);
    std::vector<int> count(k, 0);
    for (int t : inst.truth)
      ++count[t];
    for (int c : count)
      violations += std::abs(c - double(n) / k) >= bound;
  }
  CHECK(violations <= 1);
}

TEST_CASE("weight function")
{
  auto half = MeasurementDensity::discrete({ 1.0 }, { 1.0 });
  CHECK(weight(half, half, 2, 1.0) == 0.0);

  auto in = MeasurementDensity::discrete({ -1.0, 1.0 }, { 0.1, 0.9 });
  auto out = MeasurementDensity::discrete({ -1.0, 1.0 }, { 0.9, 0.1 });
  CHECK(weight(in, out, 2, 1.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(weight(in, out, 2, -1.0) == doctest::Approx(-0.8).epsilon(1e-15));

  auto a = MeasurementDensity::discrete({ 0.0, 1.0 }, { 0.5, 0.5 });
  auto b = MeasurementDensity::discrete({ 0.0, 1.0 }, { 0.25, 0.75 });
  CHECK(weight(a, b, 3, 0.0) == doctest::Approx(0.25));

  try {
    weight(in, out, 2, 0.0);
    FAIL("expected out-of-support");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::out_of_support);
  }
  CHECK(weight(in, out, 2, 0.0, 1e-12) == 0.0);

  // bounds -1/(k-1) <= w <= 1 across random discrete pairs
  Rng rng = make_rng(4, 0);
  for (int t = 0; t < 200; ++t) {
    int k = 2 + t % 3;
    auto table = oracle::random_discrete_table(2, 4, rng);
    for (double s : { 0.0, 1.0, 2.0, 3.0 }) {
      double w = weight(table[0], table[1], k, s);
      CHECK(w <= 1.0 + 1e-15);
      CHECK(w >= -1.0 / (k - 1) - 1e-15);
    }
  }
}

TEST_CASE("critical degree: censored closed form")
{
  for (double eps : { 0.05, 0.1, 0.25 }) {
    double expected = 1.0 / ((1 - 2 * eps) * (1 - 2 * eps));
    CHECK(std::abs(critical_degree(ModelParams::censored(2, 1.0, eps)) - expected) < 1e-12);
  }
  CHECK(critical_degree(ModelParams::censored(2, 1.0, 0.1)) == doctest::Approx(1.5625).epsilon(1e-14));
}

TEST_CASE("critical degree: identical densities give infinity")
{
  auto a = MeasurementDensity::discrete({ -1.0, 1.0 }, { 0.5, 0.5 });
  CHECK_THROWS_AS(ModelParams::symmetric(2, 1.0, a, a), Error);
  // same law written in a different symbol order passes construction but has zero integrand
  auto b = MeasurementDensity::discrete({ 1.0, -1.0 }, { 0.5, 0.5 });
  CHECK(std::isinf(critical_degree(ModelParams::symmetric(2, 1.0, a, b))));
}

TEST_CASE("critical degree: discrete sum matches extended precision")
{
  Rng rng = make_rng(8, 0);
  for (int t = 0; t < 100; ++t) {
    int k = 2 + t % 3;
    auto table = oracle::random_discrete_table(2, 5, rng);
    auto p = ModelParams::symmetric(k, 1.0, table[0], table[1]);
    long double inv = 0.0L;
    for (std::size_t s = 0; s < 5; ++s) {
      long double pin = table[0].probabilities()[s];
      long double pout = table[1].probabilities()[s];
      inv += (pin - pout) * (pin - pout) / (pin + (k - 1) * pout);
    }
    double expected = static_cast<double>(k / inv);
    CHECK(std::abs(critical_degree(p) - expected) <= 1e-12 * expected);
  }
}

TEST_CASE("critical degree: gaussian against Simpson oracle")
{
  double ac = critical_degree(ModelParams::gaussian(2, 1.0, 1.5, 0.0));
  CHECK(std::abs(ac - 2.63) <= 0.01);
  double oracle_ac = static_cast<double>(1.0L / oracle::inverse_alpha_c_gaussian(1.5, 0.0, 1.0, 2));
  CHECK(ac == doctest::Approx(oracle_ac).epsilon(1e-8));
  double ac3 = critical_degree(ModelParams::gaussian(3, 1.0, 1.5, 0.0));
  CHECK(ac3 == doctest::Approx(static_cast<double>(1.0L / oracle::inverse_alpha_c_gaussian(1.5, 0.0, 1.0, 3)))
                 .epsilon(1e-8));
}

TEST_CASE("critical degree grows as the densities approach each other")
{
  // p_in = m + t d, p_out = m - t d on a fixed mixture m
  std::vector<double> m{ 0.3, 0.3, 0.4 };
  std::vector<double> d{ 0.1, -0.15, 0.05 };
  double prev = 0.0;
  for (double t : { 1.0, 0.8, 0.6, 0.4, 0.2, 0.1 }) {
    std::vector<double> in(3), out(3);
    for (int s = 0; s < 3; ++s) {
      in[s] = m[s] + t * d[s];
      out[s] = m[s] - t * d[s];
    }
    auto p = ModelParams::symmetric(2, 1.0, MeasurementDensity::discrete({ 0, 1, 2 }, in),
                                    MeasurementDensity::discrete({ 0, 1, 2 }, out));
    double ac = critical_degree(p);
    CHECK(ac > prev);
    prev = ac;
  }
}

TEST_CASE("density evaluation")
{
  auto d = MeasurementDensity::discrete({ 1.0, -1.0 }, { 0.9, 0.1 });
  CHECK(density_eval(d, 1.0) == 0.9);
  CHECK(density_eval(d, 0.5) == 0.0);
  auto g = MeasurementDensity::gaussian(0.0, 1.0);
  CHECK(density_eval(g, 0.0) == doctest::Approx(1.0 / std::sqrt(2 * std::numbers::pi)));
  CHECK(density_eval(g, 0.0) == doctest::Approx(0.39894).epsilon(1e-5));
  auto b = MeasurementDensity::binned({ 0.0, 1.0 }, { 1.0 });
  CHECK(density_eval(b, 0.5) == 1.0);
  CHECK(density_eval(b, 1.5) == 0.0);
  CHECK(density_eval(b, -0.5) == 0.0);
  CHECK_THROWS_AS(MeasurementDensity::discrete({ 1.0, 2.0 }, { 0.5, 0.6 }), Error);
  CHECK_THROWS_AS(MeasurementDensity::binned({ 0.0, 1.0, 2.0 }, { 0.7, 0.2 }), Error);
}

TEST_CASE("graph file round trip is bit exact")
{
  auto inst = sample_instance(ModelParams::gaussian(2, 3.0, 1.5, 0.0), 1000, 42);
  std::stringstream ss;
  write_graph(ss, inst.graph, 2);
  GraphFile back = read_graph(ss);
  CHECK(back.k == 2);
  CHECK(back.graph == inst.graph);

  std::stringstream ls;
  write_labels(ls, inst.truth);
  CHECK(read_labels(ls) == inst.truth);

  std::stringstream hand("# comment\n3 2 2\n\n0 1 0.1\n1 2 -3e-5\n");
  GraphFile h = read_graph(hand);
  CHECK(h.graph.num_edges() == 2);
  CHECK(h.graph.edge(1).s == -3e-5);

  for (const char* bad : { "3 2 2\n0 1 0.1\n", "3 1 2\n0 x 0.1\n", "3 1 2\n0 1\n", "x\n", "3 1 2\n0 0 1\n" }) {
    std::stringstream in(bad);
    CHECK_THROWS_AS(read_graph(in), Error);
  }
}

TEST_CASE("label files are 1-based")
{
  std::stringstream ss;
  write_labels(ss, { 0, 1, 2 });
  CHECK(ss.str() == "1\n2\n3\n");
  std::stringstream bad("0\n");
  CHECK_THROWS_AS(read_labels(bad), Error);
}
