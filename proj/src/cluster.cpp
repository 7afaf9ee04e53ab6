#include "pairclust/cluster.hpp"

#include "pairclust/error.hpp"
#include "pairclust/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pairclust {

std::string_view to_string(Method method)
{
  switch (method) {
    case Method::bp: return "bp";
    case Method::nb: return "nb";
    case Method::bh: return "bh";
  }
  return "?";
}

Method parse_method(std::string_view text)
{
  if (text == "bp")
    return Method::bp;
  if (text == "nb")
    return Method::nb;
  if (text == "bh")
    return Method::bh;
  throw Error(ErrorCode::configuration, "unknown method '" + std::string(text) + "'");
}

namespace {

struct Run
{
  Labels labels;
  double inertia;
  std::vector<double> trace;
};

Run lloyd(const Eigen::MatrixXd& X, int k, int max_iter, Rng& rng)
{
  const Eigen::Index n = X.rows();
  const Eigen::Index r = X.cols();
  Eigen::MatrixXd centers(k, r);

  // k-means++ seeding
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = X.row(first(rng));
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i)
    d2(i) = (X.row(i) - centers.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      double acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = X.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (X.row(i) - centers.row(c)).squaredNorm());
  }

  Labels labels(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd cost(n);
  Run run{ {}, 0.0, {} };
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double dist = (X.row(i) - centers.row(c)).squaredNorm();
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      if (labels[static_cast<std::size_t>(i)] != best) {
        labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
      cost(i) = best_d;
      inertia += best_d;
    }
    run.trace.push_back(inertia);
    run.inertia = inertia;
    if (!changed && it > 0)
      break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, r);
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int c = labels[static_cast<std::size_t>(i)];
      sums.row(c) += X.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // empty: reseed from the point farthest from its own centroid
      Eigen::Index far = -1;
      double far_cost = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        int owner = labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(owner)] > 1 && cost(i) > far_cost) {
          far_cost = cost(i);
          far = i;
        }
      }
      if (far < 0)
        continue;
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      cost(far) = 0.0;
      centers.row(c) = X.row(far);
    }
  }
  run.labels = std::move(labels);
  return run;
}

void check_labels(std::span<const int> labels, int k, const char* what)
{
  for (int c : labels)
    if (c < 0 || c >= k)
      throw Error(ErrorCode::invalid_argument,
                  std::string(what) + " label out of range [1, k]");
}

// counts[p * k + t] = #{i : pred_i = p, truth_i = t}
std::vector<long> confusion(std::span<const int> predicted, std::span<const int> truth, int k)
{
  if (predicted.size() != truth.size())
    throw Error(ErrorCode::dimension_mismatch, "label vectors differ in length");
  if (k > 10)
    throw Error(ErrorCode::enumeration_bound,
                "permutation enumeration limited to k <= 10, got " + std::to_string(k));
  if (k < 1)
    throw Error(ErrorCode::invalid_argument, "k must be positive");
  check_labels(predicted, k, "predicted");
  check_labels(truth, k, "true");
  std::vector<long> counts(static_cast<std::size_t>(k) * k, 0);
  for (std::size_t i = 0; i < predicted.size(); ++i)
    ++counts[static_cast<std::size_t>(predicted[i]) * k + truth[i]];
  return counts;
}

long best_agreement(const std::vector<long>& counts, int k)
{
  std::vector<int> sigma(static_cast<std::size_t>(k));
  std::iota(sigma.begin(), sigma.end(), 0);
  long best = -1;
  do {
    long agree = 0;
    for (int p = 0; p < k; ++p)
      agree += counts[static_cast<std::size_t>(p) * k + sigma[static_cast<std::size_t>(p)]];
    best = std::max(best, agree);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

} // namespace

KmeansResult kmeans_run(const Eigen::MatrixXd& points,
                        int k,
                        const KmeansSettings& settings,
                        std::uint64_t seed)
{
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n)
    throw Error(ErrorCode::invalid_argument,
                "k-means needs 1 <= k <= n (k=" + std::to_string(k) + ", n=" +
                  std::to_string(n) + ")");
  if (points.cols() < 1)
    throw Error(ErrorCode::invalid_argument, "k-means needs at least one coordinate");
  if (!points.allFinite())
    throw Error(ErrorCode::non_finite, "k-means input has non-finite coordinates");
  if (settings.restarts < 1 || settings.max_iter < 1)
    throw Error(ErrorCode::invalid_argument, "k-means restarts and max_iter must be >= 1");

  if (k == 1) {
    KmeansResult single{ Labels(static_cast<std::size_t>(n), 0), 0.0, {} };
    Eigen::RowVectorXd mean = points.colwise().mean();
    for (Eigen::Index i = 0; i < n; ++i)
      single.inertia += (points.row(i) - mean).squaredNorm();
    single.trace.push_back(single.inertia);
    return single;
  }

  KmeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < settings.restarts; ++rep) {
    Rng rng = make_rng(seed, stream::kmeans * 1000003ULL + static_cast<std::uint64_t>(rep));
    Run run = lloyd(points, k, settings.max_iter, rng);
    if (run.inertia < best.inertia) {
      best.labels = std::move(run.labels);
      best.inertia = run.inertia;
      best.trace = std::move(run.trace);
    }
  }
  return best;
}

Labels kmeans(const Eigen::MatrixXd& points,
              int k,
              int restarts,
              int max_iter,
              std::uint64_t seed)
{
  return kmeans_run(points, k, { restarts, max_iter, false }, seed).labels;
}

double overlap(std::span<const int> predicted, std::span<const int> truth, int k)
{
  auto counts = confusion(predicted, truth, k);
  if (predicted.empty())
    return 0.0;
  double agree = static_cast<double>(best_agreement(counts, k)) / static_cast<double>(predicted.size());
  double chance = 1.0 / k;
  if (k == 1)
    return 1.0;
  return (agree - chance) / (1.0 - chance);
}

double best_permutation_accuracy(std::span<const int> predicted,
                                 std::span<const int> truth,
                                 int k)
{
  auto counts = confusion(predicted, truth, k);
  if (predicted.empty())
    return 0.0;
  return static_cast<double>(best_agreement(counts, k)) / static_cast<double>(predicted.size());
}

Labels sign_decode(const Eigen::Ref<const Eigen::VectorXd>& column)
{
  Labels labels(static_cast<std::size_t>(column.size()));
  for (Eigen::Index i = 0; i < column.size(); ++i)
    labels[static_cast<std::size_t>(i)] = column(i) >= 0.0 ? 0 : 1;
  return labels;
}

Labels cluster_embedding(const Eigen::MatrixXd& embedding,
                         int k,
                         const KmeansSettings& settings,
                         std::uint64_t seed)
{
  if (!settings.normalize_rows)
    return kmeans_run(embedding, k, settings, seed).labels;
  Eigen::MatrixXd rows = embedding;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double norm = rows.row(i).norm();
    if (norm > 0.0)
      rows.row(i) /= norm;
  }
  return kmeans_run(rows, k, settings, seed).labels;
}

} // namespace pairclust
