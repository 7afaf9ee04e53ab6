#include "pairclust/ingest.hpp"

#include "pairclust/error.hpp"
#include "pairclust/graph_io.hpp"
#include "pairclust/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

namespace pairclust {

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos)
      break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

} // namespace

void PointDataset::validate(int k) const
{
  if (labels.size() != size())
    throw Error(ErrorCode::invalid_argument, "label vector length differs from point count");
  std::vector<char> seen(size(), 0);
  for (std::size_t id : training_ids) {
    if (id >= size())
      throw Error(ErrorCode::invalid_argument, "training id " + std::to_string(id) + " out of range");
    if (seen[id]++)
      throw Error(ErrorCode::invalid_argument, "duplicate training id " + std::to_string(id));
    if (labels[id] < 0 || labels[id] >= k)
      throw Error(ErrorCode::invalid_argument,
                  "training label of point " + std::to_string(id) + " outside 1.." + std::to_string(k));
  }
  for (std::size_t i = 0; i < size(); ++i)
    if (!seen[i] && labels[i] != kUnlabeled)
      throw Error(ErrorCode::invalid_argument, "point " + std::to_string(i) + " labeled but not in training set");
  if (!points.allFinite())
    throw Error(ErrorCode::non_finite, "point coordinates must be finite");
}

PointDataset read_points_csv(std::istream& in, const PointCsvOptions& options)
{
  std::vector<std::vector<double>> rows;
  Labels labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool skipped_header = !options.header;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty())
      continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    auto fields = split_fields(view);
    std::size_t ncoord = fields.size() - (options.label_column ? 1 : 0);
    if (ncoord == 0)
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": no coordinates");
    if (dim == 0)
      dim = ncoord;
    else if (ncoord != dim)
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": expected " + std::to_string(dim) + " coordinates");
    std::vector<double> row(dim);
    for (std::size_t c = 0; c < dim; ++c) {
      try {
        row[c] = parse_double(trim(fields[c]));
      } catch (const Error& e) {
        throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    int label = kUnlabeled;
    if (options.label_column) {
      std::string_view text = trim(fields.back());
      if (!text.empty()) {
        double v;
        try {
          v = parse_double(text);
        } catch (const Error&) {
          throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": bad label");
        }
        if (v < 1 || v != std::floor(v) || v > 1e6)
          throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": labels are integers >= 1");
        label = static_cast<int>(v) - 1;
      }
    }
    rows.push_back(std::move(row));
    labels.push_back(label);
  }

  PointDataset data;
  data.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < dim; ++c)
      data.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  data.labels = std::move(labels);
  for (std::size_t i = 0; i < data.labels.size(); ++i)
    if (data.labels[i] != kUnlabeled)
      data.training_ids.push_back(i);
  return data;
}

void write_points_csv(std::ostream& out, const PointDataset& data, bool header)
{
  const Eigen::Index d = data.points.cols();
  if (header) {
    for (Eigen::Index c = 0; c < d; ++c)
      out << 'x' << (c + 1) << ',';
    out << "label\n";
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (Eigen::Index c = 0; c < d; ++c)
      out << format_double(data.points(static_cast<Eigen::Index>(i), c)) << ',';
    if (data.labels[i] != kUnlabeled)
      out << data.labels[i] + 1;
    out << '\n';
  }
}

MeasurementGraph build_graph_from_points(const PointDataset& data, double alpha, std::uint64_t seed, Metric)
{
  const std::size_t n = data.size();
  if (!(alpha >= 0.0))
    throw Error(ErrorCode::invalid_rate, "alpha must be >= 0");
  double rate = n > 0 ? alpha / static_cast<double>(n) : 0.0;
  if (rate > 1.0)
    throw Error(ErrorCode::invalid_rate, "alpha/n = " + std::to_string(rate) + " exceeds 1");
  Rng rng = make_rng(seed, stream::pairs);
  auto pairs = sample_pairs(n, rate, rng);
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    double s = (data.points.row(i) - data.points.row(j)).norm();
    edges.push_back({ i, j, s });
  }
  return MeasurementGraph(n, std::move(edges));
}

GaussianKde::GaussianKde(std::vector<double> samples, double bandwidth, double fallback)
  : samples_(std::move(samples))
  , h_(bandwidth)
{
  if (samples_.empty())
    throw Error(ErrorCode::insufficient_training_data, "kernel density estimate needs at least one sample");
  if (h_ <= 0.0) {
    const double m = static_cast<double>(samples_.size());
    double mean = std::accumulate(samples_.begin(), samples_.end(), 0.0) / m;
    double var = 0.0;
    for (double s : samples_)
      var += (s - mean) * (s - mean);
    double sigma = samples_.size() > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
    h_ = 1.06 * sigma * std::pow(m, -0.2);
    if (!(h_ > 0.0))
      h_ = fallback;
  }
  if (!(h_ > 0.0) || !std::isfinite(h_))
    throw Error(ErrorCode::invalid_argument, "bandwidth must be positive");
}

double GaussianKde::pdf(double s) const
{
  double sum = 0.0;
  for (double x : samples_) {
    double z = (s - x) / h_;
    sum += std::exp(-0.5 * z * z);
  }
  return sum / (static_cast<double>(samples_.size()) * h_ * std::sqrt(2.0 * std::numbers::pi));
}

std::vector<double> GaussianKde::bin_masses(const std::vector<double>& edges) const
{
  if (edges.size() < 2)
    throw Error(ErrorCode::invalid_argument, "need at least one bin");
  std::vector<double> masses(edges.size() - 1, 0.0);
  std::vector<double> cdf(edges.size());
  for (double x : samples_) {
    for (std::size_t t = 0; t < edges.size(); ++t)
      cdf[t] = normal_cdf((edges[t] - x) / h_);
    for (std::size_t t = 0; t + 1 < edges.size(); ++t)
      masses[t] += cdf[t + 1] - cdf[t];
  }
  for (double& m : masses)
    m /= static_cast<double>(samples_.size());
  return masses;
}

std::vector<MeasurementDensity> kde_estimate(const MeasurementGraph& graph,
                                             const PointDataset& data,
                                             int k,
                                             const KdeSettings& settings)
{
  if (k < 1)
    throw Error(ErrorCode::invalid_argument, "k must be >= 1");
  if (settings.bins < 1)
    throw Error(ErrorCode::invalid_argument, "need at least one bin");
  if (graph.num_nodes() != data.size())
    throw Error(ErrorCode::dimension_mismatch, "graph and point set differ in size");
  data.validate(k);

  const std::size_t kk = static_cast<std::size_t>(k);
  std::vector<std::vector<double>> samples(kk * kk);
  auto add = [&](int a, int b, double s) {
    if (a > b)
      std::swap(a, b);
    samples[static_cast<std::size_t>(a) * kk + b].push_back(s);
  };

  if (settings.all_labeled_pairs) {
    const auto& ids = data.training_ids;
    for (std::size_t x = 0; x < ids.size(); ++x)
      for (std::size_t y = x + 1; y < ids.size(); ++y)
        add(data.labels[ids[x]], data.labels[ids[y]],
            (data.points.row(ids[x]) - data.points.row(ids[y])).norm());
  } else {
    for (const Edge& e : graph.edges())
      if (data.labels[e.i] != kUnlabeled && data.labels[e.j] != kUnlabeled)
        add(data.labels[e.i], data.labels[e.j], e.s);
  }

  double lo = 0.0;
  double hi = 0.0;
  auto extend = [&](double s) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  };
  for (const auto& list : samples)
    for (double s : list)
      extend(s);
  for (const Edge& e : graph.edges())
    extend(e.s);
  hi *= 1.05;
  if (!(hi > lo))
    hi = lo + 1.0;

  std::vector<double> edges(static_cast<std::size_t>(settings.bins) + 1);
  const double width = (hi - lo) / settings.bins;
  for (std::size_t t = 0; t < edges.size(); ++t)
    edges[t] = lo + width * static_cast<double>(t);
  edges.back() = hi;

  auto to_density = [&](std::vector<double> list) {
    GaussianKde kde(std::move(list), settings.bandwidth, 2.0 * width);
    auto masses = kde.bin_masses(edges);
    double total = 0.0;
    for (double& m : masses) {
      m = std::max(m, kBinMassFloor);
      total += m;
    }
    for (double& m : masses)
      m /= total;
    return MeasurementDensity::binned(edges, std::move(masses));
  };

  std::optional<MeasurementDensity> pooled;
  std::vector<std::optional<MeasurementDensity>> cells(kk * kk);
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      auto& list = samples[static_cast<std::size_t>(a) * kk + b];
      std::optional<MeasurementDensity> density;
      if (!list.empty()) {
        density = to_density(list);
      } else if (settings.pooled_fallback) {
        if (!pooled) {
          std::vector<double> all;
          for (const auto& l : samples)
            all.insert(all.end(), l.begin(), l.end());
          if (all.empty())
            throw Error(ErrorCode::insufficient_training_data, "no labeled measurements at all");
          pooled = to_density(std::move(all));
        }
        density = *pooled;
      } else {
        throw Error(ErrorCode::insufficient_training_data,
                    "no training measurement between classes " + std::to_string(a + 1) + " and " +
                      std::to_string(b + 1));
      }
      cells[static_cast<std::size_t>(a) * kk + b] = density;
      cells[static_cast<std::size_t>(b) * kk + a] = density;
    }
  }
  std::vector<MeasurementDensity> table;
  table.reserve(cells.size());
  for (auto& cell : cells)
    table.push_back(std::move(*cell));
  return table;
}

namespace {

// Permutation of predicted labels that best matches the training labels.
std::vector<int> align_permutation(const Labels& predicted, const PointDataset& data, int k)
{
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> confusion(static_cast<std::size_t>(k) * k, 0);
  for (std::size_t id : data.training_ids)
    ++confusion[static_cast<std::size_t>(predicted[id]) * k + data.labels[id]];
  std::vector<int> best = perm;
  std::size_t best_hits = 0;
  do {
    std::size_t hits = 0;
    for (int c = 0; c < k; ++c)
      hits += confusion[static_cast<std::size_t>(c) * k + perm[c]];
    if (hits > best_hits) {
      best_hits = hits;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

} // namespace

PointsReport cluster_points(const PointDataset& data,
                            double alpha,
                            int k,
                            const KdeSettings& kde,
                            const BpSettings& bp,
                            std::uint64_t seed,
                            const Labels* truth)
{
  if (k < 2)
    throw Error(ErrorCode::invalid_argument, "k must be at least 2");
  if (k > 10)
    throw Error(ErrorCode::enumeration_bound, "label alignment enumerates k! permutations; k must be <= 10");
  if (data.training_ids.empty())
    throw Error(ErrorCode::insufficient_training_data, "no labeled training points");
  if (truth && truth->size() != data.size())
    throw Error(ErrorCode::dimension_mismatch, "truth length differs from point count");

  MeasurementGraph graph = build_graph_from_points(data, alpha, seed);
  auto table = kde_estimate(graph, data, k, kde);
  ModelParams params = ModelParams::general(k, alpha, std::move(table));
  BpResult run = bp_run(graph, params, seed, bp);

  Labels labels = decode_marginals(run.marginals);
  auto perm = align_permutation(labels, data, k);
  for (int& c : labels)
    c = perm[static_cast<std::size_t>(c)];

  PointsReport report;
  report.num_edges = graph.num_edges();
  if (truth) {
    std::vector<char> is_train(data.size(), 0);
    for (std::size_t id : data.training_ids)
      is_train[id] = 1;
    Labels pred_test;
    Labels truth_test;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!is_train[i]) {
        pred_test.push_back(labels[i]);
        truth_test.push_back((*truth)[i]);
      }
    }
    if (pred_test.empty()) {
      pred_test = labels;
      truth_test = *truth;
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred_test.size(); ++i)
      correct += pred_test[i] == truth_test[i];
    report.accuracy = static_cast<double>(correct) / static_cast<double>(pred_test.size());
    report.result.overlap = overlap(pred_test, truth_test, k);
  }
  report.result.labels = std::move(labels);
  report.result.method = Method::bp;
  report.result.diagnostics = run.report;
  return report;
}

LabeledPoints make_blobs(std::size_t n, int k, double separation, double spread, std::uint64_t seed)
{
  if (k < 1)
    throw Error(ErrorCode::invalid_argument, "k must be >= 1");
  Rng rng = make_rng(seed, stream::points);
  std::normal_distribution<double> noise(0.0, spread);
  double radius = k > 1 ? separation / (2.0 * std::sin(std::numbers::pi / k)) : 0.0;
  LabeledPoints out;
  out.points.resize(static_cast<Eigen::Index>(n), 2);
  out.truth.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int c = static_cast<int>(i % static_cast<std::size_t>(k));
    double angle = 2.0 * std::numbers::pi * c / k;
    out.truth[i] = c;
    out.points(static_cast<Eigen::Index>(i), 0) = radius * std::cos(angle) + noise(rng);
    out.points(static_cast<Eigen::Index>(i), 1) = radius * std::sin(angle) + noise(rng);
  }
  return out;
}

LabeledPoints make_rings(std::size_t n, int k, double noise_sd, std::uint64_t seed)
{
  if (k < 1)
    throw Error(ErrorCode::invalid_argument, "k must be >= 1");
  Rng rng = make_rng(seed, stream::points);
  std::normal_distribution<double> noise(0.0, noise_sd);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  LabeledPoints out;
  out.points.resize(static_cast<Eigen::Index>(n), 2);
  out.truth.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    int c = static_cast<int>(i % static_cast<std::size_t>(k));
    double r = (c + 1) + noise(rng);
    double t = angle(rng);
    out.truth[i] = c;
    out.points(static_cast<Eigen::Index>(i), 0) = r * std::cos(t);
    out.points(static_cast<Eigen::Index>(i), 1) = r * std::sin(t);
  }
  return out;
}

PointDataset with_training_subset(const LabeledPoints& points, double fraction, std::uint64_t seed)
{
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw Error(ErrorCode::invalid_argument, "training fraction must lie in [0, 1]");
  const std::size_t n = points.truth.size();
  PointDataset data;
  data.points = points.points;
  data.labels.assign(n, kUnlabeled);
  if (n == 0)
    return data;
  auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  count = std::clamp<std::size_t>(count, 1, n);
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng = make_rng(seed, stream::training);
  std::shuffle(ids.begin(), ids.end(), rng);
  ids.resize(count);
  std::sort(ids.begin(), ids.end());
  for (std::size_t id : ids)
    data.labels[id] = points.truth[id];
  data.training_ids = std::move(ids);
  return data;
}

} // namespace pairclust
