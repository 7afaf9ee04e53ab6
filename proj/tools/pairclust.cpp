#include "pairclust/error.hpp"
#include "pairclust/experiment.hpp"
#include "pairclust/graph_io.hpp"
#include "pairclust/ingest.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace pairclust;

namespace {

std::vector<std::string> split_list(const std::string& text)
{
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      items.push_back(item);
  return items;
}

// Opens `path` for writing, or returns std::cout for an empty path or "-".
class Output
{
public:
  explicit Output(const std::string& path)
  {
    if (path.empty() || path == "-")
      return;
    file_.open(path);
    if (!file_)
      throw Error(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close()
  {
    if (file_.is_open()) {
      file_.close();
      if (!file_)
        throw Error(ErrorCode::io_error, "write failed");
    }
  }

private:
  std::ofstream file_;
};

struct Cli
{
  ExperimentConfig config;
  std::optional<double> alpha;
  std::string alpha_grid;
  std::string methods = "bp,nb,bh";
  std::string out;
  std::string format = "csv";
  bool no_timing = false;

  std::string graph_path;
  std::string labels_path;
  std::string labels_out;
  std::string bh_out;

  std::string points_path;
  bool header = false;
  bool no_label_column = false;
  std::string truth_path;
  std::optional<double> train_fraction;
  KdeSettings kde;
  bool edge_pairs_only = false;
};

ExperimentConfig finish_config(Cli& cli, bool alpha_required)
{
  ExperimentConfig config = cli.config;
  config.alpha = cli.alpha;
  config.alpha_grid.clear();
  for (const auto& item : split_list(cli.alpha_grid)) {
    try {
      config.alpha_grid.push_back(parse_double(item));
    } catch (const Error&) {
      throw Error(ErrorCode::configuration, "bad alpha grid entry '" + item + "'");
    }
  }
  config.methods.clear();
  for (const auto& item : split_list(cli.methods))
    config.methods.push_back(parse_method(item));
  config.timing = !cli.no_timing;
  config.threads = env_thread_count();
  config.validate();
  if (alpha_required && !config.alpha)
    throw Error(ErrorCode::configuration, "--alpha is required");
  return config;
}

int cmd_generate(Cli& cli)
{
  ExperimentConfig config = finish_config(cli, true);
  if (cli.out.empty())
    throw Error(ErrorCode::configuration, "generate needs --out");
  double alpha = config.resolve_alpha(*config.alpha);
  PlantedInstance inst = sample_instance(config.params(alpha), config.n, config.seed);
  save_graph(cli.out, inst.graph, config.k);
  save_labels(cli.labels_out.empty() ? cli.out + ".labels" : cli.labels_out, inst.truth);
  return 0;
}

struct LoadedInstance
{
  MeasurementGraph graph;
  std::optional<Labels> truth;
  ModelParams params;
};

LoadedInstance load_or_sample(Cli& cli, ExperimentConfig& config)
{
  if (cli.graph_path.empty()) {
    if (!config.alpha)
      throw Error(ErrorCode::configuration, "need --graph or --alpha");
    double alpha = config.resolve_alpha(*config.alpha);
    PlantedInstance inst = sample_instance(config.params(alpha), config.n, config.seed);
    return { std::move(inst.graph), std::move(inst.truth), inst.params };
  }
  GraphFile file = load_graph(cli.graph_path);
  if (file.k != config.k)
    config.k = file.k;
  double alpha = file.graph.num_nodes() ? 2.0 * static_cast<double>(file.graph.num_edges()) /
                                            static_cast<double>(file.graph.num_nodes())
                                        : 0.0;
  if (config.alpha)
    alpha = config.resolve_alpha(*config.alpha);
  std::optional<Labels> truth;
  if (!cli.labels_path.empty()) {
    truth = load_labels(cli.labels_path);
    if (truth->size() != file.graph.num_nodes())
      throw Error(ErrorCode::parse_error, "label file length differs from graph size");
    for (int c : *truth)
      if (c < 0 || c >= config.k)
        throw Error(ErrorCode::parse_error, "label outside 1..k");
  }
  config.n = file.graph.num_nodes();
  ModelParams params = config.params(alpha);
  return { std::move(file.graph), std::move(truth), params };
}

int cmd_run(Cli& cli)
{
  ExperimentConfig config = finish_config(cli, false);
  LoadedInstance inst = load_or_sample(cli, config);
  auto rows = run_methods(config, inst.graph, inst.params, inst.truth ? &*inst.truth : nullptr, config.seed);
  Output out(cli.out);
  write_run_csv(out.stream(), rows);
  out.close();
  return 0;
}

int cmd_sweep(Cli& cli)
{
  ExperimentConfig config = finish_config(cli, false);
  SweepTable sweep = run_sweep(config);
  Output out(cli.out);
  write_sweep_csv(out.stream(), config, sweep);
  out.close();
  return 0;
}

int cmd_spectrum(Cli& cli)
{
  ExperimentConfig config = finish_config(cli, false);
  bool want_nb = false;
  bool want_bh = false;
  for (Method m : config.methods) {
    want_nb |= m == Method::nb;
    want_bh |= m == Method::bh;
  }
  if (!want_nb && !want_bh)
    throw Error(ErrorCode::configuration, "spectrum needs nb or bh among --methods");
  LoadedInstance inst = load_or_sample(cli, config);
  SpectrumDump dump = compute_spectrum(inst.graph, inst.params, config, want_nb, want_bh);

  double alpha_c = critical_degree(inst.params);
  double ratio = inst.params.alpha() / alpha_c;

  if (cli.out.empty()) {
    if (want_nb)
      write_nb_spectrum_csv(std::cout, dump);
    if (want_nb && want_bh)
      std::cout << '\n';
    if (want_bh)
      write_bh_spectrum_csv(std::cout, dump);
  } else {
    if (want_nb) {
      Output out(cli.out);
      write_nb_spectrum_csv(out.stream(), dump);
      out.close();
    }
    if (want_bh) {
      Output out(cli.bh_out.empty() ? (want_nb ? cli.out + ".bh.csv" : cli.out) : cli.bh_out);
      write_bh_spectrum_csv(out.stream(), dump);
      out.close();
    }
  }
  std::ostream& info = cli.out.empty() ? std::cerr : std::cout;
  info << "alpha=" << format_double(inst.params.alpha()) << '\n'
       << "alpha_c=" << format_double(alpha_c) << '\n'
       << "alpha_over_alpha_c=" << format_double(ratio) << '\n'
       << "sqrt_alpha_over_alpha_c=" << format_double(std::sqrt(ratio)) << '\n';
  if (!dump.nb_error.empty())
    info << "nb_error=" << dump.nb_error << '\n';
  if (!dump.bh_error.empty())
    info << "bh_error=" << dump.bh_error << '\n';
  return 0;
}

int cmd_cluster_points(Cli& cli)
{
  ExperimentConfig config = finish_config(cli, true);
  if (cli.points_path.empty())
    throw Error(ErrorCode::configuration, "cluster-points needs --points");
  if (cli.no_label_column)
    throw Error(ErrorCode::configuration, "cluster-points needs a label column with the training labels");

  std::ifstream in(cli.points_path);
  if (!in)
    throw Error(ErrorCode::io_error, "cannot open '" + cli.points_path + "'");
  PointDataset data = read_points_csv(in, PointCsvOptions{ cli.header, true });

  std::optional<Labels> truth;
  if (cli.train_fraction) {
    for (int c : data.labels)
      if (c == kUnlabeled)
        throw Error(ErrorCode::configuration, "--train-fraction needs every row labeled");
    LabeledPoints full{ data.points, data.labels };
    data = with_training_subset(full, *cli.train_fraction, config.seed);
    truth = std::move(full.truth);
  }
  if (!cli.truth_path.empty()) {
    truth = load_labels(cli.truth_path);
    if (truth->size() != data.size())
      throw Error(ErrorCode::parse_error, "truth file length differs from point count");
  }
  for (int c : data.labels)
    if (c >= config.k)
      throw Error(ErrorCode::parse_error, "training label above k");

  KdeSettings kde = cli.kde;
  kde.all_labeled_pairs = !cli.edge_pairs_only;
  PointsReport report =
    cluster_points(data, *config.alpha, config.k, kde, config.bp, config.seed, truth ? &*truth : nullptr);

  if (!cli.labels_out.empty()) {
    save_labels(cli.labels_out, report.result.labels);
  } else if (!cli.out.empty()) {
    save_labels(cli.out + ".labels", report.result.labels);
  } else {
    write_labels(std::cout, report.result.labels);
  }
  Output out(cli.out);
  std::ostream& rep = out.stream();
  if (!cli.out.empty() || !cli.labels_out.empty()) {
    rep << "points=" << data.size() << '\n'
        << "training=" << data.training_ids.size() << '\n'
        << "edges=" << report.num_edges << '\n';
    const auto& bp = std::get<BpReport>(report.result.diagnostics);
    rep << "bp_converged=" << (bp.converged ? 1 : 0) << '\n' << "bp_iterations=" << bp.iterations << '\n';
    if (report.accuracy)
      rep << "accuracy=" << format_double(*report.accuracy) << '\n'
          << "overlap=" << format_double(*report.result.overlap) << '\n';
  }
  out.close();
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Clustering from sparse pairwise measurements" };
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value file; command-line flags take precedence");

  Cli cli;
  auto& c = cli.config;
  auto opt = [&](auto&&... args) { return app.add_option(std::forward<decltype(args)>(args)...); };

  opt("--seed", c.seed, "Base seed")->capture_default_str();
  opt("--n", c.n, "Number of items")->capture_default_str();
  opt("--alpha", cli.alpha, "Average degree");
  opt("--alpha-grid", cli.alpha_grid, "Comma-separated increasing degrees for sweep");
  app.add_flag("--alpha-relative", c.alpha_relative, "Read --alpha and --alpha-grid as multiples of the critical degree");
  opt("--k", c.k, "Number of clusters")->capture_default_str();
  opt("--trials", c.trials, "Trials per grid point")->capture_default_str();
  opt("--methods", cli.methods, "Comma-separated subset of bp,nb,bh")->capture_default_str();
  opt("--out", cli.out, "Output path (default stdout)");
  opt("--format", cli.format, "Output format")->check(CLI::IsMember({ "csv" }))->capture_default_str();
  app.add_flag("--no-timing", cli.no_timing, "Write 0 for wall-clock times");

  opt("--model", c.model, "censored or gaussian")->capture_default_str();
  opt("--epsilon", c.epsilon, "Flip probability of the censored model")->capture_default_str();
  opt("--mean-in", c.mean_in, "Gaussian model: same-cluster mean")->capture_default_str();
  opt("--mean-out", c.mean_out, "Gaussian model: cross-cluster mean")->capture_default_str();
  opt("--var-in", c.var_in, "Gaussian model: same-cluster variance")->capture_default_str();
  opt("--var-out", c.var_out, "Gaussian model: cross-cluster variance")->capture_default_str();

  opt("--bp-max-iter", c.bp.max_iter, "BP sweep limit")->capture_default_str();
  opt("--bp-tol", c.bp.tol, "BP stops when the largest message change is below this")->capture_default_str();
  opt("--bp-damping", c.bp.damping, "Weight of the old message in each update")->capture_default_str();
  opt("--bp-noise", c.bp.noise, "Size of the random perturbation of the initial messages")->capture_default_str();
  opt("--kmeans-restarts", c.spectral.kmeans.restarts, "k-means restarts")->capture_default_str();
  opt("--kmeans-max-iter", c.spectral.kmeans.max_iter, "k-means iterations per restart")->capture_default_str();
  app.add_flag("--normalize-rows", c.spectral.kmeans.normalize_rows, "Unit-normalize embedding rows before k-means");
  opt("--eig-tol", c.spectral.tol, "Relative residual tolerance of the eigensolvers")->capture_default_str();
  opt("--eig-max-iter", c.spectral.max_iter, "Eigensolver restart limit")->capture_default_str();
  opt("--max-pairs", c.spectral.max_pairs, "Eigenpairs kept (0 means k+2)")->capture_default_str();
  opt("--weight-clamp", c.spectral.weight_clamp, "Clamp |w| for the Bethe Hessian (0 disables)")->capture_default_str();

  opt("--graph", cli.graph_path, "Graph file (run, spectrum)");
  opt("--labels", cli.labels_path, "Ground-truth label file (run, spectrum)");
  opt("--labels-out", cli.labels_out, "Label output path (generate, cluster-points)");
  opt("--bh-out", cli.bh_out, "Bethe Hessian spectrum path (spectrum)");

  opt("--points", cli.points_path, "Point CSV (cluster-points)");
  app.add_flag("--header", cli.header, "Point CSV has a header row");
  app.add_flag("--no-label-column", cli.no_label_column, "Point CSV has no label column");
  opt("--truth", cli.truth_path, "Full ground-truth label file for the accuracy report");
  opt("--train-fraction", cli.train_fraction, "Keep labels on this fraction of rows; the rest become test truth");
  opt("--bandwidth", cli.kde.bandwidth, "Kernel bandwidth (0 means automatic)")->capture_default_str();
  opt("--bins", cli.kde.bins, "Bins of the estimated densities")->capture_default_str();
  app.add_flag("--edge-pairs-only", cli.edge_pairs_only, "Estimate densities from sampled edges only");
  app.add_flag("--pooled-fallback", cli.kde.pooled_fallback, "Use the pooled density for class pairs without samples");

  int code = 0;
  auto sub = [&](const char* name, const char* help, int (*fn)(Cli&)) {
    app.add_subcommand(name, help)->fallthrough()->callback([&, fn] { code = fn(cli); });
  };
  sub("generate", "Sample a planted instance and write graph and label files", cmd_generate);
  sub("run", "Run methods on one instance", cmd_run);
  sub("sweep", "Average overlaps over a degree grid", cmd_sweep);
  sub("spectrum", "Dump leading eigenvalues of B and H(1)", cmd_spectrum);
  sub("cluster-points", "Cluster a point cloud from sparse distance measurements", cmd_cluster_points);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return code;
}
