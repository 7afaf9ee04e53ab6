#include "pairclust/experiment.hpp"

#include "pairclust/error.hpp"
#include "pairclust/graph_io.hpp"
#include "pairclust/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

namespace pairclust {

void ExperimentConfig::validate() const
{
  if (model != "censored" && model != "gaussian")
    throw Error(ErrorCode::configuration, "model must be censored or gaussian, got '" + model + "'");
  if (k < 2)
    throw Error(ErrorCode::configuration, "k must be at least 2");
  if (trials < 1)
    throw Error(ErrorCode::configuration, "trials must be >= 1");
  if (methods.empty())
    throw Error(ErrorCode::configuration, "methods must not be empty");
  for (std::size_t i = 1; i < alpha_grid.size(); ++i)
    if (!(alpha_grid[i] > alpha_grid[i - 1]))
      throw Error(ErrorCode::configuration, "alpha grid must be strictly increasing");
  if (threads < 1)
    throw Error(ErrorCode::configuration, "thread count must be >= 1");
}

ModelParams ExperimentConfig::params(double a) const
{
  try {
    if (model == "censored")
      return ModelParams::censored(k, a, epsilon);
    return ModelParams::gaussian(k, a, mean_in, mean_out, var_in, var_out);
  } catch (const Error& e) {
    throw Error(ErrorCode::configuration, e.what());
  }
}

double ExperimentConfig::resolve_alpha(double value) const
{
  if (!alpha_relative)
    return value;
  return value * critical_degree(params(1.0));
}

std::vector<double> ExperimentConfig::resolved_grid() const
{
  std::vector<double> grid;
  for (double a : alpha_grid)
    grid.push_back(resolve_alpha(a));
  return grid;
}

std::uint64_t trial_seed(std::uint64_t base, int trial)
{
  return base + static_cast<std::uint64_t>(trial) * 1000000007ULL;
}

ClusterResult run_method(Method method,
                         const MeasurementGraph& graph,
                         const ModelParams& params,
                         const ExperimentConfig& config,
                         std::uint64_t seed,
                         const Labels* truth)
{
  switch (method) {
    case Method::bp: {
      BpResult run = bp_run(graph, params, seed, config.bp);
      ClusterResult result;
      result.method = Method::bp;
      result.labels = decode_marginals(run.marginals);
      if (truth)
        result.overlap = overlap(result.labels, *truth, params.k());
      result.diagnostics = run.report;
      return result;
    }
    case Method::nb:
      return nb_cluster(graph, params, config.spectral, seed, truth);
    case Method::bh:
      return bh_cluster(graph, params, config.spectral, seed, truth);
  }
  throw Error(ErrorCode::configuration, "unknown method");
}

namespace {

std::string status_of(const ClusterResult& result)
{
  if (const auto* bp = std::get_if<BpReport>(&result.diagnostics))
    return bp->converged ? "converged" : "not-converged";
  const auto& spec = std::get<SpectralReport>(result.diagnostics);
  return "r=" + std::to_string(spec.eigenvalues.size());
}

} // namespace

std::vector<RunRow> run_methods(const ExperimentConfig& config,
                                const MeasurementGraph& graph,
                                const ModelParams& params,
                                const Labels* truth,
                                std::uint64_t seed)
{
  std::vector<RunRow> rows;
  for (Method method : config.methods) {
    RunRow row;
    row.method = method;
    row.n = graph.num_nodes();
    row.alpha = params.alpha();
    row.seed = seed;
    row.overlap = std::numeric_limits<double>::quiet_NaN();
    auto start = std::chrono::steady_clock::now();
    try {
      ClusterResult result = run_method(method, graph, params, config, seed, truth);
      if (result.overlap)
        row.overlap = *result.overlap;
      row.status = status_of(result);
    } catch (const Error& e) {
      // configuration problems are not data
      if (e.code() == ErrorCode::configuration)
        throw;
      row.failed = true;
      row.status = std::string(to_string(e.code()));
    }
    if (config.timing)
      row.wallclock_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string format_ms(double ms)
{
  return format_double(std::round(ms * 1000.0) / 1000.0);
}

} // namespace

void write_run_csv(std::ostream& out, const std::vector<RunRow>& rows)
{
  out << "method,n,alpha,seed,overlap,converged_or_r,wallclock_ms\n";
  for (const auto& row : rows)
    out << to_string(row.method) << ',' << row.n << ',' << format_double(row.alpha) << ',' << row.seed << ','
        << format_double(row.overlap) << ',' << row.status << ',' << format_ms(row.wallclock_ms) << '\n';
}

SweepTable run_sweep(const ExperimentConfig& config)
{
  config.validate();
  if (config.alpha_grid.empty())
    throw Error(ErrorCode::configuration, "sweep needs an alpha grid");
  const auto grid = config.resolved_grid();

  struct Job
  {
    std::size_t point;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < grid.size(); ++p)
    for (int t = 0; t < config.trials; ++t)
      jobs.push_back({ p, t });

  std::vector<std::vector<RunRow>> results(jobs.size());
  std::atomic<std::size_t> next{ 0 };
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size())
        return;
      try {
        const Job& job = jobs[idx];
        std::uint64_t seed = trial_seed(config.seed, job.trial);
        ModelParams params = config.params(grid[job.point]);
        PlantedInstance inst = sample_instance(params, config.n, seed);
        results[idx] = run_methods(config, inst.graph, params, &inst.truth, seed);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
        next = jobs.size();
      }
    }
  };
  int threads = std::min<int>(config.threads, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(worker);
    for (auto& th : pool)
      th.join();
  }
  if (error)
    std::rethrow_exception(error);

  SweepTable sweep;
  for (std::size_t idx = 0; idx < jobs.size(); ++idx)
    for (auto& row : results[idx])
      sweep.raw.push_back({ grid[jobs[idx].point], jobs[idx].trial, std::move(row) });

  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (Method method : config.methods) {
      std::vector<double> values;
      int ok = 0;
      for (const auto& r : sweep.raw) {
        if (r.alpha != grid[p] || r.run.method != method)
          continue;
        bool good = !r.run.failed && std::isfinite(r.run.overlap);
        values.push_back(good ? r.run.overlap : 0.0);
        ok += good;
      }
      double mean = 0.0;
      for (double v : values)
        mean += v;
      mean /= static_cast<double>(values.size());
      double se = 0.0;
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values)
          ss += (v - mean) * (v - mean);
        se = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
      }
      sweep.aggregate.push_back({ method, grid[p], mean, se, ok, static_cast<int>(values.size()) });
    }
  }
  return sweep;
}

void write_sweep_csv(std::ostream& out, const ExperimentConfig& config, const SweepTable& sweep)
{
  out << "row,method,n,alpha,trial,seed,overlap,stderr,status,wallclock_ms\n";
  for (const auto& r : sweep.raw)
    out << "raw," << to_string(r.run.method) << ',' << config.n << ',' << format_double(r.alpha) << ','
        << r.trial << ',' << r.run.seed << ',' << format_double(r.run.overlap) << ",," << r.run.status << ','
        << format_ms(r.run.wallclock_ms) << '\n';
  for (const auto& a : sweep.aggregate)
    out << "mean," << to_string(a.method) << ',' << config.n << ',' << format_double(a.alpha) << ",,"
        << config.seed << ',' << format_double(a.mean) << ',' << format_double(a.stderr_) << ",ok=" << a.succeeded
        << '/' << a.trials << ",\n";
}

SpectrumDump compute_spectrum(const MeasurementGraph& graph,
                              const ModelParams& params,
                              const ExperimentConfig& config,
                              bool want_nb,
                              bool want_bh)
{
  SpectrumDump dump;
  const int pairs = config.spectral.max_pairs > 0 ? config.spectral.max_pairs : params.k() + 2;
  if (want_nb && graph.num_edges() > 0) {
    try {
      NbOperator op(graph, edge_weights(graph, params));
      EigenReport report =
        krylov_nonsymmetric(op.as_linear_map(), pairs + 4, config.spectral.tol, config.spectral.max_iter, config.seed);
      for (const auto& p : report.pairs)
        dump.nb.push_back({ p.value.real(), p.value.imag(), p.is_real(1e-6), p.residual, p.converged });
    } catch (const Error& e) {
      dump.nb_error = std::string(to_string(e.code()));
    }
  }
  if (want_bh && graph.num_edges() > 0) {
    try {
      BetheHessian H = build_H(graph, params, 1.0, BetheSettings{ config.spectral.weight_clamp });
      EigenReport report;
      if (H.size() < 500)
        report = dense_eig_oracle(Eigen::MatrixXd(H.matrix), true);
      else
        report = lanczos_symmetric_extremal(H.as_linear_map(), Side::smallest, pairs, config.spectral.tol,
                                            config.spectral.max_iter, config.seed);
      for (std::size_t i = 0; i < report.pairs.size() && static_cast<int>(i) < pairs; ++i)
        dump.bh.push_back({ report.pairs[i].value.real(), report.pairs[i].residual, report.pairs[i].converged });
    } catch (const Error& e) {
      dump.bh_error = std::string(to_string(e.code()));
    }
  }
  return dump;
}

void write_nb_spectrum_csv(std::ostream& out, const SpectrumDump& dump)
{
  out << "re,im,is_real,residual,converged\n";
  for (const auto& r : dump.nb)
    out << format_double(r.re) << ',' << format_double(r.im) << ',' << (r.is_real ? 1 : 0) << ','
        << format_double(r.residual) << ',' << (r.converged ? 1 : 0) << '\n';
}

void write_bh_spectrum_csv(std::ostream& out, const SpectrumDump& dump)
{
  out << "value,residual,converged\n";
  for (const auto& r : dump.bh)
    out << format_double(r.value) << ',' << format_double(r.residual) << ',' << (r.converged ? 1 : 0) << '\n';
}

int env_thread_count()
{
  const char* text = std::getenv("PAIRCLUST_THREADS");
  if (!text || !*text)
    return 1;
  char* end = nullptr;
  long v = std::strtol(text, &end, 10);
  if (*end != '\0' || v < 1)
    throw Error(ErrorCode::configuration, std::string("PAIRCLUST_THREADS must be a positive integer, got '") + text + "'");
  return static_cast<int>(std::min<long>(v, 256));
}

} // namespace pairclust
