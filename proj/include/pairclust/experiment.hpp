#pragma once

#include "pairclust/bethe_hessian.hpp"
#include "pairclust/bp.hpp"
#include "pairclust/cluster.hpp"
#include "pairclust/nb_operator.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace pairclust {

struct ExperimentConfig
{
  std::string model = "censored"; // censored | gaussian
  int k = 2;
  double epsilon = 0.1;
  double mean_in = 1.5;
  double mean_out = 0.0;
  double var_in = 1.0;
  double var_out = 1.0;

  std::size_t n = 1000;
  std::optional<double> alpha;
  std::vector<double> alpha_grid;
  //! Interpret alpha and alpha_grid as multiples of the critical degree.
  bool alpha_relative = false;
  int trials = 1;
  std::vector<Method> methods{ Method::bp, Method::nb, Method::bh };
  std::uint64_t seed = 1;

  BpSettings bp;
  SpectralSettings spectral;
  bool timing = true;
  int threads = 1;

  //! Throws configuration on a bad combination.
  void validate() const;
  ModelParams params(double alpha) const;
  //! Absolute degree for a configured value.
  double resolve_alpha(double value) const;
  std::vector<double> resolved_grid() const;
};

std::uint64_t trial_seed(std::uint64_t base, int trial);

ClusterResult run_method(Method method,
                         const MeasurementGraph& graph,
                         const ModelParams& params,
                         const ExperimentConfig& config,
                         std::uint64_t seed,
                         const Labels* truth);

struct RunRow
{
  Method method = Method::bp;
  std::size_t n = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  double overlap = 0.0; // NaN on failure or without truth
  std::string status;   // converged flag, r=<count>, or an error tag
  bool failed = false;
  double wallclock_ms = 0.0;
};

std::vector<RunRow> run_methods(const ExperimentConfig& config,
                                const MeasurementGraph& graph,
                                const ModelParams& params,
                                const Labels* truth,
                                std::uint64_t seed);

void write_run_csv(std::ostream& out, const std::vector<RunRow>& rows);

struct SweepRaw
{
  double alpha;
  int trial;
  RunRow run;
};

struct SweepAggregate
{
  Method method;
  double alpha;
  double mean;
  double stderr_;
  int succeeded;
  int trials;
};

struct SweepTable
{
  std::vector<SweepRaw> raw;
  std::vector<SweepAggregate> aggregate;
};

//! Failed runs score overlap 0 in the aggregates.
SweepTable run_sweep(const ExperimentConfig& config);
void write_sweep_csv(std::ostream& out, const ExperimentConfig& config, const SweepTable& sweep);

struct SpectrumDump
{
  struct NbRow
  {
    double re, im;
    bool is_real;
    double residual;
    bool converged;
  };
  struct BhRow
  {
    double value, residual;
    bool converged;
  };
  std::vector<NbRow> nb;
  std::vector<BhRow> bh;
  std::string nb_error;
  std::string bh_error;
};

//! Leading NB Ritz values and smallest H(1) eigenvalues.
SpectrumDump compute_spectrum(const MeasurementGraph& graph,
                              const ModelParams& params,
                              const ExperimentConfig& config,
                              bool want_nb,
                              bool want_bh);

void write_nb_spectrum_csv(std::ostream& out, const SpectrumDump& dump);
void write_bh_spectrum_csv(std::ostream& out, const SpectrumDump& dump);

//! Thread count from PAIRCLUST_THREADS, at least 1.
int env_thread_count();

} // namespace pairclust
