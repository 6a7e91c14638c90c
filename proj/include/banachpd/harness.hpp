// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: seeded problem builders, run artifacts (CSV traces,
// JSON metadata, reconstruction dumps, gnuplot scripts), a cached reference
// minimizer, the sigma/space iteration-count table, a (sigma, tau) sweep,
// and the command-line entry point.
//
// Artifact determinism: every number is printed with %.17g in the C locale,
// so a (config, seed) pair yields byte-identical files on the same build.
// Wall-clock timings break that, so the trace's elapsed_s column is written
// as 0 unless the config opts in with timing=true; totals always go to the
// metadata, which makes no byte-identity promise.
#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "banachpd/config.hpp"
#include "banachpd/fresnel.hpp"
#include "banachpd/irnm.hpp"
#include "banachpd/noise.hpp"
#include "banachpd/operators.hpp"
#include "banachpd/solver.hpp"

namespace banachpd {

// ---- artifact writers -------------------------------------------------

// Columns: k,elapsed_s,err_ref,misfit,gap,tau_k,sigma_k.  Non-finite values
// print as nan/inf; the column set is append-only.
void write_trace_csv(std::ostream& os, const std::vector<IterateRecord>& trace,
                     bool timing = false);
void write_trace_csv(const std::string& path, const std::vector<IterateRecord>& trace,
                     bool timing = false);

// Columns: i,value.
void write_vector_csv(std::ostream& os, const Vector& v);
void write_vector_csv(const std::string& path, const Vector& v);

struct RunSummary {
  double op_norm = 0.0;
  double sigma = 0.0, tau = 0.0, C = 0.0;
  StopReason reason = StopReason::max_iters;
  long iters = 0;
  double final_err = std::numeric_limits<double>::quiet_NaN();
  double final_misfit = std::numeric_limits<double>::quiet_NaN();
  double elapsed_s = 0.0;
  std::string note;
  std::vector<std::pair<std::string, double>> extra;  // lands in meta "extra"
};

// Full config echo plus solver facts; non-finite numbers serialize as null.
std::string run_metadata_json(const ExperimentConfig& cfg, const RunSummary& s);

// Writes <out_dir>/<stem>.{trace.csv,meta.json,recon.csv,plot.gp} as
// applicable and returns the paths written.
std::vector<std::string> write_run_artifacts(const ExperimentConfig& cfg,
                                             const std::string& stem, const SolveResult& r,
                                             const RunSummary& s,
                                             const Vector* reconstruction = nullptr);

// Gnuplot script plotting column 3 (err_ref) of each CSV against column 1.
std::string write_plot_script(const std::string& dir, const std::string& name,
                              const std::vector<std::string>& csv_names);

// ---- reference minimizer ----------------------------------------------

struct ReferenceResult {
  Vector x;
  long iters = 0;
  bool converged = false;      // solver stagnated within budget
  bool from_cache = false;
  bool cache_written = false;  // only converged results are cached
  std::string cache_file;      // empty when BANACH_PD_CACHE is unset
};

// Long stagnation-guarded solve used as ground truth for iteration counts.
// budget must be >= 100000.  With BANACH_PD_CACHE set, results are stored as
// %.17g text under <dir>/<key>.ref and reread bit-identically; a changed key
// is a different file, so stale entries can never be returned.
ReferenceResult reference_minimizer(const SaddleProblem& P, const SolverSchedule& schedule,
                                    long budget, const std::string& cache_key);

// hex(config_hash) + "-" + role, filesystem-safe.
std::string cache_key_for(const ExperimentConfig& cfg, const std::string& role);

// ---- seeded problem builders -------------------------------------------

// exp(-5|t|) kernel, three fixed spikes, clean data; noise is the caller's.
struct DeconvSetup {
  LinearOp T;
  SpaceDescriptor X, Y;
  Vector truth, y_clean;
};
DeconvSetup build_deconv(const ExperimentConfig& cfg);

// Seeded dense rectangular operator and data, no exact solution attached.
struct QuadraticSetup {
  Matrix A;
  LinearOp T;
  SpaceDescriptor X, Y;
  Vector y;
};
QuadraticSetup build_quadratic(const ExperimentConfig& cfg);

// Near-field intensity map with a smooth compactly supported phase.
struct PhaseSetup {
  NonlinearOp T;
  FresnelConfig fresnel;
  SpaceDescriptor X, Y;
  Vector truth, y_clean;
};
PhaseSetup build_phase(const ExperimentConfig& cfg);

// The builtin deconvolution step presets are calibrated against a reference
// discretization whose l2 operator norm is this value; the harness rescales
// a configured sigma by calibration_norm() / measured_norm so sigma * ||T||
// is grid-independent.
double calibration_norm();

// ---- sigma/space iteration table ---------------------------------------

struct Table1Cell {
  std::string space;      // "l2" or "l<r>"
  double sigma_cal = 0;   // configured, calibrated units
  double sigma = 0;       // effective, this grid
  double tau = 0;
  std::vector<double> iter_counts;  // per repetition; budget when not converged
  double median = 0, mean = 0;
  int budget_hits = 0;
};

struct Table1Result {
  std::vector<Table1Cell> cells;  // sigma-major, l2 arm before the l^r arm
  bool ordering_holds = false;    // strictly smaller l^r median at every sigma
  bool references_ok = false;     // every repetition's reference stagnated
  double op_norm_l2 = 0, op_norm_lr = 0, sigma_scale = 0;
  std::string note;
};

// Repetitions run concurrently on derived seeds; aggregation is by
// repetition index, so results are independent of scheduling.
Table1Result table1_experiment(const ExperimentConfig& cfg);
std::string table1_csv(const Table1Result& t);

// ---- step-size sweep ----------------------------------------------------

struct SweepResult {
  std::vector<double> sigmas, taus;
  Matrix iters;  // (i,j): iterations to ref_tol; inf = budget, nan = premise fails
};
SweepResult grid_search(const SaddleProblem& P, const Vector& x_ref, double ref_tol,
                        const std::vector<double>& sigmas, const std::vector<double>& taus,
                        double C, long budget);

// ---- CLI ----------------------------------------------------------------

// Exit codes: 0 success, 1 configuration/usage error, 2 solver divergence.
int cli_main(int argc, const char* const* argv);

}  // namespace banachpd
