// SPDX-License-Identifier: Apache-2.0
#include "banachpd/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "banachpd/fresnel.hpp"
#include "banachpd/version.hpp"

#include <Eigen/Cholesky>

namespace fs = std::filesystem;

namespace banachpd {
namespace {

using nlohmann::json;

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex16(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string space_label(const SpaceDescriptor& X) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "l%g", X.r);
  return buf;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

// The run's wall time, kept out of the reproducible artifacts.
double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int checked_iters(long iters, const char* who) {
  if (iters < 0 || iters > std::numeric_limits<int>::max())
    throw std::invalid_argument(std::string(who) + ": iteration budget out of range");
  return static_cast<int>(iters);
}

}  // namespace

// ---- artifact writers -------------------------------------------------

void write_trace_csv(std::ostream& os, const std::vector<IterateRecord>& trace, bool timing) {
  os << "k,elapsed_s,err_ref,misfit,gap,tau_k,sigma_k\n";
  char line[256];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k,
                  timing ? r.elapsed_s : 0.0, r.err_ref, r.misfit, r.gap, r.tau, r.sigma);
    os << line;
  }
}

void write_trace_csv(const std::string& path, const std::vector<IterateRecord>& trace,
                     bool timing) {
  auto os = open_out(path);
  write_trace_csv(os, trace, timing);
}

void write_vector_csv(std::ostream& os, const Vector& v) {
  os << "i,value\n";
  char line[64];
  for (Index i = 0; i < v.size(); ++i) {
    std::snprintf(line, sizeof line, "%ld,%.17g\n", static_cast<long>(i), v[i]);
    os << line;
  }
}

void write_vector_csv(const std::string& path, const Vector& v) {
  auto os = open_out(path);
  write_vector_csv(os, v);
}

std::string run_metadata_json(const ExperimentConfig& cfg, const RunSummary& s) {
  json j;
  j["config"] = json::parse(config_json(cfg));
  j["config_hash"] = hex16(config_hash(cfg));
  j["library_version"] = version_string;
  j["op_norm"] = s.op_norm;
  j["sigma"] = s.sigma;
  j["tau"] = s.tau;
  j["C"] = s.C;
  j["termination"] = to_string(s.reason);
  j["iters"] = s.iters;
  j["final_err"] = s.final_err;
  j["final_misfit"] = s.final_misfit;
  j["elapsed_s"] = s.elapsed_s;
  j["note"] = s.note;
  json extra = json::object();
  for (const auto& [k, v] : s.extra) extra[k] = v;
  j["extra"] = extra;
  return j.dump(2) + "\n";
}

std::vector<std::string> write_run_artifacts(const ExperimentConfig& cfg, const std::string& stem,
                                             const SolveResult& r, const RunSummary& s,
                                             const Vector* reconstruction) {
  fs::create_directories(cfg.out_dir);
  std::vector<std::string> written;
  const std::string base = cfg.out_dir + "/" + stem;
  if (!r.trace.empty()) {
    write_trace_csv(base + ".trace.csv", r.trace, cfg.timing);
    written.push_back(base + ".trace.csv");
  }
  {
    auto os = open_out(base + ".meta.json");
    os << run_metadata_json(cfg, s);
    written.push_back(base + ".meta.json");
  }
  if (reconstruction && cfg.dump_reconstruction) {
    write_vector_csv(base + ".recon.csv", *reconstruction);
    written.push_back(base + ".recon.csv");
  }
  if (!r.trace.empty())
    written.push_back(write_plot_script(cfg.out_dir, stem + ".plot.gp", {stem + ".trace.csv"}));
  return written;
}

std::string write_plot_script(const std::string& dir, const std::string& name,
                              const std::vector<std::string>& csv_names) {
  fs::create_directories(dir);
  const std::string path = dir + "/" + name;
  auto os = open_out(path);
  os << "# gnuplot script; the data lives in the CSV files next to it\n"
        "set datafile separator ','\n"
        "set key top right\n"
        "set logscale y\n"
        "set xlabel 'iteration k'\n"
        "set ylabel 'error vs reference'\n"
        "plot ";
  for (size_t i = 0; i < csv_names.size(); ++i) {
    if (i) os << ", \\\n     ";
    os << "'" << csv_names[i] << "' using 1:3 with lines title '" << csv_names[i] << "'";
  }
  os << "\n";
  return path;
}

// ---- reference minimizer ----------------------------------------------

ReferenceResult reference_minimizer(const SaddleProblem& P, const SolverSchedule& schedule,
                                    long budget, const std::string& cache_key) {
  if (budget < 100000)
    throw std::invalid_argument("reference_minimizer: budget must be >= 100000");
  ReferenceResult out;
  const char* dir = std::getenv("BANACH_PD_CACHE");
  if (dir && *dir) {
    fs::create_directories(dir);
    out.cache_file = std::string(dir) + "/" + cache_key + ".ref";
    std::ifstream in(out.cache_file);
    if (in) {
      std::string key;
      long n = -1;
      if (in >> key >> n && key == cache_key && n == P.X().dim()) {
        Vector x(n);
        bool ok = true;
        for (Index i = 0; i < n && ok; ++i) ok = static_cast<bool>(in >> x[i]);
        if (ok) {
          out.x = std::move(x);
          out.converged = true;  // only stagnated solves are ever written
          out.from_cache = true;
          return out;
        }
      }
      // Malformed or mismatched entries fall through to a fresh solve.
    }
  }

  // A stagnation exit is only trusted after a short guard-off resume leg
  // fails to move the iterate: thresholding solves can freeze the primal for
  // a few iterations while the dual is still in transit.  Resuming assumes
  // constant steps, so the confirmation loop is v1-only.
  const bool confirmable = schedule.variant == SolverSchedule::Variant::v1;
  long remaining = budget;
  StopRule stop;
  stop.keep_trace = false;
  stop.start = warm_start(P);
  SolveResult r;
  bool stationary = false;
  while (remaining > 0) {
    stop.max_iters = checked_iters(remaining, "reference_minimizer");
    stop.stagnation_rtol = 1e-13;
    r = run_schedule(P, schedule, stop);
    out.iters += r.iters;
    remaining -= r.iters;
    if (r.reason != StopReason::stagnation) break;
    if (!confirmable) {
      stationary = true;
      break;
    }
    if (remaining <= 0) break;  // stagnated but unconfirmed: not trusted
    StopRule confirm;
    confirm.keep_trace = false;
    confirm.stagnation_rtol = -1.0;
    confirm.max_iters = static_cast<int>(std::min<long>(2000, remaining));
    confirm.start = r.state;
    const SolveResult probe = run_schedule(P, schedule, confirm);
    out.iters += probe.iters;
    remaining -= probe.iters;
    const double drift =
        norm(P.X(), Vector(probe.state.x - r.state.x)) / std::max(1.0, norm(P.X(), r.state.x));
    if (drift <= 1e-9) {
      stationary = true;
      break;
    }
    stop.start = probe.state;  // false freeze: keep iterating from where it moved
  }
  out.x = r.state.x;
  out.converged = stationary;

  if (!out.cache_file.empty() && out.converged) {
    const std::string tmp = out.cache_file + ".tmp";
    {
      auto os = open_out(tmp);
      os << cache_key << "\n" << out.x.size() << "\n";
      for (Index i = 0; i < out.x.size(); ++i) os << num17(out.x[i]) << "\n";
    }
    fs::rename(tmp, out.cache_file);
    out.cache_written = true;
  }
  return out;
}

std::string cache_key_for(const ExperimentConfig& cfg, const std::string& role) {
  std::string key = hex16(config_hash(cfg)) + "-";
  for (char c : role)
    key += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')
               ? c
               : '_';
  return key;
}

// ---- seeded problem builders -------------------------------------------

double calibration_norm() { return 39.2; }

DeconvSetup build_deconv(const ExperimentConfig& cfg) {
  DeconvSetup s;
  s.T = conv_operator(5.0, cfg.grid.n_x, cfg.grid.n_y, cfg.grid.unit_quadrature);
  s.X = cfg.space.weights.empty()
            ? make_lr(cfg.space.r, cfg.grid.n_x)
            : make_weighted_lr(cfg.space.r, Eigen::Map<const Vector>(cfg.space.weights.data(),
                                                                     cfg.space.weights.size()));
  if (s.X.dim() != cfg.grid.n_x)
    throw ConfigError("config: space weights do not match grid n_x");
  s.Y = make_lr(2.0, cfg.grid.n_y);
  s.T.domain = s.X;
  s.T.range = s.Y;
  s.truth = Vector::Zero(cfg.grid.n_x);
  const double pos[3] = {0.25, 0.6, 0.8};
  const double val[3] = {1.0, -0.7, 0.5};
  for (int i = 0; i < 3; ++i)
    s.truth[static_cast<Index>(std::lround(pos[i] * (cfg.grid.n_x - 1)))] += val[i];
  s.y_clean = s.T.apply(s.truth);
  return s;
}

QuadraticSetup build_quadratic(const ExperimentConfig& cfg) {
  QuadraticSetup s;
  s.A = seeded_uniform_matrix(cfg.grid.n_y, cfg.grid.n_x, split_seed(cfg.seed, 9001));
  s.X = make_lr(cfg.space.r, cfg.grid.n_x);
  s.Y = make_lr(2.0, cfg.grid.n_y);
  s.T = matrix_op(s.A, s.X, s.Y);
  s.y = seeded_uniform(cfg.grid.n_y, split_seed(cfg.seed, 9002));
  return s;
}

PhaseSetup build_phase(const ExperimentConfig& cfg) {
  PhaseSetup s;
  s.fresnel.n = cfg.grid.n;
  s.fresnel.validate();
  const Index n = cfg.grid.n;
  s.truth = Vector::Zero(n * n);
  const double c = 0.5 * (n - 1.0), w = n / 4.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double u = (i - c) / w, v = (j - c) / w;
      s.truth[i * n + j] = 0.5 * std::exp(-(u * u + v * v));
    }
  s.X = make_sobolev(cfg.space.r, cfg.space.sobolev_s, 2, n);
  s.Y = make_lr(2.0, n * n);
  s.T = phase_operator(s.fresnel);
  s.T.domain = s.X;
  s.T.range = s.Y;
  s.y_clean = s.T.apply(s.truth);
  return s;
}

// ---- sigma/space iteration table ---------------------------------------

namespace {

// Envelope products sigma*tau*||T||^2 used per arm; both sit strictly inside
// the admissible window for C = 1 and close to its fast edge.
constexpr double kTableProductL2 = 0.986;
constexpr double kTableProductLr = 0.95;

struct TableArm {
  SpaceDescriptor X;
  double op_norm = 0.0;
  double product = 0.0;
};

SolverSchedule table_reference_schedule(double op_norm) {
  // The objective does not involve the primal geometry, so the reference is
  // computed in l2.  Balanced steps keep the dual contraction rate at
  // sigma = sqrt(0.9)/||T|| per iteration; a lopsided large tau can slam the
  // primal to zero for consecutive iterates and fake a stagnation.
  SolverSchedule s;
  s.variant = SolverSchedule::Variant::v1;
  s.C = 1.0;
  s.tau = std::sqrt(0.9) / op_norm;
  s.sigma = s.tau;
  return s;
}

}  // namespace

Table1Result table1_experiment(const ExperimentConfig& cfg) {
  DeconvSetup S = build_deconv(cfg);
  const SpaceDescriptor X2 = make_lr(2.0, cfg.grid.n_x);
  const PowerMethodResult pm2 = power_method(S.T, X2, S.Y);
  const PowerMethodResult pmr = power_method(S.T, S.X, S.Y);

  Table1Result out;
  out.op_norm_l2 = pm2.value;
  out.op_norm_lr = pmr.value;
  out.sigma_scale = calibration_norm() / pm2.value;

  const std::vector<double> sigma_cal = {0.007, 0.0023, 0.00075};
  const TableArm arms[2] = {{X2, pm2.value, kTableProductL2},
                            {S.X, pmr.value, kTableProductLr}};
  const int R = cfg.reps;
  const int cells = static_cast<int>(sigma_cal.size()) * 2;
  const int budget = checked_iters(cfg.iters, "table1_experiment");

  struct RepOut {
    bool ref_ok = false;
    std::vector<double> iters;
  };
  std::vector<RepOut> rep(R);

  auto run_rep = [&](int k) {
    RepOut ro;
    ro.iters.assign(cells, static_cast<double>(budget));
    const std::uint64_t sk = split_seed(cfg.seed, static_cast<std::uint64_t>(k));
    const Vector y = make_noise(S.y_clean, cfg.noise, sk);

    TikhonovSpec base;
    base.T = S.T;
    base.Y = S.Y;
    base.fidelity = DataFidelitySpec::quadratic(y);
    base.penalty = PrimalFnSpec::l1();
    base.alpha = cfg.alpha;

    TikhonovSpec ref = base;
    ref.X = X2;
    ref.schedule = table_reference_schedule(pm2.value);
    SaddleProblem RP = assemble_tikhonov(ref);
    RP.T.norm_estimate = pm2.value;
    ExperimentConfig ck = cfg;
    ck.seed = sk;
    const ReferenceResult rr =
        reference_minimizer(RP, ref.schedule, cfg.ref_budget, cache_key_for(ck, "table1-ref"));
    ro.ref_ok = rr.converged;

    int cell = 0;
    for (double sc : sigma_cal) {
      const double sigma = sc * out.sigma_scale;
      for (const TableArm& arm : arms) {
        TikhonovSpec ts = base;
        ts.X = arm.X;
        ts.schedule.variant = SolverSchedule::Variant::v1;
        ts.schedule.C = 1.0;
        ts.schedule.sigma = sigma;
        ts.schedule.tau = arm.product / (sigma * arm.op_norm * arm.op_norm);
        SaddleProblem P = assemble_tikhonov(ts);
        P.T.norm_estimate = arm.op_norm;
        StopRule st;
        st.max_iters = budget;
        st.x_ref = rr.x;
        st.ref_tol = cfg.ref_tol;
        st.stagnation_rtol = -1.0;  // counting run: only the tolerance or the budget stop it
        st.keep_trace = false;
        st.start = warm_start(P);
        const SolveResult r = run_schedule(P, ts.schedule, st);
        if (r.reason == StopReason::reference_tol) ro.iters[cell] = r.iters;
        ++cell;
      }
    }
    rep[k] = std::move(ro);
  };

  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()), R);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int k; (k = next.fetch_add(1)) < R;) run_rep(k);
    });
  for (auto& t : pool) t.join();

  out.references_ok = std::all_of(rep.begin(), rep.end(), [](const RepOut& r) { return r.ref_ok; });
  out.cells.resize(cells);
  int cell = 0;
  for (double sc : sigma_cal) {
    for (const TableArm& arm : arms) {
      Table1Cell& c = out.cells[cell];
      c.space = space_label(arm.X);
      c.sigma_cal = sc;
      c.sigma = sc * out.sigma_scale;
      c.tau = arm.product / (c.sigma * arm.op_norm * arm.op_norm);
      for (const RepOut& r : rep) {
        c.iter_counts.push_back(r.iters[cell]);
        if (r.iters[cell] >= budget) ++c.budget_hits;
      }
      c.median = median_of(c.iter_counts);
      c.mean = std::accumulate(c.iter_counts.begin(), c.iter_counts.end(), 0.0) /
               std::max<size_t>(1, c.iter_counts.size());
      ++cell;
    }
  }

  out.ordering_holds = true;
  for (size_t si = 0; si < sigma_cal.size(); ++si)
    out.ordering_holds =
        out.ordering_holds && out.cells[2 * si + 1].median < out.cells[2 * si].median;
  std::ostringstream note;
  note << "medians ";
  for (size_t si = 0; si < sigma_cal.size(); ++si)
    note << "[sigma_cal=" << sigma_cal[si] << ": " << out.cells[2 * si + 1].space << " "
         << out.cells[2 * si + 1].median << " vs l2 " << out.cells[2 * si].median << "] ";
  note << (out.ordering_holds ? "-> curved arm wins every column"
                              : "-> ordering does not hold on this grid");
  if (!out.references_ok) note << "; WARNING: some references did not stagnate";
  out.note = note.str();
  return out;
}

std::string table1_csv(const Table1Result& t) {
  std::ostringstream os;
  os << "space,sigma_cal,sigma,tau,median_iters,mean_iters,reps,budget_hits\n";
  for (const auto& c : t.cells)
    os << c.space << "," << num17(c.sigma_cal) << "," << num17(c.sigma) << "," << num17(c.tau)
       << "," << num17(c.median) << "," << num17(c.mean) << "," << c.iter_counts.size() << ","
       << c.budget_hits << "\n";
  return os.str();
}

// ---- step-size sweep ----------------------------------------------------

SweepResult grid_search(const SaddleProblem& P, const Vector& x_ref, double ref_tol,
                        const std::vector<double>& sigmas, const std::vector<double>& taus,
                        double C, long budget) {
  SweepResult out;
  out.sigmas = sigmas;
  out.taus = taus;
  out.iters = Matrix::Constant(sigmas.size(), taus.size(),
                               std::numeric_limits<double>::quiet_NaN());
  SaddleProblem Q = P;
  if (!(Q.T.norm_estimate > 0.0))
    Q.T.norm_estimate = power_method(Q.T, Q.X(), Q.Y()).value;
  const double tn = Q.T.norm_estimate;
  const int max_iters = checked_iters(budget, "grid_search");
  for (size_t i = 0; i < sigmas.size(); ++i)
    for (size_t j = 0; j < taus.size(); ++j) {
      const double s = sigmas[i], t = taus[j];
      if (!(s > 0.0) || !(t > 0.0) || s * t * tn * tn >= C) continue;  // stays nan
      StopRule st;
      st.max_iters = max_iters;
      st.x_ref = x_ref;
      st.ref_tol = ref_tol;
      st.keep_trace = false;
      st.start = warm_start(Q);
      const SolveResult r = run_v1(Q, s, t, C, st);
      out.iters(i, j) = r.reason == StopReason::reference_tol
                            ? static_cast<double>(r.iters)
                            : std::numeric_limits<double>::infinity();
    }
  return out;
}

// ---- CLI ----------------------------------------------------------------

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> r, sigma, tau, alpha;
  std::optional<std::string> variant, out;
  std::optional<long> iters;
};

void add_common(CLI::App* sub, Overrides& ov) {
  sub->add_option("--config", ov.config_path, "JSON config file");
  sub->add_option("--seed", ov.seed, "master seed");
  sub->add_option("--out", ov.out, "artifact directory");
  sub->add_option("--r", ov.r, "primal space exponent");
  sub->add_option("--sigma", ov.sigma, "dual step (deconv: calibrated units)");
  sub->add_option("--tau", ov.tau, "primal step");
  sub->add_option("--variant", ov.variant, "schedule: v1, v2, or v3");
  sub->add_option("--alpha", ov.alpha, "penalty weight (phase: initial)");
  sub->add_option("--iters", ov.iters, "iteration budget");
}

ExperimentConfig load_config(const std::string& tag, const Overrides& ov, bool fix_tag) {
  ExperimentConfig cfg;
  if (!ov.config_path.empty()) {
    std::ifstream in(ov.config_path);
    if (!in) throw ConfigError("config: cannot read " + ov.config_path);
    std::ostringstream text;
    text << in.rdbuf();
    cfg = parse_config(text.str());
    if (fix_tag && cfg.experiment != tag)
      throw ConfigError("config: experiment \"" + cfg.experiment +
                        "\" does not match the " + tag + " subcommand");
  } else {
    cfg = default_config(tag);
  }
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.out) cfg.out_dir = *ov.out;
  if (ov.r) cfg.space.r = *ov.r;
  if (ov.sigma) cfg.schedule.sigma = *ov.sigma;
  if (ov.tau) cfg.schedule.tau = *ov.tau;
  if (ov.variant) {
    if (*ov.variant == "v1") cfg.schedule.variant = SolverSchedule::Variant::v1;
    else if (*ov.variant == "v2") cfg.schedule.variant = SolverSchedule::Variant::v2;
    else if (*ov.variant == "v3") cfg.schedule.variant = SolverSchedule::Variant::v3;
    else throw ConfigError("config: --variant must be v1, v2, or v3");
  }
  if (ov.alpha) {
    if (!(*ov.alpha > 0)) throw ConfigError("config: --alpha must be > 0");
    if (cfg.experiment == "phase") cfg.irnm.alpha0 = *ov.alpha;
    else cfg.alpha = *ov.alpha;
  }
  if (ov.iters) {
    if (*ov.iters < 1) throw ConfigError("config: --iters must be >= 1");
    cfg.iters = *ov.iters;
  }
  if (!(cfg.space.r > 1.0)) throw ConfigError("config: --r must be > 1");
  return cfg;
}

int run_quadratic(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  QuadraticSetup S = build_quadratic(cfg);
  const PowerMethodResult pm = power_method(S.T, S.X, S.Y);
  const SolverSchedule sch = complete_schedule(cfg.schedule, pm.value);

  TikhonovSpec ts;
  ts.T = S.T;
  ts.X = S.X;
  ts.Y = S.Y;
  ts.fidelity = DataFidelitySpec::quadratic(S.y);
  ts.penalty =
      cfg.penalty == "l1" ? PrimalFnSpec::l1() : PrimalFnSpec::power(cfg.penalty_r);
  ts.alpha = cfg.alpha;
  SaddleProblem P = assemble_tikhonov(ts);
  P.T.norm_estimate = pm.value;

  // Closed-form minimizer of 0.5|Ax-y|^2 + alpha/2 |x|^2 in the euclidean
  // geometry; available exactly when the penalty is that square.
  std::optional<Vector> oracle;
  if (cfg.space.r == 2.0 && cfg.penalty == "power" && cfg.penalty_r == 2.0) {
    Matrix normal = S.A.transpose() * S.A;
    normal.diagonal().array() += cfg.alpha;
    oracle = normal.ldlt().solve(S.A.transpose() * S.y);
  }

  StopRule st;
  st.max_iters = checked_iters(cfg.iters, "quadratic");
  if (oracle) st.x_ref = *oracle;
  st.ref_tol = cfg.ref_tol;
  st.start = warm_start(P);
  const SolveResult r = run_schedule(P, sch, st);

  RunSummary sum;
  sum.op_norm = pm.value;
  sum.sigma = sch.sigma;
  sum.tau = sch.tau;
  sum.C = sch.C;
  sum.reason = r.reason;
  sum.iters = r.iters;
  if (oracle) sum.final_err = (r.state.x - *oracle).lpNorm<1>();
  sum.final_misfit = data_misfit(FidelityKind::quadratic, S.y, S.T.apply(r.state.x));
  sum.elapsed_s = seconds_since(t0);
  sum.extra.emplace_back("premise_product", sch.sigma * sch.tau * pm.value * pm.value);
  sum.extra.emplace_back("has_oracle", oracle ? 1.0 : 0.0);
  write_run_artifacts(cfg, "quadratic", r, sum, &r.state.x);

  std::cout << "quadratic: n=" << cfg.grid.n_x << " r=" << cfg.space.r
            << " variant=" << to_string(sch.variant) << " iters=" << r.iters
            << " reason=" << to_string(r.reason);
  if (oracle) std::cout << " final_err=" << num17(sum.final_err);
  std::cout << "\n";
  return r.reason == StopReason::diverged ? 2 : 0;
}

int run_deconv(const ExperimentConfig& cfg) {
  if (cfg.table1) {
    const auto t0 = std::chrono::steady_clock::now();
    const Table1Result t = table1_experiment(cfg);
    fs::create_directories(cfg.out_dir);
    {
      auto os = open_out(cfg.out_dir + "/table1.csv");
      os << table1_csv(t);
    }
    RunSummary sum;
    sum.op_norm = t.op_norm_lr;
    sum.C = 1.0;
    sum.iters = 0;
    sum.elapsed_s = seconds_since(t0);
    sum.note = t.note;
    sum.extra.emplace_back("op_norm_l2", t.op_norm_l2);
    sum.extra.emplace_back("op_norm_lr", t.op_norm_lr);
    sum.extra.emplace_back("sigma_scale", t.sigma_scale);
    sum.extra.emplace_back("ordering_holds", t.ordering_holds ? 1.0 : 0.0);
    sum.extra.emplace_back("references_ok", t.references_ok ? 1.0 : 0.0);
    {
      auto os = open_out(cfg.out_dir + "/table1.meta.json");
      os << run_metadata_json(cfg, sum);
    }
    std::cout << table1_csv(t) << t.note << "\n";
    return 0;
  }

  const auto t0 = std::chrono::steady_clock::now();
  DeconvSetup S = build_deconv(cfg);
  const Vector y = make_noise(S.y_clean, cfg.noise, cfg.seed);
  const SpaceDescriptor X2 = make_lr(2.0, cfg.grid.n_x);
  const PowerMethodResult pm2 = power_method(S.T, X2, S.Y);
  const bool euclidean = cfg.space.r == 2.0 && cfg.space.weights.empty();
  const PowerMethodResult pmr = euclidean ? pm2 : power_method(S.T, S.X, S.Y);
  const double scale = calibration_norm() / pm2.value;

  SolverSchedule sch = cfg.schedule;
  const double sigma_cal = sch.sigma;
  if (sch.variant != SolverSchedule::Variant::v3 && sch.sigma > 0.0) sch.sigma *= scale;
  sch = complete_schedule(sch, pmr.value, euclidean ? kTableProductL2 : kTableProductLr);

  TikhonovSpec ts;
  ts.T = S.T;
  ts.X = S.X;
  ts.Y = S.Y;
  ts.fidelity = DataFidelitySpec::quadratic(y);
  ts.penalty = cfg.penalty == "power" ? PrimalFnSpec::power(cfg.penalty_r) : PrimalFnSpec::l1();
  ts.alpha = cfg.alpha;

  TikhonovSpec ref = ts;
  ref.X = X2;
  ref.schedule = table_reference_schedule(pm2.value);
  SaddleProblem RP = assemble_tikhonov(ref);
  RP.T.norm_estimate = pm2.value;
  const ReferenceResult rr =
      reference_minimizer(RP, ref.schedule, cfg.ref_budget, cache_key_for(cfg, "deconv-ref"));
  if (!rr.converged)
    std::cerr << "deconv: reference did not stagnate within " << cfg.ref_budget
              << " iterations; iteration counts are against its last iterate\n";

  SaddleProblem P = assemble_tikhonov(ts);
  P.T.norm_estimate = pmr.value;
  StopRule st;
  st.max_iters = checked_iters(cfg.iters, "deconv");
  st.x_ref = rr.x;
  st.ref_tol = cfg.ref_tol;
  st.stagnation_rtol = -1.0;  // counting run: only the tolerance or the budget stop it
  st.start = warm_start(P);
  const SolveResult r = run_schedule(P, sch, st);

  RunSummary sum;
  sum.op_norm = pmr.value;
  sum.sigma = sch.sigma;
  sum.tau = sch.tau;
  sum.C = sch.C;
  sum.reason = r.reason;
  sum.iters = r.iters;
  sum.final_err = (r.state.x - rr.x).lpNorm<1>();
  sum.final_misfit = data_misfit(FidelityKind::quadratic, y, S.T.apply(r.state.x));
  sum.elapsed_s = seconds_since(t0);
  if (!rr.converged) sum.note = "reference did not stagnate within budget";
  sum.extra.emplace_back("op_norm_l2", pm2.value);
  sum.extra.emplace_back("sigma_scale", scale);
  sum.extra.emplace_back("sigma_calibrated", sigma_cal);
  sum.extra.emplace_back("premise_product", sch.sigma * sch.tau * pmr.value * pmr.value);
  sum.extra.emplace_back("reference_converged", rr.converged ? 1.0 : 0.0);
  sum.extra.emplace_back("reference_from_cache", rr.from_cache ? 1.0 : 0.0);
  write_run_artifacts(cfg, "deconv", r, sum, &r.state.x);

  std::cout << "deconv: r=" << cfg.space.r << " sigma=" << num17(sch.sigma)
            << " tau=" << num17(sch.tau) << " iters=" << r.iters
            << " reason=" << to_string(r.reason) << " err_ref=" << num17(sum.final_err) << "\n";
  return r.reason == StopReason::diverged ? 2 : 0;
}

int run_phase(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  PhaseSetup S = build_phase(cfg);
  const Vector y = make_noise(S.y_clean, cfg.noise, cfg.seed);

  IrnmSpec spec;
  spec.T = S.T;
  spec.X = S.X;
  spec.Y = S.Y;
  spec.y_delta = y;
  spec.fidelity = FidelityKind::kl_poisson;
  spec.penalty = cfg.penalty == "l1" ? PrimalFnSpec::l1() : PrimalFnSpec::power(cfg.penalty_r);
  spec.alpha0 = cfg.irnm.alpha0;
  spec.rho = cfg.irnm.rho;
  spec.newton_steps = cfg.irnm.newton_steps;
  spec.eps = cfg.irnm.eps;
  spec.step_safety = cfg.irnm.step_safety;
  spec.schedule = cfg.schedule;
  spec.inner_stop.max_iters = checked_iters(cfg.iters, "phase");
  const IrnmResult R = irnm_run(spec);

  fs::create_directories(cfg.out_dir);
  std::vector<std::string> csvs;
  json steps = json::array();
  for (const auto& st : R.steps) {
    const std::string name = "phase.step" + std::to_string(st.n) + ".trace.csv";
    if (!st.inner.trace.empty()) {
      write_trace_csv(cfg.out_dir + "/" + name, st.inner.trace, cfg.timing);
      csvs.push_back(name);
    }
    json js;
    js["n"] = st.n;
    js["alpha"] = st.alpha;
    js["op_norm"] = st.op_norm;
    js["fit"] = st.fit;
    js["iters"] = st.inner.iters;
    js["termination"] = to_string(st.inner.reason);
    steps.push_back(js);
  }
  if (cfg.dump_reconstruction) write_vector_csv(cfg.out_dir + "/phase.recon.csv", R.x);
  if (!csvs.empty()) write_plot_script(cfg.out_dir, "phase.plot.gp", csvs);
  json meta;
  meta["config"] = json::parse(config_json(cfg));
  meta["config_hash"] = hex16(config_hash(cfg));
  meta["library_version"] = version_string;
  meta["steps"] = steps;
  meta["aborted"] = R.aborted;
  meta["note"] = R.note;
  meta["elapsed_s"] = seconds_since(t0);
  {
    auto os = open_out(cfg.out_dir + "/phase.meta.json");
    os << meta.dump(2) << "\n";
  }

  for (const auto& st : R.steps)
    std::cout << "phase: step " << st.n << " alpha=" << num17(st.alpha)
              << " op_norm=" << num17(st.op_norm) << " fit=" << num17(st.fit)
              << " iters=" << st.inner.iters << " reason=" << to_string(st.inner.reason) << "\n";
  if (R.aborted) {
    std::cout << "phase: aborted: " << R.note << "\n";
    return 2;
  }
  return 0;
}

int run_opnorm(const ExperimentConfig& cfg) {
  if (cfg.experiment == "deconv") {
    DeconvSetup S = build_deconv(cfg);
    const SpaceDescriptor X2 = make_lr(2.0, cfg.grid.n_x);
    const PowerMethodResult pm2 = power_method(S.T, X2, S.Y);
    const PowerMethodResult pmr = power_method(S.T, S.X, S.Y);
    std::cout << "opnorm deconv n_x=" << cfg.grid.n_x << " n_y=" << cfg.grid.n_y
              << " unit_quadrature=" << cfg.grid.unit_quadrature << "\n"
              << "  l2 -> l2      : " << num17(pm2.value) << " (iters=" << pm2.iters
              << ", converged=" << pm2.converged << ")\n"
              << "  " << space_label(S.X) << " -> l2   : " << num17(pmr.value)
              << " (iters=" << pmr.iters << ", converged=" << pmr.converged << ")\n"
              << "  sigma_scale   : " << num17(calibration_norm() / pm2.value) << "\n";
    return 0;
  }
  if (cfg.experiment == "phase") {
    PhaseSetup S = build_phase(cfg);
    const LinearOp D = S.T.derivative_at(S.truth);
    const PowerMethodResult pm = power_method(D, S.X, S.Y);
    std::cout << "opnorm phase n=" << cfg.grid.n << " (derivative at the builtin phase)\n"
              << "  " << space_label(S.X) << " -> l2   : " << num17(pm.value)
              << " (iters=" << pm.iters << ", converged=" << pm.converged << ")\n";
    return 0;
  }
  QuadraticSetup S = build_quadratic(cfg);
  const PowerMethodResult pm = power_method(S.T, S.X, S.Y);
  std::cout << "opnorm quadratic " << cfg.grid.n_y << "x" << cfg.grid.n_x << "\n"
            << "  " << space_label(S.X) << " -> l2   : " << num17(pm.value)
            << " (iters=" << pm.iters << ", converged=" << pm.converged << ")\n";
  return 0;
}

int run_selftest() {
  int fails = 0;
  auto report = [&](const char* name, bool ok, double detail) {
    std::cout << "selftest " << name << ": " << (ok ? "ok" : "FAIL") << " (" << num17(detail)
              << ")\n";
    if (!ok) ++fails;
  };

  {
    const SpaceDescriptor X = make_lr(1.5, 16);
    const Vector v = seeded_uniform(16, 11);
    const Vector j = duality_map(X, v);
    const double err = std::abs(j.dot(v) - norm(X, v) * norm(X, v));
    report("duality pairing (l1.5)", err <= 1e-10, err);
  }
  {
    const SpaceDescriptor X = make_lr(1.5, 16);
    const Vector u = seeded_uniform(16, 12), x = seeded_uniform(16, 13);
    const double b = bregman(X, u, x);
    report("bregman distance nonnegative", b >= 0.0 && bregman(X, x, x) <= 1e-14, b);
  }
  {
    const SpaceDescriptor X = make_lr(1.5, 8);
    const Vector xs = seeded_uniform(8, 14);
    const double tau = 0.7, scale = 0.9;
    const Vector x = res_l1(X, tau, xs, scale);
    // stationarity of tau*scale*|x|_1 + B_X(x, J^{-1} xs)
    const Vector g = duality_map(X, x) - xs;
    double res = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (x[i] != 0.0)
        res = std::max(res, std::abs(g[i] + tau * scale * (x[i] > 0 ? 1.0 : -1.0)));
      else
        res = std::max(res, std::max(0.0, std::abs(g[i]) - tau * scale));
    }
    report("l1 resolvent stationarity", res <= 1e-9, res);
  }
  {
    Matrix A(1, 1);
    A << 1.0;
    TikhonovSpec ts;
    ts.T = matrix_op(A);
    ts.X = make_lr(2.0, 1);
    ts.Y = make_lr(2.0, 1);
    ts.fidelity = DataFidelitySpec::quadratic(Vector::Ones(1));
    ts.penalty = PrimalFnSpec::power(2.0);
    ts.alpha = 1.0;
    ts.schedule.sigma = 0.9;
    ts.schedule.tau = 0.9;
    ts.schedule.C = 1.0;
    ts.stop.max_iters = 400;
    ts.stop.stagnation_rtol = -1.0;
    const TikhonovResult r = tikhonov_solve(ts);
    const double err = std::abs(r.x[0] - 0.5);
    report("scalar quadratic saddle", err <= 1e-8, err);
  }
  {
    Matrix A(2, 2);
    A << 1.0, 0.2, -0.3, 0.8;
    TikhonovSpec ts;
    ts.T = matrix_op(A);
    ts.X = make_lr(2.0, 2);
    ts.Y = make_lr(2.0, 2);
    ts.fidelity = DataFidelitySpec::quadratic(Vector::Ones(2));
    ts.penalty = PrimalFnSpec::power(2.0);
    ts.schedule.variant = SolverSchedule::Variant::v2;
    ts.schedule.sigma = 0.5;
    ts.schedule.tau = 0.5;
    ts.schedule.gamma = 1.0;
    ts.schedule.C = 1.0;
    ts.stop.max_iters = 50;
    ts.stop.stagnation_rtol = -1.0;
    const TikhonovResult r = tikhonov_solve(ts);
    double drift = 0.0;
    for (const auto& rec : r.solve.trace) drift = std::max(drift, std::abs(rec.sigma * rec.tau - 0.25));
    report("v2 step product invariant", drift <= 1e-14, drift);
  }
  {
    FresnelConfig fc;
    fc.n = 16;
    fc.validate();
    CVector field(16 * 16);
    const Vector re = seeded_uniform(16 * 16, 15), im = seeded_uniform(16 * 16, 16);
    for (Index i = 0; i < field.size(); ++i) field[i] = Complex(re[i], im[i]);
    const CVector prop = fresnel_propagate(fc, field, fc.chirp());
    const double err = std::abs(prop.norm() - field.norm());
    report("propagation energy conservation", err <= 1e-12, err);
  }
  return fails == 0 ? 0 : 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"saddle-point solvers over sequence-space geometries"};
  app.require_subcommand(1);

  Overrides ov;
  CLI::App* deconv = app.add_subcommand("deconv", "l1-penalized kernel deconvolution");
  CLI::App* phase = app.add_subcommand("phase", "near-field intensity phase retrieval");
  CLI::App* quadratic = app.add_subcommand("quadratic", "seeded dense ridge problem");
  CLI::App* opnorm = app.add_subcommand("opnorm", "operator norm estimates");
  CLI::App* selftest = app.add_subcommand("selftest", "fast built-in invariant checks");
  for (CLI::App* sub : {deconv, phase, quadratic, opnorm}) add_common(sub, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (selftest->parsed()) return run_selftest();
    if (deconv->parsed()) return run_deconv(load_config("deconv", ov, true));
    if (phase->parsed()) return run_phase(load_config("phase", ov, true));
    if (quadratic->parsed()) return run_quadratic(load_config("quadratic", ov, true));
    if (opnorm->parsed()) return run_opnorm(load_config("deconv", ov, false));
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace banachpd
