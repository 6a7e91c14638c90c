// SPDX-License-Identifier: Apache-2.0
#include "banachpd/config.hpp"

#include <json.hpp>

#include <cmath>
#include <initializer_list>

namespace banachpd {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
}

void reject_unknown(const json& j, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) { known = true; break; }
    if (!known) fail(where, "unknown key \"" + item.key() + "\"");
  }
}

template <typename T>
void get_number(const json& j, const char* key, const std::string& where, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number()) fail(where, std::string("\"") + key + "\" must be a number");
  out = it->get<T>();
}

void get_integer(const json& j, const char* key, const std::string& where, long& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_integer()) fail(where, std::string("\"") + key + "\" must be an integer");
  out = it->get<long>();
}

void get_integer(const json& j, const char* key, const std::string& where, int& out) {
  long v = out;
  get_integer(j, key, where, v);
  out = static_cast<int>(v);
}

void get_index(const json& j, const char* key, const std::string& where, Index& out) {
  long v = static_cast<long>(out);
  get_integer(j, key, where, v);
  out = static_cast<Index>(v);
}

void get_u64(const json& j, const char* key, const std::string& where, std::uint64_t& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_number_unsigned() && !it->is_number_integer())
    fail(where, std::string("\"") + key + "\" must be a nonnegative integer");
  if (it->is_number_integer() && !it->is_number_unsigned() && it->get<long long>() < 0)
    fail(where, std::string("\"") + key + "\" must be a nonnegative integer");
  out = it->get<std::uint64_t>();
}

void get_bool(const json& j, const char* key, const std::string& where, bool& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_boolean()) fail(where, std::string("\"") + key + "\" must be a boolean");
  out = it->get<bool>();
}

void get_string(const json& j, const char* key, const std::string& where, std::string& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (!it->is_string()) fail(where, std::string("\"") + key + "\" must be a string");
  out = it->get<std::string>();
}

void parse_space(const json& j, SpaceConfig& s) {
  require_object(j, "space");
  reject_unknown(j, "space", {"r", "sobolev_s", "weights"});
  get_number(j, "r", "space", s.r);
  get_number(j, "sobolev_s", "space", s.sobolev_s);
  if (auto it = j.find("weights"); it != j.end()) {
    if (!it->is_array()) fail("space", "\"weights\" must be an array of numbers");
    s.weights.clear();
    for (const auto& w : *it) {
      if (!w.is_number()) fail("space", "\"weights\" must be an array of numbers");
      s.weights.push_back(w.get<double>());
    }
  }
  if (!(s.r > 1.0) || !std::isfinite(s.r)) fail("space", "\"r\" must be finite and > 1");
  if (s.sobolev_s < 0.0) fail("space", "\"sobolev_s\" must be >= 0");
}

void parse_solver(const json& j, SolverSchedule& s) {
  require_object(j, "solver");
  reject_unknown(j, "solver",
                 {"variant", "sigma", "tau", "gamma", "delta", "mu", "theta", "C"});
  std::string variant = to_string(s.variant);
  get_string(j, "variant", "solver", variant);
  if (variant == "v1") s.variant = SolverSchedule::Variant::v1;
  else if (variant == "v2") s.variant = SolverSchedule::Variant::v2;
  else if (variant == "v3") s.variant = SolverSchedule::Variant::v3;
  else fail("solver", "\"variant\" must be one of v1, v2, v3");
  get_number(j, "sigma", "solver", s.sigma);
  get_number(j, "tau", "solver", s.tau);
  get_number(j, "gamma", "solver", s.gamma);
  get_number(j, "delta", "solver", s.delta);
  get_number(j, "mu", "solver", s.mu);
  get_number(j, "theta", "solver", s.theta);
  get_number(j, "C", "solver", s.C);
  if (s.sigma < 0 || s.tau < 0) fail("solver", "step sizes must be >= 0");
  if (!(s.C > 0) || s.C > 1) fail("solver", "\"C\" must lie in (0, 1]");
}

void parse_noise(const json& j, NoiseSpec& n) {
  require_object(j, "noise");
  reject_unknown(j, "noise", {"kind", "level", "photon_scale"});
  std::string kind = to_string(n.kind);
  get_string(j, "kind", "noise", kind);
  if (kind == "gaussian") n.kind = NoiseKind::gaussian;
  else if (kind == "poisson") n.kind = NoiseKind::poisson;
  else fail("noise", "\"kind\" must be gaussian or poisson");
  get_number(j, "level", "noise", n.level);
  get_number(j, "photon_scale", "noise", n.photon_scale);
  if (n.level < 0) fail("noise", "\"level\" must be >= 0");
  if (!(n.photon_scale > 0)) fail("noise", "\"photon_scale\" must be > 0");
}

void parse_grid(const json& j, GridConfig& g) {
  require_object(j, "grid");
  reject_unknown(j, "grid", {"n_x", "n_y", "n", "unit_quadrature"});
  get_index(j, "n_x", "grid", g.n_x);
  get_index(j, "n_y", "grid", g.n_y);
  get_index(j, "n", "grid", g.n);
  get_bool(j, "unit_quadrature", "grid", g.unit_quadrature);
  if (g.n_x < 1 || g.n_y < 1 || g.n < 1) fail("grid", "grid sizes must be >= 1");
}

void parse_irnm(const json& j, IrnmConfig& c) {
  require_object(j, "irnm");
  reject_unknown(j, "irnm", {"alpha0", "rho", "newton_steps", "eps", "step_safety"});
  get_number(j, "alpha0", "irnm", c.alpha0);
  get_number(j, "rho", "irnm", c.rho);
  get_integer(j, "newton_steps", "irnm", c.newton_steps);
  get_number(j, "eps", "irnm", c.eps);
  get_number(j, "step_safety", "irnm", c.step_safety);
  if (!(c.alpha0 > 0)) fail("irnm", "\"alpha0\" must be > 0");
  if (!(c.rho > 0) || !(c.rho < 1)) fail("irnm", "\"rho\" must lie in (0, 1)");
  if (c.newton_steps < 1) fail("irnm", "\"newton_steps\" must be >= 1");
  if (c.eps < 0) fail("irnm", "\"eps\" must be >= 0");
  if (!(c.step_safety > 0) || !(c.step_safety < 1))
    fail("irnm", "\"step_safety\" must lie in (0, 1)");
}

}  // namespace

const char* to_string(SolverSchedule::Variant v) {
  switch (v) {
    case SolverSchedule::Variant::v1: return "v1";
    case SolverSchedule::Variant::v2: return "v2";
    case SolverSchedule::Variant::v3: return "v3";
  }
  return "?";
}

const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::poisson: return "poisson";
  }
  return "?";
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::max_iters: return "max_iters";
    case StopReason::reference_tol: return "reference_tol";
    case StopReason::stagnation: return "stagnation";
    case StopReason::diverged: return "diverged";
  }
  return "?";
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  if (experiment == "quadratic" || experiment == "custom") {
    cfg.grid.n_x = 16;
    cfg.grid.n_y = 24;
    cfg.alpha = 0.5;
    cfg.penalty = "power";
    cfg.schedule.C = 1.0;
    cfg.iters = 30000;
    cfg.ref_tol = 1e-8;
    cfg.noise.level = 0.0;
  } else if (experiment == "deconv") {
    cfg.grid.n_x = 64;
    cfg.grid.n_y = 127;
    cfg.grid.unit_quadrature = true;
    cfg.space.r = 1.25;
    cfg.alpha = 5.0;
    cfg.penalty = "l1";
    cfg.noise.kind = NoiseKind::gaussian;
    cfg.noise.level = 0.18;
    cfg.schedule.C = 1.0;
    cfg.schedule.sigma = 0.0023;  // calibrated units, see harness
    cfg.iters = 400000;
    cfg.ref_tol = 1e-5;
  } else if (experiment == "phase") {
    cfg.grid.n = 64;
    cfg.space.r = 1.1;
    cfg.space.sobolev_s = 1.0;
    cfg.noise.kind = NoiseKind::poisson;
    cfg.noise.level = 1.0;
    cfg.noise.photon_scale = 1e4;
    cfg.penalty = "power";
    cfg.penalty_r = 2.0;
    cfg.schedule.tau = 3.0;
    cfg.schedule.C = 0.96;
    cfg.iters = 400;
  } else {
    throw ConfigError("config: experiment must be one of deconv, phase, quadratic, custom");
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  require_object(j, "top level");
  reject_unknown(j, "top level",
                 {"schema_version", "experiment", "space", "solver", "noise", "seed",
                  "alpha", "grid", "irnm", "penalty", "penalty_r", "iters", "ref_tol",
                  "ref_budget", "reps", "table1", "timing", "dump_reconstruction",
                  "out_dir"});

  auto ver = j.find("schema_version");
  if (ver == j.end()) fail("top level", "missing \"schema_version\"");
  if (!ver->is_number_integer() || ver->get<int>() != config_schema_version)
    fail("top level", "unsupported schema_version (expected " +
                          std::to_string(config_schema_version) + ")");

  std::string experiment = "quadratic";
  get_string(j, "experiment", "top level", experiment);
  ExperimentConfig cfg = default_config(experiment);

  if (auto it = j.find("space"); it != j.end()) parse_space(*it, cfg.space);
  if (auto it = j.find("solver"); it != j.end()) parse_solver(*it, cfg.schedule);
  if (auto it = j.find("noise"); it != j.end()) parse_noise(*it, cfg.noise);
  if (auto it = j.find("grid"); it != j.end()) parse_grid(*it, cfg.grid);
  if (auto it = j.find("irnm"); it != j.end()) parse_irnm(*it, cfg.irnm);
  get_u64(j, "seed", "top level", cfg.seed);
  get_number(j, "alpha", "top level", cfg.alpha);
  get_string(j, "penalty", "top level", cfg.penalty);
  get_number(j, "penalty_r", "top level", cfg.penalty_r);
  get_integer(j, "iters", "top level", cfg.iters);
  get_number(j, "ref_tol", "top level", cfg.ref_tol);
  get_integer(j, "ref_budget", "top level", cfg.ref_budget);
  get_integer(j, "reps", "top level", cfg.reps);
  get_bool(j, "table1", "top level", cfg.table1);
  get_bool(j, "timing", "top level", cfg.timing);
  get_bool(j, "dump_reconstruction", "top level", cfg.dump_reconstruction);
  get_string(j, "out_dir", "top level", cfg.out_dir);

  if (cfg.penalty != "power" && cfg.penalty != "l1")
    fail("top level", "\"penalty\" must be power or l1");
  if (!(cfg.penalty_r > 1.0)) fail("top level", "\"penalty_r\" must be > 1");
  if (!(cfg.alpha > 0)) fail("top level", "\"alpha\" must be > 0");
  if (cfg.iters < 1) fail("top level", "\"iters\" must be >= 1");
  if (!(cfg.ref_tol > 0)) fail("top level", "\"ref_tol\" must be > 0");
  if (cfg.ref_budget < 1) fail("top level", "\"ref_budget\" must be >= 1");
  if (cfg.reps < 1) fail("top level", "\"reps\" must be >= 1");
  if (cfg.out_dir.empty()) fail("top level", "\"out_dir\" must be nonempty");
  return cfg;
}

std::string config_json(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["experiment"] = cfg.experiment;
  j["space"]["r"] = cfg.space.r;
  j["space"]["sobolev_s"] = cfg.space.sobolev_s;
  j["space"]["weights"] = cfg.space.weights;
  j["solver"]["variant"] = to_string(cfg.schedule.variant);
  j["solver"]["sigma"] = cfg.schedule.sigma;
  j["solver"]["tau"] = cfg.schedule.tau;
  j["solver"]["gamma"] = cfg.schedule.gamma;
  j["solver"]["delta"] = cfg.schedule.delta;
  j["solver"]["mu"] = cfg.schedule.mu;
  j["solver"]["theta"] = cfg.schedule.theta;
  j["solver"]["C"] = cfg.schedule.C;
  j["noise"]["kind"] = to_string(cfg.noise.kind);
  j["noise"]["level"] = cfg.noise.level;
  j["noise"]["photon_scale"] = cfg.noise.photon_scale;
  j["seed"] = cfg.seed;
  j["alpha"] = cfg.alpha;
  j["grid"]["n_x"] = cfg.grid.n_x;
  j["grid"]["n_y"] = cfg.grid.n_y;
  j["grid"]["n"] = cfg.grid.n;
  j["grid"]["unit_quadrature"] = cfg.grid.unit_quadrature;
  j["irnm"]["alpha0"] = cfg.irnm.alpha0;
  j["irnm"]["rho"] = cfg.irnm.rho;
  j["irnm"]["newton_steps"] = cfg.irnm.newton_steps;
  j["irnm"]["eps"] = cfg.irnm.eps;
  j["irnm"]["step_safety"] = cfg.irnm.step_safety;
  j["penalty"] = cfg.penalty;
  j["penalty_r"] = cfg.penalty_r;
  j["iters"] = cfg.iters;
  j["ref_tol"] = cfg.ref_tol;
  j["ref_budget"] = cfg.ref_budget;
  j["reps"] = cfg.reps;
  j["table1"] = cfg.table1;
  j["timing"] = cfg.timing;
  j["dump_reconstruction"] = cfg.dump_reconstruction;
  j["out_dir"] = cfg.out_dir;

  // dump() serializes doubles in shortest-round-trip form, so the echo is a
  // faithful key: two configs hash equal iff every field is bitwise equal.
  return j.dump(2) + "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  const std::string s = config_json(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace banachpd
