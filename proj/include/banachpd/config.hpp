// SPDX-License-Identifier: Apache-2.0
//
// Experiment configuration: JSON in, validated struct out, canonical JSON
// echo back.  Parsing is strict: a missing schema_version, a wrong version,
// or any unknown key at any level is an error, so configs cannot silently
// drift.  The echo fills in every defaulted field, which makes its hash a
// complete cache key.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "banachpd/noise.hpp"
#include "banachpd/solver.hpp"
#include "banachpd/types.hpp"

namespace banachpd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int config_schema_version = 1;

struct SpaceConfig {
  double r = 2.0;
  double sobolev_s = 0.0;  // 0 keeps a plain sequence space
  std::vector<double> weights;  // optional; weighted_lr only
};

struct GridConfig {
  Index n_x = 64;
  Index n_y = 127;
  Index n = 64;  // phase grid is n x n
  bool unit_quadrature = false;
};

struct IrnmConfig {
  double alpha0 = 0.5;
  double rho = 0.5;
  int newton_steps = 3;
  double eps = 0.1;
  double step_safety = 0.96;
};

struct ExperimentConfig {
  int schema_version = config_schema_version;
  std::string experiment = "quadratic";  // deconv | phase | quadratic | custom
  SpaceConfig space;
  SolverSchedule schedule;
  NoiseSpec noise;
  std::uint64_t seed = 1;
  double alpha = 1.0;
  GridConfig grid;
  IrnmConfig irnm;
  std::string penalty = "power";  // power | l1
  double penalty_r = 2.0;
  long iters = 30000;       // main-run iteration budget
  double ref_tol = 1e-5;    // stop at ||x - x_ref||_1 <= ref_tol
  long ref_budget = 150000; // reference-minimizer budget
  int reps = 10;            // table repetitions
  bool table1 = false;      // deconv: run the sigma/space table instead of one arm
  bool timing = false;      // true: wall-clock in the CSV, bytes not reproducible
  bool dump_reconstruction = true;
  std::string out_dir = "out";
};

// Baseline for a given experiment tag; unknown tags throw ConfigError.
ExperimentConfig default_config(const std::string& experiment);

// Strict parse: starts from default_config(experiment in the text), overlays
// the given fields, rejects unknown keys and type mismatches with ConfigError.
ExperimentConfig parse_config(const std::string& json_text);

// Canonical echo: every field, keys sorted, 2-space indent, trailing newline.
std::string config_json(const ExperimentConfig& cfg);

// FNV-1a over the canonical echo; changes whenever any field changes.
std::uint64_t config_hash(const ExperimentConfig& cfg);

const char* to_string(SolverSchedule::Variant v);
const char* to_string(NoiseKind k);
const char* to_string(StopReason r);

}  // namespace banachpd
