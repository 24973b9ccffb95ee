#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sitdyn/params.hpp"
#include "sitdyn/schedule.hpp"
#include "sitdyn/separatrix.hpp"

namespace sitdyn {

/// Model parameters as written in a configuration file. Unset fields fall
/// back to the simulation defaults, or to values derived from [bio] when that
/// section is present. K is calibrated to M_target unless given explicitly.
struct ModelSpec {
  std::optional<BioParams> bio;
  std::optional<double> nu_E;
  std::optional<double> beta;
  std::optional<double> K;
  double M_target = 5106.0;

  std::optional<double> b;
  std::optional<double> nu_E_tilde;
  std::optional<double> mu_E;
  std::optional<double> mu_L;
  std::optional<double> nu_L;
  std::optional<double> mu_M;
  std::optional<double> mu_F;
  std::optional<double> mu_i;
  std::optional<double> r;
  std::optional<double> gamma_i;

  /// Parameters at the configured (nu_E, beta); ConfigError when either is
  /// missing.
  [[nodiscard]] ModelParams resolve() const;

  /// Parameters at an explicit (nu_E, beta), as used for sweep cells.
  [[nodiscard]] ModelParams resolve(double nu_E, double beta) const;
};

struct NumericsSpec {
  double dt = 0.1;
  int mesh_n = 40;
  double epsilon = 1e-2;
  long max_steps = 300000;
  MeshScaling mesh_scaling = MeshScaling::Equilibrium;
  bool jitter = false;  ///< randomise the boundary nudge of the mesh (see --seed)
  std::string cache_dir;  ///< empty: default_cache_dir()
  bool build_missing = true;
  double horizon = 365.0;  ///< days simulated by `simulate`
  int stride = 1;
};

/// Release protocol as configured. For impulsive releases Lambda may instead
/// be given as the effort ratio p = Lambda / M_+^*.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::Impulsive;
  double T = 7.0;
  std::optional<double> Lambda;
  std::optional<double> p;
  double u0 = 0.0;
  std::vector<std::pair<double, double>> profile;
  std::optional<long> N_r;
  double Mi0 = 0.0;

  [[nodiscard]] ReleaseSchedule resolve(const ModelParams& params) const;
};

enum class TableId {
  EffortRatio,
  TauLower,
  TauUpper,
  TauConstant,
  PeriodicEffort,
  PeriodicTime,
  CaseStudyTime,
  CaseStudyFemaleRatio,
};

std::string to_string(TableId id);
TableId parse_table_id(const std::string& s);

enum class EffortBasis { Critical, OneStep };

std::string to_string(EffortBasis b);
EffortBasis parse_effort_basis(const std::string& s);

/// One sweep: a table over the (nu_E, beta) grid with its extra axes.
struct SweepSpec {
  std::vector<TableId> tables;
  std::vector<double> nu_E;
  std::vector<double> beta;
  std::vector<double> phi;
  std::vector<double> T;
  std::vector<double> p;  ///< effort ratios Lambda / M_+^* (case study)
  double case_T = 7.0;    ///< release period of the case study
  EffortBasis effort_basis = EffortBasis::Critical;
  std::string output;  ///< directory; empty: the --out flag or "."

  void validate() const;
};

/// Grid of the parameter study (nine nu_E rows by five beta columns).
SweepSpec default_sweep();

/// Grid of the island case study (weekly releases, p in {4, 6, 8}).
SweepSpec case_study_sweep();

struct RunConfig {
  ModelSpec model;
  NumericsSpec numerics;
  std::optional<ScheduleSpec> schedule;
  std::optional<SweepSpec> sweep;
};

/// Parses INI text with sections [bio], [model], [numerics], [schedule] and
/// [sweep]. Unknown sections or keys and malformed values raise ConfigError.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");

RunConfig load_config(const std::string& path);

/// Comma-separated list of numbers; ConfigError on anything else.
std::vector<double> parse_number_list(const std::string& s);

}  // namespace sitdyn
