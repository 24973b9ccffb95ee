#include "sitdyn/config.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"

namespace sitdyn {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, raw));
  }
  return v;
}

long parse_integer(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}: '{}' is not an integer", what, raw));
  }
  return v;
}

bool parse_bool(const std::string& raw, const std::string& what) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", what, raw));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  return out;
}

// "t:v, t:v, ..." as used for periodic release profiles.
std::vector<std::pair<double, double>> parse_profile(const std::string& s,
                                                     const std::string& what) {
  std::vector<std::pair<double, double>> out;
  for (const auto& item : split(s, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(fmt::format("{}: expected t:value pairs, got '{}'", what, item));
    }
    out.emplace_back(parse_number(item.substr(0, colon), what),
                     parse_number(item.substr(colon + 1), what));
  }
  if (out.empty()) throw ConfigError(what + ": empty profile");
  return out;
}

using Handler = std::function<void(const std::string&)>;

// Applies every key of `section` through its handler; unknown keys are fatal.
void apply_section(const pt::ptree& section, const std::string& name,
                   const std::map<std::string, Handler>& handlers) {
  for (const auto& [key, node] : section) {
    if (!node.empty()) throw ConfigError(fmt::format("[{}] {}: nested values", name, key));
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ConfigError(fmt::format("[{}] unknown key '{}'", name, key));
    it->second(node.data());
  }
}

Handler set_double(double& field, const std::string& what) {
  return [&field, what](const std::string& v) { field = parse_number(v, what); };
}

Handler set_opt(std::optional<double>& field, const std::string& what) {
  return [&field, what](const std::string& v) { field = parse_number(v, what); };
}

void read_bio(const pt::ptree& sec, BioParams& bio) {
  apply_section(sec, "bio",
                {
                    {"r_viable", set_double(bio.r_viable, "bio.r_viable")},
                    {"N_eggs", set_double(bio.N_eggs, "bio.N_eggs")},
                    {"tau_gono", set_double(bio.tau_gono, "bio.tau_gono")},
                    {"tau_E", set_double(bio.tau_E, "bio.tau_E")},
                    {"tau_L", set_double(bio.tau_L, "bio.tau_L")},
                    {"r_L", set_double(bio.r_L, "bio.r_L")},
                    {"r", set_double(bio.r, "bio.r")},
                    {"tau_M", set_double(bio.tau_M, "bio.tau_M")},
                    {"tau_F", set_double(bio.tau_F, "bio.tau_F")},
                    {"gamma_i", set_double(bio.gamma_i, "bio.gamma_i")},
                });
}

void read_model(const pt::ptree& sec, ModelSpec& m) {
  apply_section(sec, "model",
                {
                    {"nu_E", set_opt(m.nu_E, "model.nu_E")},
                    {"beta", set_opt(m.beta, "model.beta")},
                    {"K", set_opt(m.K, "model.K")},
                    {"M_target", set_double(m.M_target, "model.M_target")},
                    {"b", set_opt(m.b, "model.b")},
                    {"nu_E_tilde", set_opt(m.nu_E_tilde, "model.nu_E_tilde")},
                    {"mu_E", set_opt(m.mu_E, "model.mu_E")},
                    {"mu_L", set_opt(m.mu_L, "model.mu_L")},
                    {"nu_L", set_opt(m.nu_L, "model.nu_L")},
                    {"mu_M", set_opt(m.mu_M, "model.mu_M")},
                    {"mu_F", set_opt(m.mu_F, "model.mu_F")},
                    {"mu_i", set_opt(m.mu_i, "model.mu_i")},
                    {"r", set_opt(m.r, "model.r")},
                    {"gamma_i", set_opt(m.gamma_i, "model.gamma_i")},
                });
}

void read_numerics(const pt::ptree& sec, NumericsSpec& n) {
  apply_section(
      sec, "numerics",
      {
          {"dt", set_double(n.dt, "numerics.dt")},
          {"mesh_n",
           [&n](const std::string& v) {
             n.mesh_n = static_cast<int>(parse_integer(v, "numerics.mesh_n"));
           }},
          {"epsilon", set_double(n.epsilon, "numerics.epsilon")},
          {"max_steps",
           [&n](const std::string& v) { n.max_steps = parse_integer(v, "numerics.max_steps"); }},
          {"mesh_scaling",
           [&n](const std::string& v) { n.mesh_scaling = parse_mesh_scaling(trim(v)); }},
          {"jitter", [&n](const std::string& v) { n.jitter = parse_bool(v, "numerics.jitter"); }},
          {"cache_dir", [&n](const std::string& v) { n.cache_dir = trim(v); }},
          {"build_missing",
           [&n](const std::string& v) {
             n.build_missing = parse_bool(v, "numerics.build_missing");
           }},
          {"horizon", set_double(n.horizon, "numerics.horizon")},
          {"stride",
           [&n](const std::string& v) {
             n.stride = static_cast<int>(parse_integer(v, "numerics.stride"));
           }},
      });
  if (!(n.dt > 0.0)) throw ConfigError("numerics.dt must be positive");
  if (n.mesh_n < 1) throw ConfigError("numerics.mesh_n must be at least 1");
  if (!(n.epsilon > 0.0)) throw ConfigError("numerics.epsilon must be positive");
  if (n.max_steps < 1) throw ConfigError("numerics.max_steps must be positive");
  if (!(n.horizon >= 0.0)) throw ConfigError("numerics.horizon must be non-negative");
  if (n.stride < 1) throw ConfigError("numerics.stride must be at least 1");
}

ScheduleKind parse_kind(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "constant") return ScheduleKind::Constant;
  if (s == "periodic") return ScheduleKind::Periodic;
  if (s == "impulsive") return ScheduleKind::Impulsive;
  throw ConfigError(fmt::format("schedule.kind: unknown kind '{}'", raw));
}

void read_schedule(const pt::ptree& sec, ScheduleSpec& s) {
  std::string u0_raw;
  apply_section(sec, "schedule",
                {
                    {"kind", [&s](const std::string& v) { s.kind = parse_kind(v); }},
                    {"T", set_double(s.T, "schedule.T")},
                    {"Lambda", set_opt(s.Lambda, "schedule.Lambda")},
                    {"p", set_opt(s.p, "schedule.p")},
                    {"u0", [&u0_raw](const std::string& v) { u0_raw = v; }},
                    {"N_r",
                     [&s](const std::string& v) {
                       if (trim(v) == "inf") {
                         s.N_r.reset();
                       } else {
                         s.N_r = parse_integer(v, "schedule.N_r");
                       }
                     }},
                    {"Mi0", set_double(s.Mi0, "schedule.Mi0")},
                });
  if (!u0_raw.empty()) {
    if (u0_raw.find(':') != std::string::npos) {
      s.profile = parse_profile(u0_raw, "schedule.u0");
    } else {
      s.u0 = parse_number(u0_raw, "schedule.u0");
    }
  }
  if (s.Lambda && s.p) throw ConfigError("schedule: give either Lambda or p, not both");
  if (s.kind == ScheduleKind::Impulsive && !s.Lambda && !s.p) {
    throw ConfigError("schedule: impulsive releases need Lambda or p");
  }
}

void read_sweep(const pt::ptree& sec, SweepSpec& w) {
  auto list = [](std::vector<double>& field, const std::string& what) -> Handler {
    return [&field, what](const std::string& v) {
      try {
        field = parse_number_list(v);
      } catch (const ConfigError& e) {
        throw ConfigError(what + ": " + e.what());
      }
    };
  };
  apply_section(sec, "sweep",
                {
                    {"table",
                     [&w](const std::string& v) {
                       w.tables.clear();
                       for (const auto& t : split(v, ',')) w.tables.push_back(parse_table_id(t));
                     }},
                    {"nu_E", list(w.nu_E, "sweep.nu_E")},
                    {"beta", list(w.beta, "sweep.beta")},
                    {"phi", list(w.phi, "sweep.phi")},
                    {"T", list(w.T, "sweep.T")},
                    {"p", list(w.p, "sweep.p")},
                    {"case_T", set_double(w.case_T, "sweep.case_T")},
                    {"effort_basis",
                     [&w](const std::string& v) { w.effort_basis = parse_effort_basis(trim(v)); }},
                    {"output", [&w](const std::string& v) { w.output = trim(v); }},
                });
  w.validate();
}

}  // namespace

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) out.push_back(parse_number(item, "list"));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

ModelParams ModelSpec::resolve() const {
  if (!nu_E || !beta) throw ConfigError("[model] needs nu_E and beta");
  return resolve(*nu_E, *beta);
}

ModelParams ModelSpec::resolve(double nu_E_value, double beta_value) const {
  ModelParams p = default_rates();
  try {
    if (bio) {
      // Placeholder nu_E_tilde and K; both are fixed below.
      p = derive_model_params(*bio, 1.0, beta_value, 1.0, mu_i.value_or(p.mu_i));
    }
    if (b) p.b = *b;
    if (mu_E) p.mu_E = *mu_E;
    if (mu_L) p.mu_L = *mu_L;
    if (nu_L) p.nu_L = *nu_L;
    if (mu_M) p.mu_M = *mu_M;
    if (mu_F) p.mu_F = *mu_F;
    if (mu_i) p.mu_i = *mu_i;
    if (r) p.r = *r;
    if (gamma_i) p.gamma_i = *gamma_i;
    p.nu_E = nu_E_value;
    p.beta = beta_value;
    p.nu_E_tilde = nu_E_tilde ? *nu_E_tilde
                   : p.nu_L > 0.0 ? nu_E_value * (p.nu_L + p.mu_L) / p.nu_L
                                  : nu_E_value;
    p.K = K ? *K : calibrate_K(p, M_target);
    p.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(fmt::format("model (nu_E = {:g}, beta = {:g}): {}", nu_E_value, beta_value,
                                  e.what()));
  } catch (const CalibrationInfeasible& e) {
    throw ConfigError(fmt::format("model (nu_E = {:g}, beta = {:g}): {}", nu_E_value, beta_value,
                                  e.what()));
  }
  return p;
}

ReleaseSchedule ScheduleSpec::resolve(const ModelParams& params) const {
  try {
    switch (kind) {
      case ScheduleKind::Constant:
        return ReleaseSchedule::constant(u0, Mi0);
      case ScheduleKind::Periodic: {
        auto knots = profile;
        if (knots.empty()) knots = {{0.0, u0}, {T, u0}};
        return ReleaseSchedule::periodic(T, std::move(knots), N_r, Mi0);
      }
      case ScheduleKind::Impulsive: {
        double lambda = Lambda.value_or(0.0);
        if (p) {
          const SteadyStateSet ss = steady_states(0.0, params);
          if (!ss.M_plus) throw ConfigError("schedule.p needs a wild equilibrium");
          lambda = *p * *ss.M_plus;
        }
        return ReleaseSchedule::impulsive(lambda, T, N_r, Mi0);
      }
    }
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  throw ConfigError("schedule: unknown kind");
}

std::string to_string(TableId id) {
  switch (id) {
    case TableId::EffortRatio: return "effort_ratio";
    case TableId::TauLower: return "tau_lower";
    case TableId::TauUpper: return "tau_upper";
    case TableId::TauConstant: return "tau_constant";
    case TableId::PeriodicEffort: return "periodic_effort";
    case TableId::PeriodicTime: return "periodic_time";
    case TableId::CaseStudyTime: return "case_study_time";
    case TableId::CaseStudyFemaleRatio: return "case_study_female_ratio";
  }
  return "?";
}

TableId parse_table_id(const std::string& raw) {
  const std::string s = trim(raw);
  for (TableId id : {TableId::EffortRatio, TableId::TauLower, TableId::TauUpper,
                     TableId::TauConstant, TableId::PeriodicEffort, TableId::PeriodicTime,
                     TableId::CaseStudyTime, TableId::CaseStudyFemaleRatio}) {
    if (s == to_string(id)) return id;
  }
  throw ConfigError(fmt::format("unknown table '{}'", raw));
}

std::string to_string(EffortBasis b) {
  return b == EffortBasis::Critical ? "critical" : "one-step";
}

EffortBasis parse_effort_basis(const std::string& s) {
  if (s == "critical") return EffortBasis::Critical;
  if (s == "one-step") return EffortBasis::OneStep;
  throw ConfigError(fmt::format("unknown effort basis '{}' (expected critical or one-step)", s));
}

void SweepSpec::validate() const {
  if (tables.empty()) throw ConfigError("sweep: no table selected");
  if (nu_E.empty() || beta.empty()) throw ConfigError("sweep: empty nu_E or beta grid");
  auto positive = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
  };
  if (!positive(nu_E)) throw ConfigError("sweep: nu_E values must be positive");
  if (!positive(beta)) throw ConfigError("sweep: beta values must be positive");
  if (!positive(phi) || !positive(T) || !positive(p)) {
    throw ConfigError("sweep: phi, T and p values must be positive");
  }
  if (!(case_T > 0.0)) throw ConfigError("sweep: case_T must be positive");
  for (TableId t : tables) {
    const bool needs_phi = t == TableId::TauUpper || t == TableId::TauConstant ||
                           t == TableId::PeriodicEffort || t == TableId::PeriodicTime;
    if (needs_phi && phi.empty()) throw ConfigError("sweep: " + to_string(t) + " needs phi");
    if ((t == TableId::PeriodicEffort || t == TableId::PeriodicTime) && T.empty()) {
      throw ConfigError("sweep: " + to_string(t) + " needs T");
    }
    if ((t == TableId::CaseStudyTime || t == TableId::CaseStudyFemaleRatio) && p.empty()) {
      throw ConfigError("sweep: " + to_string(t) + " needs p");
    }
  }
}

SweepSpec default_sweep() {
  SweepSpec w;
  w.tables = {TableId::EffortRatio, TableId::TauLower, TableId::TauUpper, TableId::TauConstant,
              TableId::PeriodicEffort, TableId::PeriodicTime};
  w.nu_E = {0.005, 0.01, 0.02, 0.03, 0.05, 0.1, 0.15, 0.2, 0.25};
  w.beta = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  w.phi = {1.2, 1.4, 1.6, 1.8, 2.0, 4.0, 8.0};
  w.T = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return w;
}

SweepSpec case_study_sweep() {
  SweepSpec w;
  w.tables = {TableId::CaseStudyTime, TableId::CaseStudyFemaleRatio};
  w.nu_E = {0.001, 0.002, 0.005, 0.008, 0.01, 0.015};
  w.beta = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  w.p = {4, 6, 8};
  w.case_T = 7.0;
  return w;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", origin, e.line(), e.message()));
  }
  RunConfig cfg;
  for (const auto& [name, sec] : tree) {
    if (sec.empty() && !sec.data().empty()) {
      throw ConfigError(fmt::format("{}: key '{}' outside of a section", origin, name));
    }
    try {
      if (name == "bio") {
        BioParams bio;
        read_bio(sec, bio);
        cfg.model.bio = bio;
      } else if (name == "model") {
        read_model(sec, cfg.model);
      } else if (name == "numerics") {
        read_numerics(sec, cfg.numerics);
      } else if (name == "schedule") {
        ScheduleSpec s;
        read_schedule(sec, s);
        cfg.schedule = s;
      } else if (name == "sweep") {
        SweepSpec w = default_sweep();
        read_sweep(sec, w);
        cfg.sweep = w;
      } else {
        throw ConfigError(fmt::format("unknown section [{}]", name));
      }
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", origin, e.what()));
    }
  }
  if (cfg.model.bio) {
    try {
      cfg.model.bio->validate();
    } catch (const InvalidParameter& e) {
      throw ConfigError(fmt::format("{}: [bio] {}", origin, e.what()));
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace sitdyn
