#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sitdyn/config.hpp"
#include "sitdyn/dynamics.hpp"
#include "sitdyn/params.hpp"
#include "sitdyn/separatrix.hpp"

namespace sitdyn {

/// A (nu_E x beta) table of preformatted cells.
struct Table {
  std::string name;  ///< file stem, e.g. "tau_constant_phi1.2"
  std::vector<double> rows;
  std::vector<double> cols;
  std::vector<std::vector<std::string>> cells;
};

inline constexpr const char* kNotAvailable = "N/A";

/// Wide CSV: header "nu_E\beta,<beta>...", one line per nu_E. Cells holding
/// a comma are double-quoted.
std::string to_csv(const Table& t);

/// Writes <dir>/<name>.csv, creating dir if needed.
void write_table(const Table& t, const std::string& dir);

/// Sterile level M_i^crit, or the one-step level (N - 1) M_+^* / gamma_i.
double effort_level(EffortBasis basis, const ModelParams& p);

/// effort_level over the wild male equilibrium at M_i = 0.
double effort_ratio(EffortBasis basis, const ModelParams& p);

/// Cloud for the sweep and CLI settings, through the cache.
SeparatrixCloud numerics_cloud(const ModelParams& p, const NumericsSpec& n, int jobs = 1,
                               std::optional<std::uint64_t> seed = {});

/// Runs every table of the sweep. Cells are independent jobs on `jobs`
/// threads; the output order only depends on the spec. Table names:
///   effort_ratio, tau_lower, tau_upper_phi<phi>, tau_constant_phi<phi>,
///   constant_effort_phi<phi>, periodic_effort_{min,max},
///   periodic_time_{min,max}, case_study_time_p<p>,
///   case_study_female_ratio_p<p>.
std::vector<Table> run_sweep(const SweepSpec& spec, const ModelSpec& model,
                             const NumericsSpec& numerics, int jobs = 1,
                             std::optional<std::uint64_t> seed = {});

/// Impulsive releases of ratio * M_+^* every T days from the wild
/// equilibrium, stopped on entry below the separatrix or after the step
/// budget. Sterile females are tracked.
Trajectory case_study_trajectory(const ModelParams& p, double ratio, double T,
                                 const DominanceTree& tree, const NumericsSpec& n);

/// Trajectory CSV extended with E/E_+, (F + Fst)/(F_+ + Fst_+),
/// F/(F + Fst) and M/(M + M_i).
void write_case_study_csv(const Trajectory& tr, const ModelParams& p, std::ostream& os);

}  // namespace sitdyn
