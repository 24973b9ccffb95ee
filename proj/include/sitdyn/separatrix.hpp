#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sitdyn/dynamics.hpp"
#include "sitdyn/params.hpp"
#include "sitdyn/state.hpp"

namespace sitdyn {

enum class FateKind { Extinction, Survival, Indeterminate };

struct Fate {
  FateKind kind = FateKind::Indeterminate;
  long steps = 0;  ///< NSFD steps taken before the verdict
};

/// Asymptotic fate of s0 under the reduced model at constant level M_i,
/// decided by the first iterate strictly below (extinction) or strictly above
/// (survival) the unstable steady state E_-. When 0 is the only steady state
/// the verdict is immediate extinction. cfg should come from
/// make_nsfd_config(p, dt, /*controlled=*/false).
Fate fate(const State3& s0, double Mi, const ModelParams& p, const NsfdConfig& cfg);

/// Same, with the threshold state supplied by the caller.
Fate fate_against(const State3& s0, double Mi, const State3& threshold, const ModelParams& p,
                  const NsfdConfig& cfg);

/// Scale rho along direction v (non-negative, non-zero) such that rho v goes
/// extinct and (1 + eps) rho v survives. The bracket starts at the sum of
/// the components of E_- and is widened by doubling or halving.
/// Throws NumericFailure when a fate stays indeterminate.
double ray_bisection(const State3& v, double Mi, const ModelParams& p, double eps,
                     const NsfdConfig& cfg);

/// Vertices (i, j, k)/n of the regular mesh of the unit simplex, with zero
/// coordinates nudged to `nudge` and the point renormalised. With a seed,
/// each nudge is drawn uniformly from [nudge, 2 nudge) instead.
std::vector<State3> simplex_mesh(int n, double nudge = 1e-6,
                                 std::optional<std::uint64_t> jitter_seed = {});

/// Removes every point dominated (componentwise <=) by another point and
/// duplicate points; the result is sorted lexicographically.
std::vector<State3> antichain_reduce(std::vector<State3> points);

/// Coordinates in which the simplex mesh is laid out. Equilibrium scales
/// each vertex componentwise by E_- so that directions are spread evenly in
/// (E/E_-, M/M_-, F/F_-); Raw uses the vertices as population counts.
enum class MeshScaling { Equilibrium, Raw };

std::string_view to_string(MeshScaling s);
MeshScaling parse_mesh_scaling(std::string_view s);

struct SeparatrixCloud {
  std::vector<State3> points;
  double epsilon = 1e-2;
  int mesh_n = 40;
  std::string fingerprint;
  long initial_count = 0;  ///< mesh vertices attempted
  long skipped = 0;        ///< vertices whose bisection stalled

  [[nodiscard]] double max_E() const;
  [[nodiscard]] double max_M() const;
  [[nodiscard]] double max_F() const;
};

/// Certifies one boundary point per mesh vertex, then reduces to an
/// antichain. Vertices are processed on `jobs` worker threads. The
/// fingerprint covers the scaling mode.
SeparatrixCloud build_cloud(const ModelParams& p, double Mi = 0.0, int mesh_n = 40,
                            double eps = 1e-2, double dt = 0.1, int jobs = 1,
                            MeshScaling scaling = MeshScaling::Equilibrium,
                            std::optional<std::uint64_t> jitter_seed = {});

/// Fingerprint stored in clouds built with these settings.
std::string cloud_fingerprint(const ModelParams& p, double Mi, double dt, MeshScaling scaling,
                              std::optional<std::uint64_t> jitter_seed = {});

/// Exhaustive reference for query_below.
bool linear_scan_below(const std::vector<State3>& points, const State3& x);

/// Search tree over an antichain. Each node splits the remaining points by
/// the orthant they occupy relative to the node point.
class DominanceTree {
 public:
  DominanceTree() = default;
  explicit DominanceTree(std::vector<State3> points);

  /// True iff x <= P for some stored point P.
  [[nodiscard]] bool query_below(const State3& x) const;

  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] int depth() const;

  /// Stored points in tree (pre-)order.
  [[nodiscard]] std::vector<State3> points() const;

 private:
  struct Node {
    State3 point{};
    std::array<int, 8> child{-1, -1, -1, -1, -1, -1, -1, -1};
  };
  int build(std::vector<State3>& pts, std::size_t lo, std::size_t hi);
  std::vector<Node> nodes_;
  int root_ = -1;
};

/// Writes the cloud in the line-oriented text format.
void save_cloud(const SeparatrixCloud& cloud, const std::string& path);

/// Reads a cloud file. When expected_fingerprint is given, a different
/// fingerprint raises FingerprintMismatch. Bad syntax raises MalformedFile.
SeparatrixCloud load_cloud(const std::string& path,
                           const std::optional<std::string>& expected_fingerprint = {});

/// Cache directory: $SITDYN_CACHE_DIR if set, else ".sitdyn-cache".
std::string default_cache_dir();

/// Loads the cloud for these settings from the cache, building and storing
/// it when missing (or failing with ConfigError if build_if_missing is off).
SeparatrixCloud cached_cloud(const ModelParams& p, int mesh_n = 40, double eps = 1e-2,
                             double dt = 0.1, int jobs = 1, const std::string& cache_dir = "",
                             bool build_if_missing = true,
                             MeshScaling scaling = MeshScaling::Equilibrium,
                             std::optional<std::uint64_t> jitter_seed = {});

}  // namespace sitdyn
