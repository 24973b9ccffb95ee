#include "sitdyn/separatrix.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"

namespace sitdyn {

namespace {

bool lex_less(const State3& a, const State3& b) { return a.array() < b.array(); }

double dist(const State3& a, const State3& b) {
  const double dE = a.E - b.E;
  const double dM = a.M - b.M;
  const double dF = a.F - b.F;
  return std::sqrt(dE * dE + dM * dM + dF * dF);
}

int orthant(const State3& q, const State3& pivot) {
  return (q.E > pivot.E ? 1 : 0) | (q.M > pivot.M ? 2 : 0) | (q.F > pivot.F ? 4 : 0);
}

// Threshold used by the fate test: E_- when it exists, E_+ in the
// saddle-node case, nothing when 0 is the only steady state.
std::optional<State3> fate_threshold(double Mi, const ModelParams& p) {
  const SteadyStateSet ss = steady_states(Mi, p);
  if (ss.E_minus) return ss.E_minus;
  return ss.E_plus;
}

}  // namespace

Fate fate_against(const State3& s0, double Mi, const State3& threshold, const ModelParams& p,
                  const NsfdConfig& cfg) {
  State3 s = s0;
  for (long n = 0; n <= cfg.max_steps; ++n) {
    if (strictly_less(s, threshold)) return {FateKind::Extinction, n};
    if (strictly_less(threshold, s)) return {FateKind::Survival, n};
    if (n == cfg.max_steps) break;
    s = nsfd_step(s, Mi, cfg, p);
  }
  return {FateKind::Indeterminate, cfg.max_steps};
}

Fate fate(const State3& s0, double Mi, const ModelParams& p, const NsfdConfig& cfg) {
  const auto thr = fate_threshold(Mi, p);
  if (!thr) return {FateKind::Extinction, 0};
  return fate_against(s0, Mi, *thr, p, cfg);
}

namespace {

double ray_bisection_against(const State3& v, double Mi, const State3& thr, const ModelParams& p,
                             double eps, const NsfdConfig& cfg) {
  auto verdict = [&](double rho) {
    const Fate f = fate_against(rho * v, Mi, thr, p, cfg);
    if (f.kind == FateKind::Indeterminate) {
      const State3 x = rho * v;
      throw NumericFailure(fmt::format("bisection stalled at ({:.9g}, {:.9g}, {:.9g})", x.E, x.M,
                                       x.F));
    }
    return f.kind == FateKind::Extinction;
  };
  const double rho0 = thr.E + thr.M + thr.F;
  double lo = 0.0;
  double hi = 0.0;
  if (verdict(rho0)) {
    lo = rho0;
    hi = 2.0 * rho0;
    while (verdict(hi)) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw NumericFailure("ray_bisection: no surviving scale found");
    }
  } else {
    hi = rho0;
    lo = 0.5 * rho0;
    while (!verdict(lo)) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) throw NumericFailure("ray_bisection: no extinct scale found");
    }
  }
  while (hi > (1.0 + eps) * lo) {
    const double mid = std::sqrt(lo * hi);
    if (verdict(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

double ray_bisection(const State3& v, double Mi, const ModelParams& p, double eps,
                     const NsfdConfig& cfg) {
  if (!(v.E >= 0.0 && v.M >= 0.0 && v.F >= 0.0) || v.E + v.M + v.F <= 0.0) {
    throw InvalidParameter("ray direction must be non-negative and non-zero");
  }
  if (!(eps > 0.0)) throw InvalidParameter("eps must be positive");
  const SteadyStateSet ss = steady_states(Mi, p);
  if (!ss.E_minus) throw NoPositiveEquilibrium("ray_bisection needs the bistable regime");
  return ray_bisection_against(v, Mi, *ss.E_minus, p, eps, cfg);
}

std::vector<State3> simplex_mesh(int n, double nudge, std::optional<std::uint64_t> jitter_seed) {
  if (n < 1) throw InvalidParameter("mesh_n must be at least 1");
  std::optional<std::mt19937_64> rng;
  if (jitter_seed) rng.emplace(*jitter_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto floor_at = [&](double x) {
    if (x > 0.0) return x;
    return rng ? nudge * (1.0 + unit(*rng)) : nudge;
  };
  std::vector<State3> out;
  out.reserve(static_cast<std::size_t>((n + 1) * (n + 2) / 2));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n - i; ++j) {
      const int k = n - i - j;
      State3 v{static_cast<double>(i) / n, static_cast<double>(j) / n,
               static_cast<double>(k) / n};
      v.E = floor_at(v.E);
      v.M = floor_at(v.M);
      v.F = floor_at(v.F);
      const double s = v.E + v.M + v.F;
      out.push_back((1.0 / s) * v);
    }
  }
  return out;
}

std::vector<State3> antichain_reduce(std::vector<State3> points) {
  std::sort(points.begin(), points.end(), lex_less);
  points.erase(std::unique(points.begin(), points.end()), points.end());
  std::vector<State3> keep;
  keep.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      dominated = j != i && leq(points[i], points[j]);
    }
    if (!dominated) keep.push_back(points[i]);
  }
  return keep;
}

double SeparatrixCloud::max_E() const {
  double m = 0.0;
  for (const auto& q : points) m = std::max(m, q.E);
  return m;
}

double SeparatrixCloud::max_M() const {
  double m = 0.0;
  for (const auto& q : points) m = std::max(m, q.M);
  return m;
}

double SeparatrixCloud::max_F() const {
  double m = 0.0;
  for (const auto& q : points) m = std::max(m, q.F);
  return m;
}

std::string_view to_string(MeshScaling s) {
  return s == MeshScaling::Raw ? "raw" : "equilibrium";
}

MeshScaling parse_mesh_scaling(std::string_view s) {
  if (s == "raw") return MeshScaling::Raw;
  if (s == "equilibrium") return MeshScaling::Equilibrium;
  throw ConfigError(fmt::format("unknown mesh scaling '{}' (expected raw or equilibrium)", s));
}

std::string cloud_fingerprint(const ModelParams& p, double Mi, double dt, MeshScaling scaling,
                              std::optional<std::uint64_t> jitter_seed) {
  std::string tag = fmt::format("mesh={}", to_string(scaling));
  if (jitter_seed) tag += fmt::format(";jitter={}", *jitter_seed);
  return fingerprint(p, Mi, dt, tag);
}

SeparatrixCloud build_cloud(const ModelParams& p, double Mi, int mesh_n, double eps, double dt,
                            int jobs, MeshScaling scaling,
                            std::optional<std::uint64_t> jitter_seed) {
  const SteadyStateSet ss = steady_states(Mi, p);
  if (!ss.E_minus) throw NoPositiveEquilibrium("build_cloud needs the bistable regime");
  const State3 thr = *ss.E_minus;
  const NsfdConfig cfg = make_nsfd_config(p, dt, /*controlled=*/false);
  std::vector<State3> mesh = simplex_mesh(mesh_n, 1e-6, jitter_seed);
  if (scaling == MeshScaling::Equilibrium) {
    for (auto& v : mesh) v = State3{v.E * thr.E, v.M * thr.M, v.F * thr.F};
  }

  std::vector<std::optional<State3>> found(mesh.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < mesh.size(); i = next++) {
      try {
        const double rho = ray_bisection_against(mesh[i], Mi, thr, p, eps, cfg);
        found[i] = rho * mesh[i];
      } catch (const NumericFailure&) {
        found[i].reset();
      }
    }
  };
  const int nthreads = std::max(1, jobs);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SeparatrixCloud cloud;
  cloud.epsilon = eps;
  cloud.mesh_n = mesh_n;
  cloud.fingerprint = cloud_fingerprint(p, Mi, dt, scaling, jitter_seed);
  cloud.initial_count = static_cast<long>(mesh.size());
  std::vector<State3> pts;
  for (const auto& f : found) {
    if (f) {
      pts.push_back(*f);
    } else {
      ++cloud.skipped;
    }
  }
  cloud.points = antichain_reduce(std::move(pts));
  return cloud;
}

bool linear_scan_below(const std::vector<State3>& points, const State3& x) {
  return std::any_of(points.begin(), points.end(), [&](const State3& q) { return leq(x, q); });
}

DominanceTree::DominanceTree(std::vector<State3> points) {
  std::sort(points.begin(), points.end(), lex_less);
  nodes_.reserve(points.size());
  root_ = build(points, 0, points.size());
}

int DominanceTree::build(std::vector<State3>& pts, std::size_t lo, std::size_t hi) {
  if (lo >= hi) return -1;
  // Pivot: smallest sum of distances; strict comparison keeps the first
  // (lexicographically lowest) candidate on ties because pts is sorted.
  std::size_t best = lo;
  double best_sum = INFINITY;
  for (std::size_t i = lo; i < hi; ++i) {
    double sum = 0.0;
    for (std::size_t j = lo; j < hi; ++j) sum += dist(pts[i], pts[j]);
    if (sum < best_sum) {
      best_sum = sum;
      best = i;
    }
  }
  const State3 pivot = pts[best];
  std::array<std::vector<State3>, 8> buckets;
  for (std::size_t i = lo; i < hi; ++i) {
    if (i != best) buckets[orthant(pts[i], pivot)].push_back(pts[i]);
  }
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{pivot, {}});
  // Rewrite the range bucket by bucket (each stays sorted) and recurse.
  std::size_t pos = lo;
  std::array<std::pair<std::size_t, std::size_t>, 8> ranges{};
  for (int c = 0; c < 8; ++c) {
    ranges[c] = {pos, pos + buckets[c].size()};
    std::copy(buckets[c].begin(), buckets[c].end(), pts.begin() + static_cast<long>(pos));
    pos += buckets[c].size();
  }
  for (int c = 0; c < 8; ++c) {
    const int child = build(pts, ranges[c].first, ranges[c].second);
    nodes_[id].child[c] = child;
  }
  return id;
}

bool DominanceTree::query_below(const State3& x) const {
  if (root_ < 0) return false;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const Node& nd = nodes_[stack.back()];
    stack.pop_back();
    if (leq(x, nd.point)) return true;
    // A dominator of x must exceed the pivot wherever x does.
    const int mask = orthant(x, nd.point);
    for (int c = 1; c < 8; ++c) {
      if ((c & mask) == mask && nd.child[c] >= 0) stack.push_back(nd.child[c]);
    }
  }
  return false;
}

int DominanceTree::depth() const {
  if (root_ < 0) return 0;
  int best = 0;
  std::vector<std::pair<int, int>> stack{{root_, 1}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    for (int c : nodes_[id].child) {
      if (c >= 0) stack.emplace_back(c, d + 1);
    }
  }
  return best;
}

std::vector<State3> DominanceTree::points() const {
  std::vector<State3> out;
  out.reserve(nodes_.size());
  for (const auto& nd : nodes_) out.push_back(nd.point);
  return out;
}

void save_cloud(const SeparatrixCloud& cloud, const std::string& path) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  // Write to a sibling temporary and rename so readers never see a partial file.
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw ConfigError("cannot write cloud file " + path);
    os << "#version 1\n";
    os << "#fingerprint " << cloud.fingerprint << "\n";
    os << fmt::format("#epsilon {:.17g}\n", cloud.epsilon);
    os << "#mesh_n " << cloud.mesh_n << "\n";
    for (const auto& q : cloud.points) os << fmt::format("{:.17g} {:.17g} {:.17g}\n", q.E, q.M, q.F);
    if (!os) throw ConfigError("failed writing cloud file " + path);
  }
  std::filesystem::rename(tmp, target);
}

SeparatrixCloud load_cloud(const std::string& path,
                           const std::optional<std::string>& expected_fingerprint) {
  std::ifstream is(path);
  if (!is) throw MalformedFile("cannot open cloud file " + path);
  SeparatrixCloud cloud;
  bool have_version = false;
  bool have_fp = false;
  std::string line;
  long lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string key;
      ls >> key;
      if (key == "#version") {
        int v = 0;
        if (!(ls >> v) || v != 1) throw MalformedFile(fmt::format("{}: unsupported version", path));
        have_version = true;
      } else if (key == "#fingerprint") {
        if (!(ls >> cloud.fingerprint)) throw MalformedFile(path + ": empty fingerprint");
        have_fp = true;
      } else if (key == "#epsilon") {
        if (!(ls >> cloud.epsilon)) throw MalformedFile(path + ": bad epsilon");
      } else if (key == "#mesh_n") {
        if (!(ls >> cloud.mesh_n)) throw MalformedFile(path + ": bad mesh_n");
      } else {
        throw MalformedFile(fmt::format("{}:{}: unknown header {}", path, lineno, key));
      }
      continue;
    }
    State3 q;
    std::string extra;
    if (!(ls >> q.E >> q.M >> q.F) || (ls >> extra)) {
      throw MalformedFile(fmt::format("{}:{}: expected three numbers", path, lineno));
    }
    if (!(q.E >= 0.0 && q.M >= 0.0 && q.F >= 0.0)) {
      throw MalformedFile(fmt::format("{}:{}: negative or non-finite coordinate", path, lineno));
    }
    cloud.points.push_back(q);
  }
  if (!have_version || !have_fp) throw MalformedFile(path + ": missing header");
  if (expected_fingerprint && *expected_fingerprint != cloud.fingerprint) {
    throw FingerprintMismatch(fmt::format("{}: fingerprint {} does not match parameters ({})",
                                          path, cloud.fingerprint, *expected_fingerprint));
  }
  std::sort(cloud.points.begin(), cloud.points.end(), lex_less);
  cloud.initial_count = static_cast<long>(cloud.points.size());
  return cloud;
}

std::string default_cache_dir() {
  if (const char* env = std::getenv("SITDYN_CACHE_DIR"); env && *env) return env;
  return ".sitdyn-cache";
}

SeparatrixCloud cached_cloud(const ModelParams& p, int mesh_n, double eps, double dt, int jobs,
                             const std::string& cache_dir, bool build_if_missing,
                             MeshScaling scaling, std::optional<std::uint64_t> jitter_seed) {
  const std::string dir = cache_dir.empty() ? default_cache_dir() : cache_dir;
  const std::string fp = cloud_fingerprint(p, 0.0, dt, scaling, jitter_seed);
  const std::string path =
      (std::filesystem::path(dir) / fmt::format("cloud-{}-n{}-e{:g}.txt", fp, mesh_n, eps))
          .string();
  if (std::filesystem::exists(path)) return load_cloud(path, fp);
  if (!build_if_missing) throw ConfigError("no cached separatrix cloud at " + path);
  SeparatrixCloud cloud = build_cloud(p, 0.0, mesh_n, eps, dt, jobs, scaling, jitter_seed);
  save_cloud(cloud, path);
  return cloud;
}

}  // namespace sitdyn
