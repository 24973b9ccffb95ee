#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"
#include "sitdyn/params.hpp"
#include "sitdyn/separatrix.hpp"

using namespace sitdyn;
namespace fs = std::filesystem;

namespace {

const ModelParams& test_params() {
  static const ModelParams p = simulation_defaults(0.05, 1e-2);
  return p;
}

const SeparatrixCloud& small_cloud() {
  static const SeparatrixCloud c = build_cloud(test_params(), 0.0, 10, 1e-2, 0.1, 2);
  return c;
}

NsfdConfig reduced_cfg(const ModelParams& p) { return make_nsfd_config(p, 0.1, false); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sitdyn-unit";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("separatrix") {

TEST_CASE("fate of reference states") {
  const ModelParams& p = test_params();
  const NsfdConfig cfg = reduced_cfg(p);
  const SteadyStateSet ss = steady_states(0.0, p);
  CHECK(fate(State3{}, 0.0, p, cfg).kind == FateKind::Extinction);
  CHECK(fate(2.0 * *ss.E_plus, 0.0, p, cfg).kind == FateKind::Survival);
  CHECK(fate(0.5 * *ss.E_minus, 0.0, p, cfg).kind == FateKind::Extinction);
  CHECK(fate(*ss.E_plus, 2.0 * mi_crit(p).value, p, cfg).kind == FateKind::Extinction);
  NsfdConfig tiny = cfg;
  tiny.max_steps = 0;
  const State3 mixed{2.0 * ss.E_minus->E, 0.1 * ss.E_minus->M, ss.E_minus->F};
  const Fate f = fate(mixed, 0.0, p, tiny);
  CHECK(f.kind == FateKind::Indeterminate);
}

TEST_CASE("ray along the unstable equilibrium recovers it") {
  const ModelParams& p = test_params();
  const State3 em = *steady_states(0.0, p).E_minus;
  const double norm = em.E + em.M + em.F;
  const State3 v = (1.0 / norm) * em;
  const double eps = 1e-3;
  const double rho = ray_bisection(v, 0.0, p, eps, reduced_cfg(p));
  CHECK(rho == doctest::Approx(norm).epsilon(eps));
}

TEST_CASE("ray scale does not depend on the starting bracket") {
  const ModelParams& p = test_params();
  const NsfdConfig cfg = reduced_cfg(p);
  const double eps = 1e-2;
  for (const State3& v : {State3{0.2, 0.3, 0.5}, State3{0.9, 0.05, 0.05}}) {
    const double a = ray_bisection(v, 0.0, p, eps, cfg);
    const double b = ray_bisection(37.0 * v, 0.0, p, eps, cfg) * 37.0;
    CHECK(a == doctest::Approx(b).epsilon(2.0 * eps));
    CHECK(fate(a * v, 0.0, p, cfg).kind == FateKind::Extinction);
    CHECK(fate((1.0 + eps) * a * v, 0.0, p, cfg).kind == FateKind::Survival);
  }
  CHECK_THROWS_AS(ray_bisection(State3{}, 0.0, p, eps, cfg), InvalidParameter);
  CHECK_THROWS_AS(ray_bisection(State3{1, 1, 1}, 0.0, p, 0.0, cfg), InvalidParameter);
  CHECK_THROWS_AS(ray_bisection(State3{1, 1, 1}, 2.0 * mi_crit(p).value, p, eps, cfg),
                  NoPositiveEquilibrium);
}

TEST_CASE("axis thresholds at a low hatching rate and weak Allee effect") {
  const ModelParams p = simulation_defaults(0.1, 1e-4);
  const NsfdConfig cfg = reduced_cfg(p);
  const double females = ray_bisection(State3{1e-6, 1e-6, 1.0}, 0.0, p, 1e-2, cfg);
  const double eggs = ray_bisection(State3{1.0, 1e-6, 1e-6}, 0.0, p, 1e-2, cfg);
  CHECK(females == doctest::Approx(5.0).epsilon(0.2));
  CHECK(eggs == doctest::Approx(900.0).epsilon(0.2));
}

TEST_CASE("simplex mesh") {
  CHECK(simplex_mesh(40).size() == 861);
  const auto m = simplex_mesh(10);
  CHECK(m.size() == 66);
  for (const State3& v : m) {
    CHECK(v.E + v.M + v.F == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(v.E > 0.0);
    CHECK(v.M > 0.0);
    CHECK(v.F > 0.0);
  }
  const auto j1 = simplex_mesh(10, 1e-6, 42);
  const auto j2 = simplex_mesh(10, 1e-6, 42);
  const auto j3 = simplex_mesh(10, 1e-6, 43);
  CHECK(j1 == j2);
  CHECK(j1 != j3);
  CHECK(j1 != m);
  for (const State3& v : j1) {
    for (double c : v.array()) {
      if (c < 1e-3) CHECK((c >= 0.99e-6 && c < 2e-6));
    }
  }
  CHECK_THROWS_AS(simplex_mesh(0), InvalidParameter);
  CHECK(parse_mesh_scaling("raw") == MeshScaling::Raw);
  CHECK(parse_mesh_scaling("equilibrium") == MeshScaling::Equilibrium);
  CHECK(to_string(MeshScaling::Raw) == "raw");
  CHECK_THROWS_AS(parse_mesh_scaling("log"), ConfigError);
}

TEST_CASE("antichain reduction") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<State3> pts;
  for (int i = 0; i < 400; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  pts.push_back(pts[0]);
  const auto red = antichain_reduce(pts);
  for (std::size_t i = 0; i < red.size(); ++i) {
    for (std::size_t j = 0; j < red.size(); ++j) {
      if (i != j) CHECK_FALSE(leq(red[i], red[j]));
    }
  }
  // Every removed point is dominated by a kept one.
  for (const State3& x : pts) CHECK(linear_scan_below(red, x));
  CHECK(std::is_sorted(red.begin(), red.end(),
                       [](const State3& a, const State3& b) { return a.array() < b.array(); }));
}

TEST_CASE("cloud is a certified antichain") {
  const ModelParams& p = test_params();
  const SeparatrixCloud& c = small_cloud();
  CHECK(c.initial_count == 66);
  CHECK(c.skipped == 0);
  CHECK(c.points.size() > 10);
  CHECK(c.fingerprint == cloud_fingerprint(p, 0.0, 0.1, MeshScaling::Equilibrium));
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    for (std::size_t j = 0; j < c.points.size(); ++j) {
      if (i != j) CHECK_FALSE(leq(c.points[i], c.points[j]));
    }
  }
  const NsfdConfig cfg = reduced_cfg(p);
  for (const State3& x : c.points) {
    CHECK(fate(x, 0.0, p, cfg).kind == FateKind::Extinction);
    CHECK(fate((1.0 + c.epsilon) * x, 0.0, p, cfg).kind == FateKind::Survival);
  }
  CHECK(std::isfinite(c.max_E()));
  CHECK(std::isfinite(c.max_F()));
}

TEST_CASE("cloud build does not depend on the worker count") {
  const ModelParams p = simulation_defaults(0.1, 1e-1);
  const SeparatrixCloud a = build_cloud(p, 0.0, 6, 1e-2, 0.1, 1);
  const SeparatrixCloud b = build_cloud(p, 0.0, 6, 1e-2, 0.1, 3);
  CHECK(a.points == b.points);
  const SeparatrixCloud raw = build_cloud(p, 0.0, 6, 1e-2, 0.1, 1, MeshScaling::Raw);
  CHECK(raw.fingerprint != a.fingerprint);
}

TEST_CASE("tree queries agree with the linear scan") {
  const ModelParams& p = test_params();
  const SeparatrixCloud& c = small_cloud();
  const DominanceTree tree(c.points);
  CHECK(tree.size() == c.points.size());
  CHECK(tree.depth() >= 1);
  CHECK(tree.depth() <= static_cast<int>(c.points.size()));
  auto stored = tree.points();
  std::sort(stored.begin(), stored.end(),
            [](const State3& a, const State3& b) { return a.array() < b.array(); });
  CHECK(stored == c.points);

  const State3 ep = *steady_states(0.0, p).E_plus;
  CHECK(tree.query_below(State3{}));
  CHECK_FALSE(tree.query_below(ep));

  std::mt19937_64 rng(29);
  const State3 box{c.max_E() * 1.2, c.max_M() * 1.2, c.max_F() * 1.2};
  int agree = 0, positives = 0;
  for (int i = 0; i < 10000; ++i) {
    State3 x = oracle::random_state(rng, i % 2 ? box : 2.0 * ep);
    if (i % 4 == 0) {
      // Near a stored point, so that both answers are well represented.
      const State3& q = c.points[rng() % c.points.size()];
      const State3 w = oracle::random_state(rng, State3{0.2, 0.2, 0.2});
      x = {q.E * (0.9 + w.E), q.M * (0.9 + w.M), q.F * (0.9 + w.F)};
    }
    const bool t = tree.query_below(x);
    agree += t == linear_scan_below(c.points, x);
    positives += t;
  }
  CHECK(agree == 10000);
  CHECK(positives > 100);

  // Adversarial: stored points and one-ulp neighbours in each coordinate.
  for (const State3& q : c.points) {
    CHECK(tree.query_below(q));
    for (int k = 0; k < 3; ++k) {
      for (double dir : {-INFINITY, INFINITY}) {
        auto a = q.array();
        a[k] = std::nextafter(a[k], dir);
        const State3 x = State3::from(a);
        CHECK(tree.query_below(x) == linear_scan_below(c.points, x));
      }
    }
  }
}

TEST_CASE("tree on random antichains") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<State3> pts;
    for (int i = 0; i < 300; ++i) {
      // Points near the plane E + M + F = 1 are mostly incomparable.
      const double a = u(rng), b = u(rng);
      const double lo = std::min(a, b), hi = std::max(a, b);
      pts.push_back({lo, hi - lo, 1.0 - hi});
    }
    pts = antichain_reduce(pts);
    const DominanceTree tree(pts);
    for (int i = 0; i < 500; ++i) {
      const State3 x{0.6 * u(rng), 0.6 * u(rng), 0.6 * u(rng)};
      CHECK(tree.query_below(x) == linear_scan_below(pts, x));
    }
  }
  CHECK_FALSE(DominanceTree{}.query_below(State3{}));
}

TEST_CASE("query is monotone and bounded") {
  const SeparatrixCloud& c = small_cloud();
  const DominanceTree tree(c.points);
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const State3 box{c.max_E(), c.max_M(), c.max_F()};
  for (int i = 0; i < 2000; ++i) {
    const State3 x = oracle::random_state(rng, box);
    if (!tree.query_below(x)) continue;
    const State3 y{x.E * u(rng), x.M * u(rng), x.F * u(rng)};
    CHECK(tree.query_below(y));
  }
  CHECK_FALSE(tree.query_below(State3{std::nextafter(c.max_E(), INFINITY), 0.0, 0.0}));
  CHECK_FALSE(tree.query_below(State3{0.0, 0.0, std::nextafter(c.max_F(), INFINITY)}));
}

TEST_CASE("stored points are sound") {
  const ModelParams& p = test_params();
  const SeparatrixCloud& c = small_cloud();
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<std::size_t> pick(0, c.points.size() - 1);
  const NsfdConfig cfg = reduced_cfg(p);
  for (int i = 0; i < 50; ++i) {
    CHECK(fate(c.points[pick(rng)], 0.0, p, cfg).kind == FateKind::Extinction);
  }
}

TEST_CASE("cloud files round-trip") {
  const ModelParams& p = test_params();
  const SeparatrixCloud& c = small_cloud();
  const fs::path path = scratch("roundtrip.txt");
  save_cloud(c, path.string());
  const std::string text = slurp(path);
  CHECK(text.rfind("#version 1\n#fingerprint " + c.fingerprint + "\n#epsilon ", 0) == 0);
  CHECK(text.find("\n#mesh_n 10\n") != std::string::npos);

  const SeparatrixCloud back = load_cloud(path.string(), c.fingerprint);
  CHECK(back.points == c.points);
  CHECK(back.epsilon == c.epsilon);
  CHECK(back.mesh_n == c.mesh_n);
  const fs::path again = scratch("roundtrip2.txt");
  save_cloud(back, again.string());
  CHECK(slurp(again) == text);

  const DominanceTree t1(c.points), t2(back.points);
  std::mt19937_64 rng(43);
  const State3 ep = *steady_states(0.0, p).E_plus;
  for (int i = 0; i < 100; ++i) {
    const State3 x = oracle::random_state(rng, 0.5 * ep);
    CHECK(t1.query_below(x) == t2.query_below(x));
  }
}

TEST_CASE("reordered point lines load to the same query function") {
  const SeparatrixCloud& c = small_cloud();
  const fs::path path = scratch("permuted.txt");
  save_cloud(c, path.string());
  std::vector<std::string> header, body;
  {
    std::ifstream is(path);
    std::string line;
    while (std::getline(is, line)) (line[0] == '#' ? header : body).push_back(line);
  }
  std::mt19937_64 rng(47);
  std::shuffle(body.begin(), body.end(), rng);
  {
    std::ofstream os(path);
    for (const auto& l : header) os << l << "\n";
    for (const auto& l : body) os << l << "\n";
  }
  const SeparatrixCloud back = load_cloud(path.string(), c.fingerprint);
  const DominanceTree t1(c.points), t2(back.points);
  CHECK(t1.points() == t2.points());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const State3 x{c.max_E() * u(rng), c.max_M() * u(rng), c.max_F() * u(rng)};
    CHECK(t1.query_below(x) == t2.query_below(x));
  }
}

TEST_CASE("cloud file errors") {
  const SeparatrixCloud& c = small_cloud();
  const fs::path path = scratch("errors.txt");
  save_cloud(c, path.string());
  CHECK_THROWS_AS(load_cloud(path.string(), std::string("0000000000000000")), FingerprintMismatch);
  CHECK_NOTHROW(load_cloud(path.string()));

  auto write = [&](const std::string& s) {
    std::ofstream os(path);
    os << s;
  };
  write("#version 1\n#fingerprint abc\n1 2\n");
  CHECK_THROWS_AS(load_cloud(path.string()), MalformedFile);
  write("#version 1\n#fingerprint abc\n1 2 -3\n");
  CHECK_THROWS_AS(load_cloud(path.string()), MalformedFile);
  write("#version 2\n#fingerprint abc\n");
  CHECK_THROWS_AS(load_cloud(path.string()), MalformedFile);
  write("1 2 3\n");
  CHECK_THROWS_AS(load_cloud(path.string()), MalformedFile);
  write("#version 1\n#fingerprint abc\n#colour blue\n");
  CHECK_THROWS_AS(load_cloud(path.string()), MalformedFile);
  CHECK_THROWS_AS(load_cloud(scratch("missing.txt").string()), MalformedFile);
}

TEST_CASE("cache reuses clouds and is keyed by the parameters") {
  const ModelParams p = simulation_defaults(0.1, 1e-1);
  const fs::path dir = scratch("cache");
  fs::remove_all(dir);
  CHECK_THROWS_AS(cached_cloud(p, 4, 1e-2, 0.1, 1, dir.string(), false), ConfigError);
  const SeparatrixCloud a = cached_cloud(p, 4, 1e-2, 0.1, 1, dir.string());
  const SeparatrixCloud b = cached_cloud(p, 4, 1e-2, 0.1, 1, dir.string(), false);
  CHECK(a.points == b.points);
  ModelParams q = p;
  q.mu_M *= 1.01;
  CHECK_THROWS_AS(cached_cloud(q, 4, 1e-2, 0.1, 1, dir.string(), false), ConfigError);
  CHECK_THROWS_AS(
      cached_cloud(p, 4, 1e-2, 0.1, 1, dir.string(), false, MeshScaling::Equilibrium, 5),
      ConfigError);
}

}  // TEST_SUITE
