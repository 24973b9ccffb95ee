#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"
#include "sitdyn/params.hpp"
#include "sitdyn/state.hpp"

using namespace sitdyn;

TEST_SUITE("model-core") {

TEST_CASE("half-lives convert through log(2)/tau") {
  BioParams bio;
  bio.tau_E = 30.0;
  bio.tau_M = 5.0;
  const ModelParams p = derive_model_params(bio, 0.05, 1e-3, 1000.0, 0.12);
  CHECK(p.mu_E == doctest::Approx(std::numbers::ln2 / 30.0).epsilon(1e-15));
  CHECK(p.mu_E == doctest::Approx(0.0231).epsilon(1e-2));
  CHECK(p.mu_M == doctest::Approx(0.1386).epsilon(1e-3));
  CHECK(p.mu_F == doctest::Approx(std::numbers::ln2 / bio.tau_F));
  CHECK(p.b == doctest::Approx(bio.r_viable * bio.N_eggs / bio.tau_gono));
  CHECK(p.nu_L == doctest::Approx(1.0 / bio.tau_L));
  CHECK(p.nu_E / p.nu_E_tilde == doctest::Approx(p.nu_L / (p.nu_L + p.mu_L)));
}

TEST_CASE("full larval survival gives zero larval mortality") {
  BioParams bio;
  bio.r_L = 1.0;
  const ModelParams p = derive_model_params(bio, 0.05, 1e-3, 1000.0, 0.12);
  CHECK(p.mu_L == 0.0);
  CHECK(p.nu_E == doctest::Approx(p.nu_E_tilde));
}

TEST_CASE("non-positive biological inputs are rejected") {
  BioParams bio;
  bio.tau_E = 0.0;
  CHECK_THROWS_AS(derive_model_params(bio, 0.05, 1e-3, 1000.0, 0.12), InvalidParameter);
  bio = BioParams{};
  bio.r_L = 1.5;
  CHECK_THROWS_AS(derive_model_params(bio, 0.05, 1e-3, 1000.0, 0.12), InvalidParameter);
  bio = BioParams{};
  CHECK_THROWS_AS(derive_model_params(bio, -1.0, 1e-3, 1000.0, 0.12), InvalidParameter);
  CHECK_THROWS_AS(derive_model_params(bio, 0.05, 0.0, 1000.0, 0.12), InvalidParameter);
}

TEST_CASE("derived rates over the measured box stay in the published intervals") {
  // Published intervals are rounded; allow half a unit of the last digit.
  struct Interval {
    double lo, hi, slack;
    bool contains(double v) const { return v >= lo - slack && v <= hi + slack; }
  };
  const Interval mu_L{0.034, 0.05, 5e-4}, nu_L{0.09, 0.125, 5e-4}, ratio{0.64, 0.79, 5e-3};
  const Interval mu_E{0.023, 0.046, 5e-4}, mu_M{0.077, 0.139, 5e-4}, mu_F{0.033, 0.046, 5e-4};
  const Interval b{7.46, 14.85, 5e-3};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto pick = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  for (int i = 0; i < 500; ++i) {
    BioParams bio;
    bio.r_viable = pick(0.95, 0.99);
    bio.N_eggs = pick(55.0, 75.0);
    // The published fecundity interval corresponds to cycles of 5 to 7 days.
    bio.tau_gono = pick(5.0, 7.0);
    bio.tau_E = pick(15.0, 30.0);
    bio.tau_L = pick(8.0, 11.0);
    bio.r_L = pick(0.67, 0.69);
    bio.tau_M = pick(5.0, 9.0);
    bio.tau_F = pick(15.0, 21.0);
    const ModelParams p = derive_model_params(bio, 0.05, 1e-3, 1000.0, 0.12);
    CHECK(b.contains(p.b));
    CHECK(mu_L.contains(p.mu_L));
    CHECK(nu_L.contains(p.nu_L));
    CHECK(ratio.contains(p.nu_E / p.nu_E_tilde));
    CHECK(mu_E.contains(p.mu_E));
    CHECK(mu_M.contains(p.mu_M));
    CHECK(mu_F.contains(p.mu_F));
  }
}

TEST_CASE("aggregates at the simulation defaults") {
  ModelParams p = default_rates();
  p.nu_E = 0.1;
  p.beta = 1e-3;
  p.K = 1e4;
  const Aggregates a = aggregates(p);
  CHECK(a.N == doctest::Approx(122.5 * 0.1 / 0.13).epsilon(1e-14));
  CHECK(a.N == doctest::Approx(94.23).epsilon(1e-4));
  CHECK(a.lambda == doctest::Approx(p.mu_M / ((1.0 - p.r) * p.nu_E * p.K)));
  CHECK(a.psi == doctest::Approx(a.lambda / p.beta));
  CHECK(a.xi == 4.0 * a.psi / a.N);
}

TEST_CASE("aggregates scale with K and beta") {
  ModelParams p = simulation_defaults(0.05, 1e-2);
  const Aggregates a = aggregates(p);
  for (double c : {0.5, 2.0, 10.0}) {
    ModelParams q = p;
    q.K = c * p.K;
    const Aggregates b = aggregates(q);
    CHECK(b.N == a.N);
    CHECK(b.lambda == doctest::Approx(a.lambda / c).epsilon(1e-14));
    CHECK(b.psi == doctest::Approx(a.psi / c).epsilon(1e-14));
  }
  ModelParams q = p;
  q.beta = 1e12;
  CHECK(aggregates(q).psi < 1e-12);
}

TEST_CASE("calibrated K places the wild male equilibrium on target") {
  for (double nu : {0.005, 0.1, 0.25}) {
    for (double beta : {1e-4, 1e-2, 1.0}) {
      const ModelParams p = simulation_defaults(nu, beta, 5106.0);
      const SteadyStateSet ss = steady_states(0.0, p);
      REQUIRE(ss.M_plus.has_value());
      CHECK(*ss.M_plus == doctest::Approx(5106.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("calibration limit for large beta M") {
  ModelParams p = default_rates();
  p.nu_E = 0.1;
  p.beta = 10.0;
  const double N = p.b * p.r * p.nu_E / (p.mu_F * (p.nu_E + p.mu_E));
  const double limit = 5106.0 * p.mu_M / ((1.0 - p.r) * p.nu_E * (1.0 - 1.0 / N));
  CHECK(calibrate_K(p, 5106.0) == doctest::Approx(limit).epsilon(1e-12));
}

TEST_CASE("infeasible calibration is reported") {
  ModelParams p = default_rates();
  p.nu_E = 0.1;
  p.beta = 1e-7;  // N (1 - exp(-beta M)) < 1 at M = 5106
  CHECK_THROWS_AS(calibrate_K(p, 5106.0), CalibrationInfeasible);
  p.beta = 1e-3;
  CHECK_THROWS_AS(calibrate_K(p, -1.0), InvalidParameter);
}

TEST_CASE("fingerprint changes with every parameter and the tag") {
  const ModelParams p = simulation_defaults(0.05, 1e-3);
  const std::string base = fingerprint(p);
  CHECK(base == fingerprint(p));
  CHECK(base.size() == 16);
  std::vector<double ModelParams::*> fields = {
      &ModelParams::b,    &ModelParams::K,    &ModelParams::nu_E,  &ModelParams::nu_E_tilde,
      &ModelParams::mu_E, &ModelParams::mu_L, &ModelParams::nu_L,  &ModelParams::mu_M,
      &ModelParams::mu_F, &ModelParams::mu_i, &ModelParams::r,     &ModelParams::beta,
      &ModelParams::gamma_i};
  for (auto f : fields) {
    ModelParams q = p;
    q.*f = std::nextafter(q.*f, INFINITY);
    CHECK(fingerprint(q) != base);
  }
  CHECK(fingerprint(p, 1.0) != base);
  CHECK(fingerprint(p, 0.0, 0.1) != base);
  CHECK(fingerprint(p, 0.0, 0.0, "x") != base);
}

TEST_CASE("partial order examples") {
  CHECK(partial_order(State3{1, 1, 1}, State3{2, 2, 2}) == Relation::LL);
  CHECK(partial_order(State3{1, 3, 1}, State3{2, 2, 2}) == Relation::Incomparable);
  CHECK(partial_order(State3{1, 2, 3}, State3{1, 2, 3}) == Relation::Equal);
  CHECK(partial_order(State3{1, 2, 3}, State3{1, 2, 4}) == Relation::LT);
  CHECK(partial_order(State3{2, 2, 2}, State3{1, 1, 1}) == Relation::GG);
  CHECK(partial_order(State3{1, 2, 4}, State3{1, 2, 3}) == Relation::GT);
  const std::vector<double> a{1.0, 2.0}, b{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(partial_order(a, b), InvalidParameter);
}

TEST_CASE("partial order axioms on random triples") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> d(0, 2);  // small range forces ties
  auto draw = [&] {
    return State3{static_cast<double>(d(rng)), static_cast<double>(d(rng)),
                  static_cast<double>(d(rng))};
  };
  auto le = [](Relation r) { return r == Relation::Equal || r == Relation::LT || r == Relation::LL; };
  for (int i = 0; i < 5000; ++i) {
    const State3 a = draw(), b = draw(), c = draw();
    CHECK(partial_order(a, a) == Relation::Equal);
    if (le(partial_order(a, b)) && le(partial_order(b, a))) CHECK(a == b);
    if (le(partial_order(a, b)) && le(partial_order(b, c))) CHECK(le(partial_order(a, c)));
    CHECK(le(partial_order(a, b)) == leq(a, b));
    CHECK((partial_order(a, b) == Relation::LL) == strictly_less(a, b));
  }
}

}  // TEST_SUITE
