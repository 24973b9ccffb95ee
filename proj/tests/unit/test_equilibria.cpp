#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sitdyn/dynamics.hpp"
#include "sitdyn/equilibria.hpp"
#include "sitdyn/error.hpp"
#include "sitdyn/params.hpp"

using namespace sitdyn;

namespace {

const std::vector<double> kNuGrid{0.005, 0.01, 0.02, 0.03, 0.05, 0.1, 0.15, 0.2, 0.25};
const std::vector<double> kBetaGrid{1e-4, 1e-3, 1e-2, 1e-1, 1.0};

// Twenty parameter sets spread over the sweep grid.
std::vector<ModelParams> sample_sets() {
  std::vector<ModelParams> out;
  for (std::size_t i = 0; i < kNuGrid.size(); i += 2) {
    for (double beta : {1e-4, 1e-2, 1.0, 1e-3}) out.push_back(simulation_defaults(kNuGrid[i], beta));
  }
  return out;
}

}  // namespace

TEST_SUITE("equilibria") {

TEST_CASE("characteristic function landmarks") {
  for (double y : {0.0, 0.3, 5.0}) {
    CHECK(f_characteristic(0.0, y, 40.0, 0.01) == doctest::Approx(-y / 40.0));
    CHECK(f_characteristic(1.0 / 0.01, y, 40.0, 0.01) < 0.0);
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double x = 50.0 * u(rng), y = 5.0 * u(rng), N = 2.0 + 100.0 * u(rng), psi = 0.01 * u(rng);
    CHECK(f_characteristic(x, y, N, psi) == doctest::Approx(oracle::f(x, y, N, psi)).epsilon(1e-12));
    const double h = 1e-6 * std::max(1.0, x);
    const double fd = (oracle::f(x + h, y, N, psi) - oracle::f(x - h, y, N, psi)) / (2.0 * h);
    CHECK(f_dx(x, y, N, psi) == doctest::Approx(fd).epsilon(1e-5).scale(1e-8));
    const double fdd = (f_dx(x + h, y, N, psi) - f_dx(x - h, y, N, psi)) / (2.0 * h);
    CHECK(f_dxx(x, y, N, psi) == doctest::Approx(fdd).epsilon(1e-5).scale(1e-8));
  }
}

TEST_CASE("theta0 against a bisection oracle") {
  // Logarithmic form where theta0 itself underflows.
  const double s_small = theta0_log(1e-3);
  CHECK(std::abs(-std::expm1(-s_small) - 1e-3 * s_small) < 1e-12);
  CHECK(s_small == doctest::Approx(1000.0).epsilon(1e-9));
  for (double xi : {0.1, 0.5, 0.9, 0.99}) {
    const double t = theta0(xi);
    CHECK(t == doctest::Approx(oracle::theta0(xi)).epsilon(1e-9));
    CHECK(std::abs(1.0 - t + xi * std::log(t)) < 1e-12);
    CHECK(t > 0.0);
    CHECK(t < 1.0);
  }
  CHECK(theta0(0.99) > 0.97);
  CHECK(theta0(0.05) < 1e-8);
  // Very small xi underflows theta0 but not its logarithm.
  const double s = theta0_log(1e-5);
  CHECK(s == doctest::Approx(1.0 / 1e-5).epsilon(1e-3));
  CHECK_THROWS_AS(theta0(1.0), NoPositiveEquilibrium);
  CHECK_THROWS_AS(theta0(3.0), NoPositiveEquilibrium);
}

TEST_CASE("h functions at the ends of their domain") {
  const double N = 40.0, psi = 2.0;
  const double xi = 4.0 * psi / N;
  const double t0 = theta0(xi);
  const HPair at1 = h_pm(1.0, N, psi);
  CHECK(at1.plus == doctest::Approx((-1.0 + std::sqrt(1.0 - xi)) / (2.0 * psi)).epsilon(1e-12));
  CHECK(at1.plus < 0.0);
  CHECK(at1.minus < at1.plus);
  const HPair at0 = h_pm(t0, N, psi);
  CHECK(at0.minus == doctest::Approx(-0.5 / psi - std::log(t0)).epsilon(1e-6));
  CHECK(at0.plus == doctest::Approx(-0.5 / psi - std::log(t0)).epsilon(1e-6));
  double prev = h_pm(t0 * (1.0 + 1e-9), N, psi).minus;
  for (int k = 1; k <= 200; ++k) {
    const double th = t0 + (1.0 - t0) * k / 200.0;
    const HPair h = h_pm(th, N, psi);
    CHECK(h.minus < prev);
    CHECK(h.minus <= h.plus);
    prev = h.minus;
  }
  CHECK_THROWS_AS(h_pm(0.5 * t0, N, psi), InvalidParameter);
  CHECK_THROWS_AS(h_pm(1.5, N, psi), InvalidParameter);
}

TEST_CASE("critical sterile level against a brute-force scan") {
  for (const ModelParams& p : sample_sets()) {
    const Aggregates a = aggregates(p);
    const MiCrit mc = mi_crit(p);
    const double y_oracle = oracle::y_crit(a.N, a.psi);
    CHECK(mc.value * p.gamma_i * p.beta == doctest::Approx(y_oracle).epsilon(1e-7));
    CHECK(mc.value <= mc.upper_estimate * (1.0 + 1e-9));
  }
}

TEST_CASE("critical level with low offspring number") {
  ModelParams p = simulation_defaults(0.1, 1e-3);
  p.b = 0.9 * p.mu_F * (p.nu_E + p.mu_E) / (p.r * p.nu_E);  // N = 0.9
  p.beta = 1e3;  // keeps N > 4 psi
  REQUIRE(aggregates(p).N < 1.0);
  CHECK(mi_crit(p).value < 0.0);
  ModelParams q = simulation_defaults(0.1, 1e-3);
  q.beta = 1e-9;
  CHECK_THROWS_AS(mi_crit(q), NoPositiveEquilibrium);
}

TEST_CASE("one-step effort level matches the published effort ratios") {
  // Published ratios for nu_E = 0.005 ... 0.25.
  const std::vector<double> published{16, 30, 48, 60, 76, 93, 101, 106, 108};
  for (std::size_t i = 0; i < kNuGrid.size(); ++i) {
    for (double beta : {1e-4, 1.0}) {
      const ModelParams p = simulation_defaults(kNuGrid[i], beta);
      const double ratio = one_step_effort_level(p) / 5106.0;
      CHECK(std::abs(ratio - published[i]) <= 1.0);
    }
  }
}

TEST_CASE("root count follows the trichotomy") {
  for (const ModelParams& p : sample_sets()) {
    const Aggregates a = aggregates(p);
    const double mc = mi_crit(p).value;
    for (double frac : {0.0, 0.5, 0.9, 0.999}) {
      const double Mi = frac * mc;
      const SteadyStateSet ss = steady_states(Mi, p);
      CHECK(ss.positive_count() == 2);
      CHECK(oracle::positive_root_count(p.beta * p.gamma_i * Mi, a.N, a.psi) == 2);
    }
    for (double frac : {1.001, 1.5, 8.0}) {
      const double Mi = frac * mc;
      CHECK(steady_states(Mi, p).positive_count() == 0);
      CHECK(oracle::positive_root_count(p.beta * p.gamma_i * Mi, a.N, a.psi) == 0);
    }
  }
}

TEST_CASE("steady states are roots with bounded male coordinate") {
  for (const ModelParams& p : sample_sets()) {
    const Aggregates a = aggregates(p);
    for (double frac : {0.0, 0.7}) {
      const double Mi = frac * mi_crit(p).value;
      const double y = p.beta * p.gamma_i * Mi;
      const SteadyStateSet ss = steady_states(Mi, p);
      REQUIRE(ss.positive_count() == 2);
      for (double M : {*ss.M_minus, *ss.M_plus}) {
        CHECK(std::abs(f_characteristic(p.beta * M, y, a.N, a.psi)) < 1e-10);
        CHECK(p.beta * M < 1.0 / a.psi);
      }
      CHECK(strictly_less(*ss.E_minus, *ss.E_plus));
      const State3 d = rhs_simplified(*ss.E_plus, Mi, p);
      CHECK(std::abs(d.E) < 1e-8 * ss.E_plus->E);
      CHECK(std::abs(d.M) < 1e-8 * ss.E_plus->M);
      CHECK(std::abs(d.F) < 1e-8 * ss.E_plus->F);
    }
  }
}

TEST_CASE("equilibrium states follow the male coordinate") {
  const ModelParams p = simulation_defaults(0.05, 1e-3);
  const Aggregates a = aggregates(p);
  const State3 s = state_from_male(3000.0, p);
  CHECK(s.E == doctest::Approx(p.K * a.lambda * 3000.0));
  CHECK(s.F == doctest::Approx(p.K * (p.nu_E + p.mu_E) / p.b * a.lambda * 3000.0 /
                               (1.0 - a.lambda * 3000.0)));
}

TEST_CASE("roots collide at the critical level") {
  const ModelParams p = simulation_defaults(0.05, 1e-2);
  const double mc = mi_crit(p).value;
  double prev_gap = 0.0;
  for (double d : {1e-2, 1e-4}) {
    const SteadyStateSet ss = steady_states(mc * (1.0 - d), p);
    REQUIRE(ss.positive_count() == 2);
    const double gap = (*ss.M_plus - *ss.M_minus) / *steady_states(0.0, p).M_plus;
    if (prev_gap > 0.0) {
      // O(sqrt(delta)): a hundredfold smaller delta shrinks the gap about tenfold.
      CHECK(prev_gap / gap == doctest::Approx(10.0).epsilon(0.15));
    }
    prev_gap = gap;
  }
}

TEST_CASE("wild equilibrium approximation at large beta M") {
  for (double nu : kNuGrid) {
    const ModelParams p = simulation_defaults(nu, 1.0);
    const Aggregates a = aggregates(p);
    const double approx = (1.0 - 1.0 / a.N) / a.lambda;
    CHECK(*steady_states(0.0, p).M_plus == doctest::Approx(approx).epsilon(1e-2));
  }
}

TEST_CASE("stability classification") {
  for (const ModelParams& p : sample_sets()) {
    const Aggregates a = aggregates(p);
    const double Mi = 0.3 * mi_crit(p).value;
    const SteadyStateSet ss = steady_states(Mi, p);
    CHECK(ss.zero_stability == Stability::Stable);
    CHECK(classify_stability(State3{}, Mi, p) == Stability::Stable);
    CHECK(ss.minus_stability == Stability::Unstable);
    CHECK(ss.plus_stability == Stability::Stable);
    const double y = p.beta * p.gamma_i * Mi;
    CHECK(f_dx(p.beta * *ss.M_minus, y, a.N, a.psi) > 0.0);
    CHECK(f_dx(p.beta * *ss.M_plus, y, a.N, a.psi) < 0.0);
    CHECK_THROWS_AS(classify_stability(1.1 * *ss.E_plus, Mi, p), InvalidParameter);
  }
}

TEST_CASE("Z matches the Lambert form") {
  for (double psi : {1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 3.0}) {
    const double Z = Z_psi(psi);
    const double lam = std::log(oracle::lambert_w_exp(1.0 + 1.0 / psi));
    CHECK(Z == doctest::Approx(lam).epsilon(1e-10));
    CHECK(Z > 0.0);
    CHECK(Z < 0.5 / psi);
  }
  CHECK(F_psi(1e-8) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(F_psi(0.1) > F_psi(0.01));
}

TEST_CASE("closed-form bounds bracket the equilibria on the sweep grid") {
  int checked = 0;
  for (double nu : kNuGrid) {
    for (double beta : kBetaGrid) {
      const ModelParams p = simulation_defaults(nu, beta);
      const Aggregates a = aggregates(p);
      if (!(a.N > 2.0) || !(a.N > F_psi(a.psi))) continue;
      const EquilibriumBounds b = equilibrium_bounds(p);
      const SteadyStateSet ss = steady_states(0.0, p);
      CHECK(leq(b.under_E_minus, *ss.E_minus));
      CHECK(leq(*ss.E_minus, b.over_E_minus));
      CHECK(leq(b.under_E_plus, *ss.E_plus));
      // Attained up to rounding once e^{-beta M} underflows.
      CHECK(leq(*ss.E_plus, (1.0 + 1e-12) * b.over_E_plus));
      CHECK(b.kappa_lower < b.kappa_star);
      ++checked;
    }
  }
  CHECK(checked == 45);
  ModelParams low = simulation_defaults(0.1, 1e-3);
  low.b = 1.5 * low.mu_F * (low.nu_E + low.mu_E) / (low.r * low.nu_E);
  CHECK_THROWS_AS(equilibrium_bounds(low), NoPositiveEquilibrium);
}

}  // TEST_SUITE
