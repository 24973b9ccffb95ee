#include "sitdyn/params.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "sitdyn/error.hpp"

namespace sitdyn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParameter(what);
}

bool is_fraction(double x) { return x > 0.0 && x <= 1.0; }

}  // namespace

void BioParams::validate() const {
  require(is_fraction(r_viable), "r_viable must lie in (0, 1]");
  require(N_eggs > 0.0, "N_eggs must be positive");
  require(tau_gono > 0.0, "tau_gono must be positive");
  require(tau_E > 0.0, "tau_E must be positive");
  require(tau_L > 0.0, "tau_L must be positive");
  require(is_fraction(r_L), "r_L must lie in (0, 1]");
  require(r > 0.0 && r < 1.0, "sex ratio r must lie in (0, 1)");
  require(tau_M > 0.0, "tau_M must be positive");
  require(tau_F > 0.0, "tau_F must be positive");
  require(gamma_i > 0.0, "gamma_i must be positive");
}

void ModelParams::validate() const {
  require(b >= 0.0 && nu_E >= 0.0 && nu_E_tilde >= 0.0 && mu_E >= 0.0 && mu_L >= 0.0 &&
              nu_L >= 0.0 && mu_M >= 0.0 && mu_F >= 0.0 && mu_i >= 0.0,
          "rates must be non-negative");
  require(std::isfinite(K) && K > 0.0, "K must be positive");
  require(r > 0.0 && r < 1.0, "sex ratio r must lie in (0, 1)");
  require(beta > 0.0, "beta must be positive");
  require(gamma_i > 0.0, "gamma_i must be positive");
}

ModelParams derive_model_params(const BioParams& bio, double nu_E_tilde, double beta, double K,
                                double mu_i) {
  bio.validate();
  require(nu_E_tilde > 0.0, "nu_E_tilde must be positive");
  require(beta > 0.0, "beta must be positive");
  require(K > 0.0, "K must be positive");
  require(mu_i > 0.0, "mu_i must be positive");

  const double ln2 = std::numbers::ln2;
  ModelParams p;
  p.b = bio.r_viable * bio.N_eggs / bio.tau_gono;
  p.mu_L = -std::log(bio.r_L) / bio.tau_L;
  p.nu_L = 1.0 / bio.tau_L;
  p.nu_E_tilde = nu_E_tilde;
  p.nu_E = nu_E_tilde * p.nu_L / (p.nu_L + p.mu_L);
  p.mu_E = ln2 / bio.tau_E;
  p.mu_M = ln2 / bio.tau_M;
  p.mu_F = ln2 / bio.tau_F;
  p.mu_i = mu_i;
  p.r = bio.r;
  p.beta = beta;
  p.K = K;
  p.gamma_i = bio.gamma_i;
  return p;
}

Aggregates aggregates(const ModelParams& p) {
  p.validate();
  Aggregates a;
  a.N = p.b * p.r * p.nu_E / (p.mu_F * (p.nu_E + p.mu_E));
  a.lambda = p.mu_M / ((1.0 - p.r) * p.nu_E * p.K);
  a.psi = a.lambda / p.beta;
  a.xi = 4.0 * a.psi / a.N;
  return a;
}

double calibrate_K(const ModelParams& p, double M_target) {
  require(M_target > 0.0, "M_target must be positive");
  const double N = p.b * p.r * p.nu_E / (p.mu_F * (p.nu_E + p.mu_E));
  const double allee = -std::expm1(-p.beta * M_target);
  const double denom = N * allee;
  if (!(denom > 1.0)) {
    throw CalibrationInfeasible(
        fmt::format("N(1 - exp(-beta M)) = {:.6g} <= 1: no wild equilibrium at M = {:.6g}",
                    denom, M_target));
  }
  return M_target * p.mu_M / ((1.0 - p.r) * p.nu_E * (1.0 - 1.0 / denom));
}

ModelParams default_rates() {
  ModelParams p;
  p.b = 10.0;
  p.r = 0.49;
  p.mu_E = 0.03;
  p.mu_F = 0.04;
  p.mu_M = 0.1;
  p.gamma_i = 1.0;
  p.mu_i = 0.12;
  // Larval stage for the full model: midpoints of the measured intervals.
  p.nu_L = 1.0 / 9.5;
  p.mu_L = -std::log(0.68) / 9.5;
  return p;
}

ModelParams simulation_defaults(double nu_E, double beta, double M_target) {
  ModelParams p = default_rates();
  p.nu_E = nu_E;
  p.beta = beta;
  p.nu_E_tilde = nu_E * (p.nu_L + p.mu_L) / p.nu_L;
  p.K = calibrate_K(p, M_target);
  p.validate();
  return p;
}

std::string fingerprint(const ModelParams& p, double mi_level, double dt,
                        std::string_view tag) {
  std::string canon = fmt::format(
      "b={:.17g};K={:.17g};nu_E={:.17g};nu_E_tilde={:.17g};mu_E={:.17g};mu_L={:.17g};"
      "nu_L={:.17g};mu_M={:.17g};mu_F={:.17g};mu_i={:.17g};r={:.17g};beta={:.17g};"
      "gamma_i={:.17g};mi={:.17g};dt={:.17g}",
      p.b, p.K, p.nu_E, p.nu_E_tilde, p.mu_E, p.mu_L, p.nu_L, p.mu_M, p.mu_F, p.mu_i, p.r,
      p.beta, p.gamma_i, mi_level, dt);
  if (!tag.empty()) canon += fmt::format(";{}", tag);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace sitdyn
