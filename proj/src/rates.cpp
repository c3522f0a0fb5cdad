#include "oat/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace oat {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::TC:
      return "tc";
    case Scheme::SCF:
      return "scf";
    case Scheme::ACF:
      return "acf";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  std::string n;
  for (char c : name) n.push_back(static_cast<char>(std::tolower(c)));
  if (n == "tc") return Scheme::TC;
  if (n == "scf") return Scheme::SCF;
  if (n == "acf") return Scheme::ACF;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected tc, scf, or acf)");
}

double intracavity_photons(double kappa, double beta_in, double delta) {
  if (!(std::isfinite(kappa) && std::isfinite(beta_in) && std::isfinite(delta)))
    throw std::invalid_argument("intracavity_photons: non-finite input");
  if (!(kappa > 0.0)) throw std::invalid_argument("intracavity_photons: kappa must be > 0");
  return kappa * beta_in * beta_in / (delta * delta + kappa * kappa / 4.0);
}

double cooperativity(double g, double kappa, double Gamma) {
  if (!(std::isfinite(g) && std::isfinite(kappa) && std::isfinite(Gamma)))
    throw std::invalid_argument("cooperativity: non-finite input");
  if (!(kappa > 0.0) || !(Gamma > 0.0))
    throw std::invalid_argument("cooperativity: kappa and Gamma must be > 0");
  return 4.0 * g * g / (kappa * Gamma);
}

EffectiveRates rates_from_physical(Scheme scheme, const PhysicalParams& p,
                                   std::vector<std::string>* warnings) {
  if (!(p.kappa > 0.0)) throw std::invalid_argument("rates_from_physical: kappa must be > 0");
  if (p.N < 1) throw std::invalid_argument("rates_from_physical: N must be >= 1");

  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };

  EffectiveRates r;
  if (scheme == Scheme::TC) {
    if (p.Delta == 0.0)
      throw std::invalid_argument("rates_from_physical: Delta_TC = 0 leaves chi undefined");
    r.chi = p.g * p.g / p.Delta;
    r.omega_s_tilde = 0.0;
    r.Gamma_phi = 0.0;
    r.Gamma_rel = std::abs(r.chi) * p.kappa / std::abs(p.Delta);
    r.gamma_z = p.gamma_phi / 2.0;
    r.gamma_plus = 0.0;
    r.gamma_minus = p.gamma_rel;
    if (std::abs(p.Delta) < 10.0 * std::max(p.g, p.kappa))
      warn("dispersive regime |Delta_TC| >> g, kappa is marginal");
    return r;
  }

  // Cavity-feedback schemes
  if (p.delta == 0.0)
    throw std::invalid_argument("rates_from_physical: delta = 0 leaves chi undefined");
  if (!(p.Gamma > 0.0))
    throw std::invalid_argument("rates_from_physical: Gamma must be > 0 for SCF/ACF");
  const double ncav = intracavity_photons(p.kappa, p.beta_in, p.delta);
  const double eta = cooperativity(p.g, p.kappa, p.Gamma);
  const double lorentz = p.delta / (p.delta * p.delta + p.kappa * p.kappa / 4.0);
  const double g4 = p.g * p.g * p.g * p.g;
  const double prefactor = (scheme == Scheme::SCF) ? 4.0 : 1.0;
  r.chi = prefactor * g4 / (p.Delta * p.Delta) * ncav * lorentz;

  const double achi = std::abs(r.chi);
  const double shape = (p.delta * p.delta + p.kappa * p.kappa / 4.0) /
                       (p.kappa * std::abs(p.delta) * eta);
  r.Gamma_phi = achi * p.kappa / std::abs(p.delta);
  r.Gamma_rel = 0.0;
  if (scheme == Scheme::SCF) {
    r.gamma_z = 0.5 * achi * shape;
    r.gamma_plus = achi * shape;
    r.gamma_minus = achi * shape;
    r.omega_s_tilde = 0.0;
  } else {
    r.gamma_z = achi * shape;
    r.gamma_plus = 0.0;
    r.gamma_minus = 0.0;
    r.omega_s_tilde = static_cast<double>(p.N) * r.chi;
  }
  if (std::abs(p.Delta) < 10.0 * std::max({p.g, p.kappa, p.Gamma}))
    warn("dispersive regime |Delta| >> kappa, Gamma, g is marginal");
  return r;
}

EffectiveRates rates_from_working_point(const WorkingPoint& wp) {
  if (wp.chi == 0.0 || !std::isfinite(wp.chi))
    throw std::invalid_argument("rates_from_working_point: chi must be nonzero and finite");
  if (!(wp.lambda > 0.0))
    throw std::invalid_argument("rates_from_working_point: lambda must be > 0");
  if (!(wp.eta > 0.0) || !(wp.eta_rel > 0.0))
    throw std::invalid_argument("rates_from_working_point: eta must be > 0");

  const double achi = std::abs(wp.chi);
  const double lam = wp.lambda;
  EffectiveRates r;
  r.chi = wp.chi;
  switch (wp.scheme) {
    case Scheme::SCF: {
      const double loc = achi * (lam + 0.25 / lam) / wp.eta;
      r.Gamma_phi = achi / lam;
      r.gamma_z = 0.5 * loc;
      r.gamma_plus = loc;
      r.gamma_minus = loc;
      break;
    }
    case Scheme::ACF: {
      r.Gamma_phi = achi / lam;
      r.gamma_z = achi * (lam + 0.25 / lam) / wp.eta;
      break;
    }
    case Scheme::TC: {
      r.Gamma_rel = achi / lam;
      r.gamma_z = 2.0 * achi * lam / wp.eta;
      r.gamma_minus = 4.0 * achi * lam / wp.eta_rel;
      break;
    }
  }
  return r;
}

}  // namespace oat
