#ifndef OAT_RATES_HPP
#define OAT_RATES_HPP

#include <string>
#include <vector>

namespace oat {

// The three physical implementations of the one-axis-twist interaction.
// TC couples the sensor spins directly to a detuned cavity; SCF/ACF drive the
// cavity and couple through an auxiliary excited level (symmetrically to both
// clock states, or to the upper one only).
enum class Scheme { TC, SCF, ACF };

std::string scheme_name(Scheme s);
Scheme scheme_from_string(const std::string& name);

// Parameters of the effective master equation for one scheme.  chi is signed
// (the untwist stage flips it); all dissipative rates are built from |chi| so
// they are identical for both stages.  omega_s_tilde is the shift of the spin
// precession frequency relative to the bare splitting; the dynamics modules
// work in the rotating frame and never use it.
struct EffectiveRates {
  double chi = 0.0;
  double omega_s_tilde = 0.0;
  double Gamma_phi = 0.0;    // collective dephasing, D[S_z]
  double Gamma_rel = 0.0;    // collective relaxation, D[S_-]
  double gamma_z = 0.0;      // per-spin dephasing, D[sigma_z]
  double gamma_plus = 0.0;   // per-spin excitation, D[sigma_+]
  double gamma_minus = 0.0;  // per-spin relaxation, D[sigma_-]

  EffectiveRates with_chi(double chi_signed) const {
    EffectiveRates r = *this;
    r.chi = chi_signed;
    return r;
  }
};

// Raw experimental parameters.  For TC the excited-level decay Gamma is
// unused and the single-spin rates (gamma_rel, gamma_phi) apply instead;
// delta and beta_in describe the cavity drive and exist only for SCF/ACF.
struct PhysicalParams {
  double g = 0.0;
  double kappa = 0.0;
  double Gamma = 0.0;
  double gamma_rel = 0.0;
  double gamma_phi = 0.0;
  double Delta = 0.0;
  double delta = 0.0;
  double beta_in = 0.0;
  long N = 1;
};

// Abstract working point: OAT strength chi, single-spin cooperativity
// eta = 4g^2/(kappa Gamma), and the dimensionless detuning
// lambda = delta/kappa (SCF/ACF) or Delta_TC/kappa (TC).  TC carries two
// cooperativities (dephasing and relaxation); the single-eta constructor
// sets them equal.
struct WorkingPoint {
  Scheme scheme = Scheme::SCF;
  double chi = 1.0;
  double eta = 1.0;      // eta for SCF/ACF, eta_phi for TC
  double eta_rel = 1.0;  // TC only
  double lambda = 0.5;

  WorkingPoint() = default;
  WorkingPoint(Scheme s, double chi_, double eta_, double lambda_)
      : scheme(s), chi(chi_), eta(eta_), eta_rel(eta_), lambda(lambda_) {}
  WorkingPoint(Scheme s, double chi_, double eta_phi_, double eta_rel_, double lambda_)
      : scheme(s), chi(chi_), eta(eta_phi_), eta_rel(eta_rel_), lambda(lambda_) {}
};

// Steady-state intracavity photon number of the driven cavity.
double intracavity_photons(double kappa, double beta_in, double delta);

// Single-spin cooperativity 4g^2/(kappa Gamma).
double cooperativity(double g, double kappa, double Gamma);

// Effective rates from raw experimental parameters.  Violations of the
// dispersive regime |Delta| >> kappa, Gamma, g append warnings instead of
// failing; the effective model is still well defined.
EffectiveRates rates_from_physical(Scheme scheme, const PhysicalParams& p,
                                   std::vector<std::string>* warnings = nullptr);

// Effective rates in closed form in (chi, eta, lambda).
//   SCF:  Gamma_phi = chi/lambda, gamma_+- = 2 gamma_z = chi (lambda + 1/4lambda)/eta
//   ACF:  Gamma_phi = chi/lambda, gamma_z = chi (lambda + 1/4lambda)/eta
//   TC:   Gamma_rel = chi/lambda, gamma_z = 2 chi lambda/eta_phi,
//         gamma_- = 4 chi lambda/eta_rel
EffectiveRates rates_from_working_point(const WorkingPoint& wp);

}  // namespace oat

#endif
