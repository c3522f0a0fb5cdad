#ifndef OAT_PROTOCOL_HPP
#define OAT_PROTOCOL_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oat/moments.hpp"
#include "oat/rates.hpp"

namespace oat {

enum class Engine { MFT, DICKE, ORACLE };

// thrown when a protocol asks an exact engine for more spins than it handles
struct EngineCapError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string engine_name(Engine e);
Engine engine_from_string(const std::string& name);

enum class ProtocolMode { AMPLIFY_ONLY, TWIST_UNTWIST };

// One protocol execution: initial coherent state along +x, optional twist
// stage (+chi for t_sqz), signal rotation by phi about y, then evolution with
// the opposite-sign interaction.  AMPLIFY_ONLY skips the twist stage and
// amplifies with +chi over a time window; TWIST_UNTWIST evolves for exactly
// t_unsqz = t_sqz and reads out at t_end = 2 t_sqz.
struct ProtocolSpec {
  Scheme scheme = Scheme::SCF;
  Engine engine = Engine::MFT;
  long N = 100;
  EffectiveRates rates;  // rates.chi is the twist-stage sign
  double phi = 1e-3;
  double t_sqz = 0.0;
  ProtocolMode mode = ProtocolMode::TWIST_UNTWIST;
  double xi_det_sq = 1.0;

  double t_amp_max = 0.0;     // AMPLIFY_ONLY window; 0 = 5/(chi sqrt N)
  int samples_per_stage = 480;
  double rtol = 1e-8;
};

struct GainPoint {
  double t = 0.0;
  double gain = 0.0;  // delta<S_y>(t) / (N phi / 2)
};

struct AmplificationSeries {
  std::vector<double> t;
  std::vector<double> sy;      // signal run
  std::vector<double> sy_bg;   // phi = 0 background (all zeros unless requested)
  bool has_background = false;
};

struct ProtocolResult {
  double G = 0.0;
  double G_sub = 0.0;              // background-subtracted (equals G when no background)
  double sigma_diss_sq = 0.0;
  std::optional<double> xi_R_sq;   // Wineland parameter of the post-twist state
  double delta_phi_sq = 0.0;
  double gmet = 0.0;
  double t_opt = 0.0;              // peak time (AMPLIFY_ONLY) or t_end
  std::vector<std::string> flags;
  AmplificationSeries series;      // populated for AMPLIFY_ONLY
};

// Evolve the rotated coherent state and record <S_y>(t); for TC the phi = 0
// background series is computed as well.
AmplificationSeries run_amplification(const ProtocolSpec& spec);

// Peak gain from a sampled series: argmax with parabolic refinement through
// the three bracketing samples.  Flags a boundary peak.
GainPoint gain_from_series(const AmplificationSeries& series, double phi, double N,
                           bool subtract_background, std::vector<std::string>* flags = nullptr);

// Full protocol.  Gain is evaluated at t_end (no maximization); sigma_diss^2
// from (Delta S_y)^2(t_end) = (1 + sigma^2) N/4; estimation error and
// metrological gain from the complete noise budget.
ProtocolResult run_twist_untwist(const ProtocolSpec& spec);

// Amplification-only protocol with peak extraction; fills G/G_sub/t_opt.
ProtocolResult run_amplification_peak(const ProtocolSpec& spec);

// phi-linearity guard: runs at phi and phi/2 and halves phi until the two
// gains agree to rel_tol (flags every retry).  Applies to either mode.
ProtocolResult run_with_linearity_check(ProtocolSpec spec, double rel_tol = 0.01,
                                        int max_halvings = 6);

// xi_R^2 = N (dS_perp)^2_min / |<S>|^2; nullopt at zero polarization
std::optional<double> wineland(const SpinMoments& m, double N);

// (dphi)^2 = (1 + sigma^2 + Xi^2)/(G^2 N) and Gmet = G^2/(1 + sigma^2 + Xi^2).
// sigma^2 is clamped at -0.99 inside the denominator only.
std::pair<double, double> estimation_error(double G, double sigma_diss_sq, double xi_det_sq,
                                           double N);

}  // namespace oat

#endif
