#include "oat/protocol.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "oat/dicke.hpp"
#include "oat/exact.hpp"
#include "oat/mft.hpp"

namespace oat {

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1.0);
  return v;
}

void check_engine_caps(const ProtocolSpec& spec) {
  if (spec.engine == Engine::ORACLE && spec.N > exact::kMaxSpins)
    throw EngineCapError("protocol: N exceeds the brute-force engine cap");
  if (spec.engine == Engine::DICKE && spec.N > dicke::kDefaultMaxSpins)
    throw EngineCapError("protocol: N exceeds the Dicke engine cap");
}

double default_amp_window(const ProtocolSpec& spec) {
  const double achi = std::abs(spec.rates.chi);
  return 5.0 / (achi * std::sqrt(static_cast<double>(spec.N)));
}

// <S_y>(t) series for one amplification run at the given phi (phi may be 0
// for the background)
std::vector<double> sy_series(const ProtocolSpec& spec, double phi,
                              const std::vector<double>& ts) {
  const double N = static_cast<double>(spec.N);
  switch (spec.engine) {
    case Engine::MFT: {
      MftEngine eng(N, spec.rates);
      const SpinMoments init =
          SpinMoments::coherent(N, Eigen::Vector3d::UnitX()).rotated_about_y(phi);
      MftTrajectory traj = eng.integrate(init, ChiSchedule::constant(spec.rates.chi), ts.back(),
                                         spec.rtol);
      std::vector<double> sy;
      sy.reserve(ts.size());
      for (double t : ts) sy.push_back(traj.at(t).sy);
      return sy;
    }
    case Engine::DICKE: {
      dicke::Generator gen(static_cast<int>(spec.N), spec.rates);
      dicke::Density rho = dicke::Density::css_x(static_cast<int>(spec.N)).rotated_about_y(phi);
      dicke::EvolveOptions opt;
      opt.rtol = spec.rtol;
      auto obs = dicke::evolve_observables(rho, gen, ts, opt);
      std::vector<double> sy;
      sy.reserve(obs.size());
      for (const auto& m : obs) sy.push_back(m.sy);
      return sy;
    }
    case Engine::ORACLE: {
      exact::Liouvillian lv(static_cast<int>(spec.N), spec.rates);
      exact::DenseState rho =
          exact::rotate_about_y(exact::css_x(static_cast<int>(spec.N)), phi);
      // re-integrates per sample; fine at the oracle's tiny sizes
      std::vector<double> sy;
      sy.reserve(ts.size());
      exact::DenseState cur = rho;
      double t_prev = 0.0;
      for (double t : ts) {
        cur = exact::evolve(cur, lv, t - t_prev, spec.rtol);
        t_prev = t;
        sy.push_back(exact::expectations(cur).sy);
      }
      return sy;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::MFT:
      return "mft";
    case Engine::DICKE:
      return "dicke";
    case Engine::ORACLE:
      return "oracle";
  }
  return "?";
}

Engine engine_from_string(const std::string& name) {
  std::string n;
  for (char c : name) n.push_back(static_cast<char>(std::tolower(c)));
  if (n == "mft") return Engine::MFT;
  if (n == "dicke") return Engine::DICKE;
  if (n == "oracle") return Engine::ORACLE;
  throw std::invalid_argument("unknown engine '" + name + "'");
}

AmplificationSeries run_amplification(const ProtocolSpec& spec) {
  if (spec.mode != ProtocolMode::AMPLIFY_ONLY)
    throw std::invalid_argument("run_amplification: mode must be AMPLIFY_ONLY");
  if (!(spec.phi > 0.0) || spec.phi > 0.05)
    throw std::invalid_argument("run_amplification: phi must be in (0, 0.05]");
  check_engine_caps(spec);

  const double window = spec.t_amp_max > 0.0 ? spec.t_amp_max : default_amp_window(spec);
  AmplificationSeries s;
  s.t = linspace(0.0, window, std::max(spec.samples_per_stage, 16));
  s.sy = sy_series(spec, spec.phi, s.t);
  if (spec.scheme == Scheme::TC) {
    s.sy_bg = sy_series(spec, 0.0, s.t);
    s.has_background = true;
  } else {
    s.sy_bg.assign(s.t.size(), 0.0);
  }
  return s;
}

GainPoint gain_from_series(const AmplificationSeries& series, double phi, double N,
                           bool subtract_background, std::vector<std::string>* flags) {
  if (series.t.size() < 3) throw std::invalid_argument("gain_from_series: too few samples");
  const double scale = N * phi / 2.0;
  std::vector<double> g(series.t.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double v = series.sy[i];
    if (subtract_background) v -= series.sy_bg[i];
    g[i] = v / scale;
  }
  // first amplification peak: track the running max until the series has
  // dropped well below it (the cumulant engine shows unphysical recurrences
  // past the first peak, which must not win the maximization)
  std::size_t imax = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (g[i] > g[imax]) imax = i;
    const double drop = std::max(0.05 * std::abs(g[imax]), 1e-12);
    if (g[imax] > 0.0 && g[i] < g[imax] - drop) break;
  }

  GainPoint p;
  if (imax == 0 || imax + 1 == g.size()) {
    if (flags) flags->push_back("peak-on-window-boundary");
    p.t = series.t[imax];
    p.gain = g[imax];
    return p;
  }
  // parabola through the bracketing samples
  const double t0 = series.t[imax - 1], t1 = series.t[imax], t2 = series.t[imax + 1];
  const double y0 = g[imax - 1], y1 = g[imax], y2 = g[imax + 1];
  const double h = t1 - t0;
  const double denom = y0 - 2.0 * y1 + y2;
  if (denom >= 0.0) {
    p.t = t1;
    p.gain = y1;
    return p;
  }
  const double delta = 0.5 * (y0 - y2) / denom;
  p.t = t1 + delta * h;
  p.gain = y1 - 0.25 * (y0 - y2) * delta;
  return p;
}

ProtocolResult run_amplification_peak(const ProtocolSpec& spec) {
  ProtocolResult res;
  res.series = run_amplification(spec);
  const bool subtract = (spec.scheme == Scheme::TC);
  // for TC the raw series rides on the relaxation background, so only the
  // subtracted peak carries meaning (and its flags)
  GainPoint raw = gain_from_series(res.series, spec.phi, static_cast<double>(spec.N), false,
                                   subtract ? nullptr : &res.flags);
  res.G = raw.gain;
  res.t_opt = raw.t;
  if (subtract) {
    GainPoint sub = gain_from_series(res.series, spec.phi, static_cast<double>(spec.N), true,
                                     &res.flags);
    res.G_sub = sub.gain;
    res.t_opt = sub.t;
  } else {
    res.G_sub = res.G;
  }
  return res;
}

ProtocolResult run_twist_untwist(const ProtocolSpec& spec) {
  if (spec.mode != ProtocolMode::TWIST_UNTWIST)
    throw std::invalid_argument("run_twist_untwist: mode must be TWIST_UNTWIST");
  if (!(spec.phi > 0.0) || spec.phi > 0.05)
    throw std::invalid_argument("run_twist_untwist: phi must be in (0, 0.05]");
  if (!(spec.t_sqz >= 0.0)) throw std::invalid_argument("run_twist_untwist: t_sqz must be >= 0");
  check_engine_caps(spec);

  const double N = static_cast<double>(spec.N);
  const double ts = spec.t_sqz;
  ProtocolResult res;

  // The untwist stage converts the +z-encoded signal into a -y polarization
  // (for chi > 0 twisting), so the calibrated readout axis is -y.  In the
  // degenerate t_sqz = 0 case nothing is converted and the signal is read
  // out where it was encoded, in S_z.
  auto signal_of = [&](const SpinMoments& fin) { return ts > 0.0 ? -fin.sy : fin.sz; };
  auto var_of = [&](const SpinMoments& fin) { return ts > 0.0 ? fin.cyy : fin.czz; };

  // Gaussian-closure breakdown shows up as negative variances; surfaced as a
  // flag, never clipped
  auto variance_diag = [&](const SpinMoments& m) {
    if (std::min({m.cxx, m.cyy, m.czz}) < -1e-6 * N * N)
      res.flags.push_back("negative-variance");
  };

  auto finish = [&](double sig_end, double sig_end_bg, double var_end,
                    const SpinMoments& post_twist) {
    const double scale = N * spec.phi / 2.0;
    res.G = sig_end / scale;
    res.G_sub = (sig_end - sig_end_bg) / scale;
    res.sigma_diss_sq = 4.0 * var_end / N - 1.0;
    res.xi_R_sq = wineland(post_twist, N);
    const double g_for_met = (spec.scheme == Scheme::TC) ? res.G_sub : res.G;
    if (g_for_met > 0.0) {
      auto [dphi2, gmet] = estimation_error(g_for_met, res.sigma_diss_sq, spec.xi_det_sq, N);
      res.delta_phi_sq = dphi2;
      res.gmet = gmet;
    } else {
      res.delta_phi_sq = std::numeric_limits<double>::infinity();
      res.gmet = 0.0;
      res.flags.push_back("nonpositive-gain");
    }
    res.t_opt = 2.0 * ts;
  };

  switch (spec.engine) {
    case Engine::MFT: {
      MftEngine eng(N, spec.rates);
      auto run_phi = [&](double phi, SpinMoments* post_twist) {
        SpinMoments m = SpinMoments::coherent(N, Eigen::Vector3d::UnitX());
        if (ts > 0.0)
          m = eng.integrate(m, ChiSchedule::constant(spec.rates.chi), ts, spec.rtol).at(ts);
        if (post_twist) *post_twist = m;
        m = m.rotated_about_y(phi);
        if (ts > 0.0)
          m = eng.integrate(m, ChiSchedule::constant(-spec.rates.chi), ts, spec.rtol).at(ts);
        return m;
      };
      SpinMoments post_twist;
      const SpinMoments fin = run_phi(spec.phi, &post_twist);
      variance_diag(fin);
      double sig_bg = 0.0;
      if (spec.scheme == Scheme::TC) sig_bg = signal_of(run_phi(0.0, nullptr));
      finish(signal_of(fin), sig_bg, var_of(fin), post_twist);
      break;
    }
    case Engine::DICKE: {
      dicke::Generator gen_fwd(static_cast<int>(spec.N), spec.rates);
      dicke::Generator gen_bwd(static_cast<int>(spec.N), spec.rates.with_chi(-spec.rates.chi));
      dicke::EvolveOptions opt;
      opt.rtol = spec.rtol;
      auto run_phi = [&](double phi, SpinMoments* post_twist) {
        dicke::Density rho = dicke::Density::css_x(static_cast<int>(spec.N));
        if (ts > 0.0) rho = dicke::evolve(rho, gen_fwd, ts, opt);
        if (post_twist) *post_twist = rho.observables();
        rho = rho.rotated_about_y(phi);
        if (ts > 0.0) rho = dicke::evolve(rho, gen_bwd, ts, opt);
        return rho.observables();
      };
      SpinMoments post_twist;
      const SpinMoments fin = run_phi(spec.phi, &post_twist);
      variance_diag(fin);
      double sig_bg = 0.0;
      if (spec.scheme == Scheme::TC) sig_bg = signal_of(run_phi(0.0, nullptr));
      finish(signal_of(fin), sig_bg, var_of(fin), post_twist);
      break;
    }
    case Engine::ORACLE: {
      exact::Liouvillian lv_fwd(static_cast<int>(spec.N), spec.rates);
      exact::Liouvillian lv_bwd(static_cast<int>(spec.N), spec.rates.with_chi(-spec.rates.chi));
      auto run_phi = [&](double phi, SpinMoments* post_twist) {
        exact::DenseState rho = exact::css_x(static_cast<int>(spec.N));
        if (ts > 0.0) rho = exact::evolve(rho, lv_fwd, ts, spec.rtol);
        if (post_twist) *post_twist = exact::expectations(rho);
        rho = exact::rotate_about_y(rho, phi);
        if (ts > 0.0) rho = exact::evolve(rho, lv_bwd, ts, spec.rtol);
        return exact::expectations(rho);
      };
      SpinMoments post_twist;
      const SpinMoments fin = run_phi(spec.phi, &post_twist);
      variance_diag(fin);
      double sig_bg = 0.0;
      if (spec.scheme == Scheme::TC) sig_bg = signal_of(run_phi(0.0, nullptr));
      finish(signal_of(fin), sig_bg, var_of(fin), post_twist);
      break;
    }
  }
  return res;
}

ProtocolResult run_with_linearity_check(ProtocolSpec spec, double rel_tol, int max_halvings) {
  auto run = [&](const ProtocolSpec& s) {
    return s.mode == ProtocolMode::AMPLIFY_ONLY ? run_amplification_peak(s)
                                                : run_twist_untwist(s);
  };
  ProtocolResult res = run(spec);
  for (int k = 0; k <= max_halvings; ++k) {
    ProtocolSpec half = spec;
    half.phi = spec.phi / 2.0;
    const ProtocolResult res_half = run(half);
    const double g0 = (spec.scheme == Scheme::TC) ? res.G_sub : res.G;
    const double g1 = (spec.scheme == Scheme::TC) ? res_half.G_sub : res_half.G;
    const double ref = std::max({std::abs(g0), std::abs(g1), 1e-12});
    if (std::abs(g0 - g1) <= rel_tol * ref) {
      if (k > 0) res.flags.push_back("linearity-retry");
      return res;
    }
    spec = half;
    res = res_half;
    if (k == max_halvings) res.flags.push_back("linearity-check-failed");
  }
  return res;
}

std::optional<double> wineland(const SpinMoments& m, double N) { return wineland_parameter(m, N); }

std::pair<double, double> estimation_error(double G, double sigma_diss_sq, double xi_det_sq,
                                           double N) {
  if (!(G > 0.0)) throw std::invalid_argument("estimation_error: G must be > 0");
  const double noise = 1.0 + std::max(sigma_diss_sq, -0.99) + xi_det_sq;
  const double dphi2 = noise / (G * G * N);
  return {dphi2, G * G / noise};
}

}  // namespace oat
