#include "oat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oat/dicke.hpp"
#include "oat/exact.hpp"
#include "oat/mft.hpp"

namespace oat {
namespace analysis {

namespace {

constexpr double kGolden = 0.6180339887498949;

// vertex of the parabola through three points; falls back to the middle one
void parabolic_peak(double x0, double y0, double x1, double y1, double x2, double y2,
                    double& x_out, double& y_out, bool maximize) {
  const double d0 = x0 - x1, d2 = x2 - x1;
  const double denom = d0 * d2 * (d0 - d2);
  if (denom == 0.0) {
    x_out = x1;
    y_out = y1;
    return;
  }
  const double a = (d2 * (y0 - y1) - d0 * (y2 - y1)) / denom;
  const double b = (d0 * d0 * (y2 - y1) - d2 * d2 * (y0 - y1)) / denom;
  if ((maximize && a >= 0.0) || (!maximize && a <= 0.0) || a == 0.0) {
    x_out = x1;
    y_out = y1;
    return;
  }
  const double dx = -b / (2.0 * a);
  x_out = x1 + dx;
  y_out = y1 + b * dx + a * dx * dx;
  // keep within the bracket
  if (x_out < std::min(x0, x2) || x_out > std::max(x0, x2)) {
    x_out = x1;
    y_out = y1;
  }
}

EffectiveRates wp_rates(Scheme scheme, double chi, double eta, double lambda) {
  return rates_from_working_point(WorkingPoint(scheme, chi, eta, lambda));
}

struct Objective {
  double value = -std::numeric_limits<double>::infinity();
  double t_opt = 0.0;
  ProtocolResult run;  // populated for protocol-level objectives
  std::vector<std::string> flags;
};

// ---- amplification gain at fixed lambda ----------------------------------

Objective gain_at(Scheme scheme, Engine engine, long N, const EffectiveRates& rates,
                  const OptControls& c) {
  ProtocolSpec spec;
  spec.scheme = scheme;
  spec.engine = engine;
  spec.N = N;
  spec.rates = rates;
  spec.phi = c.phi;
  spec.mode = ProtocolMode::AMPLIFY_ONLY;
  spec.samples_per_stage = c.samples_per_stage;
  spec.rtol = c.rtol;
  spec.t_amp_max = c.t_window_factor / (std::abs(rates.chi) * std::sqrt(double(N)));

  ProtocolResult r = run_amplification_peak(spec);
  Objective obj;
  bool widened = false;
  if (std::find(r.flags.begin(), r.flags.end(), "peak-on-window-boundary") != r.flags.end() &&
      r.t_opt > 0.0) {
    spec.t_amp_max *= 2.0;
    r = run_amplification_peak(spec);
    widened = true;
  }
  obj.run = r;
  obj.value = (scheme == Scheme::TC) ? r.G_sub : r.G;
  obj.t_opt = r.t_opt;
  obj.flags = r.flags;
  if (widened) obj.flags.push_back("window-widened");
  return obj;
}

// ---- twist-untwist objective at fixed lambda ------------------------------

enum class TuKind { GAIN, GMET };

Objective tu_eval(Scheme scheme, Engine engine, long N, const EffectiveRates& rates, double t_sqz,
                  double xi_det_sq, const OptControls& c, TuKind kind) {
  ProtocolSpec spec;
  spec.scheme = scheme;
  spec.engine = engine;
  spec.N = N;
  spec.rates = rates;
  spec.phi = c.phi;
  spec.t_sqz = t_sqz;
  spec.mode = ProtocolMode::TWIST_UNTWIST;
  spec.xi_det_sq = xi_det_sq;
  spec.rtol = c.rtol;
  Objective obj;
  obj.run = run_twist_untwist(spec);
  obj.t_opt = t_sqz;
  obj.value = (kind == TuKind::GMET) ? obj.run.gmet
                                     : ((scheme == Scheme::TC) ? obj.run.G_sub : obj.run.G);
  obj.flags = obj.run.flags;
  return obj;
}

Objective tu_at(Scheme scheme, Engine engine, long N, const EffectiveRates& rates,
                double xi_det_sq, const OptControls& c, TuKind kind) {
  const double achi = std::abs(rates.chi);
  double t_hi = c.t_window_factor / (achi * std::pow(double(N), 2.0 / 3.0));
  std::vector<std::string> flags;

  for (int attempt = 0;; ++attempt) {
    // coarse grid over (0, t_hi]
    std::vector<double> ts(c.t_points), vals(c.t_points);
    std::vector<Objective> objs(c.t_points);
    int best = 0;
    for (int i = 0; i < c.t_points; ++i) {
      ts[i] = t_hi * (i + 1) / double(c.t_points);
      objs[i] = tu_eval(scheme, engine, N, rates, ts[i], xi_det_sq, c, kind);
      vals[i] = objs[i].value;
      if (vals[i] > vals[best]) best = i;
    }
    if (best == c.t_points - 1 && attempt == 0) {
      t_hi *= 2.0;
      flags.push_back("window-widened");
      continue;
    }
    if (best == c.t_points - 1) flags.push_back("t-on-window-boundary");

    // golden refinement inside the bracketing interval
    double lo = (best > 0) ? ts[best - 1] : ts[best] * 0.25;
    double hi = (best + 1 < c.t_points) ? ts[best + 1] : t_hi;
    double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
    Objective o1 = tu_eval(scheme, engine, N, rates, x1, xi_det_sq, c, kind);
    Objective o2 = tu_eval(scheme, engine, N, rates, x2, xi_det_sq, c, kind);
    Objective best_obj = (vals[best] >= std::max(o1.value, o2.value)) ? objs[best]
                         : (o1.value > o2.value ? o1 : o2);
    for (int it = 0; it < 40 && (hi - lo) > 1e-3 * hi; ++it) {
      if (o1.value < o2.value) {
        lo = x1;
        x1 = x2;
        o1 = o2;
        x2 = lo + kGolden * (hi - lo);
        o2 = tu_eval(scheme, engine, N, rates, x2, xi_det_sq, c, kind);
      } else {
        hi = x2;
        x2 = x1;
        o2 = o1;
        x1 = hi - kGolden * (hi - lo);
        o1 = tu_eval(scheme, engine, N, rates, x1, xi_det_sq, c, kind);
      }
      const Objective& cand = (o1.value > o2.value) ? o1 : o2;
      if (cand.value > best_obj.value) best_obj = cand;
    }
    best_obj.flags.insert(best_obj.flags.end(), flags.begin(), flags.end());
    return best_obj;
  }
}

// ---- squeezing objective at fixed lambda ----------------------------------

Objective wineland_at(Scheme scheme, Engine engine, long N, const EffectiveRates& rates,
                      const OptControls& c) {
  const double achi = std::abs(rates.chi);
  double t_hi = c.t_window_factor / (achi * std::pow(double(N), 2.0 / 3.0));
  std::vector<std::string> flags;

  for (int attempt = 0;; ++attempt) {
    const int ns = std::max(c.samples_per_stage, 16);
    std::vector<double> ts(ns);
    for (int i = 0; i < ns; ++i) ts[i] = t_hi * i / double(ns - 1);

    std::vector<double> xi(ns, std::numeric_limits<double>::quiet_NaN());
    switch (engine) {
      case Engine::MFT: {
        MftEngine eng(double(N), rates);
        const SpinMoments init = SpinMoments::coherent(double(N), Eigen::Vector3d::UnitX());
        MftTrajectory traj = eng.integrate(init, ChiSchedule::constant(rates.chi), t_hi, c.rtol);
        for (int i = 0; i < ns; ++i) {
          auto v = wineland(traj.at(ts[i]), double(N));
          if (v) xi[i] = *v;
        }
        break;
      }
      case Engine::DICKE: {
        dicke::EvolveOptions opt;
        opt.rtol = c.rtol;
        dicke::Generator gen(int(N), rates);
        auto obs = dicke::evolve_observables(dicke::Density::css_x(int(N)), gen, ts, opt);
        for (int i = 0; i < ns; ++i) {
          auto v = wineland(obs[i], double(N));
          if (v) xi[i] = *v;
        }
        break;
      }
      case Engine::ORACLE: {
        exact::Liouvillian lv(int(N), rates);
        exact::DenseState cur = exact::css_x(int(N));
        double t_prev = 0.0;
        for (int i = 0; i < ns; ++i) {
          cur = exact::evolve(cur, lv, ts[i] - t_prev, c.rtol);
          t_prev = ts[i];
          auto v = wineland(exact::expectations(cur), double(N));
          if (v) xi[i] = *v;
        }
        break;
      }
    }

    int best = 0;
    for (int i = 1; i < ns; ++i)
      if (std::isfinite(xi[i]) && xi[i] < xi[best]) best = i;
    if (best == ns - 1 && attempt == 0) {
      t_hi *= 2.0;
      flags.push_back("window-widened");
      continue;
    }
    Objective obj;
    if (best == ns - 1) flags.push_back("t-on-window-boundary");
    if (best > 0 && best + 1 < ns && std::isfinite(xi[best - 1]) && std::isfinite(xi[best + 1])) {
      parabolic_peak(ts[best - 1], xi[best - 1], ts[best], xi[best], ts[best + 1], xi[best + 1],
                     obj.t_opt, obj.value, /*maximize=*/false);
    } else {
      obj.t_opt = ts[best];
      obj.value = xi[best];
    }
    obj.flags = flags;
    return obj;
  }
}

// ---- lambda scan + golden refinement --------------------------------------

template <class Eval>
OptResult optimize_lambda(const OptControls& c, bool maximize, Eval&& eval_at_lambda) {
  const double llo = std::log(c.lambda_lo), lhi = std::log(c.lambda_hi);
  const int np = std::max(c.lambda_points, 4);
  std::vector<double> lam(np);
  std::vector<Objective> objs(np);
  const double sgn = maximize ? 1.0 : -1.0;
  int best = 0;
  for (int i = 0; i < np; ++i) {
    lam[i] = std::exp(llo + (lhi - llo) * i / double(np - 1));
    objs[i] = eval_at_lambda(lam[i]);
    if (sgn * objs[i].value > sgn * objs[best].value) best = i;
  }

  const bool lambda_boundary = (best == 0 || best == np - 1);

  double lo = std::log(lam[std::max(0, best - 1)]);
  double hi = std::log(lam[std::min(np - 1, best + 1)]);
  Objective best_obj = objs[best];
  double best_lam = lam[best];
  if (best > 0 && best < np - 1) {
    double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
    Objective o1 = eval_at_lambda(std::exp(x1));
    Objective o2 = eval_at_lambda(std::exp(x2));
    auto better = [&](const Objective& a, const Objective& b) {
      return sgn * a.value > sgn * b.value;
    };
    if (better(o1, best_obj)) {
      best_obj = o1;
      best_lam = std::exp(x1);
    }
    if (better(o2, best_obj)) {
      best_obj = o2;
      best_lam = std::exp(x2);
    }
    for (int it = 0; it < 60 && (hi - lo) > c.lambda_rel_tol; ++it) {
      if (sgn * o1.value < sgn * o2.value) {
        lo = x1;
        x1 = x2;
        o1 = o2;
        x2 = lo + kGolden * (hi - lo);
        o2 = eval_at_lambda(std::exp(x2));
        if (better(o2, best_obj)) {
          best_obj = o2;
          best_lam = std::exp(x2);
        }
      } else {
        hi = x2;
        x2 = x1;
        o2 = o1;
        x1 = hi - kGolden * (hi - lo);
        o1 = eval_at_lambda(std::exp(x1));
        if (better(o1, best_obj)) {
          best_obj = o1;
          best_lam = std::exp(x1);
        }
      }
    }
  }

  OptResult res;
  res.value = best_obj.value;
  res.lambda_opt = best_lam;
  res.t_opt = best_obj.t_opt;
  res.G = best_obj.run.G;
  res.G_sub = best_obj.run.G_sub;
  res.sigma_diss_sq = best_obj.run.sigma_diss_sq;
  res.xi_R_sq = best_obj.run.xi_R_sq;
  res.gmet = best_obj.run.gmet;
  res.flags = best_obj.flags;
  if (lambda_boundary) res.flags.push_back("lambda-on-grid-boundary");
  return res;
}

void linearity_flag_check(Scheme scheme, Engine engine, long N, double eta, double lambda,
                          double xi_det_sq, double t_or_window, ProtocolMode mode,
                          const OptControls& c, OptResult& res) {
  // rerun the optimum at phi and phi/2 through the halving guard
  ProtocolSpec spec;
  spec.scheme = scheme;
  spec.engine = engine;
  spec.N = N;
  spec.rates = wp_rates(scheme, c.chi, eta, lambda);
  spec.phi = c.phi;
  spec.mode = mode;
  spec.xi_det_sq = xi_det_sq;
  spec.samples_per_stage = c.samples_per_stage;
  spec.rtol = c.rtol;
  if (mode == ProtocolMode::AMPLIFY_ONLY)
    spec.t_amp_max = t_or_window;
  else
    spec.t_sqz = t_or_window;
  ProtocolResult chk = run_with_linearity_check(spec);
  for (const auto& f : chk.flags)
    if (f == "linearity-retry" || f == "linearity-check-failed") res.flags.push_back(f);
}

}  // namespace

OptResult maximize_gain(Scheme scheme, Engine engine, long N, double eta, const OptControls& c) {
  OptResult res = optimize_lambda(c, /*maximize=*/true, [&](double lambda) {
    return gain_at(scheme, engine, N, wp_rates(scheme, c.chi, eta, lambda), c);
  });
  if (c.linearity_check)
    linearity_flag_check(scheme, engine, N, eta, res.lambda_opt, 0.0,
                         std::max(res.t_opt * 1.5, 1e-6), ProtocolMode::AMPLIFY_ONLY, c, res);
  return res;
}

OptResult maximize_gain_twist_untwist(Scheme scheme, Engine engine, long N, double eta,
                                      const OptControls& c) {
  OptResult res = optimize_lambda(c, /*maximize=*/true, [&](double lambda) {
    return tu_at(scheme, engine, N, wp_rates(scheme, c.chi, eta, lambda), 0.0, c, TuKind::GAIN);
  });
  if (c.linearity_check)
    linearity_flag_check(scheme, engine, N, eta, res.lambda_opt, 0.0, res.t_opt,
                         ProtocolMode::TWIST_UNTWIST, c, res);
  return res;
}

OptResult maximize_gmet(Scheme scheme, Engine engine, long N, double eta, double xi_det_sq,
                        const OptControls& c) {
  OptResult res = optimize_lambda(c, /*maximize=*/true, [&](double lambda) {
    return tu_at(scheme, engine, N, wp_rates(scheme, c.chi, eta, lambda), xi_det_sq, c,
                 TuKind::GMET);
  });
  if (c.linearity_check)
    linearity_flag_check(scheme, engine, N, eta, res.lambda_opt, xi_det_sq, res.t_opt,
                         ProtocolMode::TWIST_UNTWIST, c, res);
  return res;
}

OptResult minimize_wineland(Scheme scheme, Engine engine, long N, double eta,
                            const OptControls& c) {
  OptResult res = optimize_lambda(c, /*maximize=*/false, [&](double lambda) {
    return wineland_at(scheme, engine, N, wp_rates(scheme, c.chi, eta, lambda), c);
  });
  res.xi_R_sq = res.value;
  return res;
}

OptResult ideal_gain_numeric(Engine engine, long N, const OptControls& c) {
  EffectiveRates rates;
  rates.chi = c.chi;
  Objective obj = gain_at(Scheme::SCF, engine, N, rates, c);
  OptResult res;
  res.value = obj.value;
  res.G = obj.run.G;
  res.G_sub = obj.run.G_sub;
  res.t_opt = obj.t_opt;
  res.flags = obj.flags;
  return res;
}

OptResult ideal_gain_twist_untwist_numeric(Engine engine, long N, const OptControls& c) {
  EffectiveRates rates;
  rates.chi = c.chi;
  Objective obj = tu_at(Scheme::SCF, engine, N, rates, 0.0, c, TuKind::GAIN);
  OptResult res;
  res.value = obj.value;
  res.G = obj.run.G;
  res.G_sub = obj.run.G_sub;
  res.sigma_diss_sq = obj.run.sigma_diss_sq;
  res.t_opt = obj.t_opt;
  res.flags = obj.flags;
  return res;
}

OptResult ideal_wineland_numeric(Engine engine, long N, const OptControls& c) {
  EffectiveRates rates;
  rates.chi = c.chi;
  Objective obj = wineland_at(Scheme::SCF, engine, N, rates, c);
  OptResult res;
  res.value = obj.value;
  res.xi_R_sq = obj.value;
  res.t_opt = obj.t_opt;
  res.flags = obj.flags;
  return res;
}

ThresholdFit threshold_exponent(const std::map<long, GainCurve>& curves, double f) {
  ThresholdFit out;
  std::vector<double> lnN, ln_eta;
  for (const auto& [N, curve] : curves) {
    // locate crossings of f on the (monotone-interpolated) curve
    int count = 0;
    double eta_cross = 0.0;
    for (std::size_t i = 1; i < curve.eta.size(); ++i) {
      const double a = curve.g_over_gmax[i - 1], b = curve.g_over_gmax[i];
      const bool rises_through = (a < f) && (b >= f);
      if (rises_through) {
        // log-log linear interpolation
        const double w = (f - a) / (b - a);
        const double le = std::log(curve.eta[i - 1]) +
                          w * (std::log(curve.eta[i]) - std::log(curve.eta[i - 1]));
        if (count == 0) eta_cross = std::exp(le);
        ++count;
      }
    }
    if (count != 1) {
      out.excluded.push_back("N=" + std::to_string(N) +
                             (count == 0 ? ": no crossing" : ": multiple crossings"));
      continue;
    }
    out.used_N.push_back(N);
    out.eta_thres.push_back(eta_cross);
    lnN.push_back(std::log(double(N)));
    ln_eta.push_back(std::log(eta_cross));
  }
  if (lnN.size() < 2) throw std::invalid_argument("threshold_exponent: fewer than two usable curves");
  out.fit = fit_line(lnN, ln_eta);
  out.alpha = -out.fit.params[1];
  out.alpha_stderr = out.fit.stderrs[1];
  return out;
}

FitResult fit_tanh_collapse(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 10) throw std::invalid_argument("fit_tanh_collapse: need at least 10 points");
  // deterministic initialization: a = 1, b from the f = 0.5 crossing of the
  // x-sorted data
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  double b0 = std::log10(x[order[order.size() / 2]]);
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double ya = y[order[k - 1]], yb = y[order[k]];
    if ((ya - 0.5) * (yb - 0.5) <= 0.0 && ya != yb) {
      const double w = (0.5 - ya) / (yb - ya);
      b0 = std::log10(x[order[k - 1]]) + w * (std::log10(x[order[k]]) - std::log10(x[order[k - 1]]));
      break;
    }
  }
  Eigen::VectorXd p0(2);
  p0 << 1.0, b0;
  auto model = [](double xv, const Eigen::VectorXd& p) {
    return 0.5 * (1.0 + std::tanh(p[0] * std::log10(xv) - p[1]));
  };
  FitResult res = fit_least_squares(model, x, y, p0);
  res.window_lo = x[order.front()];
  res.window_hi = x[order.back()];
  return res;
}

namespace analytic {

double ideal_gain(double N) {
  if (!(N >= 1)) throw std::invalid_argument("ideal_gain: N must be >= 1");
  return std::sqrt(N / std::exp(1.0));
}

double ideal_time(double chi, double N) {
  if (chi == 0.0 || !(N >= 1)) throw std::invalid_argument("ideal_time: bad arguments");
  return 1.0 / (std::abs(chi) * std::sqrt(N));
}

double gmet_ideal(double N, double xi_det_sq) {
  if (!(N >= 1) || xi_det_sq < 0.0) throw std::invalid_argument("gmet_ideal: bad arguments");
  return N / (std::exp(1.0) * (1.0 + xi_det_sq));
}

double gmet_est(double N_eta) {
  if (!(N_eta > 0.0)) throw std::invalid_argument("gmet_est: N*eta must be > 0");
  return std::sqrt(3.0 * N_eta / 32.0);
}

double davis_sigma_model(double N, double chi, double t, double kappa, double delta, double eta) {
  if (!(N >= 1) || !(kappa > 0.0) || !(delta > 0.0) || !(eta > 0.0) || !(t >= 0.0))
    throw std::invalid_argument("davis_sigma_model: bad arguments");
  const double achi = std::abs(chi);
  const double ideal_gain_sq = N / std::exp(1.0);
  const double dephasing = 2.0 * N * achi * t * kappa / delta / ideal_gain_sq;
  const double dsz_sc_sq = N * achi * t * (2.0 * delta / kappa + kappa / (2.0 * delta)) / (6.0 * eta);
  return dephasing + 2.0 * dsz_sc_sq / N;
}

SpinMoments short_time_solution(const EffectiveRates& rates, double chi,
                                const SpinMoments& initial, double t, double N) {
  if (rates.Gamma_rel != 0.0)
    throw std::invalid_argument("short_time_solution: requires Gamma_rel = 0");
  if (!(t >= 0.0)) throw std::invalid_argument("short_time_solution: t must be >= 0");
  const double gp = rates.gamma_plus, gm = rates.gamma_minus;
  const double deph = rates.Gamma_phi + gm + gp + 4.0 * rates.gamma_z;
  const double gz_tot = gp + gm;

  double sz, phase;
  if (gz_tot > 0.0) {
    const double sz_inf = (gp - gm) * N / (2.0 * gz_tot);
    const double decay = std::exp(-gz_tot * t);
    sz = sz_inf + (initial.sz - sz_inf) * decay;
    phase = 2.0 * chi * (sz_inf * t + (initial.sz - sz_inf) * (1.0 - decay) / gz_tot);
  } else {
    sz = initial.sz;
    phase = 2.0 * chi * initial.sz * t;
  }
  const double env = std::exp(-0.5 * deph * t);
  const double cg = std::cos(phase), sg = std::sin(phase);
  SpinMoments m;
  m.sx = env * (initial.sx * cg - initial.sy * sg);
  m.sy = env * (initial.sy * cg + initial.sx * sg);
  m.sz = sz;
  return m;
}

double approx_gain(double t, double eta, double N, double chi) {
  if (!(eta > 0.0) || !(N >= 1) || !(t >= 0.0))
    throw std::invalid_argument("approx_gain: bad arguments");
  const double x = 2.0 * std::abs(chi) * t / eta;
  return std::exp(-x) * (N * eta / 4.0) * (1.0 - std::exp(-x));
}

}  // namespace analytic
}  // namespace analysis
}  // namespace oat
