#include "oat/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oat {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// difference between the 5th- and 4th-order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
  const OdeRhs& rhs;
  OdeOptions opt;
  Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;

  Stepper(const OdeRhs& f, const OdeOptions& o, Eigen::Index n) : rhs(f), opt(o) {
    for (auto* v : {&k1, &k2, &k3, &k4, &k5, &k6, &k7, &ytmp, &ynew, &yerr}) v->resize(n);
  }

  double error_norm(const Eigen::VectorXd& y0, const Eigen::VectorXd& y1) const {
    const Eigen::Index n = y0.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double e = yerr[i] / sc;
      acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(n));
  }

  // one trial step from (t, y) with size h; k1 must hold f(t, y)
  void trial(double t, const Eigen::VectorXd& y, double h) {
    ytmp = y + h * (a21 * k1);
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, ynew, k7);
    yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  }

  double initial_step(double t0, double t1, const Eigen::VectorXd& y0) const {
    // crude but robust: scale of y over scale of f, capped by the interval
    const double span = t1 - t0;
    double ynorm = 0.0, fnorm = 0.0;
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y0[i]);
      ynorm = std::max(ynorm, std::abs(y0[i]) / sc);
      fnorm = std::max(fnorm, std::abs(k1[i]) / sc);
    }
    double h = (fnorm > 0.0) ? 0.01 * std::max(ynorm, 1.0) / fnorm : 0.1 * span;
    h = std::min(h, span);
    if (opt.h_max > 0.0) h = std::min(h, opt.h_max);
    return std::max(h, span * 1e-12);
  }
};

// Cubic Hermite interpolation between two nodes.
Eigen::VectorXd hermite(double t, double ta, const Eigen::VectorXd& ya, const Eigen::VectorXd& fa,
                        double tb, const Eigen::VectorXd& yb, const Eigen::VectorXd& fb) {
  const double h = tb - ta;
  if (h == 0.0) return ya;
  const double s = (t - ta) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * ya + (h10 * h) * fa + h01 * yb + (h11 * h) * fb;
}

// Core loop shared by the three front ends.  on_step is called after every
// accepted step with the bracketing nodes.
template <class OnStep>
void run(const OdeRhs& rhs, Eigen::VectorXd& y, double t0, double t1, const OdeOptions& opt,
         OnStep&& on_step) {
  if (!(t1 >= t0)) throw std::invalid_argument("integrate: t1 < t0");
  Stepper st(rhs, opt, y.size());
  double t = t0;
  rhs(t, y, st.k1);
  on_step(t, y, st.k1, t, y, st.k1);  // initial node
  if (t1 == t0) return;
  double h = st.initial_step(t0, t1, y);
  long steps = 0;
  Eigen::VectorXd yprev = y, fprev = st.k1;
  while (t < t1) {
    if (++steps > opt.max_steps) throw OdeError("integrate: step limit exceeded", t);
    bool clipped = false;
    if (t + h >= t1) {
      h = t1 - t;
      clipped = true;
    }
    // a clipped step may legitimately be a final sliver of a few ulp
    if (!clipped && !(h > std::abs(t) * 1e-15 + 1e-300))
      throw OdeError("integrate: step size underflow", t);
    st.trial(t, y, h);
    const double err = st.error_norm(y, st.ynew);
    if (err <= 1.0) {
      yprev.swap(y);
      fprev.swap(st.k1);
      const double tprev = t;
      t = clipped ? t1 : t + h;  // land exactly on the endpoint
      y = st.ynew;
      st.k1 = st.k7;  // FSAL
      on_step(tprev, yprev, fprev, t, y, st.k1);
      double fac = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
      fac = std::clamp(fac, 0.2, 5.0);
      h *= fac;
    } else {
      double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
      h *= fac;
      if (clipped) continue;
    }
    if (opt.h_max > 0.0) h = std::min(h, opt.h_max);
  }
}

}  // namespace

Eigen::VectorXd DenseSolution::eval(double t) const {
  if (ts_.size() == 1) return ys_.front();
  const double lo = ts_.front(), hi = ts_.back();
  if (t <= lo) return ys_.front();
  if (t >= hi) return ys_.back();
  auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - ts_.begin());
  return hermite(t, ts_[i - 1], ys_[i - 1], fs_[i - 1], ts_[i], ys_[i], fs_[i]);
}

namespace {

// interpolation quality between nodes is set by the step length, so the
// stored-trajectory modes cap it at a fraction of the span
OdeOptions capped_for_interp(OdeOptions opt, double t0, double t1) {
  const double cap = (t1 - t0) / 64.0;
  if (cap > 0.0 && (opt.h_max <= 0.0 || opt.h_max > cap)) opt.h_max = cap;
  return opt;
}

}  // namespace

DenseSolution integrate_dense(const OdeRhs& rhs, Eigen::VectorXd y0, double t0, double t1,
                              const OdeOptions& opt_in) {
  const OdeOptions opt = capped_for_interp(opt_in, t0, t1);
  DenseSolution sol;
  run(rhs, y0, t0, t1, opt,
      [&](double, const Eigen::VectorXd&, const Eigen::VectorXd&, double tb,
          const Eigen::VectorXd& yb, const Eigen::VectorXd& fb) {
        if (!sol.ts_.empty() && sol.ts_.back() == tb) return;
        sol.ts_.push_back(tb);
        sol.ys_.push_back(yb);
        sol.fs_.push_back(fb);
      });
  return sol;
}

Eigen::VectorXd integrate_to(const OdeRhs& rhs, Eigen::VectorXd y0, double t0, double t1,
                             const OdeOptions& opt) {
  run(rhs, y0, t0, t1, opt,
      [](double, const Eigen::VectorXd&, const Eigen::VectorXd&, double, const Eigen::VectorXd&,
         const Eigen::VectorXd&) {});
  return y0;
}

void integrate_sampled(const OdeRhs& rhs, Eigen::VectorXd y0, double t0, double t1,
                       std::span<const double> sample_ts,
                       const std::function<void(std::size_t, double, const Eigen::VectorXd&)>& on_sample,
                       const OdeOptions& opt_in) {
  const OdeOptions opt = capped_for_interp(opt_in, t0, t1);
  std::size_t next = 0;
  run(rhs, y0, t0, t1, opt,
      [&](double ta, const Eigen::VectorXd& ya, const Eigen::VectorXd& fa, double tb,
          const Eigen::VectorXd& yb, const Eigen::VectorXd& fb) {
        while (next < sample_ts.size() && sample_ts[next] <= tb) {
          const double ts = sample_ts[next];
          if (ts >= ta) {
            if (ta == tb)
              on_sample(next, ts, yb);
            else
              on_sample(next, ts, hermite(ts, ta, ya, fa, tb, yb, fb));
          }
          ++next;
        }
      });
}

}  // namespace oat
