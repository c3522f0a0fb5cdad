#ifndef OAT_MFT_HPP
#define OAT_MFT_HPP

#include <vector>

#include "oat/moments.hpp"
#include "oat/ode.hpp"
#include "oat/rates.hpp"

namespace oat {

// Piecewise-constant signed OAT strength: chi_of(t) = value of the last
// segment whose start is <= t.  The twist-untwist protocol uses two segments
// {+chi on [0,ts), -chi on [ts, tend]}.
struct ChiSchedule {
  struct Segment {
    double t_start;
    double chi;
  };
  std::vector<Segment> segments;

  static ChiSchedule constant(double chi) { return {{{0.0, chi}}}; }
  static ChiSchedule twist_untwist(double chi, double t_switch) {
    return {{{0.0, chi}, {t_switch, -chi}}};
  }
  double chi_at(double t) const;
};

// Trajectory of the second-order cumulant equations; piecewise dense output.
class MftTrajectory {
 public:
  double t_end() const { return t_end_; }
  SpinMoments at(double t) const;
  std::vector<SpinMoments> sample(const std::vector<double>& ts) const;

 private:
  friend class MftEngine;
  std::vector<double> seg_start_;
  std::vector<DenseSolution> segs_;
  double t_end_ = 0.0;
};

// Second-order mean-field (cumulant) engine for the effective master
// equation: closed equations of motion for the nine moments.
class MftEngine {
 public:
  MftEngine(double N, EffectiveRates rates) : N_(N), rates_(rates) {}

  double N() const { return N_; }
  const EffectiveRates& rates() const { return rates_; }

  // d(moments)/dt for the given signed chi (the stored dissipative rates are
  // chi-sign independent).
  SpinMoments rhs(const SpinMoments& m, double chi_signed) const;

  MftTrajectory integrate(const SpinMoments& initial, const ChiSchedule& schedule, double t_end,
                          double rtol = 1e-8) const;

  // Variance diagnostics: most negative covariance eigenvalue along the
  // sampled trajectory, in units of N^2 (Gaussian-closure breakdown shows up
  // here; values are reported, never clipped).
  static double min_cov_eigenvalue(const SpinMoments& m);

 private:
  double N_;
  EffectiveRates rates_;
};

// packing order shared with the trajectory CSV: Sx,Sy,Sz,Cxx,Cxy,Cxz,Cyy,Cyz,Czz
Eigen::VectorXd pack_moments(const SpinMoments& m);
SpinMoments unpack_moments(const Eigen::VectorXd& y);

}  // namespace oat

#endif
